//! Laurent expansions of ω in the neck coordinates v = 1/g_k near a_{k,i} and
//! w = 1/g_{k+1} near b_{k,i} (v·w = t²), and the t-dependent period
//! integrals assembled from their t = 0 coefficients.

use serde::{Deserialize, Serialize};

use super::chart::{two_pi_i, SphereChart};
use super::quadrature::{
    check_clearance, circle_integral, contour_integral, segment_integral, Circle, Contour, QuadOptions,
};
use crate::configspace::C64;
use crate::error::{Error, Result};

pub const DEFAULT_CUTOFF: usize = 40;
const SUP_SAMPLES: usize = 256;
const SHRINK: f64 = 0.9;
const MAX_SHRINK_STEPS: usize = 400;

/// Scale constants for the necks between sphere k and sphere k+1.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NeckConstants {
    pub epsilon: f64,
    /// 2 · sup |g| on the ε-circles, so |g| ≤ r/2 on Ω_ε.
    pub r: f64,
    /// |g| ≥ 2r on every D(node, 2ε').
    pub epsilon_prime: f64,
    /// 2 · sup |g| on the ε'-circles.
    pub r_prime: f64,
    pub rho: f64,
    /// Largest admissible t: min(ρ, 1/√(r r')).
    pub t_max: f64,
}

fn circle_extreme(g: impl Fn(C64) -> C64, center: C64, radius: f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for j in 0..SUP_SAMPLES {
        let e = C64::from_polar(radius, 2.0 * std::f64::consts::PI * j as f64 / SUP_SAMPLES as f64);
        let v = g(center + e).norm();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

fn sup_on_circles(chart: &SphereChart, radius: f64) -> f64 {
    let g = chart.g_form();
    chart
        .nodes()
        .iter()
        .map(|&n| circle_extreme(|z| g.eval(z), n, radius).1)
        .fold(0.0, f64::max)
}

/// Automated choice of ε, r, ε', r', ρ for the neck level between `lower`
/// (sphere k) and `upper` (sphere k+1).
pub fn select_constants(lower: &SphereChart, upper: &SphereChart) -> Result<NeckConstants> {
    let gap = lower.min_node_gap().min(upper.min_node_gap());
    if !gap.is_finite() {
        return Err(Error::ConstantSelection("spheres have a single node each".into()));
    }
    let epsilon = 0.5 * gap;
    let r = 2.0 * sup_on_circles(lower, epsilon).max(sup_on_circles(upper, epsilon));
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::ConstantSelection(format!("sup |g| on the ε-circles is {r}")));
    }
    let gl = lower.g_form();
    let gu = upper.g_form();
    let mut epsilon_prime = 0.5 * epsilon;
    let mut steps = 0;
    loop {
        let lo_a = lower
            .nodes_a
            .iter()
            .map(|&a| circle_extreme(|z| gl.eval(z), a, 2.0 * epsilon_prime).0)
            .fold(f64::INFINITY, f64::min);
        let lo_b = upper
            .nodes_b
            .iter()
            .map(|&b| circle_extreme(|z| gu.eval(z), b, 2.0 * epsilon_prime).0)
            .fold(f64::INFINITY, f64::min);
        if lo_a.min(lo_b) >= 2.0 * r {
            break;
        }
        epsilon_prime *= SHRINK;
        steps += 1;
        if steps > MAX_SHRINK_STEPS {
            return Err(Error::ConstantSelection(format!(
                "|g| ≥ 2r = {:e} not reached on D(node, 2ε') down to ε' = {epsilon_prime:e}",
                2.0 * r
            )));
        }
    }
    let r_prime = 2.0 * sup_on_circles(lower, epsilon_prime).max(sup_on_circles(upper, epsilon_prime));
    let rho = 1.0 / r;
    Ok(NeckConstants {
        epsilon,
        r,
        epsilon_prime,
        r_prime,
        rho,
        t_max: rho.min(1.0 / (r * r_prime).sqrt()),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LaurentBlock {
    pub level: i64,
    pub index: usize,
    pub gamma: C64,
    pub cutoff: usize,
    pub constants: NeckConstants,
    /// plus[n + 1] = c⁺_n for −1 ≤ n ≤ cutoff.
    pub plus: Vec<C64>,
    /// minus[m − 1] = c⁻_m for 1 ≤ m ≤ cutoff + 1; c⁻_1 = −γ.
    pub minus: Vec<C64>,
    /// v(a + ε') = 1/g_k(a + ε').
    pub phi: C64,
    /// w(b + ε') = 1/g_{k+1}(b + ε').
    pub psi: C64,
    /// a_{k,i} on sphere k and b_{k,i} on sphere k+1.
    pub node_a: C64,
    pub node_b: C64,
    /// Largest of the last two terms |c±_n| (r|φ|)^n, |c±_n| (r|ψ|)^n.
    pub tail: f64,
}

impl LaurentBlock {
    pub fn c_plus(&self, n: i64) -> C64 {
        self.plus[(n + 1) as usize]
    }

    pub fn c_minus(&self, m: usize) -> C64 {
        self.minus[m - 1]
    }

    pub fn r(&self) -> f64 {
        self.constants.r
    }

    /// ω/dv at t = 0 from the truncated series: −γ/v + Σ r^{n+1} c⁺_n vⁿ.
    pub fn omega_over_dv(&self, v: C64) -> C64 {
        let r = self.r();
        let mut acc = -self.gamma / v;
        let mut rv = C64::new(1.0, 0.0);
        for n in 0..=self.cutoff {
            acc += self.plus[n + 1] * r * rv;
            rv *= v * r;
        }
        acc
    }
}

fn node_circle(chart: &SphereChart, node: C64, radius: f64, f: impl Fn(C64) -> C64) -> Result<C64> {
    let circle = Circle::new(node, radius);
    let others: Vec<C64> = chart.nodes().into_iter().filter(|z| *z != node).collect();
    check_clearance(&Contour::Circle(circle), &others, 0.5 * radius)?;
    Ok(circle_integral(f, circle, QuadOptions::default())?.value)
}

/// Coefficients c⁺_n = (1/2πi)∮_{C(a,ε)} ω_k (g_k/r)^{n+1} and
/// c⁻_m = −(1/2πi)∮_{C(b,ε)} ω_{k+1} (g_{k+1}/r)^{m−1} for neck (k, i).
pub fn laurent(lower: &SphereChart, upper: &SphereChart, i: usize, cutoff: usize) -> Result<LaurentBlock> {
    if i >= lower.nodes_a.len() || i >= upper.nodes_b.len() {
        return Err(Error::InvalidInput(format!("no neck ({}, {i})", lower.level)));
    }
    let constants = select_constants(lower, upper)?;
    let r = constants.r;
    let eps = constants.epsilon;
    let a = lower.nodes_a[i];
    let b = upper.nodes_b[i];
    let gl = lower.g_form();
    let wl = lower.omega_form();
    let gu = upper.g_form();
    let wu = upper.omega_form();
    let tpi = two_pi_i();
    let mut plus = Vec::with_capacity(cutoff + 2);
    for n in -1..=cutoff as i32 {
        let v = node_circle(lower, a, eps, |z| wl.eval(z) * (gl.eval(z) / r).powi(n + 1))?;
        plus.push(v / tpi);
    }
    let mut minus = Vec::with_capacity(cutoff + 1);
    for m in 1..=(cutoff as i32 + 1) {
        let v = node_circle(upper, b, eps, |z| wu.eval(z) * (gu.eval(z) / r).powi(m - 1))?;
        minus.push(-v / tpi);
    }
    let shift = C64::new(constants.epsilon_prime, 0.0);
    let phi = 1.0 / gl.eval(a + shift);
    let psi = 1.0 / gu.eval(b + shift);
    let rphi = r * phi.norm();
    let rpsi = r * psi.norm();
    let tail = (cutoff.saturating_sub(1)..=cutoff)
        .map(|n| {
            let p = plus[n + 1].norm() * rphi.powi(n as i32);
            let q = minus[n].norm() * rpsi.powi(n as i32);
            p.max(q)
        })
        .fold(0.0, f64::max);
    Ok(LaurentBlock {
        level: lower.level,
        index: i,
        gamma: lower.gamma_a[i],
        cutoff,
        constants,
        plus,
        minus,
        phi,
        psi,
        node_a: a,
        node_b: b,
        tail,
    })
}

/// Largest |series − direct| of ω/dv over sample points z around a, with
/// |z − a| between ε'/2 and 2ε', relative to max(1, |ω/dv|).
pub fn reconstruction_error(lower: &SphereChart, block: &LaurentBlock, samples: usize) -> f64 {
    let g = lower.g_form();
    let w = lower.omega_form();
    let ep = block.constants.epsilon_prime;
    let mut worst: f64 = 0.0;
    for s in 0..samples {
        let frac = s as f64 / samples.max(1) as f64;
        let radius = ep * (0.5 + 1.5 * frac);
        let angle = 2.0 * std::f64::consts::PI * (0.37 + 7.0 * frac);
        let z = block.node_a + C64::from_polar(radius, angle);
        let gz = g.eval(z);
        let direct = -w.eval(z) * gz * gz / g.derivative(z);
        let series = block.omega_over_dv(1.0 / gz);
        worst = worst.max((series - direct).norm() / direct.norm().max(1.0));
    }
    worst
}

fn check_t(block: &LaurentBlock, t: f64) -> Result<()> {
    let max = block.constants.t_max;
    if !(t > 0.0 && t < max) {
        return Err(Error::TOutOfRange { t, max });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VerticalPeriod {
    pub t: f64,
    /// ∫_{a+ε'}^{b+ε'} ω through the neck.
    pub full: C64,
    /// full + 2γ log t.
    pub finite_part: C64,
}

/// The neck period from the series in v, using t = 0 coefficients. The branch
/// of log(φψ) is log φ + log ψ, so values are fixed modulo 2πiγ.
pub fn vertical_period(block: &LaurentBlock, t: f64) -> Result<VerticalPeriod> {
    check_t(block, t)?;
    let r = block.r();
    let t2 = t * t;
    let (phi, psi) = (block.phi, block.psi);
    let mut finite = block.gamma * (phi.ln() + psi.ln());
    for n in 0..=block.cutoff {
        let k = (n + 1) as i32;
        finite += block.plus[n + 1] / (n as f64 + 1.0) * ((r * t2 / psi).powi(k) - (r * phi).powi(k));
    }
    for m in 2..=block.cutoff + 1 {
        let k = (m - 1) as i32;
        finite += block.minus[m - 1] / (m as f64 - 1.0) * ((r * t2 / phi).powi(k) - (r * psi).powi(k));
    }
    let full = finite - block.gamma * t2.ln();
    Ok(VerticalPeriod {
        t,
        full,
        finite_part: finite,
    })
}

/// The t → 0 value of the finite part from the series.
pub fn finite_part_limit(block: &LaurentBlock) -> C64 {
    let r = block.r();
    let (phi, psi) = (block.phi, block.psi);
    let mut v = block.gamma * (phi.ln() + psi.ln());
    for n in 0..=block.cutoff {
        v -= block.plus[n + 1] / (n as f64 + 1.0) * (r * phi).powi(n as i32 + 1);
    }
    for m in 2..=block.cutoff + 1 {
        v -= block.minus[m - 1] / (m as f64 - 1.0) * (r * psi).powi(m as i32 - 1);
    }
    v
}

/// The same limit by quadrature of the regularised integrands:
/// γ(log φ + log ψ) + ∫_{a+ε'}^{a} (ω_k − γ g_k'/g_k) + ∫_{b}^{b+ε'} (ω_{k+1} + γ g_{k+1}'/g_{k+1}).
pub fn finite_part_quadrature(lower: &SphereChart, upper: &SphereChart, block: &LaurentBlock) -> Result<C64> {
    let shift = C64::new(block.constants.epsilon_prime, 0.0);
    let gamma = block.gamma;
    let (gl, wl) = (lower.g_form(), lower.omega_form());
    let (gu, wu) = (upper.g_form(), upper.omega_form());
    let opts = QuadOptions::default();
    let lo = segment_integral(
        |z| wl.eval(z) - gamma * gl.derivative(z) / gl.eval(z),
        block.node_a + shift,
        block.node_a,
        opts,
    )?;
    let hi = segment_integral(
        |z| wu.eval(z) + gamma * gu.derivative(z) / gu.eval(z),
        block.node_b,
        block.node_b + shift,
        opts,
    )?;
    Ok(gamma * (block.phi.ln() + block.psi.ln()) + lo.value + hi.value)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NeckIntegrals {
    /// ∫ v ω from a+ε' to b+ε'.
    pub v_omega: C64,
    /// ∫ w ω from a+ε' to b+ε'.
    pub w_omega: C64,
}

/// ∫vω and ∫wω through the neck, from the series with t = 0 coefficients.
pub fn neck_integrals(block: &LaurentBlock, t: f64) -> Result<NeckIntegrals> {
    check_t(block, t)?;
    let r = block.r();
    let t2 = t * t;
    let (phi, psi) = (block.phi, block.psi);
    let log_term = t2.ln() - (phi.ln() + psi.ln());

    let mut v = C64::new(0.0, 0.0);
    for n in -1..=block.cutoff as i64 {
        let k = (n + 2) as i32;
        v += block.c_plus(n) / (n as f64 + 2.0) * ((r * t2 / psi).powi(k) - (r * phi).powi(k)) / r;
    }
    v += block.c_minus(2) * r * t2 * log_term;
    for m in 3..=block.cutoff + 1 {
        let k = (m - 2) as i32;
        v += block.c_minus(m) / (m as f64 - 2.0) * r * t2 * ((r * t2 / phi).powi(k) - (r * psi).powi(k));
    }

    let mut w = C64::new(0.0, 0.0);
    for m in 1..=block.cutoff + 1 {
        let k = m as i32;
        w += block.c_minus(m) / m as f64 * ((r * t2 / phi).powi(k) - (r * psi).powi(k)) / r;
    }
    w += block.c_plus(0) * r * t2 * log_term;
    for n in 1..=block.cutoff as i64 {
        let k = n as i32;
        w += block.c_plus(n) / n as f64 * r * t2 * ((r * t2 / psi).powi(k) - (r * phi).powi(k));
    }
    Ok(NeckIntegrals { v_omega: v, w_omega: w })
}

/// t → 0 values of the neck integrals from the series.
pub fn neck_integral_limits(block: &LaurentBlock) -> NeckIntegrals {
    let r = block.r();
    let mut v = C64::new(0.0, 0.0);
    for n in -1..=block.cutoff as i64 {
        v -= block.c_plus(n) / (n as f64 + 2.0) * (r * block.phi).powi((n + 2) as i32) / r;
    }
    let mut w = C64::new(0.0, 0.0);
    for m in 1..=block.cutoff + 1 {
        w -= block.c_minus(m) / m as f64 * (r * block.psi).powi(m as i32) / r;
    }
    NeckIntegrals { v_omega: v, w_omega: w }
}

/// The limits by direct quadrature: ∫_{a+ε'}^{a} ω_k/g_k and ∫_{b}^{b+ε'} ω_{k+1}/g_{k+1}.
pub fn neck_integral_quadrature(
    lower: &SphereChart,
    upper: &SphereChart,
    block: &LaurentBlock,
) -> Result<NeckIntegrals> {
    let shift = C64::new(block.constants.epsilon_prime, 0.0);
    let (gl, wl) = (lower.g_form(), lower.omega_form());
    let (gu, wu) = (upper.g_form(), upper.omega_form());
    let opts = QuadOptions::default();
    let v = segment_integral(|z| wl.eval(z) / gl.eval(z), block.node_a + shift, block.node_a, opts)?;
    let w = segment_integral(|z| wu.eval(z) / gu.eval(z), block.node_b, block.node_b + shift, opts)?;
    Ok(NeckIntegrals {
        v_omega: v.value,
        w_omega: w.value,
    })
}

/// Straight path p → q, or a three-segment path offset sideways by ±`offset`
/// when the straight one passes within `clearance` of a pole.
pub fn detour(p: C64, q: C64, poles: &[C64], offset: f64, clearance: f64) -> Result<Contour> {
    let normal = (q - p) * C64::new(0.0, 1.0) / (q - p).norm().max(f64::MIN_POSITIVE);
    let mut candidates = vec![Contour::Polyline(vec![p, q])];
    for s in [1.0, -1.0] {
        let h = normal * (s * offset);
        candidates.push(Contour::Polyline(vec![p, p + h, q + h, q]));
    }
    let mut last = None;
    for c in candidates {
        match check_clearance(&c, poles, clearance) {
            Ok(()) => return Ok(c),
            Err(Error::SingularityProximity { at, .. }) => last = Some(at),
            Err(e) => return Err(e),
        }
    }
    Err(Error::PathCrossesPole(last.unwrap_or_default()))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BPeriod {
    pub full: C64,
    /// Re(full) − 2(γ_i − γ_1) log t.
    pub renormalized_real: f64,
}

/// Period over B_{k,i}: a_i+ε' → a_1+ε' on sphere k, through neck 1, b_1+ε' →
/// b_i+ε' on sphere k+1, back through neck i.
pub fn b_period(
    lower: &SphereChart,
    upper: &SphereChart,
    first: &LaurentBlock,
    other: &LaurentBlock,
    t: f64,
) -> Result<BPeriod> {
    let shift = C64::new(first.constants.epsilon_prime, 0.0);
    if (first.constants.epsilon_prime - other.constants.epsilon_prime).abs() > 0.0 {
        return Err(Error::InvalidInput("B-path necks use different ε'".into()));
    }
    let opts = QuadOptions::default();
    let seg = |chart: &SphereChart, p: C64, q: C64| -> Result<C64> {
        let path = detour(p, q, &chart.nodes(), first.constants.epsilon, 0.5 * first.constants.epsilon_prime)?;
        let w = chart.omega_form();
        Ok(contour_integral(|z| w.eval(z), &path, opts)?.value)
    };
    let s1 = seg(lower, other.node_a + shift, first.node_a + shift)?;
    let s3 = seg(upper, first.node_b + shift, other.node_b + shift)?;
    let full = s1 + vertical_period(first, t)?.full + s3 - vertical_period(other, t)?.full;
    let renormalized_real = full.re - 2.0 * (other.gamma - first.gamma).re * t.ln();
    Ok(BPeriod { full, renormalized_real })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::{builtin, Builtin};
    use crate::configspace::Configuration;
    use crate::periods::chart::ChartSet;

    fn riemann_charts() -> ChartSet {
        let cfg = Configuration::new(-3, (-3..=3).map(|k| vec![C64::new(k as f64, 0.0)]).collect()).unwrap();
        ChartSet::central(&cfg).unwrap()
    }

    #[test]
    fn constants_satisfy_bounds() {
        let cs = riemann_charts();
        let (lo, hi) = (cs.sphere(0).unwrap(), cs.sphere(1).unwrap());
        let k = select_constants(lo, hi).unwrap();
        assert!(k.epsilon_prime < k.epsilon);
        assert!(k.r_prime > k.r);
        assert!(k.t_max > 0.0 && k.t_max <= k.rho);
    }

    #[test]
    fn c_minus_one_is_minus_gamma() {
        let cs = riemann_charts();
        let b = laurent(cs.sphere(0).unwrap(), cs.sphere(1).unwrap(), 0, DEFAULT_CUTOFF).unwrap();
        assert!((b.c_plus(-1) + b.gamma).norm() < 1e-12);
        assert!((b.c_minus(1) + b.gamma).norm() < 1e-12);
    }

    #[test]
    fn series_reconstructs_omega() {
        let fc = builtin(&Builtin::Fan { n: 2 }).unwrap();
        let cs = ChartSet::central(fc.configuration()).unwrap();
        let (lo, hi) = (cs.sphere(1).unwrap(), cs.sphere(2).unwrap());
        for i in 0..2 {
            let b = laurent(lo, hi, i, DEFAULT_CUTOFF).unwrap();
            assert!(reconstruction_error(lo, &b, 20) < 1e-8);
            assert!(b.tail < 1e-8, "{}", b.tail);
        }
    }

    #[test]
    fn finite_part_limit_matches_quadrature() {
        let cs = riemann_charts();
        let (lo, hi) = (cs.sphere(0).unwrap(), cs.sphere(1).unwrap());
        let b = laurent(lo, hi, 0, DEFAULT_CUTOFF).unwrap();
        let series = finite_part_limit(&b);
        let quad = finite_part_quadrature(lo, hi, &b).unwrap();
        assert!((series - quad).norm() < 1e-8, "{series} {quad}");
        let vp = vertical_period(&b, 1e-5).unwrap();
        assert!((vp.full + 2.0 * 1e-5f64.ln() - vp.finite_part).norm() < 1e-12);
        assert!((vp.finite_part - series).norm() < 1e-6);
    }

    #[test]
    fn finite_part_drift_is_order_t_squared() {
        let cs = riemann_charts();
        let b = laurent(cs.sphere(0).unwrap(), cs.sphere(1).unwrap(), 0, DEFAULT_CUTOFF).unwrap();
        let lim = finite_part_limit(&b);
        let d3 = (vertical_period(&b, 1e-3).unwrap().finite_part - lim).norm();
        let d4 = (vertical_period(&b, 1e-4).unwrap().finite_part - lim).norm();
        assert!(d4 < d3 * 0.02);
    }

    #[test]
    fn t_guard() {
        let cs = riemann_charts();
        let b = laurent(cs.sphere(0).unwrap(), cs.sphere(1).unwrap(), 0, DEFAULT_CUTOFF).unwrap();
        assert!(matches!(vertical_period(&b, 1.0), Err(Error::TOutOfRange { .. })));
        assert!(neck_integrals(&b, 0.0).is_err());
    }

    #[test]
    fn neck_integral_limits_central() {
        let fc = builtin(&Builtin::Ladder22).unwrap();
        let cs = ChartSet::central(fc.configuration()).unwrap();
        let (lo, hi) = (cs.sphere(1).unwrap(), cs.sphere(2).unwrap());
        let b = laurent(lo, hi, 1, DEFAULT_CUTOFF).unwrap();
        let ep = b.constants.epsilon_prime;
        let lim = neck_integral_limits(&b);
        let quad = neck_integral_quadrature(lo, hi, &b).unwrap();
        assert!((lim.v_omega + ep).norm() < 1e-8, "{}", lim.v_omega);
        assert!((lim.w_omega - ep).norm() < 1e-8, "{}", lim.w_omega);
        assert!((quad.v_omega + ep).norm() < 1e-10);
        assert!((quad.w_omega - ep).norm() < 1e-10);
        let near = neck_integrals(&b, 1e-4).unwrap();
        let far = neck_integrals(&b, 1e-3).unwrap();
        assert!((near.v_omega - lim.v_omega).norm() < (far.v_omega - lim.v_omega).norm());
    }

    #[test]
    fn gamma_scaling_doubles_limit() {
        let cs = riemann_charts();
        let (lo, hi) = (cs.sphere(0).unwrap(), cs.sphere(1).unwrap());
        let two = C64::new(2.0, 0.0);
        let (lo2, hi2) = (lo.with_scaled_gamma(two), hi.with_scaled_gamma(two));
        let b1 = laurent(lo, hi, 0, DEFAULT_CUTOFF).unwrap();
        let b2 = laurent(&lo2, &hi2, 0, DEFAULT_CUTOFF).unwrap();
        let l1 = neck_integral_limits(&b1);
        let l2 = neck_integral_limits(&b2);
        assert!((l2.v_omega - 2.0 * l1.v_omega).norm() < 1e-10);
    }

    #[test]
    fn riemann_vertical_spacing() {
        let cs = riemann_charts();
        let b = laurent(cs.sphere(0).unwrap(), cs.sphere(1).unwrap(), 0, DEFAULT_CUTOFF).unwrap();
        let t = 1e-4;
        let vp = vertical_period(&b, t).unwrap();
        let o1 = (vp.full.re + 2.0 * t.ln()).abs();
        assert!(o1 < 10.0);
    }

    #[test]
    fn b_period_central_fan() {
        let fc = builtin(&Builtin::Fan { n: 2 }).unwrap();
        let cs = ChartSet::central(fc.configuration()).unwrap();
        let (lo, hi) = (cs.sphere(1).unwrap(), cs.sphere(2).unwrap());
        let b0 = laurent(lo, hi, 0, DEFAULT_CUTOFF).unwrap();
        let b1 = laurent(lo, hi, 1, DEFAULT_CUTOFF).unwrap();
        let p = b_period(lo, hi, &b0, &b1, 1e-4).unwrap();
        assert!(p.full.re.is_finite());
    }
}
