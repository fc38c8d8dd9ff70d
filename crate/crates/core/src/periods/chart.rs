//! Per-sphere Weierstrass data at t = 0: nodes, weights, g_k and ω_k, plus the
//! limit identities built from them (balancing residues, horizontal limit,
//! A-periods).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::quadrature::{
    check_clearance, circle_integral, circle_mean, contour_integral, Circle, Contour, QuadOptions,
};
use super::rational::{residue_of_square, RationalForm};
use super::zeros::numerator_roots;
use crate::configspace::{forces, Configuration, C64};
use crate::error::{Error, Result};

/// Tolerance on Σα = Σβ = Σγ = 1 and on the compatibility relation.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;
/// Tolerance of the limit identities checked by `limit_balance` and `horizontal_limit`.
pub const LIMIT_TOLERANCE: f64 = 1e-10;

/// z ↦ (−1)^k conj^k(z). An involution for each k.
pub fn frame(k: i64, z: C64) -> C64 {
    if k.rem_euclid(2) == 0 {
        z
    } else {
        -z.conj()
    }
}

/// z ↦ conj^k(z).
pub fn conj_pow(k: i64, z: C64) -> C64 {
    if k.rem_euclid(2) == 0 {
        z
    } else {
        z.conj()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereChart {
    pub level: i64,
    /// a_{k,i}, from level k.
    pub nodes_a: Vec<C64>,
    /// b_{k−1,j}, from level k − 1.
    pub nodes_b: Vec<C64>,
    pub alpha: Vec<C64>,
    pub beta: Vec<C64>,
    /// γ_{k,i}, paired with nodes_a.
    pub gamma_a: Vec<C64>,
    /// γ_{k−1,j}, paired with nodes_b.
    pub gamma_b: Vec<C64>,
}

fn check_sum(level: i64, which: &'static str, w: &[C64]) -> Result<()> {
    if w.is_empty() {
        return Ok(());
    }
    let s: C64 = w.iter().sum();
    if (s - 1.0).norm() > WEIGHT_TOLERANCE {
        return Err(Error::Normalization {
            level,
            which,
            sum: format!("{s}"),
        });
    }
    Ok(())
}

impl SphereChart {
    /// Checks lengths, Σα = Σβ = 1 and node distinctness. γ is only checked
    /// for compatibility, in `omega0`.
    pub fn new(
        level: i64,
        nodes_a: Vec<C64>,
        nodes_b: Vec<C64>,
        alpha: Vec<C64>,
        beta: Vec<C64>,
        gamma_a: Vec<C64>,
        gamma_b: Vec<C64>,
    ) -> Result<Self> {
        if alpha.len() != nodes_a.len() || gamma_a.len() != nodes_a.len() {
            return Err(Error::InvalidInput("weights on a-nodes have the wrong length".into()));
        }
        if beta.len() != nodes_b.len() || gamma_b.len() != nodes_b.len() {
            return Err(Error::InvalidInput("weights on b-nodes have the wrong length".into()));
        }
        if nodes_a.is_empty() && nodes_b.is_empty() {
            return Err(Error::InvalidInput(format!("sphere {level} has no nodes")));
        }
        check_sum(level, "alpha", &alpha)?;
        check_sum(level, "beta", &beta)?;
        let chart = Self {
            level,
            nodes_a,
            nodes_b,
            alpha,
            beta,
            gamma_a,
            gamma_b,
        };
        let nodes = chart.nodes();
        let scale = nodes.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                let d = (nodes[i] - nodes[j]).norm();
                if d <= crate::configspace::DISTINCTNESS_TOLERANCE * scale {
                    return Err(Error::Degenerate {
                        first: (level, i),
                        second: (level, j),
                        distance: d,
                    });
                }
            }
        }
        Ok(chart)
    }

    /// Chart with all weights equal to 1/n on each side.
    pub fn central(level: i64, nodes_a: Vec<C64>, nodes_b: Vec<C64>) -> Result<Self> {
        let wa = vec![C64::new(1.0 / nodes_a.len().max(1) as f64, 0.0); nodes_a.len()];
        let wb = vec![C64::new(1.0 / nodes_b.len().max(1) as f64, 0.0); nodes_b.len()];
        Self::new(level, nodes_a, nodes_b, wa.clone(), wb.clone(), wa, wb)
    }

    /// True when one side of the sphere lies outside the window.
    pub fn is_partial(&self) -> bool {
        self.nodes_a.is_empty() || self.nodes_b.is_empty()
    }

    /// b-nodes followed by a-nodes.
    pub fn nodes(&self) -> Vec<C64> {
        self.nodes_b.iter().chain(&self.nodes_a).copied().collect()
    }

    /// Smallest distance between two nodes (infinite for a single node).
    pub fn min_node_gap(&self) -> f64 {
        let nodes = self.nodes();
        let mut gap = f64::INFINITY;
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                gap = gap.min((nodes[i] - nodes[j]).norm());
            }
        }
        gap
    }

    /// g_k = Σ β/(z − b) − Σ α/(z − a).
    pub fn g_form(&self) -> RationalForm {
        RationalForm {
            poles: self.nodes(),
            residues: self
                .beta
                .iter()
                .copied()
                .chain(self.alpha.iter().map(|a| -a))
                .collect(),
        }
    }

    pub fn g(&self, z: C64) -> C64 {
        self.g_form().eval(z)
    }

    /// ω_k / dz with no compatibility check.
    pub fn omega_form(&self) -> RationalForm {
        RationalForm {
            poles: self.nodes(),
            residues: self
                .gamma_b
                .iter()
                .copied()
                .chain(self.gamma_a.iter().map(|g| -g))
                .collect(),
        }
    }

    /// Σβb − Σαa, the coefficient of z^{−2} in g_k at infinity.
    pub fn leading_coefficient(&self) -> C64 {
        let sb: C64 = self.beta.iter().zip(&self.nodes_b).map(|(w, z)| w * z).sum();
        let sa: C64 = self.alpha.iter().zip(&self.nodes_a).map(|(w, z)| w * z).sum();
        sb - sa
    }

    /// Leading coefficient read off numerically as the mean of z²g on |z| = R.
    pub fn fitted_leading_coefficient(&self, radius: f64) -> C64 {
        let g = self.g_form();
        circle_mean(|z| z * z * g.eval(z), Circle::new(C64::new(0.0, 0.0), radius), 512)
    }

    /// Replace the b-nodes, keeping the weights.
    pub fn with_nodes_b(&self, nodes_b: Vec<C64>) -> Result<Self> {
        Self::new(
            self.level,
            self.nodes_a.clone(),
            nodes_b,
            self.alpha.clone(),
            self.beta.clone(),
            self.gamma_a.clone(),
            self.gamma_b.clone(),
        )
    }

    /// Multiply every γ by `s`.
    pub fn with_scaled_gamma(&self, s: C64) -> Self {
        let mut c = self.clone();
        c.gamma_a.iter_mut().for_each(|g| *g *= s);
        c.gamma_b.iter_mut().for_each(|g| *g *= s);
        c
    }
}

/// ω_k as a rational form. Requires both sides present and Σγ_{k−1} = Σγ_k, so
/// that the residue at infinity vanishes.
pub fn omega0(chart: &SphereChart) -> Result<RationalForm> {
    let lower: C64 = chart.gamma_b.iter().sum();
    let upper: C64 = chart.gamma_a.iter().sum();
    if chart.is_partial() || (lower - upper).norm() > WEIGHT_TOLERANCE * lower.norm().max(1.0) {
        return Err(Error::Compatibility {
            level: chart.level,
            lower: lower.norm(),
            upper: upper.norm(),
        });
    }
    Ok(chart.omega_form())
}

/// Charts of every sphere touched by a configuration window, at central
/// values. Sphere k carries a_{k,·} from level k and b_{k−1,·} from level k−1;
/// spheres `first` and `last + 1` are partial.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartSet {
    pub first: i64,
    pub charts: Vec<SphereChart>,
    /// Plane point mapped to 0 on each sphere: p_{k−1,1}, or p_{k,1} on the lowest sphere.
    pub references: Vec<C64>,
}

impl ChartSet {
    pub fn central(cfg: &Configuration) -> Result<Self> {
        let first = cfg.first_level();
        let last = cfg.last_level();
        let mut charts = Vec::new();
        let mut references = Vec::new();
        for k in first..=last + 1 {
            let reference = if k == first { cfg.point(first, 0) } else { cfg.point(k - 1, 0) };
            let a: Vec<C64> = cfg.level(k).iter().map(|&p| frame(k, p - reference)).collect();
            let b: Vec<C64> = cfg.level(k - 1).iter().map(|&p| frame(k, p - reference)).collect();
            charts.push(SphereChart::central(k, a, b)?);
            references.push(reference);
        }
        Ok(Self { first, charts, references })
    }

    pub fn last(&self) -> i64 {
        self.first + self.charts.len() as i64 - 1
    }

    pub fn sphere(&self, k: i64) -> Option<&SphereChart> {
        if k < self.first {
            return None;
        }
        self.charts.get((k - self.first) as usize)
    }

    fn sphere_or_err(&self, k: i64) -> Result<&SphereChart> {
        self.sphere(k)
            .ok_or_else(|| Error::InvalidInput(format!("sphere {k} outside the chart set")))
    }

    /// Chart coordinate on sphere k back to the configuration plane.
    pub fn to_plane(&self, k: i64, zeta: C64) -> Option<C64> {
        let idx = (k - self.first) as usize;
        self.references.get(idx).map(|r| r + frame(k, zeta))
    }

    /// Necks (k, i) whose two spheres k and k+1 both have nodes on both sides.
    pub fn interior_necks(&self) -> Vec<(i64, usize)> {
        let mut out = Vec::new();
        for k in self.first..self.last() {
            let (Some(lo), Some(hi)) = (self.sphere(k), self.sphere(k + 1)) else {
                continue;
            };
            if lo.is_partial() || hi.is_partial() {
                continue;
            }
            for i in 0..lo.nodes_a.len() {
                out.push((k, i));
            }
        }
        out
    }

    /// Spheres with nodes on both sides.
    pub fn complete_spheres(&self) -> impl Iterator<Item = &SphereChart> {
        self.charts.iter().filter(|c| !c.is_partial())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitBalanceReport {
    pub first: i64,
    /// boF_{k,i}(0) per level.
    pub bof: Vec<Vec<C64>>,
    /// boG_k(0), for levels with a lower neighbour.
    pub bog: Vec<Option<C64>>,
    /// max |boF − 4πi F| and |boG − 4πi G| relative to max(1, |4πi F|).
    pub max_deviation: f64,
    pub passes: bool,
}

impl LimitBalanceReport {
    pub fn bof(&self, k: i64, i: usize) -> C64 {
        self.bof[(k - self.first) as usize][i]
    }
}

/// boF_{k,i}(0) = conj^k(2πi Res_{a_{k,i}} g_k²) + conj^{k+1}(2πi Res_{b_{k,i}} g_{k+1}²),
/// compared with 4πi F_{k,i}; boG_k = −Σ_i boF⁻_{k,i} compared with 4πi G_k.
pub fn limit_balance(charts: &ChartSet, cfg: &Configuration) -> Result<LimitBalanceReport> {
    let two_pi_i = two_pi_i();
    let four_pi_i = C64::new(0.0, 4.0 * PI);
    let fs = forces(cfg);
    let mut bof = Vec::new();
    let mut bog = Vec::new();
    let mut dev: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for k in cfg.levels() {
        let lower = charts.sphere_or_err(k)?;
        let upper = charts.sphere_or_err(k + 1)?;
        let gl = lower.g_form();
        let gu = upper.g_form();
        let mut row = Vec::with_capacity(cfg.n(k));
        let mut minus_sum = C64::new(0.0, 0.0);
        for i in 0..cfg.n(k) {
            let minus = conj_pow(k, two_pi_i * residue_of_square(&gl, lower.nodes_a[i])?);
            let plus = conj_pow(k + 1, two_pi_i * residue_of_square(&gu, upper.nodes_b[i])?);
            minus_sum += minus;
            let total = minus + plus;
            let reference = four_pi_i * fs.force(k, i);
            scale = scale.max(reference.norm());
            dev = dev.max((total - reference).norm());
            row.push(total);
        }
        let g = if k > cfg.first_level() {
            let value = -minus_sum;
            if let Some(gk) = fs.g(k) {
                let reference = four_pi_i * gk;
                scale = scale.max(reference.norm());
                dev = dev.max((value - reference).norm());
            }
            Some(value)
        } else {
            None
        };
        bof.push(row);
        bog.push(g);
    }
    let max_deviation = dev / scale;
    Ok(LimitBalanceReport {
        first: cfg.first_level(),
        bof,
        bog,
        max_deviation,
        passes: max_deviation <= LIMIT_TOLERANCE,
    })
}

/// b_{k,i} = −conj(a_{k,i}) + conj(a_{k,1}): the nodes zeroing the horizontal limit.
pub fn horizontal_solution(lower: &SphereChart) -> Vec<C64> {
    let Some(&a1) = lower.nodes_a.first() else {
        return vec![];
    };
    lower.nodes_a.iter().map(|a| -a.conj() + a1.conj()).collect()
}

// ∫ from x to y of ω/g along x → x+ε' → y+ε' → y, refusing paths near zeros of g.
fn inverse_gauss_path_integral(chart: &SphereChart, x: C64, y: C64, eps_prime: f64) -> Result<C64> {
    let shift = C64::new(eps_prime, 0.0);
    let path = Contour::Polyline(vec![x, x + shift, y + shift, y]);
    let zeros = numerator_roots(chart)?;
    if let Err(Error::SingularityProximity { at, .. }) = check_clearance(&path, &zeros, 0.5 * eps_prime) {
        return Err(Error::PathCrossesPole(at));
    }
    let g = chart.g_form();
    let w = chart.omega_form();
    let r = contour_integral(|z| w.eval(z) / g.eval(z), &path, QuadOptions::default())?;
    Ok(r.value)
}

/// H_{k,i}(0) = ∫_{b_{k,1}}^{b_{k,i}} ω_{k+1}/g_{k+1} − conj(∫_{a_{k,i}}^{a_{k,1}} ω_k/g_k), i ≥ 2.
/// `lower` is sphere k, `upper` sphere k+1. Entry 0 of the result is i = 2.
pub fn horizontal_limit(lower: &SphereChart, upper: &SphereChart, eps_prime: f64) -> Result<Vec<C64>> {
    let n = lower.nodes_a.len();
    if upper.nodes_b.len() != n {
        return Err(Error::InvalidInput(format!(
            "sphere {} has {} a-nodes but sphere {} has {} b-nodes",
            lower.level,
            n,
            upper.level,
            upper.nodes_b.len()
        )));
    }
    let mut out = Vec::new();
    for i in 1..n {
        let up = inverse_gauss_path_integral(upper, upper.nodes_b[0], upper.nodes_b[i], eps_prime)?;
        let down = inverse_gauss_path_integral(lower, lower.nodes_a[i], lower.nodes_a[0], eps_prime)?;
        out.push(up - down.conj());
    }
    Ok(out)
}

/// Radius used for A-cycle circles: half the smallest node gap, capped at 1.
pub fn a_cycle_radius(chart: &SphereChart) -> f64 {
    (0.5 * chart.min_node_gap()).min(1.0)
}

/// ∮ f dz over C(node, ε) with the clearance check against the other nodes.
pub fn node_circle_integral(
    chart: &SphereChart,
    node: C64,
    f: impl Fn(C64) -> C64,
    radius: f64,
) -> Result<C64> {
    let circle = Circle::new(node, radius);
    let others: Vec<C64> = chart
        .nodes()
        .into_iter()
        .filter(|z| (*z - node).norm() > 0.0)
        .collect();
    check_clearance(&Contour::Circle(circle), &others, 0.5 * radius)?;
    Ok(circle_integral(f, circle, QuadOptions::default())?.value)
}

/// A_{k,i}-period of ω read on sphere k+1: ∮_{C(b_{k,i}, ε)} ω_{k+1}.
pub fn a_period_upper(upper: &SphereChart, i: usize) -> Result<C64> {
    let w = upper.omega_form();
    node_circle_integral(upper, upper.nodes_b[i], |z| w.eval(z), a_cycle_radius(upper))
}

/// The same period read on sphere k, as −∮_{C(a_{k,i}, ε)} ω_k.
pub fn a_period_lower(lower: &SphereChart, i: usize) -> Result<C64> {
    let w = lower.omega_form();
    Ok(-node_circle_integral(lower, lower.nodes_a[i], |z| w.eval(z), a_cycle_radius(lower))?)
}

/// Σ_i ∮_{A_{k,i}} g_k ω_k − Σ_j ∮_{A_{k−1,j}} g_k ω_k on sphere k (t factor dropped).
/// Vanishes because g_k ω_k has no residue at infinity.
pub fn a_cycle_telescoping(chart: &SphereChart) -> Result<C64> {
    let g = chart.g_form();
    let w = chart.omega_form();
    let f = |z: C64| g.eval(z) * w.eval(z);
    let eps = a_cycle_radius(chart);
    let mut total = C64::new(0.0, 0.0);
    for &a in &chart.nodes_a {
        total -= node_circle_integral(chart, a, f, eps)?;
    }
    for &b in &chart.nodes_b {
        total -= node_circle_integral(chart, b, f, eps)?;
    }
    Ok(total)
}

/// 2πi Res_{node} g² computed both exactly and by quadrature.
pub fn square_residue_check(chart: &SphereChart, node: C64) -> Result<(C64, C64)> {
    let g = chart.g_form();
    let exact = two_pi_i() * residue_of_square(&g, node)?;
    let numeric = node_circle_integral(chart, node, |z| g.eval(z).powi(2), a_cycle_radius(chart))?;
    Ok((exact, numeric))
}

pub fn two_pi_i() -> C64 {
    C64::new(0.0, 2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::{builtin, Builtin};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn riemann(a: f64, lo: i64, hi: i64) -> Configuration {
        Configuration::new(lo, (lo..=hi).map(|k| vec![c(k as f64 * a, 0.0)]).collect()).unwrap()
    }

    #[test]
    fn frame_is_involution() {
        let z = c(0.3, -1.2);
        for k in -3..4 {
            assert_eq!(frame(k, frame(k, z)), z);
        }
    }

    #[test]
    fn riemann_omega_is_difference_of_logs() {
        let cs = ChartSet::central(&riemann(1.0, -3, 3)).unwrap();
        let ch = cs.sphere(1).unwrap();
        let w = omega0(ch).unwrap();
        let z = c(0.4, 0.7);
        let expect = 1.0 / (z - ch.nodes_b[0]) - 1.0 / (z - ch.nodes_a[0]);
        assert!((w.eval(z) - expect).norm() < 1e-15);
        assert!(w.total_residue().norm() < 1e-15);
        assert!((w.eval(z) - ch.g(z)).norm() < 1e-15);
    }

    #[test]
    fn compatibility_violation() {
        let ch = SphereChart::new(
            1,
            vec![c(1.0, 0.0)],
            vec![c(0.0, 0.0)],
            vec![c(1.0, 0.0)],
            vec![c(1.0, 0.0)],
            vec![c(1.0, 0.0)],
            vec![c(0.5, 0.0)],
        )
        .unwrap();
        assert!(matches!(omega0(&ch), Err(Error::Compatibility { .. })));
    }

    #[test]
    fn normalisation_enforced() {
        let r = SphereChart::new(
            0,
            vec![c(1.0, 0.0)],
            vec![],
            vec![c(0.9, 0.0)],
            vec![],
            vec![c(1.0, 0.0)],
            vec![],
        );
        assert!(matches!(r, Err(Error::Normalization { .. })));
    }

    #[test]
    fn riemann_limit_balance() {
        let cfg = riemann(1.0, -3, 3);
        let cs = ChartSet::central(&cfg).unwrap();
        let rep = limit_balance(&cs, &cfg).unwrap();
        assert!(rep.passes, "{}", rep.max_deviation);
        for k in -2..=2 {
            assert!(rep.bof(k, 0).norm() < 1e-12);
            assert!((rep.bog[(k + 3) as usize].unwrap() - c(0.0, 4.0 * PI)).norm() < 1e-12);
        }
    }

    #[test]
    fn fan_limit_balance() {
        let fc = builtin(&Builtin::Fan { n: 2 }).unwrap();
        let cfg = fc.configuration();
        let cs = ChartSet::central(cfg).unwrap();
        let rep = limit_balance(&cs, cfg).unwrap();
        assert!(rep.passes);
        assert!(rep.bof(1, 0).norm() < 1e-10 && rep.bof(1, 1).norm() < 1e-10);
    }

    #[test]
    fn square_residue_matches_force_formula() {
        let fc = builtin(&Builtin::Ladder22).unwrap();
        let cs = ChartSet::central(fc.configuration()).unwrap();
        let ch = cs.sphere(2).unwrap();
        let ck = 0.5;
        let ckm = 0.5;
        for (i, &a) in ch.nodes_a.iter().enumerate() {
            let mut expect = C64::new(0.0, 0.0);
            for (j, &aj) in ch.nodes_a.iter().enumerate() {
                if j != i {
                    expect += 2.0 * ck * ck / (a - aj);
                }
            }
            for &b in &ch.nodes_b {
                expect -= 2.0 * ck * ckm / (a - b);
            }
            let r = residue_of_square(&ch.g_form(), a).unwrap();
            assert!((r - expect).norm() < 1e-14);
            let (exact, numeric) = square_residue_check(ch, a).unwrap();
            assert!((exact - numeric).norm() < 1e-10);
        }
    }

    #[test]
    fn horizontal_limit_vanishes_and_is_linear() {
        let fc = builtin(&Builtin::Fan { n: 3 }).unwrap();
        let cs = ChartSet::central(fc.configuration()).unwrap();
        let lo = cs.sphere(1).unwrap();
        let hi = cs.sphere(2).unwrap();
        let b = horizontal_solution(lo);
        for (x, y) in b.iter().zip(&hi.nodes_b) {
            assert!((x - y).norm() < 1e-14);
        }
        let hi = hi.with_nodes_b(b.clone()).unwrap();
        let h = horizontal_limit(lo, &hi, 0.05).unwrap();
        assert_eq!(h.len(), 2);
        assert!(h.iter().all(|v| v.norm() < 1e-10));
        let delta = c(1e-3, -2e-3);
        let mut moved = b;
        moved[2] += delta;
        let hi2 = hi.with_nodes_b(moved).unwrap();
        let h2 = horizontal_limit(lo, &hi2, 0.05).unwrap();
        assert!((h2[1] - h[1] - delta).norm() < 1e-10);
        assert!((h2[0] - h[0]).norm() < 1e-10);
    }

    #[test]
    fn single_neck_levels_have_no_horizontal_equations() {
        let cs = ChartSet::central(&riemann(1.0, 0, 2)).unwrap();
        let h = horizontal_limit(cs.sphere(1).unwrap(), cs.sphere(2).unwrap(), 0.1).unwrap();
        assert!(h.is_empty());
    }

    #[test]
    fn a_periods_and_orientation() {
        let fc = builtin(&Builtin::Fan { n: 2 }).unwrap();
        let cs = ChartSet::central(fc.configuration()).unwrap();
        let lo = cs.sphere(1).unwrap();
        let hi = cs.sphere(2).unwrap();
        for i in 0..2 {
            let up = a_period_upper(hi, i).unwrap();
            let down = a_period_lower(lo, i).unwrap();
            let expect = two_pi_i() * lo.gamma_a[i];
            assert!((up - expect).norm() < 1e-10);
            assert!((up - down).norm() < 1e-10);
        }
    }

    #[test]
    fn telescoping_at_contour_level() {
        let fc = builtin(&Builtin::Ladder22).unwrap();
        let cs = ChartSet::central(fc.configuration()).unwrap();
        for ch in cs.complete_spheres() {
            assert!(a_cycle_telescoping(ch).unwrap().norm() < 1e-10);
        }
    }

    #[test]
    fn fitted_leading_coefficient() {
        let fc = builtin(&Builtin::Fan { n: 3 }).unwrap();
        let cs = ChartSet::central(fc.configuration()).unwrap();
        for ch in cs.complete_spheres() {
            let exact = ch.leading_coefficient();
            let fit = ch.fitted_leading_coefficient(1e4);
            assert!((exact - fit).norm() < 1e-8, "{exact} {fit}");
            assert!(exact.norm() > 1e-6);
        }
    }

    #[test]
    fn interior_necks_of_fan() {
        let fc = builtin(&Builtin::Fan { n: 2 }).unwrap();
        let cs = ChartSet::central(fc.configuration()).unwrap();
        assert_eq!(cs.interior_necks(), vec![(1, 0), (1, 1)]);
    }
}
