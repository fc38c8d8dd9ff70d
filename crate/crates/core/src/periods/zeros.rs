//! Zero accounting for g_k = P_k/Q_k: polynomial assembly, root finding,
//! argument-principle counts, and the alignment moments Z_{k,i}.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::chart::{a_cycle_radius, two_pi_i, SphereChart};
use super::quadrature::{circle_integral, Circle, QuadOptions};
use crate::configspace::C64;
use crate::error::{Error, Result};

/// Pass threshold for |Z_{k,i}| at central weights.
pub const ALIGNMENT_TOLERANCE: f64 = 1e-9;
/// Node-disk radii below this make the contour unusable.
pub const MIN_CONTOUR_RADIUS: f64 = 1e-8;
const TRIM_TOLERANCE: f64 = 1e-12;

/// Coefficients in ascending powers.
pub type Poly = Vec<C64>;

pub fn poly_eval(p: &[C64], z: C64) -> C64 {
    p.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

pub fn poly_derivative(p: &[C64]) -> Poly {
    p.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect()
}

pub fn poly_from_roots(roots: &[C64]) -> Poly {
    let mut p = vec![C64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![C64::new(0.0, 0.0); p.len() + 1];
        for (k, &c) in p.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * r;
        }
        p = next;
    }
    p
}

pub fn poly_mul(p: &[C64], q: &[C64]) -> Poly {
    if p.is_empty() || q.is_empty() {
        return vec![];
    }
    let mut out = vec![C64::new(0.0, 0.0); p.len() + q.len() - 1];
    for (i, &a) in p.iter().enumerate() {
        for (j, &b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

pub fn poly_add(p: &[C64], q: &[C64]) -> Poly {
    let n = p.len().max(q.len());
    (0..n)
        .map(|k| p.get(k).copied().unwrap_or_default() + q.get(k).copied().unwrap_or_default())
        .collect()
}

/// Drop leading coefficients below `tol` times the largest coefficient.
pub fn trim(mut p: Poly, tol: f64) -> Poly {
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    while let Some(c) = p.last() {
        if c.norm() <= tol * scale {
            p.pop();
        } else {
            break;
        }
    }
    p
}

pub fn degree(p: &[C64]) -> Option<usize> {
    if p.is_empty() {
        None
    } else {
        Some(p.len() - 1)
    }
}

/// Quotient and remainder of p / d. `d` must have a nonzero leading coefficient.
pub fn poly_divrem(p: &[C64], d: &[C64]) -> (Poly, Poly) {
    let dd = d.len() - 1;
    let lead = d[dd];
    let mut r = p.to_vec();
    if p.len() <= dd {
        return (vec![], r);
    }
    let mut q = vec![C64::new(0.0, 0.0); p.len() - dd];
    for m in (0..q.len()).rev() {
        let coef = r[m + dd] / lead;
        q[m] = coef;
        for j in 0..=dd {
            r[m + j] -= coef * d[j];
        }
    }
    r.truncate(dd);
    (q, r)
}

/// Coefficient of z^{−1} in the expansion at infinity of num/den; equals
/// −Res_∞(num/den dz), so ∮_{|z|=R} num/den dz = 2πi times it for large R.
pub fn coefficient_at_infinity(num: &[C64], den: &[C64]) -> C64 {
    let (Some(e), Some(d)) = (degree(num), degree(den)) else {
        return C64::new(0.0, 0.0);
    };
    if e + 1 < d {
        return C64::new(0.0, 0.0);
    }
    let target = e + 1 - d;
    let mut q = Vec::with_capacity(target + 1);
    for m in 0..=target {
        let mut acc = if m <= e { num[e - m] } else { C64::new(0.0, 0.0) };
        for j in 1..=m.min(d) {
            acc -= den[d - j] * q[m - j];
        }
        q.push(acc / den[d]);
    }
    q[target]
}

/// Roots from the companion matrix, polished by a few Newton steps.
pub fn poly_roots(p: &[C64]) -> Result<Vec<C64>> {
    let Some(d) = degree(p) else {
        return Ok(vec![]);
    };
    if d == 0 {
        return Ok(vec![]);
    }
    let lead = p[d];
    let mut m = DMatrix::<C64>::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..d {
        m[(i, d - 1)] = -p[i] / lead;
    }
    let eig = m
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::ContourSelection("companion eigenvalues failed".into()))?;
    let dp = poly_derivative(p);
    Ok(eig
        .iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..4 {
                let fp = poly_eval(&dp, z);
                if fp.norm() == 0.0 {
                    break;
                }
                let step = poly_eval(p, z) / fp;
                if !step.re.is_finite() || !step.im.is_finite() {
                    break;
                }
                z -= step;
            }
            z
        })
        .collect())
}

/// Numerator P_k of g_k = P_k/Q_k with Q_k = Π(z − a)Π(z − b), leading zeros trimmed.
pub fn numerator(chart: &SphereChart) -> Poly {
    let nodes = chart.nodes();
    let weights: Vec<C64> = chart
        .beta
        .iter()
        .copied()
        .chain(chart.alpha.iter().map(|a| -a))
        .collect();
    let mut p: Poly = vec![];
    for (j, &w) in weights.iter().enumerate() {
        let others: Vec<C64> = nodes
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, &z)| z)
            .collect();
        let term: Poly = poly_from_roots(&others).into_iter().map(|c| c * w).collect();
        p = poly_add(&p, &term);
    }
    trim(p, TRIM_TOLERANCE)
}

pub fn denominator(chart: &SphereChart) -> Poly {
    poly_from_roots(&chart.nodes())
}

/// Finite zeros of g_k.
pub fn numerator_roots(chart: &SphereChart) -> Result<Vec<C64>> {
    poly_roots(&numerator(chart))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AlignmentContour {
    /// Radius of the outer circle.
    pub radius: f64,
    /// Radius of the disks removed around each node.
    pub node_radius: f64,
}

/// Outer circle well outside every zero and node; node disks small enough to
/// keep every zero of P_k at distance at least half their radius.
pub fn select_contour(chart: &SphereChart, roots: &[C64]) -> Result<AlignmentContour> {
    let nodes = chart.nodes();
    let reach = roots
        .iter()
        .chain(&nodes)
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let mut node_radius = a_cycle_radius(chart);
    for r in roots {
        for n in &nodes {
            node_radius = node_radius.min(0.5 * (r - n).norm());
        }
    }
    if node_radius.is_nan() || node_radius < MIN_CONTOUR_RADIUS {
        return Err(Error::ContourSelection(format!(
            "a zero of P_{} lies within {node_radius:e} of a node",
            chart.level
        )));
    }
    Ok(AlignmentContour {
        radius: 2.0 * reach + 1.0,
        node_radius,
    })
}

/// ∮_{∂U} f dz: outer circle counterclockwise, node circles clockwise.
pub fn boundary_integral(
    chart: &SphereChart,
    contour: AlignmentContour,
    f: impl Fn(C64) -> C64,
) -> Result<C64> {
    let opts = QuadOptions::default();
    let mut total = circle_integral(&f, Circle::new(C64::new(0.0, 0.0), contour.radius), opts)?.value;
    for n in chart.nodes() {
        total -= circle_integral(&f, Circle::new(n, contour.node_radius), opts)?.value;
    }
    Ok(total)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZeroReport {
    pub level: i64,
    pub degree: usize,
    pub expected_count: usize,
    pub roots: Vec<C64>,
    /// (1/2πi)∮_{∂U} g'/g dz, before rounding.
    pub raw_count: C64,
    pub zero_count: i64,
    /// Z_{k,i} = ∮_{∂U} z^i ω/P_k, 0 ≤ i < deg P_k.
    pub z_values: Vec<C64>,
    pub max_z: f64,
    pub contour: AlignmentContour,
    /// Zero count matches n_k + n_{k−1} − 2 and every |Z| ≤ tolerance.
    pub passes: bool,
}

pub fn zero_alignment(chart: &SphereChart) -> Result<ZeroReport> {
    if chart.is_partial() {
        return Err(Error::InvalidInput(format!(
            "sphere {} is partial; zero counts need both node sets",
            chart.level
        )));
    }
    let p = numerator(chart);
    let roots = poly_roots(&p)?;
    let contour = select_contour(chart, &roots)?;
    let g = chart.g_form();
    let raw = boundary_integral(chart, contour, |z| g.derivative(z) / g.eval(z))? / two_pi_i();
    let zero_count = raw.re.round() as i64;
    let deg = degree(&p).unwrap_or(0);
    let w = chart.omega_form();
    let mut z_values = Vec::with_capacity(deg);
    for i in 0..deg {
        let zi = boundary_integral(chart, contour, |z| z.powi(i as i32) * w.eval(z) / poly_eval(&p, z))?;
        z_values.push(zi);
    }
    let max_z = z_values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let expected_count = chart.nodes_a.len() + chart.nodes_b.len() - 2;
    let passes = zero_count == expected_count as i64
        && (raw.re - raw.re.round()).abs() < 1e-6
        && max_z <= ALIGNMENT_TOLERANCE;
    Ok(ZeroReport {
        level: chart.level,
        degree: deg,
        expected_count,
        roots,
        raw_count: raw,
        zero_count,
        z_values,
        max_z,
        contour,
        passes,
    })
}

/// Moments ∮_{|z|=R} z^i f/P dz for 0 ≤ i < deg P by quadrature, paired with
/// the exact value 2πi·[z^{−1}](z^i r/P) where r = f mod P. All vanish iff P | f.
pub fn division_moments(f: &[C64], p: &[C64]) -> Result<Vec<(C64, C64)>> {
    let p = trim(p.to_vec(), TRIM_TOLERANCE);
    let d = degree(&p).ok_or_else(|| Error::InvalidInput("zero divisor".into()))?;
    let roots = poly_roots(&p)?;
    let radius = 2.0 * roots.iter().map(|z| z.norm()).fold(0.0, f64::max) + 1.0;
    let (_, rem) = poly_divrem(f, &p);
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let numeric = circle_integral(
            |z| z.powi(i as i32) * poly_eval(f, z) / poly_eval(&p, z),
            Circle::new(C64::new(0.0, 0.0), radius),
            QuadOptions::default(),
        )?
        .value;
        let mut shifted = vec![C64::new(0.0, 0.0); i];
        shifted.extend_from_slice(&rem);
        let exact = two_pi_i() * coefficient_at_infinity(&trim(shifted, 0.0), &p);
        out.push((numeric, exact));
    }
    Ok(out)
}
