//! Contour quadrature: trapezoidal rule on circles, composite Gauss-Legendre
//! on straight segments, both with N versus 2N error control.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::configspace::C64;
use crate::error::{Error, Result};

pub const DEFAULT_NODES: usize = 256;
pub const MAX_NODES: usize = 4096;
pub const MIN_NODES: usize = 16;
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;
const GL_ORDER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: C64,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: C64, radius: f64) -> Self {
        Self { center, radius }
    }

    /// Distance from the circle to a point.
    pub fn clearance(&self, z: C64) -> f64 {
        ((z - self.center).norm() - self.radius).abs()
    }
}

/// A closed or open path made of oriented pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Contour {
    /// Counterclockwise circle.
    Circle(Circle),
    /// Clockwise circle.
    ReversedCircle(Circle),
    Polyline(Vec<C64>),
}

impl Contour {
    pub fn clearance(&self, z: C64) -> f64 {
        match self {
            Contour::Circle(c) | Contour::ReversedCircle(c) => c.clearance(z),
            Contour::Polyline(pts) => pts
                .windows(2)
                .map(|w| segment_distance(w[0], w[1], z))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// Distance from `z` to the segment [p, q].
pub fn segment_distance(p: C64, q: C64, z: C64) -> f64 {
    let d = q - p;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - p).norm();
    }
    let s = ((z - p) * d.conj()).re / len2;
    let s = s.clamp(0.0, 1.0);
    (z - (p + d * s)).norm()
}

/// Fails when the contour passes closer than `required` to any singularity.
pub fn check_clearance(contour: &Contour, singularities: &[C64], required: f64) -> Result<()> {
    for &s in singularities {
        let c = contour.clearance(s);
        if c < required {
            return Err(Error::SingularityProximity {
                at: format!("{s}"),
                clearance: c,
                required,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadOptions {
    pub nodes: usize,
    pub max_nodes: usize,
    pub tolerance: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            nodes: DEFAULT_NODES,
            max_nodes: MAX_NODES,
            tolerance: QUADRATURE_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: C64,
    pub nodes: usize,
    pub error_estimate: f64,
}

/// Plain trapezoidal rule with `n` equispaced nodes, counterclockwise.
pub fn trapezoid_circle(f: impl Fn(C64) -> C64, circle: Circle, n: usize) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        let e = C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
        acc += f(circle.center + e * circle.radius) * e;
    }
    acc * C64::new(0.0, 2.0 * PI * circle.radius / n as f64)
}

// Sum over the odd nodes of the 2n grid, scaled like trapezoid_circle(.., 2n).
fn odd_nodes(f: &impl Fn(C64) -> C64, circle: Circle, n: usize) -> C64 {
    let m = 2 * n;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        let e = C64::from_polar(1.0, 2.0 * PI * (2 * j + 1) as f64 / m as f64);
        acc += f(circle.center + e * circle.radius) * e;
    }
    acc * C64::new(0.0, 2.0 * PI * circle.radius / m as f64)
}

/// Adaptive trapezoidal rule: doubles N until |I_N - I_2N| is below tolerance.
pub fn circle_integral(f: impl Fn(C64) -> C64, circle: Circle, opts: QuadOptions) -> Result<QuadResult> {
    if opts.nodes < MIN_NODES {
        return Err(Error::InvalidInput(format!(
            "quadrature needs at least {MIN_NODES} nodes, got {}",
            opts.nodes
        )));
    }
    let mut n = opts.nodes;
    let mut coarse = trapezoid_circle(&f, circle, n);
    loop {
        let fine = coarse * 0.5 + odd_nodes(&f, circle, n);
        let diff = (fine - coarse).norm();
        if diff <= opts.tolerance * fine.norm().max(1.0) {
            return Ok(QuadResult {
                value: fine,
                nodes: 2 * n,
                error_estimate: diff,
            });
        }
        n *= 2;
        if n > opts.max_nodes {
            return Err(Error::QuadratureNonConvergence { nodes: n, difference: diff });
        }
        coarse = fine;
    }
}

fn gauss_legendre_16() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(NonZeroUsize::new(GL_ORDER).expect("nonzero order"))
            .as_node_weight_pairs()
            .to_vec()
    })
}

/// Composite 16-point Gauss-Legendre on [p, q] with `panels` equal panels.
pub fn segment_fixed(f: impl Fn(C64) -> C64, p: C64, q: C64, panels: usize) -> C64 {
    let rule = gauss_legendre_16();
    let h = (q - p) / panels as f64;
    let mut acc = C64::new(0.0, 0.0);
    for m in 0..panels {
        let mid = p + h * (m as f64 + 0.5);
        for &(x, w) in rule {
            acc += f(mid + h * (0.5 * x)) * w;
        }
    }
    acc * h * 0.5
}

/// Composite Gauss-Legendre with panel doubling until stable.
pub fn segment_integral(f: impl Fn(C64) -> C64, p: C64, q: C64, opts: QuadOptions) -> Result<QuadResult> {
    let max_panels = (opts.max_nodes / GL_ORDER).max(2);
    let mut panels = (opts.nodes / GL_ORDER).max(1);
    let mut coarse = segment_fixed(&f, p, q, panels);
    loop {
        let fine = segment_fixed(&f, p, q, 2 * panels);
        let diff = (fine - coarse).norm();
        if diff <= opts.tolerance * fine.norm().max(1.0) {
            return Ok(QuadResult {
                value: fine,
                nodes: 2 * panels * GL_ORDER,
                error_estimate: diff,
            });
        }
        panels *= 2;
        if 2 * panels > max_panels {
            return Err(Error::QuadratureNonConvergence {
                nodes: 2 * panels * GL_ORDER,
                difference: diff,
            });
        }
        coarse = fine;
    }
}

/// Integral along any contour piece.
pub fn contour_integral(f: impl Fn(C64) -> C64, contour: &Contour, opts: QuadOptions) -> Result<QuadResult> {
    match contour {
        Contour::Circle(c) => circle_integral(f, *c, opts),
        Contour::ReversedCircle(c) => {
            let r = circle_integral(f, *c, opts)?;
            Ok(QuadResult { value: -r.value, ..r })
        }
        Contour::Polyline(pts) => {
            let mut total = QuadResult {
                value: C64::new(0.0, 0.0),
                nodes: 0,
                error_estimate: 0.0,
            };
            for w in pts.windows(2) {
                let r = segment_integral(&f, w[0], w[1], opts)?;
                total.value += r.value;
                total.nodes += r.nodes;
                total.error_estimate += r.error_estimate;
            }
            Ok(total)
        }
    }
}

/// Mean of `f` over a circle, (1/2π)∫ f dθ; used to read off Laurent coefficients.
pub fn circle_mean(f: impl Fn(C64) -> C64, circle: Circle, n: usize) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        let e = C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
        acc += f(circle.center + e * circle.radius);
    }
    acc / n as f64
}
