//! First-order neck patches: catenoid-like tubes joining the hole around
//! a_{k,i} on sheet k to the hole around b_{k,i} on sheet k+1.
//!
//! In the scaled frame the tube is ρ(s) = w cosh(U(2s − 1)), s ∈ [0, 1], with
//! height interpolating linearly between the two boundary rings. For flat
//! rings at heights z_lo, z_hi this is exactly x3 = z_w + c·arcosh(ρ/w) with
//! w = ε / cosh(Δ/(2c)), Δ = z_hi − z_lo, z_w the midpoint, and U = Δ/(2c).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::sheet::SheetModel;
use crate::configspace::C64;
use crate::error::{Error, Result};
use crate::periods::chart::SphereChart;

pub const DEFAULT_ROWS: usize = 16;
pub const GLUING_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeckModel {
    pub level: i64,
    pub index: usize,
    /// Horizontal axis position X = conj(p_{k,i}).
    pub center: C64,
    /// Log-growth c_k.
    pub c: f64,
    pub epsilon: f64,
    /// Sheet-k heights on the lower ring and sheet-(k+1) heights on the upper ring.
    pub lower_ring: Vec<f64>,
    pub upper_ring: Vec<f64>,
    pub z_lower: f64,
    pub z_upper: f64,
    /// Waist radius w.
    pub waist: f64,
    /// Height of the waist.
    pub waist_height: f64,
    /// U = arcosh(ε/w).
    pub half_length: f64,
    /// Interior rows between the two rings.
    pub rows: usize,
    /// Upper ring below the lower one: the tube degenerates to a cylinder.
    pub inverted: bool,
    /// Largest |tube boundary height − sheet height| over both rings.
    pub mismatch: f64,
    /// Largest deviation of a ring height from its mean.
    pub boundary_variation: f64,
}

/// Waist radius matching a catenoid of growth c to two flat rings of radius ε
/// that are Δ apart. Δ ≤ 0 gives w = ε.
pub fn matching_waist(epsilon: f64, delta: f64, c: f64) -> f64 {
    epsilon / (delta.max(0.0) / (2.0 * c)).cosh()
}

impl NeckModel {
    pub fn ring(&self) -> usize {
        self.lower_ring.len()
    }

    /// Position at ring angle index j and tube parameter s ∈ [0, 1].
    pub fn point(&self, j: usize, s: f64) -> [f64; 3] {
        let theta = 2.0 * PI * j as f64 / self.ring() as f64;
        let u = self.half_length * (2.0 * s - 1.0);
        let rho = self.waist * u.cosh();
        let x = self.center + C64::from_polar(rho, theta);
        let z = (1.0 - s) * self.lower_ring[j] + s * self.upper_ring[j];
        [x.re, x.im, z]
    }

    /// Tube parameter of interior row r (1-based).
    pub fn row_parameter(&self, r: usize) -> f64 {
        r as f64 / (self.rows + 1) as f64
    }

    /// Catenoid height at radius ρ on the lower (sign −1) or upper (+1) branch.
    pub fn catenoid_height(&self, rho: f64, sign: f64) -> f64 {
        self.waist_height + sign * self.c * (rho / self.waist).max(1.0).acosh()
    }
}

fn ring_heights(sheet: &SheetModel, node: C64, ring: usize) -> Vec<f64> {
    (0..ring).map(|j| sheet.height(sheet.ring_point(node, j))).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Necks between consecutive sheets, checked against `tolerance`.
pub fn build_necks(sheets: &[SheetModel], rows: usize, tolerance: f64) -> Result<Vec<NeckModel>> {
    let mut necks = Vec::new();
    for pair in sheets.windows(2) {
        let (lo, hi) = (&pair[0], &pair[1]);
        if lo.a_nodes.len() != hi.b_nodes.len() || lo.ring != hi.ring {
            return Err(Error::InvalidInput(format!(
                "sheets {} and {} do not share their necks",
                lo.level, hi.level
            )));
        }
        for (i, (&a, &b)) in lo.a_nodes.iter().zip(&hi.b_nodes).enumerate() {
            if (a - b).norm() > 1e-12 * a.norm().max(1.0) {
                return Err(Error::InvalidInput(format!("neck ({}, {i}) axis differs between sheets", lo.level)));
            }
            let lower_ring = ring_heights(lo, a, lo.ring);
            let upper_ring = ring_heights(hi, b, hi.ring);
            let z_lower = mean(&lower_ring);
            let z_upper = mean(&upper_ring);
            let c = lo.c_upper;
            let delta = z_upper - z_lower;
            let waist = matching_waist(lo.epsilon, delta, c);
            let half_length = (lo.epsilon / waist).acosh();
            let boundary_variation = lower_ring
                .iter()
                .map(|h| (h - z_lower).abs())
                .chain(upper_ring.iter().map(|h| (h - z_upper).abs()))
                .fold(0.0, f64::max);
            let mut neck = NeckModel {
                level: lo.level,
                index: i,
                center: a,
                c,
                epsilon: lo.epsilon,
                lower_ring,
                upper_ring,
                z_lower,
                z_upper,
                waist,
                waist_height: 0.5 * (z_lower + z_upper),
                half_length,
                rows,
                inverted: delta <= 0.0,
                mismatch: 0.0,
                boundary_variation,
            };
            let mut mismatch: f64 = 0.0;
            for j in 0..neck.ring() {
                let p0 = neck.point(j, 0.0);
                let p1 = neck.point(j, 1.0);
                let q0 = lo.ring_point(a, j);
                let q1 = hi.ring_point(b, j);
                mismatch = mismatch
                    .max((p0[2] - lo.height(q0)).abs())
                    .max((p1[2] - hi.height(q1)).abs())
                    .max((C64::new(p0[0], p0[1]) - q0).norm())
                    .max((C64::new(p1[0], p1[1]) - q1).norm());
            }
            neck.mismatch = mismatch;
            if mismatch.is_nan() || mismatch > tolerance {
                return Err(Error::GluingMismatch {
                    neck: (lo.level, i),
                    mismatch,
                    tolerance,
                });
            }
            necks.push(neck);
        }
    }
    Ok(necks)
}

/// Point z' near b on sphere k+1 with w(z')·v(z) = t², i.e. g_{k+1}(z') = v(z)/t²
/// where v(z) = 1/g_k(z); found by Newton from b.
pub fn neck_partner(lower: &SphereChart, upper: &SphereChart, z: C64, b: C64, t: f64) -> Result<C64> {
    let v = 1.0 / lower.g(z);
    let target = v / (t * t);
    let g = upper.g_form();
    // Near b, g ≈ β/(z' − b).
    let beta = upper
        .nodes_b
        .iter()
        .position(|n| *n == b)
        .map(|i| upper.beta[i])
        .ok_or_else(|| Error::InvalidInput("b is not a node of the upper sphere".into()))?;
    let mut zp = b + beta / target;
    for _ in 0..50 {
        let f = g.eval(zp) - target;
        let step = f / g.derivative(zp);
        zp -= step;
        if step.norm() <= 1e-16 * zp.norm().max(1.0) {
            break;
        }
    }
    Ok(zp)
}
