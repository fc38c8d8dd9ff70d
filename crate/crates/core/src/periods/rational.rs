//! Rational functions with simple poles, vanishing at infinity, stored in
//! partial-fraction form Σ r_j / (z − p_j).

use serde::{Deserialize, Serialize};

use crate::configspace::C64;
use crate::error::{Error, Result};

/// Poles closer than this are treated as the same pole.
pub const POLE_MATCH_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalForm {
    pub poles: Vec<C64>,
    pub residues: Vec<C64>,
}

impl RationalForm {
    pub fn new(poles: Vec<C64>, residues: Vec<C64>) -> Result<Self> {
        if poles.len() != residues.len() {
            return Err(Error::InvalidInput(format!(
                "{} poles but {} residues",
                poles.len(),
                residues.len()
            )));
        }
        Ok(Self { poles, residues })
    }

    pub fn zero() -> Self {
        Self { poles: vec![], residues: vec![] }
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.poles
            .iter()
            .zip(&self.residues)
            .map(|(&p, &r)| r / (z - p))
            .sum()
    }

    pub fn derivative(&self, z: C64) -> C64 {
        self.poles
            .iter()
            .zip(&self.residues)
            .map(|(&p, &r)| {
                let d = z - p;
                -r / (d * d)
            })
            .sum()
    }

    /// Value with the principal part at `pole` removed, evaluated at `pole`.
    pub fn regular_part(&self, pole: C64) -> C64 {
        self.poles
            .iter()
            .zip(&self.residues)
            .filter(|(p, _)| (**p - pole).norm() > POLE_MATCH_TOLERANCE)
            .map(|(&p, &r)| r / (pole - p))
            .sum()
    }

    pub fn find_pole(&self, pole: C64) -> Option<usize> {
        self.poles
            .iter()
            .position(|p| (*p - pole).norm() <= POLE_MATCH_TOLERANCE)
    }

    /// Residue of f dz at `pole`.
    pub fn residue(&self, pole: C64) -> Result<C64> {
        self.find_pole(pole)
            .map(|i| self.residues[i])
            .ok_or_else(|| Error::PoleNotFound(format!("{pole}")))
    }

    /// Sum of all finite residues; minus the residue at infinity.
    pub fn total_residue(&self) -> C64 {
        self.residues.iter().sum()
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            poles: self.poles.clone(),
            residues: self.residues.iter().map(|r| r * s).collect(),
        }
    }
}

/// Residue of f·g dz at `pole`, where f and g have at most simple poles there.
/// With f = r_f/(z−p) + F, g = r_g/(z−p) + G the residue is r_f G(p) + r_g F(p).
pub fn residue_of_product(f: &RationalForm, g: &RationalForm, pole: C64) -> Result<C64> {
    let rf = f.find_pole(pole).map(|i| f.residues[i]);
    let rg = g.find_pole(pole).map(|i| g.residues[i]);
    if rf.is_none() && rg.is_none() {
        return Err(Error::PoleNotFound(format!("{pole}")));
    }
    let mut total = C64::new(0.0, 0.0);
    if let Some(rf) = rf {
        total += rf * g.regular_part(pole);
    }
    if let Some(rg) = rg {
        total += rg * f.regular_part(pole);
    }
    Ok(total)
}

/// Residue of g² dz at `pole`.
pub fn residue_of_square(g: &RationalForm, pole: C64) -> Result<C64> {
    residue_of_product(g, g, pole)
}
