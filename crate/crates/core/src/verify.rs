//! Closed-form and identity checks behind `neckstack verify-paper`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::balance::{builtin, certify, residual, Builtin};
use crate::configspace::{forces, Configuration, C64};
use crate::error::Result;
use crate::periods::chart::{limit_balance, ChartSet};
use crate::periods::laurent::{laurent, DEFAULT_CUTOFF};
use crate::periods::zeros::zero_alignment;

pub const DEFAULT_SEED: u64 = 20240611;
pub const RANDOM_CASES: usize = 100;

/// One verification line.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub computed: f64,
    pub reference: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, computed: f64, reference: f64, deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            computed,
            reference,
            deviation,
            tolerance,
            pass: deviation <= tolerance,
        }
    }

    /// Relative complex comparison, reported through moduli.
    pub fn complex(name: impl Into<String>, computed: C64, reference: C64, tolerance: f64) -> Self {
        let dev = (computed - reference).norm() / reference.norm().max(f64::MIN_POSITIVE);
        Self::new(name, computed.norm(), reference.norm(), dev, tolerance)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    pub cases: usize,
    /// Multiplies every default tolerance.
    pub tolerance_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            cases: RANDOM_CASES,
            tolerance_scale: 1.0,
        }
    }
}

/// Random configuration of the given type: level k near height k, points spread along x.
pub fn random_configuration(rng: &mut impl Rng, first: i64, sizes: &[usize]) -> Configuration {
    loop {
        let levels = sizes
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                (0..n)
                    .map(|i| {
                        C64::new(
                            1.5 * i as f64 + rng.random_range(-0.6..0.6),
                            k as f64 + rng.random_range(-0.3..0.3),
                        )
                    })
                    .collect()
            })
            .collect();
        if let Ok(cfg) = Configuration::new(first, levels) {
            return cfg;
        }
    }
}

pub const IDENTITY_TYPES: [&[usize]; 4] = [&[1, 1], &[1, 2, 1], &[1, 2, 2, 1], &[1, 3, 1]];

/// Residual forces of the closed-form blocks.
pub fn residual_checks(tol: f64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for a in [C64::new(1.0, 0.0), C64::new(2.0, 1.0), C64::new(0.0, -0.5)] {
        let fc = builtin(&Builtin::Chain { a: [a.re, a.im], h: 1 })?;
        out.push(Check::complex(format!("chain a={a} residual force"), fc.residual_force(), 1.0 / a, tol));
    }
    for n in 1..=6 {
        let fc = builtin(&Builtin::Fan { n })?;
        let reference = C64::new(n as f64 + 1.0, 0.0) / C64::new(0.0, 2.0 * n as f64);
        out.push(Check::complex(format!("fan{n} residual force"), fc.residual_force(), reference, tol));
        out.push(Check::new(
            format!("fan{n} interior balance"),
            fc.max_interior_force(),
            0.0,
            fc.max_interior_force(),
            tol,
        ));
    }
    let ladder = builtin(&Builtin::Ladder22)?;
    out.push(Check::complex("ladder22 residual force", ladder.residual_force(), C64::new(0.0, -2.0 / 3.0), tol));
    Ok(out)
}

pub fn determinant_check(tol: f64) -> Result<Check> {
    let cert = certify(&builtin(&Builtin::Ladder22)?)?;
    let d = cert.determinant.norm();
    let reference = 4.0 / 243.0;
    Ok(Check::new("ladder22 |det| of the non-degeneracy matrix", d, reference, (d - reference).abs() / reference, tol))
}

/// Sum and moment identities of the forces on random windows.
pub fn identity_checks(rng: &mut impl Rng, cases: usize, tol: f64) -> Vec<Check> {
    let mut out = Vec::new();
    for sizes in IDENTITY_TYPES {
        let mut worst_sum: f64 = 0.0;
        let mut worst_moment: f64 = 0.0;
        for _ in 0..cases {
            let cfg = random_configuration(rng, 0, sizes);
            let fs = forces(&cfg);
            let mut sum = C64::new(0.0, 0.0);
            let mut moment = C64::new(0.0, 0.0);
            let mut scale = 1.0;
            for k in cfg.levels() {
                for (p, f) in cfg.level(k).iter().zip(fs.level(k)) {
                    sum += f;
                    moment += p * f;
                    scale += f.norm() * (1.0 + p.norm());
                }
            }
            let reference = crate::balance::moment_reference(&cfg);
            worst_sum = worst_sum.max(sum.norm() / scale);
            worst_moment = worst_moment.max((moment - reference).norm() / scale);
        }
        out.push(Check::new(format!("type {sizes:?} Σ F"), worst_sum, 0.0, worst_sum, tol));
        out.push(Check::new(format!("type {sizes:?} Σ pF − (1 − Σ 1/n)"), worst_moment, 0.0, worst_moment, tol));
    }
    for b in [Builtin::Fan { n: 2 }, Builtin::Fan { n: 3 }, Builtin::Ladder22] {
        let r = residual(&builtin(&b).expect("builtin block"));
        let dev = r.antisymmetry_deviation.unwrap_or(f64::INFINITY);
        out.push(Check::new(format!("{b:?} F_last + F_C"), dev, 0.0, dev, tol));
        let dev = r.span_deviation.unwrap_or(f64::INFINITY);
        out.push(Check::new(format!("{b:?} (p_last − p_first) F_C − Σ 1/n"), dev, 0.0, dev, tol));
    }
    out
}

fn example_windows() -> Result<Vec<(String, Configuration)>> {
    let mut out = Vec::new();
    for b in [Builtin::Fan { n: 2 }, Builtin::Fan { n: 3 }, Builtin::Ladder22, Builtin::Chain { a: [1.0, 0.5], h: 3 }] {
        out.push((format!("{b:?}"), builtin(&b)?.into_configuration()));
    }
    out.push((
        "riemann".into(),
        Configuration::new(-3, (-3..=3).map(|k| vec![C64::new(k as f64, 0.0)]).collect())?,
    ));
    Ok(out)
}

/// Residue limit of the balancing period against 4πi times the forces.
pub fn limit_balance_checks(rng: &mut impl Rng, cases: usize, tol: f64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (name, cfg) in example_windows()? {
        let rep = limit_balance(&ChartSet::central(&cfg)?, &cfg)?;
        out.push(Check::new(format!("{name} boF = 4πi F"), rep.max_deviation, 0.0, rep.max_deviation, tol));
    }
    let mut worst: f64 = 0.0;
    for c in 0..cases {
        let sizes = IDENTITY_TYPES[c % IDENTITY_TYPES.len()];
        let first = rng.random_range(-3..3);
        let cfg = random_configuration(rng, first, sizes);
        worst = worst.max(limit_balance(&ChartSet::central(&cfg)?, &cfg)?.max_deviation);
    }
    out.push(Check::new(format!("{cases} random windows boF = 4πi F"), worst, 0.0, worst, tol));
    Ok(out)
}

/// Leading Laurent coefficient c_{−1} = −γ at every interior neck.
pub fn laurent_checks(tol: f64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (name, cfg) in example_windows()? {
        let cs = ChartSet::central(&cfg)?;
        let mut worst: f64 = 0.0;
        for (k, i) in cs.interior_necks() {
            let lower = cs.sphere(k).expect("interior sphere");
            let upper = cs.sphere(k + 1).expect("interior sphere");
            let b = laurent(lower, upper, i, DEFAULT_CUTOFF)?;
            worst = worst.max((b.c_plus(-1) + b.gamma).norm());
        }
        out.push(Check::new(format!("{name} c_(-1) + γ"), worst, 0.0, worst, tol));
    }
    Ok(out)
}

/// Argument-principle zero counts and the alignment functional at central weights.
pub fn zero_checks(tol: f64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (name, cfg) in example_windows()? {
        let cs = ChartSet::central(&cfg)?;
        for ch in cs.complete_spheres() {
            let rep = zero_alignment(ch)?;
            let dev = (rep.zero_count as f64 - rep.expected_count as f64).abs();
            out.push(Check::new(
                format!("{name} sphere {} zero count", ch.level),
                rep.zero_count as f64,
                rep.expected_count as f64,
                dev,
                0.0,
            ));
            out.push(Check::new(format!("{name} sphere {} max |Z|", ch.level), rep.max_z, 0.0, rep.max_z, tol));
        }
    }
    Ok(out)
}

pub fn verify_paper(opts: VerifyOptions) -> Result<VerificationReport> {
    let s = opts.tolerance_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = residual_checks(1e-12 * s)?;
    checks.push(determinant_check(1e-10 * s)?);
    checks.extend(identity_checks(&mut rng, opts.cases, 1e-10 * s));
    checks.extend(limit_balance_checks(&mut rng, opts.cases, 1e-10 * s)?);
    checks.extend(laurent_checks(1e-12 * s)?);
    checks.extend(zero_checks(1e-9 * s)?);
    // 4π factor sanity: the residue map on a single (1,1) neck.
    let cfg = Configuration::new(0, vec![vec![C64::new(0.0, 0.0)], vec![C64::new(0.0, 1.0)]])?;
    let rep = limit_balance(&ChartSet::central(&cfg)?, &cfg)?;
    let f = forces(&cfg).force(0, 0);
    checks.push(Check::complex("boF/F on a single neck", rep.bof(0, 0) / f, C64::new(0.0, 4.0 * PI), 1e-12 * s));
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerificationReport { checks, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_by_default() {
        let rep = verify_paper(VerifyOptions { cases: 20, ..Default::default() }).unwrap();
        for c in &rep.checks {
            assert!(c.pass, "{c:?}");
        }
        assert!(rep.checks.len() > 30);
    }

    #[test]
    fn tightened_tolerance_fails() {
        let rep = verify_paper(VerifyOptions { cases: 5, tolerance_scale: 1e-20, ..Default::default() }).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn random_configurations_are_seeded() {
        let a = random_configuration(&mut ChaCha8Rng::seed_from_u64(3), 0, &[1, 2, 1]);
        let b = random_configuration(&mut ChaCha8Rng::seed_from_u64(3), 0, &[1, 2, 1]);
        assert_eq!(a.point(1, 1), b.point(1, 1));
    }
}
