//! Finite blocks of height `h` (type `(1, n_1, …, n_{h-1}, 1)`): residual
//! forces, Newton balancing with pinned endpoints, non-degeneracy
//! certificates and the closed-form example library.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::configspace::{forces, jacobian, reduce, Configuration, LevelType, C64};
use crate::error::{Error, Result};

/// Default Newton tolerance, relative to `1 + |F_C|`.
pub const NEWTON_TOLERANCE: f64 = 1e-12;
pub const NEWTON_MAX_ITERATIONS: usize = 50;
/// Newton refuses to continue once the Jacobian's smallest singular value drops below this.
pub const SINGULAR_GUARD: f64 = 1e-10;
/// Default tolerance for calling a block balanced, relative to `1 + |F_C|`.
pub const BALANCE_TOLERANCE: f64 = 1e-10;

/// A configuration over levels `0 ..= h` with one point on the first and last level.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteConfiguration {
    inner: Configuration,
}

impl FiniteConfiguration {
    pub fn new(points: Vec<Vec<C64>>) -> Result<Self> {
        Self::from_configuration(Configuration::new(0, points)?)
    }

    /// Reinterprets `cfg` as a block, re-indexing its levels from 0.
    pub fn from_configuration(cfg: Configuration) -> Result<Self> {
        let sizes = cfg.level_type().sizes();
        if sizes.len() < 2 {
            return Err(Error::InvalidInput("a block needs height at least 1".into()));
        }
        if sizes[0] != 1 || sizes[sizes.len() - 1] != 1 {
            return Err(Error::InvalidInput(format!(
                "first and last level of a block must hold one point, got type {sizes:?}"
            )));
        }
        let inner = if cfg.first_level() == 0 {
            cfg
        } else {
            Configuration::new(0, cfg.levels().map(|k| cfg.level(k).to_vec()).collect())?
        };
        Ok(Self { inner })
    }

    pub fn configuration(&self) -> &Configuration {
        &self.inner
    }

    pub fn into_configuration(self) -> Configuration {
        self.inner
    }

    pub fn height(&self) -> usize {
        self.inner.level_type().len() - 1
    }

    pub fn level_type(&self) -> &LevelType {
        self.inner.level_type()
    }

    pub fn first_point(&self) -> C64 {
        self.inner.point(0, 0)
    }

    pub fn last_point(&self) -> C64 {
        self.inner.point(self.height() as i64, 0)
    }

    /// `F_C = F_{0,1}`.
    pub fn residual_force(&self) -> C64 {
        forces(&self.inner).force(0, 0)
    }

    /// Largest interior force `max_{1≤k≤h-1} |F_{k,i}|`.
    pub fn max_interior_force(&self) -> f64 {
        forces(&self.inner).max_interior_force()
    }

    pub fn is_balanced(&self, tol: f64) -> bool {
        let fs = forces(&self.inner);
        fs.max_interior_force() <= tol * (1.0 + fs.force(0, 0).norm())
    }

    pub fn translated(&self, w: C64) -> Result<Self> {
        Ok(Self {
            inner: self.inner.translated(w)?,
        })
    }
}

/// Residual force and the two summation identities.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub residual_force: C64,
    pub max_interior_force: f64,
    pub balanced: bool,
    /// `|Σ F_{k,i}|`.
    pub sum_deviation: f64,
    /// `|Σ p_{k,i} F_{k,i} - (1 - Σ_k 1/n_k)|`.
    pub moment_deviation: f64,
    /// `|F_{h,1} + F_C|`, for balanced blocks.
    pub antisymmetry_deviation: Option<f64>,
    /// `|(p_{h,1} - p_{0,1}) F_C - Σ_{k≥1} 1/n_k|`, for balanced blocks.
    pub span_deviation: Option<f64>,
}

/// `1 - Σ_k 1/n_k` over every level of `cfg`.
pub fn moment_reference(cfg: &Configuration) -> f64 {
    1.0 - cfg.levels().map(|k| cfg.c(k)).sum::<f64>()
}

pub fn residual(fc: &FiniteConfiguration) -> ResidualReport {
    let cfg = &fc.inner;
    let fs = forces(cfg);
    let h = fc.height() as i64;
    let f_c = fs.force(0, 0);
    let mut sum = C64::new(0.0, 0.0);
    let mut moment = C64::new(0.0, 0.0);
    for k in cfg.levels() {
        for (p, f) in cfg.level(k).iter().zip(fs.level(k)) {
            sum += f;
            moment += p * f;
        }
    }
    let max_interior = fs.max_interior_force();
    let balanced = max_interior <= BALANCE_TOLERANCE * (1.0 + f_c.norm());
    let span_reference: f64 = (1..=h).map(|k| cfg.c(k)).sum();
    ResidualReport {
        residual_force: f_c,
        max_interior_force: max_interior,
        balanced,
        sum_deviation: sum.norm(),
        moment_deviation: (moment - moment_reference(cfg)).norm(),
        antisymmetry_deviation: balanced.then(|| (fs.force(h, 0) + f_c).norm()),
        span_deviation: balanced
            .then(|| ((fc.last_point() - fc.first_point()) * f_c - span_reference).norm()),
    }
}

/// Iteration record of a Newton solve.
#[derive(Debug, Clone, Serialize)]
pub struct NewtonReport {
    pub iterations: usize,
    /// Max interior force before each iteration and after the last.
    pub residual_history: Vec<f64>,
    pub final_residual: f64,
    pub residual_force: C64,
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tolerance: NEWTON_TOLERANCE,
            max_iterations: NEWTON_MAX_ITERATIONS,
        }
    }
}

fn interior_forces(cfg: &Configuration) -> DVector<C64> {
    let fs = forces(cfg);
    let h = cfg.last_level();
    DVector::from_iterator(
        (1..h).map(|k| cfg.n(k)).sum(),
        (1..h).flat_map(|k| fs.level(k).to_vec()),
    )
}

fn sup(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Jacobian of interior forces with respect to interior points.
fn point_jacobian(cfg: &Configuration) -> DMatrix<C64> {
    let h = cfg.last_level();
    let mut offsets = vec![0usize; (h + 1) as usize];
    let mut acc = 0;
    for k in 1..h {
        offsets[k as usize] = acc;
        acc += cfg.n(k);
    }
    let mut jac = DMatrix::zeros(acc, acc);
    let col = |m: i64, j: usize| -> Option<usize> { (m >= 1 && m < h).then(|| offsets[m as usize] + j) };
    for k in 1..h {
        let ck = cfg.c(k);
        let here = cfg.level(k);
        for (i, &p) in here.iter().enumerate() {
            let row = offsets[k as usize] + i;
            let mut diag = C64::new(0.0, 0.0);
            for (j, &q) in here.iter().enumerate() {
                if j == i {
                    continue;
                }
                let e = 2.0 * ck * ck / ((p - q) * (p - q));
                diag -= e;
                jac[(row, offsets[k as usize] + j)] += e;
            }
            for m in [k - 1, k + 1] {
                let w = ck * cfg.c(m);
                for (j, &q) in cfg.level(m).iter().enumerate() {
                    let e = w / ((p - q) * (p - q));
                    diag += e;
                    if let Some(c) = col(m, j) {
                        jac[(row, c)] -= e;
                    }
                }
            }
            jac[(row, row)] += diag;
        }
    }
    jac
}

fn with_interior(cfg: &Configuration, x: &DVector<C64>) -> Result<Configuration> {
    let h = cfg.last_level();
    let mut idx = 0;
    let points = cfg
        .levels()
        .map(|k| {
            if k == 0 || k == h {
                cfg.level(k).to_vec()
            } else {
                let v = x.rows(idx, cfg.n(k)).iter().copied().collect();
                idx += cfg.n(k);
                v
            }
        })
        .collect();
    Configuration::new(0, points)
}

fn interior_points(cfg: &Configuration) -> DVector<C64> {
    let h = cfg.last_level();
    DVector::from_iterator(
        (1..h).map(|k| cfg.n(k)).sum(),
        (1..h).flat_map(|k| cfg.level(k).to_vec()),
    )
}

/// Smallest singular value of a complex matrix; `INFINITY` for an empty one.
pub fn sigma_min(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return f64::INFINITY;
    }
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Balances `init` by Newton's method on the interior points with `p_{0,1}`
/// and `p_{h,1}` pinned to `endpoints`.
pub fn newton_balance(
    level_type: &LevelType,
    endpoints: (C64, C64),
    init: &FiniteConfiguration,
    opts: NewtonOptions,
) -> Result<(FiniteConfiguration, NewtonReport)> {
    if init.level_type().sizes() != level_type.sizes() {
        return Err(Error::InvalidInput(format!(
            "initial guess has type {:?}, expected {:?}",
            init.level_type().sizes(),
            level_type.sizes()
        )));
    }
    let h = init.height() as i64;
    let mut levels: Vec<Vec<C64>> = init.inner.levels().map(|k| init.inner.level(k).to_vec()).collect();
    levels[0][0] = endpoints.0;
    levels[h as usize][0] = endpoints.1;
    let mut cfg = Configuration::new(0, levels)?;

    let mut f = interior_forces(&cfg);
    let mut res = sup(&f);
    let mut history = vec![res];
    let mut iterations = 0;
    loop {
        let fc = forces(&cfg).force(0, 0);
        if res <= opts.tolerance * (1.0 + fc.norm()) {
            return Ok((
                FiniteConfiguration { inner: cfg },
                NewtonReport {
                    iterations,
                    residual_history: history,
                    final_residual: res,
                    residual_force: fc,
                },
            ));
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NoConvergence {
                iterations,
                residual: res,
            });
        }
        let jac = point_jacobian(&cfg);
        let smin = sigma_min(&jac);
        if smin < SINGULAR_GUARD {
            return Err(Error::SingularJacobian {
                iteration: iterations,
                sigma_min: smin,
            });
        }
        let step = jac
            .lu()
            .solve(&(-&f))
            .ok_or(Error::SingularJacobian {
                iteration: iterations,
                sigma_min: smin,
            })?;
        let x = interior_points(&cfg);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            if let Ok(trial) = with_interior(&cfg, &(&x + &step * C64::new(lambda, 0.0))) {
                let ft = interior_forces(&trial);
                let rt = sup(&ft);
                if rt.is_finite() && rt <= 1.1 * res {
                    accepted = Some((trial, ft, rt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((trial, ft, rt)) = accepted else {
            return Err(Error::NoConvergence {
                iterations,
                residual: res,
            });
        };
        cfg = trial;
        f = ft;
        res = rt;
        history.push(res);
        iterations += 1;
    }
}

/// Seeds interior levels on lines interpolating the endpoints, spread
/// symmetrically by `cot(jπ/(n+1))` across the axis.
pub fn initial_guess(level_type: &LevelType, endpoints: (C64, C64)) -> Result<FiniteConfiguration> {
    let sizes = level_type.sizes();
    let h = sizes.len() - 1;
    if h == 0 {
        return Err(Error::InvalidInput("a block needs height at least 1".into()));
    }
    let axis = endpoints.1 - endpoints.0;
    if axis.norm() == 0.0 {
        return Err(Error::InvalidInput("endpoints coincide".into()));
    }
    let across = -C64::i() * axis / axis.norm() * (axis.norm() / h as f64);
    let points = sizes
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let base = endpoints.0 + axis * (k as f64 / h as f64);
            if n == 1 {
                vec![base]
            } else {
                (1..=n)
                    .map(|j| base + across * (1.0 / (j as f64 * PI / (n + 1) as f64).tan()))
                    .collect()
            }
        })
        .collect();
    FiniteConfiguration::new(points)
}

/// Determinant and smallest singular value of the non-degeneracy map
/// `(ℓ_1, u_{1,·}, …, ℓ_h) ↦ (G_1, F_{1,·}, …, G_h)`.
#[derive(Debug, Clone, Serialize)]
pub struct NondegeneracyCertificate {
    pub determinant: C64,
    /// Smallest singular value of the real matrix `[[Re, -Im], [Im, Re]]`.
    pub sigma_min: f64,
    pub dimension: usize,
    pub passes: bool,
}

pub fn nondegeneracy_matrix(fc: &FiniteConfiguration) -> Result<DMatrix<C64>> {
    let rp = reduce(&fc.inner, 0)?;
    Ok(jacobian(&rp)?.to_dense())
}

/// Embeds a complex matrix as the real matrix of doubled size.
pub fn realify(m: &DMatrix<C64>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    DMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let z = m[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

pub fn certify(fc: &FiniteConfiguration) -> Result<NondegeneracyCertificate> {
    let m = nondegeneracy_matrix(fc)?;
    let dimension = m.nrows();
    let determinant = m.clone().determinant();
    let real = realify(&m);
    let sigma_min = real
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(NondegeneracyCertificate {
        determinant,
        sigma_min,
        dimension,
        passes: sigma_min > 0.0 && sigma_min.is_finite(),
    })
}

pub fn scale(fc: &FiniteConfiguration, lambda: C64) -> Result<FiniteConfiguration> {
    Ok(FiniteConfiguration {
        inner: fc.inner.scaled(lambda)?,
    })
}

/// Scales so that the residual force becomes `target`.
pub fn scale_to_residual(fc: &FiniteConfiguration, target: C64) -> Result<FiniteConfiguration> {
    if target.norm() == 0.0 {
        return Err(Error::InvalidInput("target residual force must be non-zero".into()));
    }
    scale(fc, fc.residual_force() / target)
}

/// Closed-form blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum Builtin {
    /// `p_k = k a`, `0 ≤ k ≤ h`.
    Chain { a: [f64; 2], h: usize },
    /// `0`, `i + cot(jπ/(n+1))`, `2i`.
    Fan { n: usize },
    /// Type `(1, 2, 2, 1)`: `0`, `±√2/2 + i`, `±√2/2 + 2i`, `3i`.
    Ladder22,
}

impl Builtin {
    /// Parses `chain`, `chain:a=2,h=3`, `fan:n=2`, `fan2`, `ladder22`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        let mut kv = std::collections::BTreeMap::new();
        for part in args.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("bad builtin parameter `{part}`")))?;
            kv.insert(k.trim(), v.trim());
        }
        let num = |key: &str, default: f64| -> Result<f64> {
            kv.get(key).map_or(Ok(default), |v| {
                v.parse().map_err(|_| Error::InvalidInput(format!("bad value for {key}: `{v}`")))
            })
        };
        match name {
            "chain" => Ok(Builtin::Chain {
                a: [num("a", 1.0)?, num("b", 0.0)?],
                h: num("h", 1.0)? as usize,
            }),
            "fan" => Ok(Builtin::Fan { n: num("n", 2.0)? as usize }),
            "ladder22" => Ok(Builtin::Ladder22),
            other => match other.strip_prefix("fan").and_then(|n| n.parse().ok()) {
                Some(n) => Ok(Builtin::Fan { n }),
                None => Err(Error::UnknownBuiltin(spec.to_string())),
            },
        }
    }

    pub fn build(&self) -> Result<FiniteConfiguration> {
        builtin(self)
    }
}

pub fn builtin(b: &Builtin) -> Result<FiniteConfiguration> {
    match *b {
        Builtin::Chain { a, h } => {
            if h == 0 {
                return Err(Error::InvalidInput("chain height must be positive".into()));
            }
            let a = C64::new(a[0], a[1]);
            FiniteConfiguration::new((0..=h).map(|k| vec![a * k as f64]).collect())
        }
        Builtin::Fan { n } => {
            if n == 0 {
                return Err(Error::InvalidInput("fan needs n ≥ 1".into()));
            }
            let middle = (1..=n)
                .map(|j| C64::new(1.0 / (j as f64 * PI / (n + 1) as f64).tan(), 1.0))
                .collect();
            FiniteConfiguration::new(vec![vec![C64::new(0.0, 0.0)], middle, vec![C64::new(0.0, 2.0)]])
        }
        Builtin::Ladder22 => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            FiniteConfiguration::new(vec![
                vec![C64::new(0.0, 0.0)],
                vec![C64::new(-s, 1.0), C64::new(s, 1.0)],
                vec![C64::new(-s, 2.0), C64::new(s, 2.0)],
                vec![C64::new(0.0, 3.0)],
            ])
        }
    }
}

/// On-disk block: `{"name", "type", "points", "residual"}` with points listed per level.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockFile {
    #[serde(default)]
    pub name: String,
    #[serde(rename = "type")]
    pub level_type: Vec<usize>,
    pub points: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<[f64; 2]>,
}

impl BlockFile {
    pub fn from_block(name: &str, fc: &FiniteConfiguration) -> Self {
        let cfg = fc.configuration();
        let r = fc.residual_force();
        Self {
            name: name.to_string(),
            level_type: cfg.level_type().sizes().to_vec(),
            points: cfg
                .levels()
                .map(|k| cfg.level(k).iter().map(|p| [p.re, p.im]).collect())
                .collect(),
            residual: Some([r.re, r.im]),
        }
    }

    /// Builds the block; a stated residual must agree with the computed one to 1e-8 relative.
    pub fn into_block(self) -> Result<FiniteConfiguration> {
        let sizes: Vec<usize> = self.points.iter().map(Vec::len).collect();
        if sizes != self.level_type {
            return Err(Error::InvalidInput(format!(
                "block `{}` declares type {:?} but lists {:?}",
                self.name, self.level_type, sizes
            )));
        }
        let fc = FiniteConfiguration::new(
            self.points
                .into_iter()
                .map(|l| l.into_iter().map(|[re, im]| C64::new(re, im)).collect())
                .collect(),
        )?;
        if let Some([re, im]) = self.residual {
            let stated = C64::new(re, im);
            let got = fc.residual_force();
            if (stated - got).norm() > 1e-8 * (1.0 + got.norm()) {
                return Err(Error::InvalidInput(format!(
                    "block `{}` states residual {stated} but its points give {got}",
                    self.name
                )));
            }
        }
        Ok(fc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn chain_residual_is_inverse_step() {
        for a in [c(1.0, 0.0), c(2.0, 0.0), c(0.3, -1.2)] {
            let fc = builtin(&Builtin::Chain { a: [a.re, a.im], h: 4 }).unwrap();
            let r = residual(&fc);
            assert!((r.residual_force - 1.0 / a).norm() <= 1e-12 * (1.0 / a).norm());
            assert!(r.balanced);
        }
    }

    #[test]
    fn fan_residuals_and_span_identity() {
        for n in 1..=6 {
            let fc = builtin(&Builtin::Fan { n }).unwrap();
            let r = residual(&fc);
            let want = c(n as f64 + 1.0, 0.0) / c(0.0, 2.0 * n as f64);
            assert!((r.residual_force - want).norm() <= 1e-12 * want.norm(), "n={n}");
            assert!(r.span_deviation.unwrap() < 1e-12);
            assert!(r.antisymmetry_deviation.unwrap() < 1e-12);
        }
    }

    #[test]
    fn ladder_residual() {
        let r = residual(&builtin(&Builtin::Ladder22).unwrap());
        assert!((r.residual_force - c(2.0, 0.0) / c(0.0, 3.0)).norm() < 1e-12);
        assert!(r.span_deviation.unwrap() < 1e-12);
    }

    #[test]
    fn ladder_determinant() {
        let cert = certify(&builtin(&Builtin::Ladder22).unwrap()).unwrap();
        assert_eq!(cert.dimension, 5);
        assert_relative_eq!(cert.determinant.norm(), 4.0 / 243.0, max_relative = 1e-10);
        assert!(cert.passes);
    }

    #[test]
    fn unit_chain_certificate() {
        let cert = certify(&builtin(&Builtin::Chain { a: [1.0, 0.0], h: 1 }).unwrap()).unwrap();
        assert_eq!(cert.dimension, 1);
        assert_relative_eq!(cert.determinant.re, -1.0, epsilon = 1e-15);
        assert_relative_eq!(cert.sigma_min, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn fan_one_certificate_passes() {
        let cert = certify(&builtin(&Builtin::Fan { n: 1 }).unwrap()).unwrap();
        assert!(cert.passes && cert.sigma_min > 0.1);
    }

    #[test]
    fn newton_keeps_balanced_ladder() {
        let fc = builtin(&Builtin::Ladder22).unwrap();
        let (out, rep) = newton_balance(
            fc.level_type(),
            (c(0.0, 0.0), c(0.0, 3.0)),
            &fc,
            NewtonOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(out, fc);
    }

    #[test]
    fn newton_finds_even_chain() {
        let lt = LevelType::new(0, vec![1; 6]).unwrap();
        let mut init = initial_guess(&lt, (c(0.0, 0.0), c(5.0, 0.0))).unwrap();
        init = FiniteConfiguration::new(
            init.configuration()
                .levels()
                .map(|k| vec![init.configuration().point(k, 0) + c(0.0, 0.05 * (k * (5 - k)) as f64)])
                .collect(),
        )
        .unwrap();
        let (out, _) = newton_balance(&lt, (c(0.0, 0.0), c(5.0, 0.0)), &init, NewtonOptions::default()).unwrap();
        for k in 0..=5 {
            assert!((out.configuration().point(k, 0) - c(k as f64, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn newton_solves_ladder_from_generic_guess() {
        let lt = LevelType::new(0, vec![1, 2, 2, 1]).unwrap();
        let init = initial_guess(&lt, (c(0.0, 0.0), c(0.0, 3.0))).unwrap();
        let (out, rep) = newton_balance(&lt, (c(0.0, 0.0), c(0.0, 3.0)), &init, NewtonOptions::default()).unwrap();
        assert!(rep.final_residual < 1e-12);
        assert!((out.residual_force() - c(2.0, 0.0) / c(0.0, 3.0)).norm() < 1e-10);
    }

    #[test]
    fn scaling_divides_residual() {
        for n in 1..=5 {
            let fc = builtin(&Builtin::Fan { n }).unwrap();
            // F_C = (n+1)/(2ni), so λ = (n+1)/n lands every fan on 1/(2i)
            let lam = (n as f64 + 1.0) / n as f64;
            let s = scale(&fc, c(lam, 0.0)).unwrap();
            assert!((s.residual_force() - c(0.0, -0.5)).norm() < 1e-12);
            assert!(s.is_balanced(1e-12));
            let t = scale_to_residual(&fc, c(0.0, -0.5)).unwrap();
            assert!((t.last_point() - c(0.0, 2.0 * lam)).norm() < 1e-12);
        }
        let chain = builtin(&Builtin::Chain { a: [1.0, 0.0], h: 2 }).unwrap();
        assert!((scale(&chain, c(2.0, 0.0)).unwrap().residual_force() - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(scale(&chain, c(1.0, 0.0)).unwrap(), chain);
        assert!(scale(&chain, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn builtin_points() {
        let fan = builtin(&Builtin::Fan { n: 2 }).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((fan.configuration().point(1, 0) - c(s, 1.0)).norm() < 1e-15);
        assert!((fan.configuration().point(1, 1) - c(-s, 1.0)).norm() < 1e-15);
        assert_eq!(fan.last_point(), c(0.0, 2.0));
    }

    #[test]
    fn parse_builtin_names() {
        assert_eq!(Builtin::parse("fan:n=3").unwrap(), Builtin::Fan { n: 3 });
        assert_eq!(Builtin::parse("fan4").unwrap(), Builtin::Fan { n: 4 });
        assert_eq!(Builtin::parse("ladder22").unwrap(), Builtin::Ladder22);
        assert_eq!(
            Builtin::parse("chain:a=2,h=3").unwrap(),
            Builtin::Chain { a: [2.0, 0.0], h: 3 }
        );
        assert!(matches!(Builtin::parse("spiral"), Err(Error::UnknownBuiltin(_))));
        let chain = builtin(&Builtin::parse("chain:h=3").unwrap()).unwrap();
        let pts: Vec<C64> = chain.configuration().all_points().collect();
        assert_eq!(pts, vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
    }

    #[test]
    fn block_file_round_trip() {
        let fc = builtin(&Builtin::Ladder22).unwrap();
        let json = serde_json::to_string(&BlockFile::from_block("ladder22", &fc)).unwrap();
        let back: BlockFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.into_block().unwrap(), fc);
        let mut bad: BlockFile = serde_json::from_str(&json).unwrap();
        bad.residual = Some([1.0, 0.0]);
        assert!(bad.into_block().is_err());
    }

    #[test]
    fn builtin_json_tagging() {
        let b: Builtin = serde_json::from_str(r#"{"name": "fan", "n": 3}"#).unwrap();
        assert_eq!(b, Builtin::Fan { n: 3 });
        let b: Builtin = serde_json::from_str(r#"{"name": "ladder22"}"#).unwrap();
        assert_eq!(b, Builtin::Ladder22);
    }
}
