//! Configurations of neck positions, their forces, the reduced
//! parametrisation (ℓ, u) and the banded Jacobian of the stacked force
//! vector.
//!
//! A configuration lives on a contiguous window of levels `k`. Level `k`
//! carries `n_k` complex points `p_{k,i}` with weight `c_k = 1/n_k`. The
//! force on `p_{k,i}` is
//!
//! ```text
//! F_{k,i} = 2 Σ_{j≠i} c_k² / (p_{k,i} - p_{k,j})
//!         -   Σ_j c_k c_{k+1} / (p_{k,i} - p_{k+1,j})
//!         -   Σ_j c_k c_{k-1} / (p_{k,i} - p_{k-1,j})
//! ```
//!
//! Levels outside the window contribute empty sums.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Pairwise distances below this fraction of the configuration diameter are
/// rejected as coincident.
pub const DISTINCTNESS_TOLERANCE: f64 = 1e-9;

/// Level sizes `n_k` over the contiguous window `first ..= first + len - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelType {
    first: i64,
    sizes: Vec<usize>,
}

impl LevelType {
    pub fn new(first: i64, sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidInput("level type needs at least one level".into()));
        }
        if let Some(pos) = sizes.iter().position(|&n| n == 0) {
            return Err(Error::InvalidInput(format!(
                "level {} has no points",
                first + pos as i64
            )));
        }
        Ok(Self { first, sizes })
    }

    pub fn first(&self) -> i64 {
        self.first
    }

    pub fn last(&self) -> i64 {
        self.first + self.sizes.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn contains(&self, k: i64) -> bool {
        k >= self.first && k <= self.last()
    }

    /// `n_k`, or 0 outside the window.
    pub fn size(&self, k: i64) -> usize {
        if self.contains(k) {
            self.sizes[(k - self.first) as usize]
        } else {
            0
        }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn width(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    pub fn levels(&self) -> impl Iterator<Item = i64> {
        self.first..=self.last()
    }
}

/// A finite window of an (in)finite configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    level_type: LevelType,
    points: Vec<Vec<C64>>,
}

impl Configuration {
    /// Builds a configuration from per-level point lists starting at level
    /// `first`, enforcing distinctness within and across adjacent levels.
    pub fn new(first: i64, points: Vec<Vec<C64>>) -> Result<Self> {
        let level_type = LevelType::new(first, points.iter().map(Vec::len).collect())?;
        if points.iter().flatten().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite point coordinate".into()));
        }
        let cfg = Self { level_type, points };
        cfg.check_distinct()?;
        Ok(cfg)
    }

    pub fn level_type(&self) -> &LevelType {
        &self.level_type
    }

    pub fn first_level(&self) -> i64 {
        self.level_type.first
    }

    pub fn last_level(&self) -> i64 {
        self.level_type.last()
    }

    pub fn levels(&self) -> impl Iterator<Item = i64> {
        self.level_type.levels()
    }

    pub fn n(&self, k: i64) -> usize {
        self.level_type.size(k)
    }

    /// `c_k = 1/n_k`; zero outside the window so that missing neighbours drop out.
    pub fn c(&self, k: i64) -> f64 {
        match self.n(k) {
            0 => 0.0,
            n => 1.0 / n as f64,
        }
    }

    /// Points of level `k`; empty outside the window.
    pub fn level(&self, k: i64) -> &[C64] {
        if self.level_type.contains(k) {
            &self.points[(k - self.first_level()) as usize]
        } else {
            &[]
        }
    }

    pub fn point(&self, k: i64, i: usize) -> C64 {
        self.level(k)[i]
    }

    pub fn all_points(&self) -> impl Iterator<Item = C64> + '_ {
        self.points.iter().flatten().copied()
    }

    pub fn num_points(&self) -> usize {
        self.points.iter().map(Vec::len).sum()
    }

    /// Diagonal of the bounding box; the length scale for the distinctness guard.
    pub fn diameter(&self) -> f64 {
        let mut lo = C64::new(f64::INFINITY, f64::INFINITY);
        let mut hi = C64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in self.all_points() {
            lo.re = lo.re.min(p.re);
            lo.im = lo.im.min(p.im);
            hi.re = hi.re.max(p.re);
            hi.im = hi.im.max(p.im);
        }
        (hi - lo).norm()
    }

    fn check_distinct(&self) -> Result<()> {
        let scale = self.diameter().max(f64::MIN_POSITIVE);
        let tol = DISTINCTNESS_TOLERANCE * scale;
        for k in self.levels() {
            let here = self.level(k);
            for i in 0..here.len() {
                for j in (i + 1)..here.len() {
                    let d = (here[i] - here[j]).norm();
                    if d < tol {
                        return Err(Error::Degenerate {
                            first: (k, i + 1),
                            second: (k, j + 1),
                            distance: d,
                        });
                    }
                }
                for (j, q) in self.level(k + 1).iter().enumerate() {
                    let d = (here[i] - q).norm();
                    if d < tol {
                        return Err(Error::Degenerate {
                            first: (k, i + 1),
                            second: (k + 1, j + 1),
                            distance: d,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn translated(&self, w: C64) -> Result<Self> {
        self.map_points(|p| p + w)
    }

    pub fn scaled(&self, lambda: C64) -> Result<Self> {
        if lambda == C64::new(0.0, 0.0) {
            return Err(Error::InvalidInput("scale factor must be non-zero".into()));
        }
        self.map_points(|p| p * lambda)
    }

    pub fn conjugated(&self) -> Result<Self> {
        self.map_points(|p| p.conj())
    }

    pub fn map_points(&self, f: impl Fn(C64) -> C64) -> Result<Self> {
        Self::new(
            self.first_level(),
            self.points.iter().map(|lvl| lvl.iter().map(|&p| f(p)).collect()).collect(),
        )
    }

    /// Mean of the points of level `k`.
    pub fn level_mean(&self, k: i64) -> C64 {
        let pts = self.level(k);
        pts.iter().sum::<C64>() / pts.len() as f64
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ConfigFile = serde_json::from_str(s)?;
        file.into_configuration()
    }

    pub fn to_json_file(&self) -> ConfigFile {
        ConfigFile {
            levels: self
                .levels()
                .map(|k| LevelEntry {
                    k,
                    points: self.level(k).iter().map(|p| [p.re, p.im]).collect(),
                })
                .collect(),
        }
    }
}

/// On-disk configuration: `{"levels": [{"k": int, "points": [[re, im], ...]}, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub levels: Vec<LevelEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelEntry {
    pub k: i64,
    pub points: Vec<[f64; 2]>,
}

impl ConfigFile {
    pub fn into_configuration(mut self) -> Result<Configuration> {
        if self.levels.is_empty() {
            return Err(Error::InvalidInput("configuration has no levels".into()));
        }
        self.levels.sort_by_key(|l| l.k);
        let first = self.levels[0].k;
        for (offset, lvl) in self.levels.iter().enumerate() {
            if lvl.k != first + offset as i64 {
                return Err(Error::InvalidInput(format!(
                    "levels must be contiguous; expected {} found {}",
                    first + offset as i64,
                    lvl.k
                )));
            }
        }
        Configuration::new(
            first,
            self.levels
                .into_iter()
                .map(|l| l.points.into_iter().map(|[re, im]| C64::new(re, im)).collect())
                .collect(),
        )
    }
}

/// Forces `F_{k,i}`, level sums `G_k` and the stacked vector
/// `(…, G_k, F_{k,2}, …, F_{k,n_k}, …)`.
#[derive(Debug, Clone)]
pub struct ForceStack {
    first: i64,
    pub forces: Vec<Vec<C64>>,
    /// `G_k` for every level with a lower neighbour in the window.
    pub gvalues: Vec<Option<C64>>,
    /// Levels at the window edge, computed with empty neighbour sums.
    pub partial: Vec<bool>,
    pub stacked: Vec<C64>,
}

impl ForceStack {
    pub fn first_level(&self) -> i64 {
        self.first
    }

    pub fn level(&self, k: i64) -> &[C64] {
        &self.forces[(k - self.first) as usize]
    }

    pub fn force(&self, k: i64, i: usize) -> C64 {
        self.level(k)[i]
    }

    pub fn g(&self, k: i64) -> Option<C64> {
        self.gvalues.get((k - self.first) as usize).copied().flatten()
    }

    pub fn is_partial(&self, k: i64) -> bool {
        self.partial[(k - self.first) as usize]
    }

    /// Largest |F_{k,i}| over non-partial levels.
    pub fn max_interior_force(&self) -> f64 {
        self.forces
            .iter()
            .zip(&self.partial)
            .filter(|(_, &p)| !p)
            .flat_map(|(f, _)| f.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }

    pub fn levels(&self) -> impl Iterator<Item = i64> {
        self.first..self.first + self.forces.len() as i64
    }
}

fn level_force(cfg: &Configuration, k: i64, i: usize) -> C64 {
    let here = cfg.level(k);
    let p = here[i];
    let ck = cfg.c(k);
    let mut f = C64::new(0.0, 0.0);
    for (j, &q) in here.iter().enumerate() {
        if j != i {
            f += 2.0 * ck * ck / (p - q);
        }
    }
    for nb in [k + 1, k - 1] {
        let w = ck * cfg.c(nb);
        for &q in cfg.level(nb) {
            f -= w / (p - q);
        }
    }
    f
}

fn level_g(cfg: &Configuration, k: i64) -> C64 {
    let w = cfg.c(k) * cfg.c(k - 1);
    let mut g = C64::new(0.0, 0.0);
    for &p in cfg.level(k) {
        for &q in cfg.level(k - 1) {
            g += w / (p - q);
        }
    }
    g
}

/// Evaluates every force of the window.
pub fn forces(cfg: &Configuration) -> ForceStack {
    let first = cfg.first_level();
    let last = cfg.last_level();
    let mut out = ForceStack {
        first,
        forces: Vec::with_capacity(cfg.level_type.len()),
        gvalues: Vec::with_capacity(cfg.level_type.len()),
        partial: Vec::with_capacity(cfg.level_type.len()),
        stacked: Vec::new(),
    };
    for k in cfg.levels() {
        let fk: Vec<C64> = (0..cfg.n(k)).map(|i| level_force(cfg, k, i)).collect();
        let gk = (k > first).then(|| level_g(cfg, k));
        if let Some(g) = gk {
            out.stacked.push(g);
        }
        out.stacked.extend_from_slice(&fk[1..]);
        out.forces.push(fk);
        out.gvalues.push(gk);
        out.partial.push(k == first || k == last);
    }
    out
}

/// The parameters `ℓ_k = p_{k,1} - p_{k-1,1}` and `u_{k,i} = p_{k,i} - p_{k,1}`
/// plus the anchor `p_{k0,1}` fixing the translation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedParams {
    level_type: LevelType,
    /// `ℓ_k` for levels `first+1 ..= last`.
    pub ells: Vec<C64>,
    /// `u_{k,2..n_k}` for every level.
    pub us: Vec<Vec<C64>>,
    pub anchor_level: i64,
    pub anchor: C64,
}

impl ReducedParams {
    pub fn new(
        level_type: LevelType,
        ells: Vec<C64>,
        us: Vec<Vec<C64>>,
        anchor_level: i64,
        anchor: C64,
    ) -> Result<Self> {
        if ells.len() + 1 != level_type.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} ell values, got {}",
                level_type.len() - 1,
                ells.len()
            )));
        }
        if us.len() != level_type.len()
            || us.iter().zip(level_type.sizes()).any(|(u, &n)| u.len() + 1 != n)
        {
            return Err(Error::InvalidInput("u entries do not match the level type".into()));
        }
        if !level_type.contains(anchor_level) {
            return Err(Error::InvalidInput(format!(
                "anchor level {anchor_level} outside the window"
            )));
        }
        Ok(Self {
            level_type,
            ells,
            us,
            anchor_level,
            anchor,
        })
    }

    pub fn level_type(&self) -> &LevelType {
        &self.level_type
    }

    /// `ℓ_k`; `None` for the first level of the window.
    pub fn ell(&self, k: i64) -> Option<C64> {
        let first = self.level_type.first();
        (k > first && k <= self.level_type.last()).then(|| self.ells[(k - first - 1) as usize])
    }

    /// `u_{k,i}` with the 0-based index `i`; `u_{k,0} = 0`.
    pub fn u(&self, k: i64, i: usize) -> C64 {
        if i == 0 {
            C64::new(0.0, 0.0)
        } else {
            self.us[(k - self.level_type.first()) as usize][i - 1]
        }
    }

    /// Stacked parameter vector `(…, ℓ_k, u_{k,2}, …, u_{k,n_k}, …)`.
    pub fn stacked(&self) -> Vec<C64> {
        let mut v = Vec::new();
        for k in self.level_type.levels() {
            if let Some(l) = self.ell(k) {
                v.push(l);
            }
            v.extend_from_slice(&self.us[(k - self.level_type.first()) as usize]);
        }
        v
    }

    /// Rebuilds parameters from a stacked vector with the same layout.
    pub fn with_stacked(&self, values: &[C64]) -> Result<Self> {
        let mut it = values.iter().copied();
        let mut ells = Vec::with_capacity(self.ells.len());
        let mut us = Vec::with_capacity(self.us.len());
        for k in self.level_type.levels() {
            if k > self.level_type.first() {
                ells.push(it.next().ok_or_else(|| Error::InvalidInput("stacked vector too short".into()))?);
            }
            let n = self.level_type.size(k);
            let row: Vec<C64> = it.by_ref().take(n - 1).collect();
            if row.len() != n - 1 {
                return Err(Error::InvalidInput("stacked vector too short".into()));
            }
            us.push(row);
        }
        if it.next().is_some() {
            return Err(Error::InvalidInput("stacked vector too long".into()));
        }
        Self::new(self.level_type.clone(), ells, us, self.anchor_level, self.anchor)
    }
}

/// Change of variables to (ℓ, u), anchored at `p_{k0,1}`.
pub fn reduce(cfg: &Configuration, k0: i64) -> Result<ReducedParams> {
    if !cfg.level_type.contains(k0) {
        return Err(Error::InvalidInput(format!("anchor level {k0} outside the window")));
    }
    let first = cfg.first_level();
    let ells = cfg
        .levels()
        .filter(|&k| k > first)
        .map(|k| cfg.point(k, 0) - cfg.point(k - 1, 0))
        .collect();
    let us = cfg
        .levels()
        .map(|k| {
            let lvl = cfg.level(k);
            lvl[1..].iter().map(|&p| p - lvl[0]).collect()
        })
        .collect();
    ReducedParams::new(cfg.level_type.clone(), ells, us, k0, cfg.point(k0, 0))
}

/// Inverse of [`reduce`].
pub fn realize(rp: &ReducedParams) -> Result<Configuration> {
    let lt = &rp.level_type;
    let first = lt.first();
    // first points, walking out from the anchor in both directions
    let mut heads = vec![C64::new(0.0, 0.0); lt.len()];
    let a = (rp.anchor_level - first) as usize;
    heads[a] = rp.anchor;
    for idx in a + 1..lt.len() {
        heads[idx] = heads[idx - 1] + rp.ells[idx - 1];
    }
    for idx in (0..a).rev() {
        heads[idx] = heads[idx + 1] - rp.ells[idx];
    }
    let points = lt
        .levels()
        .zip(heads)
        .map(|(k, head)| (0..lt.size(k)).map(|i| head + rp.u(k, i)).collect())
        .collect();
    Configuration::new(first, points)
}

/// Forces evaluated directly in the (ℓ, u) variables.
pub fn forces_reduced(rp: &ReducedParams) -> ForceStack {
    let lt = &rp.level_type;
    let first = lt.first();
    let last = lt.last();
    let c = |k: i64| match lt.size(k) {
        0 => 0.0,
        n => 1.0 / n as f64,
    };
    let mut out = ForceStack {
        first,
        forces: Vec::new(),
        gvalues: Vec::new(),
        partial: Vec::new(),
        stacked: Vec::new(),
    };
    for k in lt.levels() {
        let n = lt.size(k);
        let ck = c(k);
        let mut fk = Vec::with_capacity(n);
        for i in 0..n {
            let ui = rp.u(k, i);
            let mut f = C64::new(0.0, 0.0);
            for j in (0..n).filter(|&j| j != i) {
                f += 2.0 * ck * ck / (ui - rp.u(k, j));
            }
            if let Some(l_up) = rp.ell(k + 1) {
                for j in 0..lt.size(k + 1) {
                    f -= ck * c(k + 1) / (ui - l_up - rp.u(k + 1, j));
                }
            }
            if let Some(l) = rp.ell(k) {
                for j in 0..lt.size(k - 1) {
                    f -= ck * c(k - 1) / (ui + l - rp.u(k - 1, j));
                }
            }
            fk.push(f);
        }
        let gk = rp.ell(k).map(|l| {
            let mut g = C64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..lt.size(k - 1) {
                    g += ck * c(k - 1) / (rp.u(k, i) + l - rp.u(k - 1, j));
                }
            }
            g
        });
        if let Some(g) = gk {
            out.stacked.push(g);
        }
        out.stacked.extend_from_slice(&fk[1..]);
        out.forces.push(fk);
        out.gvalues.push(gk);
        out.partial.push(k == first || k == last);
    }
    out
}

/// Analytic Jacobian of the stacked force vector with respect to the stacked
/// parameter vector, stored as per-level blocks coupling levels `k` and
/// `m` with `|m - k| <= 1`.
#[derive(Debug, Clone)]
pub struct JacobianBand {
    first: i64,
    /// Start of each level's slice in the stacked vectors.
    pub offsets: Vec<usize>,
    /// Per-level block dimension (`n_k`, or `n_k - 1` for the first level).
    pub dims: Vec<usize>,
    /// `blocks[row_level][d]` couples row level `k` with column level `k + d - 1`.
    pub blocks: Vec<[Option<DMatrix<C64>>; 3]>,
}

impl JacobianBand {
    pub fn dimension(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn first_level(&self) -> i64 {
        self.first
    }

    /// Block coupling row level `k` to column level `m`; `None` outside the band.
    pub fn block(&self, k: i64, m: i64) -> Option<&DMatrix<C64>> {
        let d = m - k + 1;
        if !(0..3).contains(&d) || k < self.first || (k - self.first) as usize >= self.dims.len() {
            return None;
        }
        self.blocks[(k - self.first) as usize][d as usize].as_ref()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dimension();
        let mut m = DMatrix::zeros(n, n);
        for (r, row_blocks) in self.blocks.iter().enumerate() {
            for (d, blk) in row_blocks.iter().enumerate() {
                let Some(blk) = blk else { continue };
                let c = r as i64 + d as i64 - 1;
                m.view_mut((self.offsets[r], self.offsets[c as usize]), blk.shape())
                    .copy_from(blk);
            }
        }
        m
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Param {
    Ell(i64),
    U(i64, usize),
}

/// Banded analytic Jacobian `dF̃/dU`.
pub fn jacobian(rp: &ReducedParams) -> Result<JacobianBand> {
    let cfg = realize(rp)?;
    let lt = rp.level_type.clone();
    let first = lt.first();
    let nlev = lt.len();
    let dims: Vec<usize> = lt
        .levels()
        .map(|k| if k == first { lt.size(k) - 1 } else { lt.size(k) })
        .collect();
    let mut offsets = Vec::with_capacity(nlev);
    let mut acc = 0;
    for &d in &dims {
        offsets.push(acc);
        acc += d;
    }
    // local index of a parameter inside its level block
    let local = |p: Param| -> (i64, usize) {
        match p {
            Param::Ell(k) => (k, 0),
            Param::U(k, i) => (k, if k == first { i - 1 } else { i }),
        }
    };
    let mut blocks: Vec<[Option<DMatrix<C64>>; 3]> = (0..nlev)
        .map(|r| {
            let k = first + r as i64;
            let mk = |m: i64| -> Option<DMatrix<C64>> {
                (lt.contains(m) && dims[(k - first) as usize] > 0 && dims[(m - first) as usize] > 0)
                    .then(|| DMatrix::zeros(dims[(k - first) as usize], dims[(m - first) as usize]))
            };
            [mk(k - 1), mk(k), mk(k + 1)]
        })
        .collect();
    let mut add = |row_level: i64, row_local: usize, p: Param, v: C64| {
        match p {
            Param::U(_, 0) => return,
            Param::Ell(m) if m == first => return,
            _ => {}
        }
        let (m, col_local) = local(p);
        if !lt.contains(m) {
            return;
        }
        let d = (m - row_level + 1) as usize;
        if let Some(blk) = blocks[(row_level - first) as usize][d].as_mut() {
            blk[(row_local, col_local)] += v;
        }
    };

    for k in lt.levels() {
        let ck = cfg.c(k);
        let row0 = if k == first { 0 } else { 1 };
        // G_k row
        if k > first {
            let w = ck * cfg.c(k - 1);
            for (i, &p) in cfg.level(k).iter().enumerate() {
                for (j, &q) in cfg.level(k - 1).iter().enumerate() {
                    let d2 = (p - q) * (p - q);
                    let term = w / d2;
                    add(k, 0, Param::Ell(k), -term);
                    add(k, 0, Param::U(k, i), -term);
                    add(k, 0, Param::U(k - 1, j), term);
                }
            }
        }
        // F_{k,i} rows for i >= 2
        let here = cfg.level(k);
        for i in 1..here.len() {
            let row = row0 + i - 1;
            let p = here[i];
            for (j, &q) in here.iter().enumerate() {
                if j == i {
                    continue;
                }
                let term = 2.0 * ck * ck / ((p - q) * (p - q));
                add(k, row, Param::U(k, i), -term);
                add(k, row, Param::U(k, j), term);
            }
            let w_up = ck * cfg.c(k + 1);
            for (j, &q) in cfg.level(k + 1).iter().enumerate() {
                let term = w_up / ((p - q) * (p - q));
                add(k, row, Param::U(k, i), term);
                add(k, row, Param::Ell(k + 1), -term);
                add(k, row, Param::U(k + 1, j), -term);
            }
            let w_dn = ck * cfg.c(k - 1);
            for (j, &q) in cfg.level(k - 1).iter().enumerate() {
                let term = w_dn / ((p - q) * (p - q));
                add(k, row, Param::U(k, i), term);
                add(k, row, Param::Ell(k), term);
                add(k, row, Param::U(k - 1, j), -term);
            }
        }
    }
    Ok(JacobianBand {
        first,
        offsets,
        dims,
        blocks,
    })
}

/// Diagnostic report on the hypotheses of the existence theorem.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub width: usize,
    /// Distinct values of the stacked U sequence (up to 1e-9) over the window.
    pub distinct_u_values: usize,
    /// Distinct values over the central half of the window.
    pub distinct_u_values_core: usize,
    /// No new U values appear in the outer half of the window.
    pub finitely_valued: bool,
    /// `(k, |mean_k - mean_{k-1}|)` for every adjacent pair.
    pub mean_margins: Vec<(i64, f64)>,
    pub min_mean_margin: f64,
    pub passes: bool,
}

fn count_distinct(values: impl Iterator<Item = C64>, tol: f64) -> usize {
    let keys: BTreeSet<(i64, i64)> = values
        .map(|v| ((v.re / tol).round() as i64, (v.im / tol).round() as i64))
        .collect();
    keys.len()
}

/// Checks width, finite-valuedness of U (saturation over the window) and the
/// separation of adjacent level means.
pub fn check_hypotheses(cfg: &Configuration) -> HypothesisReport {
    const TOL: f64 = 1e-9;
    let rp = reduce(cfg, cfg.first_level()).expect("first level is in the window");
    let first = cfg.first_level();
    let len = cfg.level_type.len() as i64;
    let core_lo = first + len / 4;
    let core_hi = cfg.last_level() - len / 4;
    let level_values = |k: i64| -> Vec<C64> {
        let mut v: Vec<C64> = rp.ell(k).into_iter().collect();
        v.extend_from_slice(&rp.us[(k - first) as usize]);
        v
    };
    let distinct_all = count_distinct(cfg.levels().flat_map(level_values), TOL);
    let distinct_core = count_distinct((core_lo..=core_hi).flat_map(level_values), TOL);
    let mean_margins: Vec<(i64, f64)> = cfg
        .levels()
        .skip(1)
        .map(|k| (k, (cfg.level_mean(k) - cfg.level_mean(k - 1)).norm()))
        .collect();
    let min_mean_margin = mean_margins.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    let finitely_valued = distinct_all == distinct_core;
    HypothesisReport {
        width: cfg.level_type.width(),
        distinct_u_values: distinct_all,
        distinct_u_values_core: distinct_core,
        finitely_valued,
        passes: finitely_valued && min_mean_margin > TOL,
        min_mean_margin,
        mean_margins,
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in self.levels() {
            write!(f, "{k:>4}:")?;
            for p in self.level(k) {
                write!(f, " ({:+.6}, {:+.6})", p.re, p.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn riemann(a: C64, lo: i64, hi: i64) -> Configuration {
        Configuration::new(lo, (lo..=hi).map(|k| vec![a * k as f64]).collect()).unwrap()
    }

    pub(crate) fn ladder() -> Configuration {
        let s = std::f64::consts::SQRT_2 / 2.0;
        Configuration::new(
            0,
            vec![
                vec![c(0.0, 0.0)],
                vec![c(-s, 1.0), c(s, 1.0)],
                vec![c(-s, 2.0), c(s, 2.0)],
                vec![c(0.0, 3.0)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn riemann_interior_forces_vanish() {
        let cfg = riemann(c(1.0, 0.0), -3, 3);
        let fs = forces(&cfg);
        for k in -2..=2 {
            assert_abs_diff_eq!(fs.force(k, 0).norm(), 0.0, epsilon = 1e-15);
        }
        for k in -2..=3 {
            assert_abs_diff_eq!((fs.g(k).unwrap() - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
        }
        assert!(fs.g(-3).is_none());
        assert!(fs.is_partial(-3) && fs.is_partial(3) && !fs.is_partial(0));
    }

    #[test]
    fn lone_point_feels_nothing() {
        let cfg = Configuration::new(0, vec![vec![c(0.3, -2.0)]]).unwrap();
        assert_eq!(forces(&cfg).force(0, 0), c(0.0, 0.0));
    }

    #[test]
    fn fan_two_middle_level_is_balanced() {
        let cot = 1.0 / 3f64.sqrt();
        let cfg = Configuration::new(
            0,
            vec![vec![c(0.0, 0.0)], vec![c(cot, 1.0), c(-cot, 1.0)], vec![c(0.0, 2.0)]],
        )
        .unwrap();
        let fs = forces(&cfg);
        assert!(fs.force(1, 0).norm() < 1e-15);
        assert!(fs.force(1, 1).norm() < 1e-15);
    }

    #[test]
    fn coincident_points_are_rejected() {
        let err = Configuration::new(0, vec![vec![c(0.0, 0.0), c(0.0, 0.0)]]).unwrap_err();
        match err {
            Error::Degenerate { first, second, .. } => {
                assert_eq!(first, (0, 1));
                assert_eq!(second, (0, 2));
            }
            e => panic!("unexpected {e}"),
        }
        let err = Configuration::new(0, vec![vec![c(1.0, 0.0)], vec![c(1.0, 0.0)]]).unwrap_err();
        assert!(matches!(err, Error::Degenerate { first: (0, 1), second: (1, 1), .. }));
        // non-adjacent levels may share positions
        Configuration::new(0, vec![vec![c(1.0, 0.0)], vec![c(2.0, 0.0)], vec![c(1.0, 0.0)]]).unwrap();
    }

    #[test]
    fn reduce_ladder() {
        let s = std::f64::consts::SQRT_2 / 2.0;
        let rp = reduce(&ladder(), 0).unwrap();
        assert_abs_diff_eq!((rp.ell(1).unwrap() - c(-s, 1.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((rp.ell(2).unwrap() - c(0.0, 1.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((rp.ell(3).unwrap() - c(s, 1.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((rp.u(1, 1) - c(2.0 * s, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((rp.u(2, 1) - c(2.0 * s, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert_eq!(rp.u(1, 0), c(0.0, 0.0));
        assert_eq!(rp.ell(0), None);
        assert_eq!(realize(&rp).unwrap(), ladder());
    }

    #[test]
    fn translation_only_moves_anchor() {
        let cfg = ladder();
        let w = c(1.0, 1.0);
        let a = reduce(&cfg, 1).unwrap();
        let b = reduce(&cfg.translated(w).unwrap(), 1).unwrap();
        for (x, y) in a.stacked().iter().zip(b.stacked()) {
            assert!((x - y).norm() < 1e-15);
        }
        assert_eq!(b.anchor, a.anchor + w);
    }

    #[test]
    fn realize_riemann_two() {
        let lt = LevelType::new(0, vec![1; 5]).unwrap();
        let rp = ReducedParams::new(lt, vec![c(2.0, 0.0); 4], vec![vec![]; 5], 0, c(0.0, 0.0)).unwrap();
        let cfg = realize(&rp).unwrap();
        assert_eq!(cfg.point(3, 0), c(6.0, 0.0));
        let fs = forces(&cfg);
        assert_abs_diff_eq!((fs.g(2).unwrap() - c(0.5, 0.0)).norm(), 0.0, epsilon = 1e-15);
        // shifting the anchor translates and leaves forces alone
        let mut shifted = rp.clone();
        shifted.anchor += c(1.0, 1.0);
        let moved = realize(&shifted).unwrap();
        assert_eq!(moved.point(2, 0), cfg.point(2, 0) + c(1.0, 1.0));
        assert_eq!(forces(&moved).stacked, fs.stacked);
    }

    #[test]
    fn reduced_route_agrees_with_points() {
        let cfg = ladder().scaled(c(0.7, 0.2)).unwrap();
        let rp = reduce(&cfg, 2).unwrap();
        let a = forces(&cfg);
        let b = forces_reduced(&rp);
        for (x, y) in a.stacked.iter().zip(&b.stacked) {
            assert!((x - y).norm() < 1e-13);
        }
        assert_eq!(rp.with_stacked(&rp.stacked()).unwrap(), rp);
    }

    #[test]
    fn riemann_jacobian_is_minus_identity_over_a_squared() {
        let a = c(0.5, 1.5);
        let rp = reduce(&riemann(a, 0, 5), 0).unwrap();
        let j = jacobian(&rp).unwrap().to_dense();
        assert_eq!(j.nrows(), 5);
        for r in 0..5 {
            for s in 0..5 {
                let want = if r == s { -1.0 / (a * a) } else { c(0.0, 0.0) };
                assert!((j[(r, s)] - want).norm() < 1e-14, "{r},{s}");
            }
        }
    }

    #[test]
    fn ladder_band_layout() {
        let band = jacobian(&reduce(&ladder(), 0).unwrap()).unwrap();
        assert_eq!(band.dims, vec![0, 2, 2, 1]);
        assert_eq!(band.dimension(), 5);
        assert!(band.block(1, 3).is_none());
        assert!(band.block(1, 2).is_some());
    }

    #[test]
    fn hypotheses_riemann_and_fan() {
        let rep = check_hypotheses(&riemann(c(1.0, 0.0), -6, 6));
        assert!(rep.passes);
        assert_eq!(rep.distinct_u_values, 1);
        for (_, m) in &rep.mean_margins {
            assert_abs_diff_eq!(*m, 1.0, epsilon = 1e-15);
        }
        let cot = 1.0 / 3f64.sqrt();
        let fan = Configuration::new(
            0,
            vec![vec![c(0.0, 0.0)], vec![c(cot, 1.0), c(-cot, 1.0)], vec![c(0.0, 2.0)]],
        )
        .unwrap();
        let rep = check_hypotheses(&fan);
        assert_abs_diff_eq!(rep.mean_margins[0].1, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rep.mean_margins[1].1, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn json_is_strict() {
        let ok = r#"{"levels": [{"k": 0, "points": [[0, 0]]}, {"k": 1, "points": [[1, 0]]}]}"#;
        let cfg = Configuration::from_json_str(ok).unwrap();
        assert_eq!(cfg.n(1), 1);
        let extra = r#"{"levels": [{"k": 0, "points": [[0, 0]], "w": 1}]}"#;
        assert!(Configuration::from_json_str(extra).is_err());
        let gap = r#"{"levels": [{"k": 0, "points": [[0, 0]]}, {"k": 2, "points": [[1, 0]]}]}"#;
        assert!(Configuration::from_json_str(gap).is_err());
    }
}
