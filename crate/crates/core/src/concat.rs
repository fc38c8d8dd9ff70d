//! Infinite configurations as words over a finite library of balanced,
//! compatible blocks. Consecutive blocks are glued last point to first
//! point; block `m` occupies levels `φ_m ..= φ_m + h_m` with `φ_0 = 0`.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::balance::{
    certify, Builtin, BlockFile, FiniteConfiguration, NondegeneracyCertificate, BALANCE_TOLERANCE,
};
use crate::configspace::{Configuration, C64};
use crate::error::{Error, Result};

/// Residual forces of library blocks must agree to this (relative to `max(1, |F_C|)`).
pub const COMPATIBILITY_TOLERANCE: f64 = 1e-10;
/// Length of each side of a memoised substitution fixed point.
pub const EXPANSION_LENGTH: usize = 1 << 16;

/// How block indices are assigned to every `m ∈ Z`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Rule {
    /// `index(m) = word[m mod |word|]`.
    Periodic { word: Vec<usize> },
    /// Two-sided fixed point of a substitution: `σ^∞(axiom)` on `m ≥ 0` and
    /// the left-infinite limit of `σ^n(left_seed)` on `m < 0`.
    Substitution {
        rules: Vec<Vec<usize>>,
        axiom: usize,
        #[serde(default)]
        left_seed: Option<usize>,
    },
    /// `indices[j]` at `m = start + j`; `fill` elsewhere, if given.
    Explicit {
        #[serde(default)]
        start: i64,
        indices: Vec<usize>,
        #[serde(default)]
        fill: Option<usize>,
    },
}

#[derive(Debug)]
struct Expansion {
    /// Indices at `m = 0, 1, …`.
    right: Vec<usize>,
    /// Indices at `m = -1, -2, …`.
    left: Vec<usize>,
    /// Letters seen infinitely often on either side.
    recurrent: BTreeSet<usize>,
}

/// A library of blocks plus an index rule.
#[derive(Debug)]
pub struct BlockWord {
    library: Vec<FiniteConfiguration>,
    rule: Rule,
    expansion: OnceLock<Expansion>,
}

impl Clone for BlockWord {
    fn clone(&self) -> Self {
        Self {
            library: self.library.clone(),
            rule: self.rule.clone(),
            expansion: OnceLock::new(),
        }
    }
}

fn apply(rules: &[Vec<usize>], w: &[usize]) -> Vec<usize> {
    w.iter().flat_map(|&x| rules[x].iter().copied()).collect()
}

fn power(rules: &[Vec<usize>], p: usize, w: &[usize]) -> Vec<usize> {
    (0..p).fold(w.to_vec(), |acc, _| apply(rules, &acc))
}

/// Smallest `p ≤ bound` with `σ^p(x)` longer than `x` and extending it on the
/// requested side.
fn stable_power(rules: &[Vec<usize>], x: usize, prefix: bool, bound: usize) -> Option<usize> {
    (1..=bound).find(|&p| {
        let w = power(rules, p, &[x]);
        w.len() > 1 && if prefix { w[0] == x } else { w[w.len() - 1] == x }
    })
}

/// Letters occurring in infinitely many of `τ^n(tail)`; the set map is
/// deterministic on a finite lattice so the sequence of letter sets cycles.
fn recurrent_letters(rules: &[Vec<usize>], p: usize, tail: &[usize]) -> BTreeSet<usize> {
    let step = |s: &BTreeSet<usize>| -> BTreeSet<usize> {
        s.iter().flat_map(|&x| power(rules, p, &[x])).collect()
    };
    let mut seen: Vec<BTreeSet<usize>> = vec![tail.iter().copied().collect()];
    loop {
        let next = step(seen.last().unwrap());
        if let Some(pos) = seen.iter().position(|s| *s == next) {
            return seen[pos..].iter().flatten().copied().collect();
        }
        seen.push(next);
    }
}

impl BlockWord {
    /// Validates the library (non-empty, balanced, compatible) and the rule.
    pub fn new(library: Vec<FiniteConfiguration>, rule: Rule) -> Result<Self> {
        if library.is_empty() {
            return Err(Error::InvalidInput("block library is empty".into()));
        }
        for (index, b) in library.iter().enumerate() {
            if !b.is_balanced(BALANCE_TOLERANCE) {
                return Err(Error::Unbalanced {
                    index,
                    residual: b.max_interior_force(),
                });
            }
        }
        let f0 = library[0].residual_force();
        for (i, b) in library.iter().enumerate().skip(1) {
            let difference = (b.residual_force() - f0).norm();
            if difference > COMPATIBILITY_TOLERANCE * f0.norm().max(1.0) {
                return Err(Error::Incompatible {
                    first: 0,
                    second: i,
                    difference,
                });
            }
        }
        let n = library.len();
        let check = |i: usize, what: &str| -> Result<()> {
            if i < n {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{what} index {i} outside library of {n}")))
            }
        };
        match &rule {
            Rule::Periodic { word } => {
                if word.is_empty() {
                    return Err(Error::InvalidInput("periodic word is empty".into()));
                }
                word.iter().try_for_each(|&i| check(i, "word"))?;
            }
            Rule::Substitution {
                rules,
                axiom,
                left_seed,
            } => {
                if rules.len() != n {
                    return Err(Error::InvalidInput(format!(
                        "substitution needs one rule per library block ({n}), got {}",
                        rules.len()
                    )));
                }
                if rules.iter().any(Vec::is_empty) {
                    return Err(Error::InvalidInput("substitution rules must be non-erasing".into()));
                }
                rules.iter().flatten().try_for_each(|&i| check(i, "substitution"))?;
                check(*axiom, "axiom")?;
                let seed = left_seed.unwrap_or(*axiom);
                check(seed, "left seed")?;
                if stable_power(rules, *axiom, true, n + 1).is_none() {
                    return Err(Error::InvalidInput(format!(
                        "no power of the substitution grows {axiom} as a prefix"
                    )));
                }
                if stable_power(rules, seed, false, n + 1).is_none() {
                    return Err(Error::InvalidInput(format!(
                        "no power of the substitution grows {seed} as a suffix"
                    )));
                }
            }
            Rule::Explicit { indices, fill, .. } => {
                if indices.is_empty() {
                    return Err(Error::InvalidInput("explicit word is empty".into()));
                }
                indices.iter().try_for_each(|&i| check(i, "explicit"))?;
                if let Some(f) = fill {
                    check(*f, "fill")?;
                }
            }
        }
        Ok(Self {
            library,
            rule,
            expansion: OnceLock::new(),
        })
    }

    pub fn library(&self) -> &[FiniteConfiguration] {
        &self.library
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    /// Common residual force of the library.
    pub fn residual_force(&self) -> C64 {
        self.library[0].residual_force()
    }

    fn expansion(&self) -> &Expansion {
        self.expansion.get_or_init(|| {
            let Rule::Substitution {
                rules,
                axiom,
                left_seed,
            } = &self.rule
            else {
                unreachable!("only substitution rules expand")
            };
            let n = self.library.len();
            let seed = left_seed.unwrap_or(*axiom);
            let pr = stable_power(rules, *axiom, true, n + 1).expect("validated");
            let pl = stable_power(rules, seed, false, n + 1).expect("validated");
            let grow = |x: usize, p: usize| -> Vec<usize> {
                let mut w = vec![x];
                while w.len() < EXPANSION_LENGTH {
                    let next = power(rules, p, &w);
                    if next.len() == w.len() {
                        break;
                    }
                    w = next;
                }
                w
            };
            let mut right = grow(*axiom, pr);
            right.truncate(EXPANSION_LENGTH);
            let mut left = grow(seed, pl);
            left.reverse();
            left.truncate(EXPANSION_LENGTH);
            let tail_r = &power(rules, pr, &[*axiom])[1..];
            let tail_l = {
                let w = power(rules, pl, &[seed]);
                w[..w.len() - 1].to_vec()
            };
            let mut recurrent = recurrent_letters(rules, pr, tail_r);
            recurrent.extend(recurrent_letters(rules, pl, &tail_l));
            Expansion {
                right,
                left,
                recurrent,
            }
        })
    }

    /// Library index of block `m`.
    pub fn index(&self, m: i64) -> Result<usize> {
        let uncoverable = |reason: String| Error::Uncoverable { lo: m, hi: m, reason };
        match &self.rule {
            Rule::Periodic { word } => Ok(word[m.rem_euclid(word.len() as i64) as usize]),
            Rule::Substitution { .. } => {
                let e = self.expansion();
                let (side, j) = if m >= 0 {
                    (&e.right, m as usize)
                } else {
                    (&e.left, (-m - 1) as usize)
                };
                side.get(j).copied().ok_or_else(|| {
                    uncoverable(format!("substitution expansion holds {} blocks per side", side.len()))
                })
            }
            Rule::Explicit {
                start,
                indices,
                fill,
            } => {
                let j = m - start;
                if j >= 0 && (j as usize) < indices.len() {
                    Ok(indices[j as usize])
                } else {
                    fill.ok_or_else(|| uncoverable("outside the explicit window and no fill block".into()))
                }
            }
        }
    }

    fn block(&self, m: i64) -> Result<&FiniteConfiguration> {
        Ok(&self.library[self.index(m)?])
    }

    /// Block instances whose levels meet `[lo, hi]`.
    pub fn plan(&self, lo: i64, hi: i64) -> Result<ConcatPlan> {
        if lo > hi {
            return Err(Error::InvalidInput(format!("empty window [{lo}, {hi}]")));
        }
        let cover = |e: Error| match e {
            Error::Uncoverable { reason, .. } => Error::Uncoverable { lo, hi, reason },
            e => e,
        };
        let span = |b: &FiniteConfiguration| b.last_point() - b.first_point();
        // locate the first block: largest m with φ_m ≤ lo
        let (mut m, mut phi, mut pos) = (0i64, 0i64, C64::new(0.0, 0.0));
        while phi > lo {
            m -= 1;
            let b = self.block(m).map_err(cover)?;
            phi -= b.height() as i64;
            pos -= span(b);
        }
        loop {
            let b = self.block(m).map_err(cover)?;
            if phi + b.height() as i64 > lo {
                break;
            }
            phi += b.height() as i64;
            pos += span(b);
            m += 1;
        }
        let mut instances = Vec::new();
        loop {
            let b = self.block(m).map_err(cover)?;
            let h = b.height() as i64;
            instances.push(BlockInstance {
                m,
                library_index: self.index(m).map_err(cover)?,
                offset: phi,
                first_point: pos,
                translation: pos - b.first_point(),
            });
            if phi + h >= hi {
                break;
            }
            phi += h;
            pos += span(b);
            m += 1;
        }
        Ok(ConcatPlan { lo, hi, instances })
    }
}

/// One placed copy of a library block.
#[derive(Debug, Clone, Serialize)]
pub struct BlockInstance {
    pub m: i64,
    pub library_index: usize,
    /// `φ_m`: level of the block's first point.
    pub offset: i64,
    /// Position of the block's first point (shared exactly with the previous block's last).
    pub first_point: C64,
    pub translation: C64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcatPlan {
    pub lo: i64,
    pub hi: i64,
    pub instances: Vec<BlockInstance>,
}

/// Realises the word on levels `lo ..= hi`.
pub fn concatenate(word: &BlockWord, lo: i64, hi: i64) -> Result<Configuration> {
    let plan = word.plan(lo, hi)?;
    let mut levels: Vec<Vec<C64>> = Vec::with_capacity((hi - lo + 1) as usize);
    let count = plan.instances.len();
    for (idx, inst) in plan.instances.iter().enumerate() {
        let b = word.library[inst.library_index].configuration();
        let h = b.last_level();
        for j in 0..=h {
            let level = inst.offset + j;
            if level < lo || level > hi {
                continue;
            }
            // the seam point belongs to the next block's first level
            if j == h && idx + 1 < count {
                continue;
            }
            if j == 0 {
                levels.push(vec![inst.first_point]);
            } else {
                levels.push(b.level(j).iter().map(|p| p + inst.translation).collect());
            }
        }
    }
    Configuration::new(lo, levels)
}

/// Per-block certificates and their uniform bound.
#[derive(Debug, Clone, Serialize)]
pub struct WordCertificate {
    pub blocks: Vec<NondegeneracyCertificate>,
    pub uniform_sigma_min: f64,
    pub passes: bool,
}

pub fn certify_word(word: &BlockWord) -> Result<WordCertificate> {
    let mut blocks = Vec::with_capacity(word.library.len());
    for (index, b) in word.library.iter().enumerate() {
        let cert = certify(b)?;
        if !cert.passes {
            return Err(Error::CertificateFailed {
                index,
                sigma_min: cert.sigma_min,
            });
        }
        blocks.push(cert);
    }
    let uniform_sigma_min = blocks.iter().map(|c| c.sigma_min).fold(f64::INFINITY, f64::min);
    Ok(WordCertificate {
        blocks,
        uniform_sigma_min,
        passes: uniform_sigma_min > 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// Agreement holds on `m ∈ [-window, window]`.
    pub window: usize,
    pub shift: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchBounds {
    pub max_window: usize,
    pub max_shift: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PeriodicityVerdict {
    Periodic { period: usize },
    QuasiPeriodicWitnesses { witnesses: Vec<Witness>, searched: SearchBounds },
    NotDetected { searched: SearchBounds },
}

fn minimal_period(word: &[usize]) -> usize {
    let n = word.len();
    (1..=n)
        .find(|&t| (0..n).all(|i| word[i] == word[(i + t) % n]))
        .unwrap_or(n)
}

/// Periodicity and windowed recurrence of the block index sequence.
pub fn classify(word: &BlockWord, max_window: usize, max_shift: usize) -> Result<PeriodicityVerdict> {
    let searched = SearchBounds {
        max_window,
        max_shift,
    };
    match &word.rule {
        Rule::Periodic { word: w } => Ok(PeriodicityVerdict::Periodic {
            period: minimal_period(w),
        }),
        Rule::Explicit { .. } => Ok(PeriodicityVerdict::NotDetected { searched }),
        Rule::Substitution { .. } => {
            // refute periods over a range twice as long as any shift tried
            let reach = (max_window + 2 * max_shift) as i64;
            let xs: Vec<usize> = (-reach..=reach)
                .map(|m| word.index(m))
                .collect::<Result<_>>()
                .map_err(|e| match e {
                    Error::Uncoverable { reason, .. } => Error::Uncoverable {
                        lo: -reach,
                        hi: reach,
                        reason,
                    },
                    e => e,
                })?;
            let at = |m: i64| xs[(m + reach) as usize];
            let periodic = (1..=max_shift).find(|&t| {
                let t = t as i64;
                (-reach..=reach - t).all(|m| at(m) == at(m + t))
            });
            if let Some(period) = periodic {
                return Ok(PeriodicityVerdict::Periodic { period });
            }
            let mut witnesses = Vec::with_capacity(max_window);
            for w in 1..=max_window {
                let wi = w as i64;
                let shift = (1..=max_shift).find(|&t| (-wi..=wi).all(|m| at(m) == at(m + t as i64)));
                match shift {
                    Some(shift) => witnesses.push(Witness { window: w, shift }),
                    None => return Ok(PeriodicityVerdict::NotDetected { searched }),
                }
            }
            Ok(PeriodicityVerdict::QuasiPeriodicWitnesses { witnesses, searched })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Genus {
    Finite(u64),
    Infinite,
}

impl std::fmt::Display for Genus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Genus::Finite(g) => write!(f, "{g}"),
            Genus::Infinite => f.write_str("infinite"),
        }
    }
}

/// `Σ (n_k - 1)` over `lo ..= hi`, or `Infinite` when a block of width ≥ 2
/// provably recurs infinitely often under the rule.
pub fn genus(word: &BlockWord, lo: i64, hi: i64) -> Result<Genus> {
    let wide = |i: usize| word.library[i].level_type().width() >= 2;
    let infinite = match &word.rule {
        Rule::Periodic { word: w } => w.iter().any(|&i| wide(i)),
        Rule::Explicit { fill, .. } => fill.is_some_and(wide),
        Rule::Substitution { .. } => word.expansion().recurrent.iter().any(|&i| wide(i)),
    };
    if infinite {
        return Ok(Genus::Infinite);
    }
    let cfg = concatenate(word, lo, hi)?;
    Ok(Genus::Finite(cfg.levels().map(|k| cfg.n(k) as u64 - 1).sum()))
}

/// Library entry of a word file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum BlockRef {
    /// Builtin spec such as `fan:n=2` or `chain:a=1,h=1`.
    Builtin(String),
    Block(BlockFile),
}

impl BlockRef {
    pub fn resolve(&self) -> Result<FiniteConfiguration> {
        match self {
            BlockRef::Builtin(spec) => Builtin::parse(spec)?.build(),
            BlockRef::Block(b) => b.clone().into_block(),
        }
    }
}

fn default_residual() -> Option<[f64; 2]> {
    Some([0.0, -0.5])
}

/// `{"library": [...], "rule": {...}, "residual": [re, im] | null}`. Every
/// library block is scaled to `residual` (default `1/(2i)`); `null` keeps
/// blocks as given.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordFile {
    pub library: Vec<BlockRef>,
    pub rule: Rule,
    #[serde(default = "default_residual")]
    pub residual: Option<[f64; 2]>,
}

impl WordFile {
    pub fn into_word(self) -> Result<BlockWord> {
        let mut library = self.library.iter().map(BlockRef::resolve).collect::<Result<Vec<_>>>()?;
        if let Some([re, im]) = self.residual {
            let target = C64::new(re, im);
            library = library
                .iter()
                .map(|b| crate::balance::scale_to_residual(b, target))
                .collect::<Result<_>>()?;
        }
        BlockWord::new(library, self.rule)
    }

    pub fn from_json_str(s: &str) -> Result<BlockWord> {
        serde_json::from_str::<WordFile>(s)?.into_word()
    }
}
