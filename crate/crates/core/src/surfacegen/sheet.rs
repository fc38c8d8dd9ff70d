//! Limit sheets: the graphs of h_k over the plane minus small disks around
//! the necks, stacked at heights −2c_k log t apart.
//!
//! Horizontal positions use the global coordinate X = conj(p), where p is the
//! configuration plane. Sphere k's chart coordinate is ζ = (−1)^k conj^k(conj(X) − ref_k),
//! so even sheets realise ζ ↦ (Re ζ, −Im ζ) and odd sheets ζ ↦ −ζ, up to translation.

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::configspace::{Configuration, C64};
use crate::error::{Error, Result};
use crate::periods::chart::{frame, ChartSet, SphereChart};
use crate::periods::laurent::{laurent, vertical_period, DEFAULT_CUTOFF};

pub const DEFAULT_GRID: usize = 128;
pub const DEFAULT_RING: usize = 48;
pub const DEFAULT_EPSILON: f64 = 0.1;
/// Bounding box margin around the nodes.
pub const BOX_MARGIN: f64 = 3.0;

/// Gauss map on sphere k: t·g_k for even k, 1/(t·g_k) for odd k.
pub fn gauss(chart: &SphereChart, t: f64, z: C64) -> Result<C64> {
    let scale = chart.nodes().iter().map(|n| n.norm()).fold(1.0, f64::max);
    if chart.nodes().iter().any(|n| (z - n).norm() <= 1e-14 * scale) {
        return Err(Error::AtPole { level: chart.level });
    }
    let g = t * chart.g(z);
    if chart.level.rem_euclid(2) == 0 {
        Ok(g)
    } else if g.norm() == 0.0 {
        Err(Error::AtPole { level: chart.level })
    } else {
        Ok(1.0 / g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    /// Even k: ζ ↦ conj(ζ).
    Conjugate,
    /// Odd k: ζ ↦ −ζ.
    Negate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl BoundingBox {
    pub fn around(points: impl Iterator<Item = C64>, margin: f64) -> Self {
        let mut b = BoundingBox {
            xmin: f64::INFINITY,
            xmax: f64::NEG_INFINITY,
            ymin: f64::INFINITY,
            ymax: f64::NEG_INFINITY,
        };
        for p in points {
            b.xmin = b.xmin.min(p.re);
            b.xmax = b.xmax.max(p.re);
            b.ymin = b.ymin.min(p.im);
            b.ymax = b.ymax.max(p.im);
        }
        b.xmin -= margin;
        b.xmax += margin;
        b.ymin -= margin;
        b.ymax += margin;
        b
    }

    pub fn corner(&self) -> C64 {
        C64::new(self.xmin, self.ymin)
    }

    /// Grid point (i, j) of a `grid`×`grid` lattice.
    pub fn lattice(&self, grid: usize, i: usize, j: usize) -> C64 {
        let fx = i as f64 / (grid - 1) as f64;
        let fy = j as f64 / (grid - 1) as f64;
        C64::new(
            self.xmin + fx * (self.xmax - self.xmin),
            self.ymin + fy * (self.ymax - self.ymin),
        )
    }

    pub fn spacing(&self, grid: usize) -> f64 {
        ((self.xmax - self.xmin) / (grid - 1) as f64).max((self.ymax - self.ymin) / (grid - 1) as f64)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SheetModel {
    pub level: i64,
    /// X positions of the level-k points (necks going up).
    pub a_nodes: Vec<C64>,
    /// X positions of the level-(k−1) points (necks going down).
    pub b_nodes: Vec<C64>,
    pub c_upper: f64,
    pub c_lower: f64,
    /// H_k.
    pub offset: f64,
    pub origin: C64,
    pub h_origin: f64,
    pub epsilon: f64,
    pub bbox: BoundingBox,
    pub grid: usize,
    pub ring: usize,
    pub parity: Parity,
    /// Plane point sent to ζ = 0 on this sphere.
    pub chart_reference: C64,
    /// Smallest tested η whose level lines h = ±η are one simple curve per node.
    pub eta: Option<f64>,
}

impl SheetModel {
    /// h_k(X) = Σ c_{k−1} log|X − b| − Σ c_k log|X − a|.
    pub fn h(&self, x: C64) -> f64 {
        let lower: f64 = self.b_nodes.iter().map(|b| (x - b).norm().ln()).sum();
        let upper: f64 = self.a_nodes.iter().map(|a| (x - a).norm().ln()).sum();
        self.c_lower * lower - self.c_upper * upper
    }

    /// Sheet height H_k + h_k(X) − h_k(O).
    pub fn height(&self, x: C64) -> f64 {
        self.offset + self.h(x) - self.h_origin
    }

    pub fn nodes(&self) -> impl Iterator<Item = C64> + '_ {
        self.b_nodes.iter().chain(&self.a_nodes).copied()
    }

    /// Chart coordinate on sphere k of the horizontal point X.
    pub fn chart_coordinate(&self, x: C64) -> C64 {
        frame(self.level, x.conj() - self.chart_reference)
    }

    /// Limit immersion ψ_{k,0} in the scaled frame: chart coordinate to (x1, x2, x3).
    pub fn psi0(&self, zeta: C64) -> [f64; 3] {
        let x = (frame(self.level, zeta) + self.chart_reference).conj();
        [x.re, x.im, self.height(x)]
    }

    pub fn in_hole(&self, x: C64, radius: f64) -> bool {
        self.nodes().any(|n| (x - n).norm() < radius)
    }

    /// Ring point j around a node.
    pub fn ring_point(&self, node: C64, j: usize) -> C64 {
        node + C64::from_polar(self.epsilon, 2.0 * PI * j as f64 / self.ring as f64)
    }

    /// Grid points kept in the mesh: outside every hole by half a grid spacing.
    pub fn grid_points(&self) -> Vec<C64> {
        let cut = self.epsilon + 0.5 * self.bbox.spacing(self.grid);
        let mut out = Vec::new();
        for j in 0..self.grid {
            for i in 0..self.grid {
                let x = self.bbox.lattice(self.grid, i, j);
                if !self.in_hole(x, cut) {
                    out.push(x);
                }
            }
        }
        out
    }

    /// Ring points: b-holes first, then a-holes, `ring` points each.
    pub fn ring_points(&self) -> Vec<C64> {
        self.nodes()
            .flat_map(|n| (0..self.ring).map(move |j| (n, j)))
            .map(|(n, j)| self.ring_point(n, j))
            .collect()
    }

    /// (min, max) of the sheet height over grid and ring points.
    pub fn height_range(&self) -> (f64, f64) {
        self.grid_points()
            .into_iter()
            .chain(self.ring_points())
            .map(|x| self.height(x))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// Grid samples of h − h(O) on the bounding box.
    fn grid_values(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.grid * self.grid);
        for j in 0..self.grid {
            for i in 0..self.grid {
                v.push(self.h(self.bbox.lattice(self.grid, i, j)) - self.h_origin);
            }
        }
        v
    }

    fn node_cell(&self, node: C64) -> (usize, usize) {
        let fx = (node.re - self.bbox.xmin) / (self.bbox.xmax - self.bbox.xmin);
        let fy = (node.im - self.bbox.ymin) / (self.bbox.ymax - self.bbox.ymin);
        let g = (self.grid - 1) as f64;
        ((fx * g).round() as usize, (fy * g).round() as usize)
    }

    /// Components of {±(h − h(O)) ≥ η} on the grid, each given by the nodes it
    /// contains; components touching the box edge get a marker `usize::MAX`.
    pub fn level_components(&self, eta: f64, upper: bool) -> Vec<Vec<usize>> {
        let values = self.grid_values();
        level_components(&values, self.grid, eta, upper, &self.node_cells(upper))
    }

    fn node_cells(&self, upper: bool) -> Vec<(usize, usize)> {
        let nodes = if upper { &self.a_nodes } else { &self.b_nodes };
        nodes.iter().map(|&n| self.node_cell(n)).collect()
    }

    /// True when {h = η} is n_k closed curves, one around each a-node, and
    /// {h = −η} is n_{k−1} curves, one around each b-node.
    pub fn level_lines_simple(&self, eta: f64) -> bool {
        let values = self.grid_values();
        let ok = |upper: bool, count: usize| {
            let comps = level_components(&values, self.grid, eta, upper, &self.node_cells(upper));
            comps.len() == count && comps.iter().all(|c| c.len() == 1 && c[0] != usize::MAX)
        };
        ok(true, self.a_nodes.len()) && ok(false, self.b_nodes.len())
    }

    /// Smallest η on a 0.25 ladder up to `max` with simple level lines.
    pub fn choose_eta(&self, max: f64) -> Option<f64> {
        let values = self.grid_values();
        let mut eta = 0.25;
        while eta <= max {
            let ok = |upper: bool, count: usize| {
                let comps = level_components(&values, self.grid, eta, upper, &self.node_cells(upper));
                comps.len() == count && comps.iter().all(|c| c.len() == 1 && c[0] != usize::MAX)
            };
            if ok(true, self.a_nodes.len()) && ok(false, self.b_nodes.len()) {
                return Some(eta);
            }
            eta += 0.25;
        }
        None
    }
}

// Flood fill of the superlevel (or sublevel) set on a grid, 4-connectivity.
fn level_components(
    values: &[f64],
    grid: usize,
    eta: f64,
    upper: bool,
    nodes: &[(usize, usize)],
) -> Vec<Vec<usize>> {
    let inside = |idx: usize| if upper { values[idx] >= eta } else { values[idx] <= -eta };
    let mut label = vec![usize::MAX; values.len()];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for start in 0..values.len() {
        if label[start] != usize::MAX || !inside(start) {
            continue;
        }
        let id = comps.len();
        let mut members = Vec::new();
        let mut queue = VecDeque::from([start]);
        label[start] = id;
        let mut touches_edge = false;
        while let Some(idx) = queue.pop_front() {
            let (i, j) = (idx % grid, idx / grid);
            if i == 0 || j == 0 || i == grid - 1 || j == grid - 1 {
                touches_edge = true;
            }
            members.push(idx);
            let mut push = |ii: usize, jj: usize| {
                let n = jj * grid + ii;
                if label[n] == usize::MAX && inside(n) {
                    label[n] = id;
                    queue.push_back(n);
                }
            };
            if i > 0 {
                push(i - 1, j);
            }
            if i + 1 < grid {
                push(i + 1, j);
            }
            if j > 0 {
                push(i, j - 1);
            }
            if j + 1 < grid {
                push(i, j + 1);
            }
        }
        let mut owned: Vec<usize> = nodes
            .iter()
            .enumerate()
            .filter(|(_, (i, j))| label[j * grid + i] == id)
            .map(|(n, _)| n)
            .collect();
        if touches_edge {
            owned.push(usize::MAX);
        }
        comps.push(owned);
    }
    comps
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetMode {
    /// H_{k+1} − H_k = −2 c_k log t.
    Leading,
    /// Adds the finite part of the vertical neck period where both spheres are complete.
    WithFinitePart,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SheetOptions {
    pub epsilon: f64,
    pub grid: usize,
    pub ring: usize,
    pub offsets: OffsetMode,
}

impl Default for SheetOptions {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            grid: DEFAULT_GRID,
            ring: DEFAULT_RING,
            offsets: OffsetMode::Leading,
        }
    }
}

fn offset_step(cfg: &Configuration, charts: &ChartSet, sheets: &[SheetModel], k: i64, t: f64, mode: OffsetMode) -> f64 {
    let leading = -2.0 * cfg.c(k) * t.ln();
    if mode == OffsetMode::Leading {
        return leading;
    }
    let (Some(lo), Some(hi)) = (charts.sphere(k), charts.sphere(k + 1)) else {
        return leading;
    };
    if lo.is_partial() || hi.is_partial() {
        return leading;
    }
    let Ok(block) = laurent(lo, hi, 0, DEFAULT_CUTOFF) else {
        return leading;
    };
    let Ok(vp) = vertical_period(&block, t) else {
        return leading;
    };
    // Re ∫_{O_k}^{O_{k+1}} ω split at a + ε' and b + ε'.
    let lower = &sheets[(k - cfg.first_level()) as usize];
    let shift = C64::new(block.constants.epsilon_prime, 0.0);
    let xa = (charts.to_plane(k, block.node_a + shift).unwrap_or_default()).conj();
    let xb = (charts.to_plane(k + 1, block.node_b + shift).unwrap_or_default()).conj();
    let mut upper = lower.clone();
    upper.a_nodes = cfg.level(k + 1).iter().map(|p| p.conj()).collect();
    upper.b_nodes = cfg.level(k).iter().map(|p| p.conj()).collect();
    upper.c_upper = cfg.c(k + 1);
    upper.c_lower = cfg.c(k);
    (lower.h(xa) - lower.h(lower.origin)) + vp.full.re + (upper.h(upper.origin) - upper.h(xb))
}

/// Sheets for spheres first..=last+1 of the window, with no overlap check.
pub fn build_sheets_unchecked(cfg: &Configuration, t: f64, opts: SheetOptions) -> Result<Vec<SheetModel>> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidInput(format!("t = {t} must lie in (0, 1)")));
    }
    if opts.grid < 4 || opts.ring < 8 {
        return Err(Error::InvalidInput("grid must be ≥ 4 and ring ≥ 8".into()));
    }
    let bbox = BoundingBox::around(cfg.all_points().map(|p| p.conj()), BOX_MARGIN);
    let origin = bbox.corner();
    let charts = ChartSet::central(cfg)?;
    let mut sheets: Vec<SheetModel> = Vec::new();
    let mut offset = 0.0;
    for k in cfg.first_level()..=cfg.last_level() + 1 {
        let a_nodes: Vec<C64> = cfg.level(k).iter().map(|p| p.conj()).collect();
        let b_nodes: Vec<C64> = cfg.level(k - 1).iter().map(|p| p.conj()).collect();
        let all: Vec<C64> = b_nodes.iter().chain(&a_nodes).copied().collect();
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                let d = (all[i] - all[j]).norm();
                if d <= 2.0 * opts.epsilon {
                    return Err(Error::InvalidInput(format!(
                        "gluing radius ε = {} is not below half the node gap {d} on sheet {k}",
                        opts.epsilon
                    )));
                }
            }
        }
        if k > cfg.first_level() {
            offset += offset_step(cfg, &charts, &sheets, k - 1, t, opts.offsets);
        }
        let mut sheet = SheetModel {
            level: k,
            a_nodes,
            b_nodes,
            c_upper: cfg.c(k),
            c_lower: cfg.c(k - 1),
            offset,
            origin,
            h_origin: 0.0,
            epsilon: opts.epsilon,
            bbox,
            grid: opts.grid,
            ring: opts.ring,
            parity: if k.rem_euclid(2) == 0 { Parity::Conjugate } else { Parity::Negate },
            chart_reference: charts.references[(k - cfg.first_level()) as usize],
            eta: None,
        };
        sheet.h_origin = sheet.h(origin);
        sheet.eta = sheet.choose_eta(40.0);
        sheets.push(sheet);
    }
    Ok(sheets)
}

/// Sheets with the slab-ordering check: each sheet must lie strictly below the next.
pub fn build_sheets(cfg: &Configuration, t: f64, opts: SheetOptions) -> Result<Vec<SheetModel>> {
    let sheets = build_sheets_unchecked(cfg, t, opts)?;
    for w in sheets.windows(2) {
        let (_, top) = w[0].height_range();
        let (bottom, _) = w[1].height_range();
        if top >= bottom {
            return Err(Error::TooLargeT {
                t,
                lower: w[0].level,
                upper: w[1].level,
                overlap: top - bottom,
            });
        }
    }
    Ok(sheets)
}
