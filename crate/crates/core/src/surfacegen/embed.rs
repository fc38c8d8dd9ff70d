//! Numeric embeddedness diagnostics for the first-order model.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mesh::SurfaceMesh;
use super::neck::NeckModel;
use super::sheet::SheetModel;

pub const DEFAULT_SAMPLE: usize = 400;
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlabGap {
    pub lower: i64,
    pub upper: i64,
    /// min of the upper sheet minus max of the lower sheet.
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddednessReport {
    pub t: f64,
    pub slabs: Vec<SlabGap>,
    pub slabs_ordered: bool,
    /// Smallest distance between same-gap neck axes minus 2ε (∞ when no pair exists).
    pub cylinder_margin: f64,
    pub cylinders_disjoint: bool,
    pub sampled_triangles: usize,
    pub intersections: usize,
    pub eta: Vec<Option<f64>>,
    pub max_gluing_mismatch: f64,
    pub embedded: bool,
}

type V3 = [f64; 3];

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Segment p→q against triangle (Möller–Trumbore), interior hits only.
fn segment_hits_triangle(p: V3, q: V3, tri: [V3; 3]) -> bool {
    const EPS: f64 = 1e-12;
    let d = sub(q, p);
    let e1 = sub(tri[1], tri[0]);
    let e2 = sub(tri[2], tri[0]);
    let h = cross(d, e2);
    let det = dot(e1, h);
    if det.abs() < EPS * dot(d, d).sqrt() * dot(e1, e1).sqrt() * dot(e2, e2).sqrt() {
        return false;
    }
    let s = sub(p, tri[0]);
    let u = dot(s, h) / det;
    if !(EPS..=1.0 - EPS).contains(&u) {
        return false;
    }
    let qv = cross(s, e1);
    let v = dot(d, qv) / det;
    if v < EPS || u + v > 1.0 - EPS {
        return false;
    }
    let s = dot(e2, qv) / det;
    s > EPS && s < 1.0 - EPS
}

pub fn triangles_intersect(a: [V3; 3], b: [V3; 3]) -> bool {
    (0..3).any(|e| segment_hits_triangle(a[e], a[(e + 1) % 3], b))
        || (0..3).any(|e| segment_hits_triangle(b[e], b[(e + 1) % 3], a))
}

struct Buckets {
    lo: [f64; 2],
    cell: f64,
    n: usize,
    cells: Vec<Vec<usize>>,
}

impl Buckets {
    fn new(mesh: &SurfaceMesh, boxes: &[(V3, V3)]) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &mesh.vertices {
            for c in 0..2 {
                lo[c] = lo[c].min(v[c]);
                hi[c] = hi[c].max(v[c]);
            }
        }
        let n = ((mesh.triangles.len() as f64).sqrt() as usize / 4).clamp(1, 256);
        let cell = ((hi[0] - lo[0]).max(hi[1] - lo[1]) / n as f64).max(f64::MIN_POSITIVE);
        let mut b = Self { lo, cell, n, cells: vec![Vec::new(); n * n] };
        for (f, bx) in boxes.iter().enumerate() {
            let (i0, j0, i1, j1) = b.range(bx);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    b.cells[j * n + i].push(f);
                }
            }
        }
        b
    }

    fn range(&self, bx: &(V3, V3)) -> (usize, usize, usize, usize) {
        let idx = |x: f64, c: usize| (((x - self.lo[c]) / self.cell).floor().max(0.0) as usize).min(self.n - 1);
        (idx(bx.0[0], 0), idx(bx.0[1], 1), idx(bx.1[0], 0), idx(bx.1[1], 1))
    }
}

fn overlaps(a: &(V3, V3), b: &(V3, V3)) -> bool {
    (0..3).all(|c| a.0[c] <= b.1[c] && b.0[c] <= a.1[c])
}

/// Count intersections between `sample_size` seeded random triangles and all
/// triangles sharing no vertex with them.
pub fn intersection_spot_check(mesh: &SurfaceMesh, sample_size: usize, seed: u64) -> (usize, usize) {
    let m = mesh.triangles.len();
    if m == 0 {
        return (0, 0);
    }
    let tri = |f: usize| mesh.triangles[f].map(|v| mesh.vertices[v]);
    let boxes: Vec<(V3, V3)> = (0..m)
        .map(|f| {
            let p = tri(f);
            let mut lo = p[0];
            let mut hi = p[0];
            for q in &p[1..] {
                for c in 0..3 {
                    lo[c] = lo[c].min(q[c]);
                    hi[c] = hi[c].max(q[c]);
                }
            }
            (lo, hi)
        })
        .collect();
    let buckets = Buckets::new(mesh, &boxes);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = sample(&mut rng, m, sample_size.min(m)).into_vec();
    let mut hits = 0;
    for &f in &picks {
        let (i0, j0, i1, j1) = buckets.range(&boxes[f]);
        let mut candidates: Vec<usize> = (j0..=j1)
            .flat_map(|j| (i0..=i1).map(move |i| (i, j)))
            .flat_map(|(i, j)| buckets.cells[j * buckets.n + i].iter().copied())
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        let tf = mesh.triangles[f];
        for g in candidates {
            if g == f || !overlaps(&boxes[f], &boxes[g]) || mesh.triangles[g].iter().any(|v| tf.contains(v)) {
                continue;
            }
            if triangles_intersect(tri(f), tri(g)) {
                hits += 1;
            }
        }
    }
    (picks.len(), hits)
}

pub fn embeddedness_report(
    sheets: &[SheetModel],
    necks: &[NeckModel],
    mesh: &SurfaceMesh,
    t: f64,
    sample_size: usize,
    seed: u64,
) -> EmbeddednessReport {
    let slabs: Vec<SlabGap> = sheets
        .windows(2)
        .map(|w| SlabGap {
            lower: w[0].level,
            upper: w[1].level,
            margin: w[1].height_range().0 - w[0].height_range().1,
        })
        .collect();
    let slabs_ordered = slabs.iter().all(|s| s.margin > 0.0);

    let mut cylinder_margin = f64::INFINITY;
    for (x, n) in necks.iter().enumerate() {
        for m in &necks[x + 1..] {
            if m.level == n.level {
                cylinder_margin = cylinder_margin.min((n.center - m.center).norm() - n.epsilon - m.epsilon);
            }
        }
    }
    let cylinders_disjoint = cylinder_margin > 0.0;
    let (sampled_triangles, intersections) = intersection_spot_check(mesh, sample_size, seed);
    let max_gluing_mismatch = necks.iter().map(|n| n.mismatch).fold(0.0, f64::max);
    EmbeddednessReport {
        t,
        slabs,
        slabs_ordered,
        cylinder_margin,
        cylinders_disjoint,
        sampled_triangles,
        intersections,
        eta: sheets.iter().map(|s| s.eta).collect(),
        max_gluing_mismatch,
        embedded: slabs_ordered && cylinders_disjoint && intersections == 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::{builtin, Builtin};
    use crate::configspace::{Configuration, C64};
    use crate::surfacegen::mesh::build_mesh;
    use crate::surfacegen::neck::{build_necks, DEFAULT_ROWS, GLUING_TOLERANCE};
    use crate::surfacegen::sheet::{build_sheets, build_sheets_unchecked, SheetOptions};

    fn report(cfg: &Configuration, t: f64, unchecked: bool) -> EmbeddednessReport {
        let opts = SheetOptions { grid: 32, ..Default::default() };
        let sheets = if unchecked {
            build_sheets_unchecked(cfg, t, opts).unwrap()
        } else {
            build_sheets(cfg, t, opts).unwrap()
        };
        let necks = build_necks(&sheets, DEFAULT_ROWS, GLUING_TOLERANCE).unwrap();
        let mesh = build_mesh(&sheets, &necks).unwrap();
        embeddedness_report(&sheets, &necks, &mesh, t, DEFAULT_SAMPLE, DEFAULT_SEED)
    }

    #[test]
    fn crossing_triangles_detected() {
        let a = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let b = [[0.2, 0.2, -1.0], [0.3, 0.2, 1.0], [0.2, 0.3, 1.0]];
        assert!(triangles_intersect(a, b));
        let c = b.map(|p| [p[0], p[1], p[2] + 3.0]);
        assert!(!triangles_intersect(a, c));
    }

    #[test]
    fn riemann_small_t_embedded() {
        let cfg = Configuration::new(0, vec![vec![C64::new(0.0, 0.0)], vec![C64::new(1.0, 0.0)]]).unwrap();
        let r = report(&cfg, 1e-3, false);
        assert!(r.embedded, "{r:?}");
        for s in &r.slabs {
            assert!(s.margin > 0.0 && s.margin < -2.0 * 1e-3f64.ln());
        }
    }

    #[test]
    fn fan_large_t_overlaps() {
        let fc = builtin(&Builtin::Fan { n: 2 }).unwrap();
        let r = report(fc.configuration(), 0.5, true);
        assert!(!r.slabs_ordered);
        assert!(!r.embedded);
        let ok = report(fc.configuration(), 1e-3, false);
        assert!(ok.embedded, "{ok:?}");
    }

    #[test]
    fn single_sheet_trivially_embedded() {
        let opts = SheetOptions { grid: 16, ..Default::default() };
        let cfg = Configuration::new(0, vec![vec![C64::new(0.0, 0.0)]]).unwrap();
        let sheets = build_sheets(&cfg, 1e-3, opts).unwrap();
        let one = &sheets[..1];
        let mesh = build_mesh(one, &[]).unwrap();
        let r = embeddedness_report(one, &[], &mesh, 1e-3, DEFAULT_SAMPLE, DEFAULT_SEED);
        assert!(r.embedded);
        assert!(r.slabs.is_empty());
        assert_eq!(r.intersections, 0);
    }
}
