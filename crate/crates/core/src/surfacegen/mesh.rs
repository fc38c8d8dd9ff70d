//! Triangulated sheets-plus-necks model and its OBJ export.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use delaunator::{triangulate, Point};
use serde::{Deserialize, Serialize};

use super::neck::NeckModel;
use super::sheet::SheetModel;
use crate::configspace::C64;
use crate::error::{Error, Result};

const MIN_AREA: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Sheet(i64),
    Neck(i64, usize),
}

impl std::fmt::Display for Tag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tag::Sheet(k) => write!(f, "sheet {k}"),
            Tag::Neck(k, i) => write!(f, "neck {k} {i}"),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    /// One tag per vertex; ring vertices belong to their sheet.
    pub tags: Vec<Tag>,
    /// One tag per triangle.
    pub face_tags: Vec<Tag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub boundary_loops: usize,
    pub components: usize,
    pub euler: i64,
    /// Genus of the closed surface obtained by capping every boundary loop.
    pub genus: i64,
    /// Every edge is shared by at most two triangles.
    pub manifold: bool,
    /// Adjacent triangles traverse their shared edge in opposite directions.
    pub oriented: bool,
}

struct SheetLayout {
    base: usize,
    grid: usize,
    nb: usize,
    ring: usize,
}

impl SheetLayout {
    fn b_ring(&self, i: usize, j: usize) -> usize {
        self.base + self.grid + i * self.ring + j % self.ring
    }
    fn a_ring(&self, i: usize, j: usize) -> usize {
        self.base + self.grid + (self.nb + i) * self.ring + j % self.ring
    }
}

fn cross2(a: C64, b: C64, c: C64) -> f64 {
    let (u, v) = (b - a, c - a);
    u.re * v.im - u.im * v.re
}

impl SurfaceMesh {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    fn push_sheet(&mut self, sheet: &SheetModel) -> SheetLayout {
        let grid = sheet.grid_points();
        let ring = sheet.ring_points();
        let base = self.vertices.len();
        let points: Vec<C64> = grid.iter().chain(&ring).copied().collect();
        for &x in &points {
            self.vertices.push([x.re, x.im, sheet.height(x)]);
            self.tags.push(Tag::Sheet(sheet.level));
        }
        let pts: Vec<Point> = points.iter().map(|p| Point { x: p.re, y: p.im }).collect();
        let tri = triangulate(&pts);
        for t in tri.triangles.chunks_exact(3) {
            let (p, q, r) = (points[t[0]], points[t[1]], points[t[2]]);
            let area = cross2(p, q, r);
            if area.abs() < MIN_AREA || sheet.in_hole((p + q + r) / 3.0, sheet.epsilon) {
                continue;
            }
            let face = if area > 0.0 { [t[0], t[1], t[2]] } else { [t[0], t[2], t[1]] };
            self.triangles.push(face.map(|v| v + base));
            self.face_tags.push(Tag::Sheet(sheet.level));
        }
        SheetLayout { base, grid: grid.len(), nb: sheet.b_nodes.len(), ring: sheet.ring }
    }

    fn push_neck(&mut self, neck: &NeckModel, lower: &SheetLayout, upper: &SheetLayout) {
        let ring = neck.ring();
        let tag = Tag::Neck(neck.level, neck.index);
        let base = self.vertices.len();
        for r in 1..=neck.rows {
            let s = neck.row_parameter(r);
            for j in 0..ring {
                self.vertices.push(neck.point(j, s));
                self.tags.push(tag);
            }
        }
        let row = |r: usize, j: usize| -> usize {
            if r == 0 {
                lower.a_ring(neck.index, j)
            } else if r == neck.rows + 1 {
                upper.b_ring(neck.index, j)
            } else {
                base + (r - 1) * ring + j % ring
            }
        };
        for r in 0..=neck.rows {
            for j in 0..ring {
                let (p, q) = (row(r, j), row(r, j + 1));
                let (pu, qu) = (row(r + 1, j), row(r + 1, j + 1));
                self.triangles.push([p, q, qu]);
                self.triangles.push([p, qu, pu]);
                self.face_tags.push(tag);
                self.face_tags.push(tag);
            }
        }
    }

    /// Flip triangles so each connected piece is consistently oriented, starting
    /// from the orientation of its first triangle.
    fn orient(&mut self) {
        let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (f, t) in self.triangles.iter().enumerate() {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                by_edge.entry((a.min(b), a.max(b))).or_default().push(f);
            }
        }
        let mut seen = vec![false; self.triangles.len()];
        for start in 0..self.triangles.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(f) = stack.pop() {
                let t = self.triangles[f];
                for e in 0..3 {
                    let (a, b) = (t[e], t[(e + 1) % 3]);
                    for &g in &by_edge[&(a.min(b), a.max(b))] {
                        if seen[g] {
                            continue;
                        }
                        seen[g] = true;
                        let u = self.triangles[g];
                        let same = (0..3).any(|d| u[d] == a && u[(d + 1) % 3] == b);
                        if same {
                            self.triangles[g] = [u[0], u[2], u[1]];
                        }
                        stack.push(g);
                    }
                }
            }
        }
    }

    /// Horizontal coordinates divided by 2t: the frame before the affine scaling.
    pub fn unscaled(&self, t: f64) -> SurfaceMesh {
        let mut m = self.clone();
        for v in &mut m.vertices {
            v[0] /= 2.0 * t;
            v[1] /= 2.0 * t;
        }
        m
    }

    pub fn topology(&self) -> Topology {
        let mut edges: BTreeMap<(usize, usize), (usize, i64)> = BTreeMap::new();
        for t in &self.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                let entry = edges.entry((a.min(b), a.max(b))).or_insert((0, 0));
                entry.0 += 1;
                entry.1 += if a < b { 1 } else { -1 };
            }
        }
        let manifold = edges.values().all(|&(n, _)| n <= 2);
        let oriented = edges.values().all(|&(n, s)| n != 2 || s == 0);

        let mut uf = UnionFind::new(self.vertices.len());
        for t in &self.triangles {
            uf.union(t[0], t[1]);
            uf.union(t[1], t[2]);
        }
        let used: Vec<bool> = {
            let mut u = vec![false; self.vertices.len()];
            for t in &self.triangles {
                for &v in t {
                    u[v] = true;
                }
            }
            u
        };
        let components = (0..self.vertices.len()).filter(|&v| used[v] && uf.find(v) == v).count();

        let mut bf = UnionFind::new(self.vertices.len());
        let mut on_boundary = vec![false; self.vertices.len()];
        for (&(a, b), &(n, _)) in &edges {
            if n == 1 {
                bf.union(a, b);
                on_boundary[a] = true;
                on_boundary[b] = true;
            }
        }
        let boundary_loops = (0..self.vertices.len()).filter(|&v| on_boundary[v] && bf.find(v) == v).count();

        let v = used.iter().filter(|&&u| u).count();
        let e = edges.len();
        let f = self.triangles.len();
        let euler = v as i64 - e as i64 + f as i64;
        Topology {
            vertices: v,
            edges: e,
            faces: f,
            boundary_loops,
            components,
            euler,
            genus: (2 * components as i64 - euler - boundary_loops as i64) / 2,
            manifold,
            oriented,
        }
    }

    /// OBJ text. Vertices and faces are grouped by tag with a comment before each run.
    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        s.push_str("# neckstack surface mesh (approximate first-order model: limit sheets and catenoid-like necks)\n");
        let _ = writeln!(s, "# vertices {} faces {}", self.vertices.len(), self.triangles.len());
        let mut last = None;
        for (v, tag) in self.vertices.iter().zip(&self.tags) {
            if last != Some(*tag) {
                let _ = writeln!(s, "# {tag}");
                last = Some(*tag);
            }
            let _ = writeln!(s, "v {:.12e} {:.12e} {:.12e}", v[0], v[1], v[2]);
        }
        let mut last = None;
        for (t, tag) in self.triangles.iter().zip(&self.face_tags) {
            if last != Some(*tag) {
                let _ = writeln!(s, "# {tag}");
                last = Some(*tag);
            }
            let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        s
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Triangulate every sheet and join consecutive sheets through their necks.
pub fn build_mesh(sheets: &[SheetModel], necks: &[NeckModel]) -> Result<SurfaceMesh> {
    let mut mesh = SurfaceMesh::default();
    let mut layouts: BTreeMap<i64, SheetLayout> = BTreeMap::new();
    for s in sheets {
        let layout = mesh.push_sheet(s);
        layouts.insert(s.level, layout);
    }
    for n in necks {
        let (lo, hi) = match (layouts.get(&n.level), layouts.get(&(n.level + 1))) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => {
                return Err(Error::InvalidInput(format!(
                    "neck ({}, {}) has no sheet on one side",
                    n.level, n.index
                )))
            }
        };
        if lo.ring != n.ring() || hi.ring != n.ring() || n.index >= hi.nb {
            return Err(Error::InvalidInput(format!("neck ({}, {}) does not fit its sheets", n.level, n.index)));
        }
        mesh.push_neck(n, lo, hi);
    }
    mesh.orient();
    Ok(mesh)
}

pub fn export_mesh(mesh: &SurfaceMesh, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(mesh.to_obj().as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configspace::Configuration;
    use crate::surfacegen::neck::{build_necks, DEFAULT_ROWS, GLUING_TOLERANCE};
    use crate::surfacegen::sheet::{build_sheets, SheetOptions};

    fn riemann(lo: i64, hi: i64) -> Configuration {
        Configuration::new(lo, (lo..=hi).map(|k| vec![C64::new(k as f64, 0.0)]).collect()).unwrap()
    }

    fn riemann_mesh(grid: usize) -> (Vec<SheetModel>, Vec<NeckModel>, SurfaceMesh) {
        let sheets = build_sheets(&riemann(0, 1), 1e-3, SheetOptions { grid, ..Default::default() }).unwrap();
        let necks = build_necks(&sheets, DEFAULT_ROWS, GLUING_TOLERANCE).unwrap();
        let mesh = build_mesh(&sheets, &necks).unwrap();
        (sheets, necks, mesh)
    }

    #[test]
    fn empty_mesh_exports_header() {
        let m = SurfaceMesh::default();
        let s = m.to_obj();
        assert!(s.starts_with("# neckstack"));
        assert!(s.contains("approximate"));
        assert!(!s.lines().any(|l| l.starts_with("f ")));
    }

    #[test]
    fn three_sheet_vertex_count() {
        let grid = 24;
        let (sheets, necks, mesh) = riemann_mesh(grid);
        assert_eq!(sheets.len(), 3);
        assert_eq!(necks.len(), 2);
        let bbox = sheets[0].bbox;
        let cut = sheets[0].epsilon + 0.5 * bbox.spacing(grid);
        let mut expect = 0;
        for s in &sheets {
            let nodes: Vec<C64> = s.nodes().collect();
            let removed = (0..grid * grid)
                .filter(|&n| {
                    let x = bbox.lattice(grid, n % grid, n / grid);
                    nodes.iter().any(|p| (x - p).norm() < cut)
                })
                .count();
            expect += grid * grid - removed + s.ring * nodes.len();
        }
        expect += necks.len() * sheets[0].ring * DEFAULT_ROWS;
        assert_eq!(mesh.vertices.len(), expect);
        assert_eq!(mesh.tags.len(), expect);
    }

    #[test]
    fn riemann_window_is_a_planar_domain() {
        let (_, _, mesh) = riemann_mesh(24);
        let top = mesh.topology();
        assert!(top.manifold && top.oriented);
        assert_eq!(top.components, 1);
        assert_eq!(top.boundary_loops, 3);
        assert_eq!(top.genus, 0);
        for t in &mesh.triangles {
            let [a, b, c] = t.map(|i| mesh.vertices[i]);
            let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
            let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
            assert!((n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt() > 1e-14);
        }
    }

    #[test]
    fn export_is_deterministic() {
        let (_, _, mesh) = riemann_mesh(16);
        let dir = tempfile::tempdir().unwrap();
        let (p1, p2) = (dir.path().join("a.obj"), dir.path().join("b.obj"));
        export_mesh(&mesh, &p1).unwrap();
        export_mesh(&mesh, &p2).unwrap();
        let (a, b) = (std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.contains("# sheet 0") && text.contains("# neck 1 0"));
        let faces = text.lines().filter(|l| l.starts_with("f ")).count();
        assert_eq!(faces, mesh.triangles.len());
    }

    #[test]
    fn unscaled_frame_divides_horizontal() {
        let (_, _, mesh) = riemann_mesh(8);
        let u = mesh.unscaled(1e-3);
        assert!((u.vertices[5][0] * 2e-3 - mesh.vertices[5][0]).abs() < 1e-12);
        assert_eq!(u.vertices[5][2], mesh.vertices[5][2]);
    }

    // Exact catenoid ρ = c cosh(z/c) built as a neck with waist equal to c.
    fn catenoid_tube(ring: usize, rows: usize) -> (SurfaceMesh, Vec<bool>) {
        let c = 1.0;
        let u = 1.0;
        let z = c * u;
        let neck = NeckModel {
            level: 0,
            index: 0,
            center: C64::new(0.0, 0.0),
            c,
            epsilon: c * u.cosh(),
            lower_ring: vec![-z; ring],
            upper_ring: vec![z; ring],
            z_lower: -z,
            z_upper: z,
            waist: c,
            waist_height: 0.0,
            half_length: u,
            rows,
            inverted: false,
            mismatch: 0.0,
            boundary_variation: 0.0,
        };
        let mut mesh = SurfaceMesh::default();
        let ring_layout = |base| SheetLayout { base, grid: 0, nb: 0, ring };
        for s in [0.0, 1.0] {
            for j in 0..ring {
                mesh.vertices.push(neck.point(j, s));
                mesh.tags.push(Tag::Sheet(0));
            }
        }
        mesh.push_neck(&neck, &ring_layout(0), &ring_layout(ring));
        let interior = (0..mesh.vertices.len()).map(|v| v >= 2 * ring).collect();
        (mesh, interior)
    }

    fn max_mean_curvature(mesh: &SurfaceMesh, interior: &[bool]) -> f64 {
        let n = mesh.vertices.len();
        let mut lap = vec![[0.0; 3]; n];
        let mut area = vec![0.0; n];
        let sub = |a: [f64; 3], b: [f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
        let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let norm_cross = |a: [f64; 3], b: [f64; 3]| {
            let c = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
            dot(c, c).sqrt()
        };
        for t in &mesh.triangles {
            let p = t.map(|i| mesh.vertices[i]);
            let a2 = norm_cross(sub(p[1], p[0]), sub(p[2], p[0]));
            for e in 0..3 {
                let (i, j, k) = (e, (e + 1) % 3, (e + 2) % 3);
                let (u, v) = (sub(p[i], p[k]), sub(p[j], p[k]));
                let cot = dot(u, v) / norm_cross(u, v);
                let d = sub(p[j], p[i]);
                for c in 0..3 {
                    lap[t[i]][c] += 0.5 * cot * d[c];
                    lap[t[j]][c] -= 0.5 * cot * d[c];
                }
                area[t[i]] += a2 / 6.0;
            }
        }
        (0..n)
            .filter(|&v| interior[v])
            .map(|v| dot(lap[v], lap[v]).sqrt() / (2.0 * area[v]))
            .fold(0.0, f64::max)
    }

    #[test]
    fn catenoid_mean_curvature_vanishes_under_refinement() {
        let (m1, i1) = catenoid_tube(24, 11);
        let (m2, i2) = catenoid_tube(48, 23);
        let h1 = max_mean_curvature(&m1, &i1);
        let h2 = max_mean_curvature(&m2, &i2);
        assert!(h2 < h1 / 2.5, "{h1} {h2}");
        assert!(h2 < 0.05);
    }
}
