//! Flat base meshes `Γ̄` whose vertices lie on `γ`, uniform refinement and
//! mesh-quality metrics.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{SurfaceDescription, SurfaceKind};
use crate::math::{self, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellKind {
    Segment,
    Triangle,
    Quad,
}

impl CellKind {
    pub fn n_vertices(self) -> usize {
        match self {
            CellKind::Segment => 2,
            CellKind::Triangle => 3,
            CellKind::Quad => 4,
        }
    }

    /// Reference-cell dimension.
    pub fn dim(self) -> usize {
        match self {
            CellKind::Segment => 1,
            _ => 2,
        }
    }

    /// Local edges as pairs of local vertex indices, in canonical order.
    /// Segments have no edges of their own.
    pub fn local_edges(self) -> &'static [(usize, usize)] {
        match self {
            CellKind::Segment => &[],
            CellKind::Triangle => &[(0, 1), (1, 2), (2, 0)],
            CellKind::Quad => &[(0, 1), (1, 2), (2, 3), (3, 0)],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CellKind::Segment => "segment",
            CellKind::Triangle => "triangle",
            CellKind::Quad => "quad",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [CellKind::Segment, CellKind::Triangle, CellKind::Quad]
            .into_iter()
            .find(|c| c.name() == name)
    }
}

/// Base mesh construction knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseOptions {
    /// Edges of the coarsest circle polygon.
    pub circle_segments: usize,
    /// Cells around the tube of the coarsest torus grid; the count around
    /// the central axis is scaled by `major / minor`.
    pub torus_tube_cells: usize,
}

impl Default for BaseOptions {
    fn default() -> Self {
        Self { circle_segments: 6, torus_tube_cells: 6 }
    }
}

/// Conforming, consistently oriented mesh of a closed curve or surface.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseMesh {
    pub surface: SurfaceDescription,
    pub cell_kind: CellKind,
    pub vertices: Vec<Vec3>,
    /// Vertex indices; only the first `cell_kind.n_vertices()` are used.
    pub cells: Vec<[usize; 4]>,
    /// Number of uniform refinements applied to the coarsest mesh.
    pub level: usize,
    /// Unit-sphere chart parameter of each vertex (sphere and implicit
    /// surfaces); empty when new vertices are snapped by closest point.
    pub chart: Vec<Vec3>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshMetrics {
    pub h: f64,
    pub h_min: f64,
    /// Smallest ratio `σ_min/σ_max` of the singular values of the affine
    /// (or bilinear) base map over all cells.
    pub rho: f64,
    /// `h / h_min`
    pub eta: f64,
}

fn cell(vs: &[usize]) -> [usize; 4] {
    let mut c = [usize::MAX; 4];
    c[..vs.len()].copy_from_slice(vs);
    c
}

impl BaseMesh {
    /// Coarsest mesh for the surface, refined `level` times.
    pub fn build(surface: SurfaceDescription, cell_kind: CellKind, level: usize, options: BaseOptions) -> Result<Self> {
        surface.validate()?;
        let mut mesh = Self::coarse(surface, cell_kind, options)?;
        for _ in 0..level {
            mesh = mesh.refine_uniform()?;
        }
        Ok(mesh)
    }

    fn coarse(surface: SurfaceDescription, cell_kind: CellKind, options: BaseOptions) -> Result<Self> {
        let unsupported = || {
            Err(Error::UnsupportedCombination(format!(
                "{} cells on {:?}",
                cell_kind.name(),
                surface.kind
            )))
        };
        let mut chart = Vec::new();
        let (vertices, cells) = match (surface.kind, cell_kind) {
            (SurfaceKind::Circle { radius }, CellKind::Segment) => {
                let n = options.circle_segments;
                if n < 3 {
                    return Err(Error::InvalidArgument("a closed polygon needs at least 3 edges".into()));
                }
                let vertices = (0..n)
                    .map(|i| {
                        let t = 2.0 * core::f64::consts::PI * i as f64 / n as f64;
                        [radius * math::cos(t), radius * math::sin(t), 0.0]
                    })
                    .collect();
                let cells = (0..n).map(|i| cell(&[i, (i + 1) % n])).collect();
                (vertices, cells)
            }
            (SurfaceKind::Circle { .. }, _) | (_, CellKind::Segment) => return unsupported(),
            (SurfaceKind::Torus { major, minor }, kind) => {
                let nv = options.torus_tube_cells.max(3);
                let nu = (libm::round(nv as f64 * major / minor) as usize).max(3);
                let mut vertices = Vec::with_capacity(nu * nv);
                for i in 0..nu {
                    let u = 2.0 * core::f64::consts::PI * i as f64 / nu as f64;
                    for j in 0..nv {
                        let v = 2.0 * core::f64::consts::PI * j as f64 / nv as f64;
                        let rho = major + minor * math::cos(v);
                        vertices.push([rho * math::cos(u), rho * math::sin(u), minor * math::sin(v)]);
                    }
                }
                let id = |i: usize, j: usize| (i % nu) * nv + (j % nv);
                let mut cells = Vec::new();
                for i in 0..nu {
                    for j in 0..nv {
                        let q = [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)];
                        match kind {
                            CellKind::Quad => cells.push(cell(&q)),
                            _ => {
                                cells.push(cell(&[q[0], q[1], q[2]]));
                                cells.push(cell(&[q[0], q[2], q[3]]));
                            }
                        }
                    }
                }
                (vertices, cells)
            }
            (_, kind) => {
                let (dirs, cells) = if kind == CellKind::Triangle { icosahedron() } else { cube() };
                chart = dirs.iter().map(|d| math::normalize(*d)).collect();
                let vertices = chart.iter().map(|d| surface.chart_point(*d)).collect::<Result<Vec<_>>>()?;
                (vertices, cells)
            }
        };
        let mut mesh = BaseMesh { surface, cell_kind, vertices, cells, level: 0, chart };
        mesh.orient_outward()?;
        Ok(mesh)
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn cell_vertices(&self, c: usize) -> &[usize] {
        &self.cells[c][..self.cell_kind.n_vertices()]
    }

    /// Outward direction of the flat cell: tangent for segments (rotated
    /// normal), area vector for 2D cells.
    fn cell_area_vector(&self, c: usize) -> Vec3 {
        let v = self.cell_vertices(c);
        let p = |i: usize| self.vertices[v[i]];
        match self.cell_kind {
            CellKind::Segment => {
                // rotate the chord by −90° in the plane
                let t = math::sub(p(1), p(0));
                [t[1], -t[0], 0.0]
            }
            CellKind::Triangle => math::scale(math::cross(math::sub(p(1), p(0)), math::sub(p(2), p(0))), 0.5),
            CellKind::Quad => math::scale(math::cross(math::sub(p(2), p(0)), math::sub(p(3), p(1))), 0.5),
        }
    }

    fn centroid(&self, c: usize) -> Vec3 {
        let v = self.cell_vertices(c);
        let s = v.iter().fold([0.0; 3], |a, &i| math::add(a, self.vertices[i]));
        math::scale(s, 1.0 / v.len() as f64)
    }

    /// Flips cells whose area vector points into the surface.
    fn orient_outward(&mut self) -> Result<()> {
        for c in 0..self.n_cells() {
            let centroid = self.centroid(c);
            let normal = match self.surface.project(centroid) {
                Ok(p) => p.normal,
                // far from the surface at coarse levels; the cell centroid
                // direction is outward for star-shaped surfaces
                Err(_) => centroid,
            };
            if math::dot(self.cell_area_vector(c), normal) < 0.0 {
                let n = self.cell_kind.n_vertices();
                self.cells[c][..n].reverse();
            }
        }
        Ok(())
    }

    /// New vertex at the average of `parents`: the chart image of the
    /// averaged parameter when a chart is kept, else the closest point.
    fn new_vertex(&self, parents: &[usize], chart: &mut Vec<Vec3>, vertex: usize) -> Result<Vec3> {
        let mean = |pts: &[Vec3]| {
            let s = parents.iter().fold([0.0; 3], |a, &i| math::add(a, pts[i]));
            math::scale(s, 1.0 / parents.len() as f64)
        };
        if self.chart.is_empty() {
            return self.surface.closest_point(mean(&self.vertices)).map_err(|_| Error::ProjectionFailure { vertex });
        }
        let dir = math::normalize(mean(&self.chart));
        chart.push(dir);
        self.surface.chart_point(dir).map_err(|_| Error::ProjectionFailure { vertex })
    }

    /// Midpoint subdivision with new vertices placed on `γ`.
    pub fn refine_uniform(&self) -> Result<Self> {
        let mut vertices = self.vertices.clone();
        let mut chart = self.chart.clone();
        let mut edge_mid: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec3>, chart: &mut Vec<Vec3>| -> Result<usize> {
            let key = (a.min(b), a.max(b));
            if let Some(&m) = edge_mid.get(&key) {
                return Ok(m);
            }
            let p = self.new_vertex(&[key.0, key.1], chart, vertices.len())?;
            vertices.push(p);
            edge_mid.insert(key, vertices.len() - 1);
            Ok(vertices.len() - 1)
        };
        let mut cells = Vec::with_capacity(self.n_cells() * 4);
        for c in 0..self.n_cells() {
            let v = self.cell_vertices(c);
            match self.cell_kind {
                CellKind::Segment => {
                    let m = mid(v[0], v[1], &mut vertices, &mut chart)?;
                    cells.push(cell(&[v[0], m]));
                    cells.push(cell(&[m, v[1]]));
                }
                CellKind::Triangle => {
                    let m01 = mid(v[0], v[1], &mut vertices, &mut chart)?;
                    let m12 = mid(v[1], v[2], &mut vertices, &mut chart)?;
                    let m20 = mid(v[2], v[0], &mut vertices, &mut chart)?;
                    cells.push(cell(&[v[0], m01, m20]));
                    cells.push(cell(&[m01, v[1], m12]));
                    cells.push(cell(&[m20, m12, v[2]]));
                    cells.push(cell(&[m01, m12, m20]));
                }
                CellKind::Quad => {
                    let e0 = mid(v[0], v[1], &mut vertices, &mut chart)?;
                    let e1 = mid(v[1], v[2], &mut vertices, &mut chart)?;
                    let e2 = mid(v[2], v[3], &mut vertices, &mut chart)?;
                    let e3 = mid(v[3], v[0], &mut vertices, &mut chart)?;
                    let f = vertices.len();
                    vertices.push(self.new_vertex(v, &mut chart, f)?);
                    cells.push(cell(&[v[0], e0, f, e3]));
                    cells.push(cell(&[e0, v[1], e1, f]));
                    cells.push(cell(&[f, e1, v[2], e2]));
                    cells.push(cell(&[e3, f, e2, v[3]]));
                }
            }
        }
        Ok(BaseMesh {
            surface: self.surface,
            cell_kind: self.cell_kind,
            vertices,
            cells,
            level: self.level + 1,
            chart,
        })
    }

    /// Base map `F̄_T` at reference point `x` (affine for segments and
    /// triangles, bilinear for quads).
    pub fn base_map(&self, c: usize, x: [f64; 2]) -> Vec3 {
        let v = self.cell_vertices(c);
        let p = |i: usize| self.vertices[v[i]];
        match self.cell_kind {
            CellKind::Segment => math::axpy(math::scale(p(0), 1.0 - x[0]), x[0], p(1)),
            CellKind::Triangle => {
                let a = math::scale(p(0), 1.0 - x[0] - x[1]);
                math::axpy(math::axpy(a, x[0], p(1)), x[1], p(2))
            }
            CellKind::Quad => {
                let (s, t) = (x[0], x[1]);
                let a = math::scale(p(0), (1.0 - s) * (1.0 - t));
                let a = math::axpy(a, s * (1.0 - t), p(1));
                let a = math::axpy(a, s * t, p(2));
                math::axpy(a, (1.0 - s) * t, p(3))
            }
        }
    }

    /// Columns of `DF̄_T` at `x`; the second column is zero for segments.
    pub fn base_jacobian(&self, c: usize, x: [f64; 2]) -> [Vec3; 2] {
        let v = self.cell_vertices(c);
        let p = |i: usize| self.vertices[v[i]];
        match self.cell_kind {
            CellKind::Segment => [math::sub(p(1), p(0)), [0.0; 3]],
            CellKind::Triangle => [math::sub(p(1), p(0)), math::sub(p(2), p(0))],
            CellKind::Quad => {
                let (s, t) = (x[0], x[1]);
                let ds = math::axpy(
                    math::scale(math::sub(p(1), p(0)), 1.0 - t),
                    t,
                    math::sub(p(2), p(3)),
                );
                let dt = math::axpy(
                    math::scale(math::sub(p(3), p(0)), 1.0 - s),
                    s,
                    math::sub(p(2), p(1)),
                );
                [ds, dt]
            }
        }
    }

    /// Largest distance between two vertices of the cell.
    pub fn cell_diameter(&self, c: usize) -> f64 {
        let v = self.cell_vertices(c);
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max(math::dist(self.vertices[v[i]], self.vertices[v[j]]));
            }
        }
        d
    }

    fn cell_shape_ratio(&self, c: usize) -> f64 {
        if self.cell_kind == CellKind::Segment {
            return 1.0;
        }
        let samples: &[[f64; 2]] = match self.cell_kind {
            CellKind::Quad => &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            _ => &[[0.0, 0.0]],
        };
        samples
            .iter()
            .map(|x| {
                let m = math::Metric::new(&self.base_jacobian(c, *x), 2);
                let g = m.g;
                let tr = g[0][0] + g[1][1];
                let det = g[0][0] * g[1][1] - g[0][1] * g[0][1];
                let disc = math::sqrt((0.25 * tr * tr - det).max(0.0));
                let hi = 0.5 * tr + disc;
                let lo = (0.5 * tr - disc).max(0.0);
                math::sqrt(lo / hi)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn metrics(&self) -> MeshMetrics {
        let mut h: f64 = 0.0;
        let mut h_min = f64::INFINITY;
        let mut rho: f64 = 1.0;
        for c in 0..self.n_cells() {
            let d = self.cell_diameter(c);
            h = h.max(d);
            h_min = h_min.min(d);
            rho = rho.min(self.cell_shape_ratio(c));
        }
        MeshMetrics { h, h_min, rho, eta: h / h_min }
    }

    /// Unique undirected edges `(min, max)` of 2D meshes in first-seen
    /// order, each with the cells using it.
    pub fn edges(&self) -> Vec<((usize, usize), Vec<usize>)> {
        let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut out: Vec<((usize, usize), Vec<usize>)> = Vec::new();
        for c in 0..self.n_cells() {
            let v = self.cell_vertices(c);
            for &(a, b) in self.cell_kind.local_edges() {
                let key = (v[a].min(v[b]), v[a].max(v[b]));
                let slot = *index.entry(key).or_insert_with(|| {
                    out.push((key, Vec::new()));
                    out.len() - 1
                });
                out[slot].1.push(c);
            }
        }
        out
    }

    /// Facet-to-cell incidence: vertices for curves, edges for surfaces.
    pub fn facets(&self) -> Vec<((usize, usize), Vec<usize>)> {
        if self.cell_kind == CellKind::Segment {
            let mut inc: Vec<Vec<usize>> = alloc::vec![Vec::new(); self.n_vertices()];
            for c in 0..self.n_cells() {
                for &v in self.cell_vertices(c) {
                    inc[v].push(c);
                }
            }
            inc.into_iter().enumerate().map(|(v, cs)| ((v, v), cs)).collect()
        } else {
            self.edges()
        }
    }

    /// `V − E + F` for surfaces, `V − E` for curves.
    pub fn euler_characteristic(&self) -> i64 {
        let v = self.n_vertices() as i64;
        let f = self.n_cells() as i64;
        if self.cell_kind == CellKind::Segment {
            v - f
        } else {
            v - self.edges().len() as i64 + f
        }
    }

    /// Every facet shared by exactly two cells.
    pub fn is_watertight(&self) -> bool {
        self.facets().iter().all(|(_, cs)| cs.len() == 2)
    }

    /// Every shared facet is traversed in opposite directions by its two
    /// cells (equivalently, segments chain head to tail).
    pub fn is_consistently_oriented(&self) -> bool {
        if self.cell_kind == CellKind::Segment {
            let mut starts = alloc::vec![0usize; self.n_vertices()];
            let mut ends = alloc::vec![0usize; self.n_vertices()];
            for c in 0..self.n_cells() {
                let v = self.cell_vertices(c);
                starts[v[0]] += 1;
                ends[v[1]] += 1;
            }
            return starts.iter().zip(&ends).all(|(&s, &e)| s == 1 && e == 1);
        }
        let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for c in 0..self.n_cells() {
            let v = self.cell_vertices(c);
            for &(a, b) in self.cell_kind.local_edges() {
                *directed.entry((v[a], v[b])).or_insert(0) += 1;
            }
        }
        directed.iter().all(|(&(a, b), &n)| n == 1 && directed.get(&(b, a)) == Some(&1))
    }

    /// Sum of cell area vectors; vanishes for a closed, consistently
    /// oriented mesh.
    pub fn area_vector_sum(&self) -> Vec3 {
        (0..self.n_cells()).fold([0.0; 3], |a, c| math::add(a, self.cell_area_vector(c)))
    }

    /// Largest `|d|` over the mesh vertices.
    pub fn max_vertex_distance(&self) -> Result<f64> {
        let mut m: f64 = 0.0;
        for v in &self.vertices {
            m = m.max(self.surface.signed_distance(*v)?.abs());
        }
        Ok(m)
    }
}

fn icosahedron() -> (Vec<Vec3>, Vec<[usize; 4]>) {
    let t = 0.5 * (1.0 + math::sqrt(5.0));
    let dirs = alloc::vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let faces: [[usize; 3]; 20] = [
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (dirs, faces.iter().map(|f| cell(f)).collect())
}

fn cube() -> (Vec<Vec3>, Vec<[usize; 4]>) {
    let mut dirs = Vec::with_capacity(8);
    for i in 0..8 {
        let s = |b: usize| if i & b != 0 { 1.0 } else { -1.0 };
        dirs.push([s(1), s(2), s(4)]);
    }
    let faces: [[usize; 4]; 6] = [
        [0, 2, 3, 1],
        [4, 5, 7, 6],
        [0, 1, 5, 4],
        [2, 6, 7, 3],
        [0, 4, 6, 2],
        [1, 3, 7, 5],
    ];
    (dirs, faces.iter().map(|f| cell(f)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LevelSet;
    use approx::assert_abs_diff_eq;

    fn hexagon() -> BaseMesh {
        BaseMesh::build(SurfaceDescription::circle(1.0), CellKind::Segment, 0, BaseOptions::default()).unwrap()
    }

    #[test]
    fn hexagon_metrics() {
        let m = hexagon();
        assert_eq!((m.n_vertices(), m.n_cells()), (6, 6));
        let mm = m.metrics();
        assert_abs_diff_eq!(mm.h, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mm.eta, 1.0, epsilon = 1e-14);
        assert!(m.is_consistently_oriented() && m.is_watertight());
        assert_eq!(m.euler_characteristic(), 0);
    }

    #[test]
    fn hexagon_refines_to_unit_twelve_gon() {
        let m = hexagon().refine_uniform().unwrap();
        assert_eq!(m.n_cells(), 12);
        for v in &m.vertices {
            assert_abs_diff_eq!(math::norm(*v), 1.0, epsilon = 1e-15);
        }
        assert!(m.is_consistently_oriented());
    }

    #[test]
    fn icosahedron_combinatorics() {
        let m = BaseMesh::build(SurfaceDescription::sphere(1.0), CellKind::Triangle, 0, BaseOptions::default())
            .unwrap();
        assert_eq!((m.n_vertices(), m.n_cells(), m.edges().len()), (12, 20, 30));
        let r = m.refine_uniform().unwrap();
        assert_eq!(r.n_cells(), 80);
    }

    #[test]
    fn cube_sphere_combinatorics() {
        let m = BaseMesh::build(SurfaceDescription::sphere(1.0), CellKind::Quad, 0, BaseOptions::default()).unwrap();
        assert_eq!((m.n_vertices(), m.n_cells()), (8, 6));
    }

    #[test]
    fn closed_surfaces_stay_watertight_and_oriented() {
        let cases = [
            (SurfaceDescription::sphere(1.0), CellKind::Triangle, 2),
            (SurfaceDescription::sphere(1.0), CellKind::Quad, 2),
            (SurfaceDescription::torus(2.0, 1.0), CellKind::Quad, 0),
            (SurfaceDescription::torus(2.0, 1.0), CellKind::Triangle, 0),
            (SurfaceDescription::implicit(LevelSet::SkewedBentSphere), CellKind::Quad, 0),
            (SurfaceDescription::implicit(LevelSet::BentSphere), CellKind::Triangle, 0),
        ];
        for (s, kind, levels) in cases {
            let mut m = BaseMesh::build(s, kind, 0, BaseOptions::default()).unwrap();
            for _ in 0..=levels {
                let chi = if matches!(s.kind, SurfaceKind::Torus { .. }) { 0 } else { 2 };
                assert_eq!(m.euler_characteristic(), chi);
                assert!(m.is_watertight());
                assert!(m.is_consistently_oriented(), "{kind:?} {:?}", s.kind);
                let sum = m.area_vector_sum();
                assert!(math::norm(sum) < 1e-12);
                assert!(m.max_vertex_distance().unwrap() < 1e-12);
                let before = m.n_cells();
                m = m.refine_uniform().unwrap();
                assert_eq!(m.n_cells(), 4 * before);
            }
        }
    }

    #[test]
    fn sphere_diameter_halves_under_refinement() {
        let mut m = BaseMesh::build(SurfaceDescription::sphere(1.0), CellKind::Triangle, 0, BaseOptions::default())
            .unwrap();
        let mut h = m.metrics().h;
        for _ in 0..3 {
            m = m.refine_uniform().unwrap();
            let h2 = m.metrics().h;
            assert!((0.45..0.62).contains(&(h2 / h)), "ratio {}", h2 / h);
            h = h2;
        }
    }

    #[test]
    fn equilateral_triangle_shape_ratio() {
        // an equilateral triangle of side s: G = s²[[1, ½], [½, 1]], σ ratio = 1/√3
        let s = 0.3;
        let mut m = BaseMesh::build(SurfaceDescription::sphere(1.0), CellKind::Triangle, 0, BaseOptions::default())
            .unwrap();
        m.vertices = alloc::vec![[0.0, 0.0, 0.0], [s, 0.0, 0.0], [0.5 * s, 0.5 * s * math::sqrt(3.0), 0.0]];
        m.cells = alloc::vec![[0, 1, 2, usize::MAX]];
        let mm = m.metrics();
        assert_abs_diff_eq!(mm.rho, 1.0 / math::sqrt(3.0), epsilon = 1e-14);
        assert_abs_diff_eq!(mm.eta, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn unsupported_cells() {
        let e = BaseMesh::build(SurfaceDescription::circle(1.0), CellKind::Quad, 0, BaseOptions::default());
        assert!(matches!(e, Err(Error::UnsupportedCombination(_))));
        let e = BaseMesh::build(SurfaceDescription::sphere(1.0), CellKind::Segment, 0, BaseOptions::default());
        assert!(matches!(e, Err(Error::UnsupportedCombination(_))));
    }
}
