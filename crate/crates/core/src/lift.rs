//! Degree-`k` approximate surface `Γ`: every base cell carries the
//! polynomial map `F_T = L ∘ F̄_T` interpolating control points
//! `L(x^j) = ψ(F̄_T(x̂^j))`, optionally displaced along the normal.
//!
//! Control points live in a global node table shared by neighboring cells,
//! so the lifted surface is continuous by construction.

use alloc::format;
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::{self, Metric, Vec3};
use crate::mesh::{BaseMesh, CellKind};
use crate::reference::{cell_interior_count, LagrangeElement, NodeFamily};

/// Unperturbed placement of the interpolation points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Equispaced,
    GaussLobatto,
}

impl PointKind {
    pub fn name(self) -> &'static str {
        match self {
            PointKind::Equispaced => "equispaced",
            PointKind::GaussLobatto => "gauss_lobatto",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "equispaced" => Some(PointKind::Equispaced),
            "gauss_lobatto" => Some(PointKind::GaussLobatto),
            _ => None,
        }
    }

    fn family(self) -> NodeFamily {
        match self {
            PointKind::Equispaced => NodeFamily::Equispaced,
            PointKind::GaussLobatto => NodeFamily::GaussLobatto,
        }
    }
}

/// Normal displacement `h^{k+1}·U(center − width/2, center + width/2)` drawn
/// once per global node from a seeded ChaCha8 stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub center: f64,
    pub width: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationPointSet {
    pub kind: PointKind,
    pub perturbation: Option<Perturbation>,
    pub degree: usize,
    pub cell_kind: CellKind,
    /// Reference coordinates in canonical local node order.
    pub reference_points: Vec<[f64; 2]>,
}

impl InterpolationPointSet {
    pub fn new(cell_kind: CellKind, kind: PointKind, degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidArgument("lift degree must be at least 1".into()));
        }
        if cell_kind == CellKind::Triangle && kind == PointKind::GaussLobatto && degree > 1 {
            return Err(Error::UnsupportedCombination(format!(
                "Gauss-Lobatto lift points of degree {degree} on triangles"
            )));
        }
        let element = LagrangeElement::new(cell_kind, degree, kind.family())?;
        Ok(Self { kind, perturbation: None, degree, cell_kind, reference_points: element.nodes })
    }

    pub fn perturbed(mut self, perturbation: Perturbation) -> Result<Self> {
        if !(perturbation.width >= 0.0) || !perturbation.center.is_finite() {
            return Err(Error::InvalidArgument("perturbation width must be non-negative".into()));
        }
        self.perturbation = Some(perturbation);
        Ok(self)
    }

    /// Order `ℓ` of the quadrature rule whose nodes are these points: the
    /// `(k+1)`-point Gauss–Lobatto rule has `ℓ = 2k`; closed Newton–Cotes
    /// has `ℓ = k + 2` for even `k` and `k + 1` for odd `k`. Triangle
    /// Lagrange points only carry `ℓ = k + 1`.
    pub fn order_ell(&self) -> usize {
        let k = self.degree;
        match (self.cell_kind, self.kind) {
            (CellKind::Triangle, _) => k + 1,
            (_, PointKind::GaussLobatto) => 2 * k,
            (_, PointKind::Equispaced) => {
                if k % 2 == 0 {
                    k + 2
                } else {
                    k + 1
                }
            }
        }
    }
}

/// Global numbering of the nodes of a degree-`p` Lagrange layout on a base
/// mesh: vertices, then edge interiors (edge by edge), then cell interiors.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub degree: usize,
    pub n_local: usize,
    pub n_global: usize,
    cell_dofs: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &BaseMesh, degree: usize) -> Self {
        let kind = mesh.cell_kind;
        let nv = kind.n_vertices();
        let per_edge = degree - 1;
        let n_local = match kind {
            CellKind::Segment => degree + 1,
            CellKind::Triangle => (degree + 1) * (degree + 2) / 2,
            CellKind::Quad => (degree + 1) * (degree + 1),
        };
        let interior = match kind {
            CellKind::Segment => 0,
            k => cell_interior_count(k, degree),
        };
        let mut cell_dofs = alloc::vec![usize::MAX; mesh.n_cells() * n_local];
        let mut next = mesh.n_vertices();
        for c in 0..mesh.n_cells() {
            let v = mesh.cell_vertices(c);
            cell_dofs[c * n_local..c * n_local + nv].copy_from_slice(v);
        }
        if kind == CellKind::Segment {
            for c in 0..mesh.n_cells() {
                for p in 0..per_edge {
                    cell_dofs[c * n_local + 2 + p] = next;
                    next += 1;
                }
            }
        } else {
            for ((a, b), cells) in mesh.edges() {
                let base = next;
                next += per_edge;
                for c in cells {
                    let v = mesh.cell_vertices(c);
                    let (slot, forward) = kind
                        .local_edges()
                        .iter()
                        .enumerate()
                        .find_map(|(e, &(i, j))| {
                            if (v[i], v[j]) == (a, b) {
                                Some((e, true))
                            } else if (v[i], v[j]) == (b, a) {
                                Some((e, false))
                            } else {
                                None
                            }
                        })
                        .expect("edge belongs to its cells");
                    for p in 0..per_edge {
                        let g = if forward { base + p } else { base + per_edge - 1 - p };
                        cell_dofs[c * n_local + nv + slot * per_edge + p] = g;
                    }
                }
            }
            let start = nv + kind.local_edges().len() * per_edge;
            for c in 0..mesh.n_cells() {
                for p in 0..interior {
                    cell_dofs[c * n_local + start + p] = next;
                    next += 1;
                }
            }
        }
        Self { degree, n_local, n_global: next, cell_dofs }
    }

    pub fn n_cells(&self) -> usize {
        self.cell_dofs.len() / self.n_local
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cell_dofs[c * self.n_local..(c + 1) * self.n_local]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedMesh {
    pub base: BaseMesh,
    pub degree: usize,
    pub point_set: InterpolationPointSet,
    pub element: LagrangeElement,
    pub nodes: DofMap,
    /// `L(x^j)` per global node.
    pub control_points: Vec<Vec3>,
    /// `ψ(x^j)` per global node.
    pub exact_points: Vec<Vec3>,
    pub quadrature_order_ell: usize,
    /// `h` of the base mesh.
    pub h: f64,
}

impl LiftedMesh {
    pub fn build(base: BaseMesh, point_set: InterpolationPointSet) -> Result<Self> {
        if point_set.cell_kind != base.cell_kind {
            return Err(Error::UnsupportedCombination(format!(
                "{} interpolation points on a {} mesh",
                point_set.cell_kind.name(),
                base.cell_kind.name()
            )));
        }
        let degree = point_set.degree;
        let element = LagrangeElement::new(base.cell_kind, degree, point_set.kind.family())?;
        let nodes = DofMap::new(&base, degree);
        let h = base.metrics().h;

        let mut flat: Vec<Option<Vec3>> = alloc::vec![None; nodes.n_global];
        for c in 0..base.n_cells() {
            for (x, &g) in element.nodes.iter().zip(nodes.cell(c)) {
                let p = base.base_map(c, *x);
                match flat[g] {
                    None => flat[g] = Some(p),
                    Some(q) => {
                        if math::dist(p, q) > 1e-10 * (1.0 + h) {
                            return Err(Error::ContinuityViolation);
                        }
                    }
                }
            }
        }

        let n_vertices = base.n_vertices();
        let mut exact_points = Vec::with_capacity(nodes.n_global);
        let mut normals = Vec::with_capacity(nodes.n_global);
        for (g, p) in flat.iter().enumerate() {
            let p = p.ok_or(Error::ContinuityViolation)?;
            let proj = base.surface.project(p).map_err(|_| Error::ProjectionFailure { vertex: g })?;
            // base vertices already sit on γ; keep them bitwise
            exact_points.push(if g < n_vertices { base.vertices[g] } else { proj.point });
            normals.push(proj.normal);
        }

        let mut control_points = exact_points.clone();
        if let Some(pert) = point_set.perturbation {
            let mut rng = ChaCha8Rng::seed_from_u64(pert.seed);
            let scale = math::powi(h, degree as i32 + 1);
            for (cp, n) in control_points.iter_mut().zip(&normals) {
                // 53 random bits → uniform on [0, 1)
                let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                let delta = scale * (pert.center + pert.width * (u - 0.5));
                *cp = math::axpy(*cp, delta, *n);
            }
        }

        let quadrature_order_ell = point_set.order_ell();
        Ok(Self { base, degree, point_set, element, nodes, control_points, exact_points, quadrature_order_ell, h })
    }

    pub fn n_cells(&self) -> usize {
        self.base.n_cells()
    }

    pub fn dim(&self) -> usize {
        self.base.cell_kind.dim()
    }

    /// Control points of cell `c` in local order.
    pub fn cell_controls(&self, c: usize) -> impl Iterator<Item = Vec3> + '_ {
        self.nodes.cell(c).iter().map(|&g| self.control_points[g])
    }

    pub fn map_point(&self, c: usize, x: [f64; 2]) -> Vec3 {
        let mut val = alloc::vec![0.0; self.element.n_nodes()];
        self.element.eval(x, &mut val);
        combine_points(self.cell_controls(c), &val)
    }

    /// `DF_T` columns and `Q = sqrt(det(DF_TᵀDF_T))` at `x`.
    pub fn map_jacobian(&self, c: usize, x: [f64; 2]) -> Result<([Vec3; 2], f64)> {
        let n = self.element.n_nodes();
        let mut val = alloc::vec![0.0; n];
        let mut grad = alloc::vec![[0.0; 2]; n];
        self.element.eval_with_grad(x, &mut val, &mut grad);
        let cols = combine_jacobian(self.cell_controls(c), &grad, self.dim());
        let q = Metric::new(&cols, self.dim()).area_factor;
        if !(q > 0.0) {
            return Err(Error::DegenerateCell { cell: c, area_factor: q });
        }
        Ok((cols, q))
    }

    /// Largest `|L(x^j) − ψ(x^j)|`.
    pub fn max_node_offset(&self) -> f64 {
        self.control_points
            .iter()
            .zip(&self.exact_points)
            .map(|(a, b)| math::dist(*a, *b))
            .fold(0.0, f64::max)
    }
}

/// `Σ p_i v_i`
pub fn combine_points(points: impl Iterator<Item = Vec3>, weights: &[f64]) -> Vec3 {
    points.zip(weights).fold([0.0; 3], |a, (p, w)| math::axpy(a, *w, p))
}

/// Columns `Σ p_i ∂_a φ_i`; the second column is zero when `dim == 1`.
pub fn combine_jacobian(points: impl Iterator<Item = Vec3>, grads: &[[f64; 2]], dim: usize) -> [Vec3; 2] {
    let mut cols = [[0.0; 3]; 2];
    for (p, g) in points.zip(grads) {
        cols[0] = math::axpy(cols[0], g[0], p);
        if dim == 2 {
            cols[1] = math::axpy(cols[1], g[1], p);
        }
    }
    cols
}

/// Unit normal of `Γ` from its Jacobian columns, oriented like the base mesh.
pub fn discrete_normal(cols: &[Vec3; 2], dim: usize) -> Vec3 {
    if dim == 1 {
        math::normalize([cols[0][1], -cols[0][0], 0.0])
    } else {
        math::normalize(math::cross(cols[0], cols[1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SurfaceDescription;
    use crate::mesh::BaseOptions;
    use approx::assert_abs_diff_eq;

    fn circle_mesh(level: usize) -> BaseMesh {
        BaseMesh::build(SurfaceDescription::circle(1.0), CellKind::Segment, level, BaseOptions::default()).unwrap()
    }

    #[test]
    fn dof_counts() {
        let ico = BaseMesh::build(SurfaceDescription::sphere(1.0), CellKind::Triangle, 0, BaseOptions::default())
            .unwrap();
        assert_eq!(DofMap::new(&ico, 1).n_global, 12);
        assert_eq!(DofMap::new(&ico, 2).n_global, 42);
        assert_eq!(DofMap::new(&ico, 3).n_global, 12 + 60 + 20);
        assert_eq!(DofMap::new(&circle_mesh(0), 1).n_global, 6);
        assert_eq!(DofMap::new(&circle_mesh(0), 3).n_global, 18);
        let cube = BaseMesh::build(SurfaceDescription::sphere(1.0), CellKind::Quad, 1, BaseOptions::default()).unwrap();
        assert_eq!(DofMap::new(&cube, 3).n_global, 26 + 48 * 2 + 24 * 4);
    }

    #[test]
    fn k1_lift_is_the_base_polytope() {
        let base = BaseMesh::build(SurfaceDescription::sphere(1.0), CellKind::Triangle, 1, BaseOptions::default())
            .unwrap();
        let pts = InterpolationPointSet::new(CellKind::Triangle, PointKind::Equispaced, 1).unwrap();
        let lifted = LiftedMesh::build(base.clone(), pts).unwrap();
        let c = 7;
        let x = lifted.map_point(c, [1.0 / 3.0, 1.0 / 3.0]);
        let v = base.cell_vertices(c);
        let mean = math::scale(
            math::add(math::add(base.vertices[v[0]], base.vertices[v[1]]), base.vertices[v[2]]),
            1.0 / 3.0,
        );
        assert!(math::dist(x, mean) < 1e-15);
    }

    #[test]
    fn circle_gauss_lobatto_k2_nodes() {
        let pts = InterpolationPointSet::new(CellKind::Segment, PointKind::GaussLobatto, 2).unwrap();
        assert_eq!(pts.reference_points, alloc::vec![[0.0, 0.0], [1.0, 0.0], [0.5, 0.0]]);
        let lifted = LiftedMesh::build(circle_mesh(0), pts).unwrap();
        // midpoint control of the first edge is at angle π/6
        let g = lifted.nodes.cell(0)[2];
        let t = core::f64::consts::PI / 6.0;
        assert!(math::dist(lifted.control_points[g], [math::cos(t), math::sin(t), 0.0]) < 1e-15);
        // independent quadratic through the three controls at x̂ = 1/4
        let p: Vec<Vec3> = lifted.cell_controls(0).collect();
        let s = 0.25;
        let l0 = (s - 1.0) * (s - 0.5) / ((0.0 - 1.0) * (0.0 - 0.5));
        let l1 = (s - 0.0) * (s - 0.5) / ((1.0 - 0.0) * (1.0 - 0.5));
        let l2 = (s - 0.0) * (s - 1.0) / ((0.5 - 0.0) * (0.5 - 1.0));
        let expect = math::add(math::add(math::scale(p[0], l0), math::scale(p[1], l1)), math::scale(p[2], l2));
        assert!(math::dist(lifted.map_point(0, [s, 0.0]), expect) < 1e-15);
    }

    #[test]
    fn segment_area_factor_is_its_length() {
        let pts = InterpolationPointSet::new(CellKind::Segment, PointKind::Equispaced, 1).unwrap();
        let lifted = LiftedMesh::build(circle_mesh(0), pts).unwrap();
        let (_, q) = lifted.map_jacobian(0, [0.3, 0.0]).unwrap();
        assert_abs_diff_eq!(q, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn order_ell_bookkeeping() {
        let ell = |kind, k| InterpolationPointSet::new(CellKind::Segment, kind, k).unwrap().order_ell();
        assert_eq!(ell(PointKind::GaussLobatto, 3), 6);
        assert_eq!(ell(PointKind::Equispaced, 2), 4);
        assert_eq!(ell(PointKind::Equispaced, 3), 4);
        assert!(InterpolationPointSet::new(CellKind::Triangle, PointKind::GaussLobatto, 3).is_err());
    }

    #[test]
    fn biased_perturbation_stays_in_its_band() {
        let base = BaseMesh::build(SurfaceDescription::sphere(1.0), CellKind::Triangle, 2, BaseOptions::default())
            .unwrap();
        let pts = InterpolationPointSet::new(CellKind::Triangle, PointKind::Equispaced, 2)
            .unwrap()
            .perturbed(Perturbation { center: 0.5, width: 2.0, seed: 7 })
            .unwrap();
        let lifted = LiftedMesh::build(base, pts).unwrap();
        let h3 = math::powi(lifted.h, 3);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &lifted.control_points {
            let d = math::norm(*p) - 1.0;
            lo = lo.min(d / h3);
            hi = hi.max(d / h3);
        }
        assert!(lo >= -0.5 - 1e-12 && hi <= 1.5 + 1e-12);
        assert!(lo < 0.0 && hi > 1.0);
    }

    #[test]
    fn lifted_arc_length_converges_at_third_order() {
        let pts = InterpolationPointSet::new(CellKind::Segment, PointKind::GaussLobatto, 2).unwrap();
        let rule = crate::quadrature::QuadratureRule::with_exactness(CellKind::Segment, 12);
        let mut prev: Option<f64> = None;
        for level in 1..5 {
            let lifted = LiftedMesh::build(circle_mesh(level), pts.clone()).unwrap();
            let mut err: f64 = 0.0;
            let arc = 2.0 * core::f64::consts::PI / lifted.n_cells() as f64;
            for c in 0..lifted.n_cells() {
                let len: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * lifted.map_jacobian(c, *x).unwrap().1)
                    .sum();
                err = err.max((len - arc).abs());
            }
            if let Some(p) = prev {
                let eoc = math::ln(p / err) / math::ln(2.0);
                assert!(eoc > 2.8, "eoc {eoc}");
            }
            prev = Some(err);
        }
    }
}
