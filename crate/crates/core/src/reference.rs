//! Lagrange elements on the reference segment `[0, 1]`, unit square and
//! Kuhn triangle `{x, y ≥ 0, x + y ≤ 1}`.
//!
//! Local node order is canonical across the crate: cell vertices first, then
//! the interior nodes of each local edge traversed from its first to its
//! second vertex, then cell-interior nodes. Both global DOF numbering and the
//! surface lift rely on this order.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mesh::CellKind;
use crate::quadrature::{gauss_lobatto, QuadratureRule};

/// How the 1D nodes of an element are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeFamily {
    Equispaced,
    GaussLobatto,
}

impl NodeFamily {
    /// Nodes `0 = t_0 < … < t_degree = 1`, symmetric about `1/2`.
    pub fn line_nodes(self, degree: usize) -> Vec<f64> {
        match self {
            NodeFamily::Equispaced => (0..=degree).map(|i| i as f64 / degree as f64).collect(),
            NodeFamily::GaussLobatto => gauss_lobatto(degree + 1).0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeElement {
    pub cell_kind: CellKind,
    pub degree: usize,
    pub family: NodeFamily,
    /// Reference coordinates in canonical local order.
    pub nodes: Vec<[f64; 2]>,
    line: Vec<f64>,
    /// Lattice index of each local node: `(i, j)` into `line` for tensor
    /// cells, `(i, j)` with `i + j ≤ degree` for triangles.
    lattice: Vec<(usize, usize)>,
}

/// Number of interior nodes on each cell edge.
pub fn edge_interior_count(degree: usize) -> usize {
    degree - 1
}

/// Number of nodes strictly inside a 2D cell (zero for segments, whose
/// interior nodes are counted separately).
pub fn cell_interior_count(kind: CellKind, degree: usize) -> usize {
    match kind {
        CellKind::Segment => degree - 1,
        CellKind::Triangle => (degree.saturating_sub(1) * degree.saturating_sub(2)) / 2,
        CellKind::Quad => (degree - 1) * (degree - 1),
    }
}

fn lattice_layout(kind: CellKind, k: usize) -> Vec<(usize, usize)> {
    let mut lat = Vec::new();
    match kind {
        CellKind::Segment => {
            lat.push((0, 0));
            lat.push((k, 0));
            lat.extend((1..k).map(|i| (i, 0)));
        }
        CellKind::Quad => {
            lat.extend_from_slice(&[(0, 0), (k, 0), (k, k), (0, k)]);
            lat.extend((1..k).map(|i| (i, 0)));
            lat.extend((1..k).map(|j| (k, j)));
            lat.extend((1..k).map(|i| (k - i, k)));
            lat.extend((1..k).map(|j| (0, k - j)));
            for j in 1..k {
                lat.extend((1..k).map(|i| (i, j)));
            }
        }
        CellKind::Triangle => {
            lat.extend_from_slice(&[(0, 0), (k, 0), (0, k)]);
            lat.extend((1..k).map(|i| (i, 0)));
            lat.extend((1..k).map(|j| (k - j, j)));
            lat.extend((1..k).map(|j| (0, k - j)));
            for j in 1..k {
                lat.extend((1..k - j).map(|i| (i, j)));
            }
        }
    }
    lat
}

/// Values and derivatives of the 1D Lagrange basis on `nodes` at `x`.
fn line_basis(nodes: &[f64], x: f64, val: &mut [f64], der: &mut [f64]) {
    let n = nodes.len();
    for i in 0..n {
        let mut v = 1.0;
        let mut d = 0.0;
        for m in 0..n {
            if m == i {
                continue;
            }
            let inv = 1.0 / (nodes[i] - nodes[m]);
            let f = (x - nodes[m]) * inv;
            d = d * f + v * inv;
            v *= f;
        }
        val[i] = v;
        der[i] = d;
    }
}

/// `Π_{s<a} (kλ − s)/(s + 1)` and its derivative in `λ`.
fn simplex_factor(a: usize, k: f64, lambda: f64) -> (f64, f64) {
    let mut v = 1.0;
    let mut d = 0.0;
    for s in 0..a {
        let den = 1.0 / (s as f64 + 1.0);
        let f = (k * lambda - s as f64) * den;
        d = d * f + v * k * den;
        v *= f;
    }
    (v, d)
}

impl LagrangeElement {
    pub fn new(cell_kind: CellKind, degree: usize, family: NodeFamily) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidArgument("element degree must be at least 1".into()));
        }
        if cell_kind == CellKind::Triangle && family == NodeFamily::GaussLobatto && degree > 2 {
            return Err(Error::UnsupportedCombination(format!(
                "Gauss-Lobatto nodes of degree {degree} on triangles"
            )));
        }
        let line = family.line_nodes(degree);
        let lattice = lattice_layout(cell_kind, degree);
        let nodes = lattice
            .iter()
            .map(|&(i, j)| match cell_kind {
                CellKind::Segment => [line[i], 0.0],
                CellKind::Quad => [line[i], line[j]],
                CellKind::Triangle => [i as f64 / degree as f64, j as f64 / degree as f64],
            })
            .collect();
        Ok(Self { cell_kind, degree, family, nodes, line, lattice })
    }

    /// Element whose nodes are the natural ones for the cell: Gauss–Lobatto
    /// on segments and quads, equispaced on triangles.
    pub fn standard(cell_kind: CellKind, degree: usize) -> Result<Self> {
        let family = match cell_kind {
            CellKind::Triangle => NodeFamily::Equispaced,
            _ => NodeFamily::GaussLobatto,
        };
        Self::new(cell_kind, degree, family)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Basis values at `x` into `val` (length `n_nodes`).
    pub fn eval(&self, x: [f64; 2], val: &mut [f64]) {
        let mut grad = alloc::vec![[0.0; 2]; self.n_nodes()];
        self.eval_with_grad(x, val, &mut grad);
    }

    /// Basis values and reference gradients at `x`.
    pub fn eval_with_grad(&self, x: [f64; 2], val: &mut [f64], grad: &mut [[f64; 2]]) {
        let k = self.degree;
        match self.cell_kind {
            CellKind::Segment => {
                let mut v = alloc::vec![0.0; k + 1];
                let mut d = alloc::vec![0.0; k + 1];
                line_basis(&self.line, x[0], &mut v, &mut d);
                for (n, &(i, _)) in self.lattice.iter().enumerate() {
                    val[n] = v[i];
                    grad[n] = [d[i], 0.0];
                }
            }
            CellKind::Quad => {
                let mut vx = alloc::vec![0.0; k + 1];
                let mut dx = alloc::vec![0.0; k + 1];
                let mut vy = alloc::vec![0.0; k + 1];
                let mut dy = alloc::vec![0.0; k + 1];
                line_basis(&self.line, x[0], &mut vx, &mut dx);
                line_basis(&self.line, x[1], &mut vy, &mut dy);
                for (n, &(i, j)) in self.lattice.iter().enumerate() {
                    val[n] = vx[i] * vy[j];
                    grad[n] = [dx[i] * vy[j], vx[i] * dy[j]];
                }
            }
            CellKind::Triangle => {
                let kf = k as f64;
                let l0 = 1.0 - x[0] - x[1];
                for (n, &(i, j)) in self.lattice.iter().enumerate() {
                    let (f0, d0) = simplex_factor(k - i - j, kf, l0);
                    let (f1, d1) = simplex_factor(i, kf, x[0]);
                    let (f2, d2) = simplex_factor(j, kf, x[1]);
                    val[n] = f0 * f1 * f2;
                    // ∂λ0/∂x = ∂λ0/∂y = −1
                    grad[n] = [f0 * d1 * f2 - d0 * f1 * f2, f0 * f1 * d2 - d0 * f1 * f2];
                }
            }
        }
    }

    /// Values and gradients at every point of `rule`.
    pub fn tabulate(&self, rule: &QuadratureRule) -> Tabulation {
        self.tabulate_points(&rule.points)
    }

    pub fn tabulate_points(&self, points: &[[f64; 2]]) -> Tabulation {
        let n = self.n_nodes();
        let mut values = alloc::vec![0.0; points.len() * n];
        let mut grads = alloc::vec![[0.0; 2]; points.len() * n];
        for (q, x) in points.iter().enumerate() {
            self.eval_with_grad(*x, &mut values[q * n..(q + 1) * n], &mut grads[q * n..(q + 1) * n]);
        }
        Tabulation { n_basis: n, values, grads }
    }
}

/// Basis values and gradients at a fixed list of reference points, stored
/// point-major.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub n_basis: usize,
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
}

impl Tabulation {
    pub fn values_at(&self, q: usize) -> &[f64] {
        &self.values[q * self.n_basis..(q + 1) * self.n_basis]
    }

    pub fn grads_at(&self, q: usize) -> &[[f64; 2]] {
        &self.grads[q * self.n_basis..(q + 1) * self.n_basis]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math;

    fn all_elements() -> Vec<LagrangeElement> {
        let mut v = Vec::new();
        for deg in 1..=5 {
            for kind in [CellKind::Segment, CellKind::Quad] {
                v.push(LagrangeElement::new(kind, deg, NodeFamily::GaussLobatto).unwrap());
                v.push(LagrangeElement::new(kind, deg, NodeFamily::Equispaced).unwrap());
            }
            v.push(LagrangeElement::new(CellKind::Triangle, deg, NodeFamily::Equispaced).unwrap());
        }
        v
    }

    #[test]
    fn cardinality_and_partition_of_unity() {
        for el in all_elements() {
            let n = el.n_nodes();
            let mut val = alloc::vec![0.0; n];
            let mut grad = alloc::vec![[0.0; 2]; n];
            for (j, x) in el.nodes.iter().enumerate() {
                el.eval_with_grad(*x, &mut val, &mut grad);
                for (i, v) in val.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((v - expect).abs() < 1e-12, "{:?} deg {}", el.cell_kind, el.degree);
                }
            }
            el.eval_with_grad([0.3, 0.2], &mut val, &mut grad);
            assert!((val.iter().sum::<f64>() - 1.0).abs() < 1e-13);
            let gs = grad.iter().fold([0.0, 0.0], |a, g| [a[0] + g[0], a[1] + g[1]]);
            assert!(gs[0].abs() < 1e-11 && gs[1].abs() < 1e-11);
        }
    }

    #[test]
    fn node_counts() {
        let tri = LagrangeElement::new(CellKind::Triangle, 3, NodeFamily::Equispaced).unwrap();
        assert_eq!(tri.n_nodes(), 10);
        let quad = LagrangeElement::new(CellKind::Quad, 3, NodeFamily::GaussLobatto).unwrap();
        assert_eq!(quad.n_nodes(), 16);
        assert_eq!(cell_interior_count(CellKind::Triangle, 3), 1);
    }

    #[test]
    fn edge_nodes_follow_local_edge_direction() {
        let el = LagrangeElement::new(CellKind::Quad, 3, NodeFamily::GaussLobatto).unwrap();
        // second local edge runs from vertex 1 = (1,0) to vertex 2 = (1,1)
        let e1 = &el.nodes[4 + 2..4 + 4];
        assert_eq!(e1[0][0], 1.0);
        assert!(e1[0][1] < e1[1][1]);
        let tri = LagrangeElement::new(CellKind::Triangle, 3, NodeFamily::Equispaced).unwrap();
        let e2 = &tri.nodes[3 + 4..3 + 6];
        // third local edge runs from (0,1) down to (0,0)
        assert!(e2[0][1] > e2[1][1]);
    }

    #[test]
    fn gradients_match_finite_differences() {
        for el in all_elements() {
            let n = el.n_nodes();
            let x = [0.27, 0.31];
            let mut val = alloc::vec![0.0; n];
            let mut grad = alloc::vec![[0.0; 2]; n];
            el.eval_with_grad(x, &mut val, &mut grad);
            let h = 1e-6;
            let dims = if el.cell_kind == CellKind::Segment { 1 } else { 2 };
            for d in 0..dims {
                let mut xp = x;
                let mut xm = x;
                xp[d] += h;
                xm[d] -= h;
                let mut vp = alloc::vec![0.0; n];
                let mut vm = alloc::vec![0.0; n];
                el.eval(xp, &mut vp);
                el.eval(xm, &mut vm);
                for i in 0..n {
                    let fd = (vp[i] - vm[i]) / (2.0 * h);
                    assert!((fd - grad[i][d]).abs() < 1e-6 * (1.0 + fd.abs()));
                }
            }
        }
    }

    #[test]
    fn interpolation_reproduces_monomials() {
        for el in all_elements() {
            let r = el.degree as i32;
            let n = el.n_nodes();
            let mut val = alloc::vec![0.0; n];
            for a in 0..=r {
                let bmax = match el.cell_kind {
                    CellKind::Segment => 0,
                    CellKind::Triangle => r - a,
                    CellKind::Quad => r,
                };
                for b in 0..=bmax {
                    let f = |x: [f64; 2]| math::powi(x[0], a) * math::powi(x[1], b);
                    let coeffs: Vec<f64> = el.nodes.iter().map(|x| f(*x)).collect();
                    let x = [0.17, 0.41];
                    el.eval(x, &mut val);
                    let interp: f64 = coeffs.iter().zip(&val).map(|(c, v)| c * v).sum();
                    assert!((interp - f(x)).abs() < 1e-12);
                }
            }
        }
    }
}
