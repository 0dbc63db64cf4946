//! Stiffness `A(U, V) = ∫_Γ ∇_Γ U·∇_Γ V` and mass `M(U, V) = ∫_Γ U V` for
//! degree-`r` Lagrange elements on the lifted surface.

use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::lift::{combine_jacobian, DofMap, LiftedMesh};
use crate::math::Metric;
use crate::quadrature::QuadratureRule;
use crate::reference::{LagrangeElement, Tabulation};
use crate::sparse::{CsrMatrix, Triplet};

/// Conforming degree-`r` space on `Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeSpace {
    pub lifted: LiftedMesh,
    pub element: LagrangeElement,
    pub dofs: DofMap,
}

impl FeSpace {
    pub fn new(lifted: LiftedMesh, r: usize) -> Result<Self> {
        let element = LagrangeElement::standard(lifted.base.cell_kind, r)?;
        let dofs = DofMap::new(&lifted.base, r);
        Ok(Self { lifted, element, dofs })
    }

    pub fn degree(&self) -> usize {
        self.element.degree
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.n_global
    }

    pub fn dim(&self) -> usize {
        self.lifted.dim()
    }

    /// Default assembly rule, exact through degree `2r + 2k` per direction.
    pub fn default_rule(&self) -> QuadratureRule {
        QuadratureRule::with_exactness(self.lifted.base.cell_kind, 2 * self.degree() + 2 * self.lifted.degree)
    }

    /// Values and gradients of the FE and geometry bases at `rule`.
    pub fn tables(&self, rule: &QuadratureRule) -> CellTables {
        CellTables {
            fe: self.element.tabulate(rule),
            geo: self.lifted.element.tabulate(rule),
            weights: rule.weights.clone(),
        }
    }

    /// Jacobian columns and metric of `F_T` at tabulated point `q`.
    pub fn geometry_at(&self, c: usize, tables: &CellTables, q: usize) -> Result<([crate::Vec3; 2], Metric)> {
        let dim = self.dim();
        let cols = combine_jacobian(self.lifted.cell_controls(c), tables.geo.grads_at(q), dim);
        let metric = Metric::new(&cols, dim);
        if !(metric.area_factor > 0.0) {
            return Err(Error::DegenerateCell { cell: c, area_factor: metric.area_factor });
        }
        Ok((cols, metric))
    }
}

/// Basis tabulations shared by every cell for one quadrature rule.
#[derive(Debug, Clone)]
pub struct CellTables {
    pub fe: Tabulation,
    pub geo: Tabulation,
    pub weights: Vec<f64>,
}

impl CellTables {
    pub fn n_points(&self) -> usize {
        self.weights.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledForms {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    /// `M·1`
    pub mass_row_sums: Vec<f64>,
    /// `|Γ| = 1ᵀM1`
    pub area: f64,
}

/// Local stiffness and mass matrices of cell `c`, row-major.
pub fn local_matrices(space: &FeSpace, tables: &CellTables, c: usize, a: &mut [f64], m: &mut [f64]) -> Result<()> {
    let n = space.element.n_nodes();
    a.iter_mut().for_each(|v| *v = 0.0);
    m.iter_mut().for_each(|v| *v = 0.0);
    for q in 0..tables.n_points() {
        let (_, metric) = space.geometry_at(c, tables, q)?;
        let wq = tables.weights[q] * metric.area_factor;
        let val = tables.fe.values_at(q);
        let grad = tables.fe.grads_at(q);
        for i in 0..n {
            let gi = grad[i];
            // G⁻¹∇̂φ_i, reused against every j
            let ci = [
                metric.g_inv[0][0] * gi[0] + metric.g_inv[0][1] * gi[1],
                metric.g_inv[1][0] * gi[0] + metric.g_inv[1][1] * gi[1],
            ];
            let wv = wq * val[i];
            for j in i..n {
                let gj = grad[j];
                a[i * n + j] += wq * (ci[0] * gj[0] + ci[1] * gj[1]);
                m[i * n + j] += wv * val[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            a[i * n + j] = a[j * n + i];
            m[i * n + j] = m[j * n + i];
        }
    }
    Ok(())
}

/// Triplets of the cells in `cells`, appended in cell order.
pub fn assemble_cells(
    space: &FeSpace,
    tables: &CellTables,
    cells: Range<usize>,
    stiffness: &mut Vec<Triplet>,
    mass: &mut Vec<Triplet>,
) -> Result<()> {
    let n = space.element.n_nodes();
    let mut a = alloc::vec![0.0; n * n];
    let mut m = alloc::vec![0.0; n * n];
    for c in cells {
        local_matrices(space, tables, c, &mut a, &mut m)?;
        let dofs = space.dofs.cell(c);
        for i in 0..n {
            for j in 0..n {
                stiffness.push((dofs[i], dofs[j], a[i * n + j]));
                mass.push((dofs[i], dofs[j], m[i * n + j]));
            }
        }
    }
    Ok(())
}

/// Builds the forms from triplets produced by [`assemble_cells`].
pub fn finish(space: &FeSpace, stiffness: Vec<Triplet>, mass: Vec<Triplet>) -> AssembledForms {
    let n = space.n_dofs();
    let stiffness = CsrMatrix::from_triplets(n, stiffness);
    let mass = CsrMatrix::from_triplets(n, mass);
    let mass_row_sums = mass.apply(&alloc::vec![1.0; n]);
    let area = mass_row_sums.iter().sum();
    AssembledForms { stiffness, mass, mass_row_sums, area }
}

pub fn assemble(space: &FeSpace, rule: &QuadratureRule) -> Result<AssembledForms> {
    let tables = space.tables(rule);
    let mut a = Vec::new();
    let mut m = Vec::new();
    assemble_cells(space, &tables, 0..space.lifted.n_cells(), &mut a, &mut m)?;
    Ok(finish(space, a, m))
}

/// `A(U, U)` and `M(U, U)` for each coefficient vector, summed point by point
/// from `|∇_Γ U|²` and `U²`. Every term is non-negative, so the Rayleigh
/// quotient avoids the cancellation of `UᵀAU`.
pub fn energy_and_mass(space: &FeSpace, rule: &QuadratureRule, vectors: &[Vec<f64>]) -> Result<Vec<(f64, f64)>> {
    let tables = space.tables(rule);
    let mut out = alloc::vec![(0.0, 0.0); vectors.len()];
    for c in 0..space.lifted.n_cells() {
        let dofs = space.dofs.cell(c);
        for q in 0..tables.n_points() {
            let (_, metric) = space.geometry_at(c, &tables, q)?;
            let w = tables.weights[q] * metric.area_factor;
            let val = tables.fe.values_at(q);
            let grad = tables.fe.grads_at(q);
            for (v, acc) in vectors.iter().zip(out.iter_mut()) {
                let mut u = 0.0;
                let mut g = [0.0; 2];
                for ((&d, &phi), dphi) in dofs.iter().zip(val).zip(grad) {
                    u += v[d] * phi;
                    g[0] += v[d] * dphi[0];
                    g[1] += v[d] * dphi[1];
                }
                acc.0 += w * metric.inner(g, g);
                acc.1 += w * u * u;
            }
        }
    }
    Ok(out)
}
