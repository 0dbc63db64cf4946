//! One discretization setting carried from base mesh to discrete spectrum.

use alloc::vec::Vec;

use crate::analysis::{self, Extrapolated};
use crate::assembly::{self, AssembledForms, FeSpace};
use crate::error::{Error, Result};
use crate::geometry::{SurfaceDescription, SurfaceKind};
use crate::lift::{InterpolationPointSet, LiftedMesh, Perturbation, PointKind};
use crate::mesh::{BaseMesh, BaseOptions, CellKind};
use crate::quadrature::QuadratureRule;
use crate::spectral::{self, SolverOptions, SpectralResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    pub surface: SurfaceDescription,
    pub cell_kind: CellKind,
    /// Lift degree `k`.
    pub lift_degree: usize,
    /// FE degree `r`.
    pub fe_degree: usize,
    pub point_kind: PointKind,
    pub perturbation: Option<Perturbation>,
    pub base: BaseOptions,
    /// Per-direction exactness of the assembly rule; `2r + 2k` when unset.
    pub rule_exactness: Option<usize>,
}

impl Discretization {
    pub fn new(surface: SurfaceDescription, cell_kind: CellKind, lift_degree: usize, fe_degree: usize) -> Self {
        Self {
            surface,
            cell_kind,
            lift_degree,
            fe_degree,
            point_kind: PointKind::GaussLobatto,
            perturbation: None,
            base: BaseOptions::default(),
            rule_exactness: None,
        }
    }

    pub fn base_mesh(&self, level: usize) -> Result<BaseMesh> {
        BaseMesh::build(self.surface, self.cell_kind, level, self.base)
    }

    pub fn space_on(&self, base: BaseMesh) -> Result<FeSpace> {
        let mut points = InterpolationPointSet::new(self.cell_kind, self.point_kind, self.lift_degree)?;
        if let Some(p) = self.perturbation {
            points = points.perturbed(p)?;
        }
        FeSpace::new(LiftedMesh::build(base, points)?, self.fe_degree)
    }

    pub fn space(&self, level: usize) -> Result<FeSpace> {
        self.space_on(self.base_mesh(level)?)
    }

    pub fn rule(&self, space: &FeSpace) -> QuadratureRule {
        match self.rule_exactness {
            Some(e) => QuadratureRule::with_exactness(self.cell_kind, e),
            None => space.default_rule(),
        }
    }

    /// Rough size of the first nonzero eigenvalue, `(2π/|γ|)²` for curves and
    /// `8π/|γ|` for surfaces.
    pub fn lambda_estimate(&self, measure: f64) -> f64 {
        match self.surface.kind {
            SurfaceKind::Circle { .. } => {
                let k = 2.0 * core::f64::consts::PI / measure;
                k * k
            }
            _ => 8.0 * core::f64::consts::PI / measure,
        }
    }
}

/// Discrete spectrum of one refinement level.
#[derive(Debug, Clone)]
pub struct LevelSolution {
    pub level: usize,
    pub h: f64,
    pub space: FeSpace,
    pub forms: AssembledForms,
    pub spectrum: SpectralResult,
}

impl LevelSolution {
    pub fn n_dofs(&self) -> usize {
        self.space.n_dofs()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.eigenvalues
    }
}

/// Assembles and solves one level.
pub fn solve_level(disc: &Discretization, level: usize, n_eigs: usize, options: &SolverOptions) -> Result<LevelSolution> {
    let space = disc.space(level)?;
    let forms = assembly::assemble(&space, &disc.rule(&space))?;
    solve_assembled(disc, level, space, forms, n_eigs, options)
}

/// Solves already assembled forms; the default Lanczos shift is derived from
/// the discrete measure unless `options.shift` is set.
pub fn solve_assembled(
    disc: &Discretization,
    level: usize,
    space: FeSpace,
    forms: AssembledForms,
    n_eigs: usize,
    options: &SolverOptions,
) -> Result<LevelSolution> {
    let mut opts = *options;
    if opts.shift.is_none() {
        opts.lambda_estimate = disc.lambda_estimate(forms.area);
    }
    let mut spectrum = spectral::solve_smallest(&forms, n_eigs, &opts)?;
    let rule = disc.rule(&space);
    for (l, (a, m)) in spectrum
        .eigenvalues
        .iter_mut()
        .zip(assembly::energy_and_mass(&space, &rule, &spectrum.eigenvectors)?)
    {
        *l = a / m;
    }
    Ok(LevelSolution { level, h: space.lifted.h, space, forms, spectrum })
}

/// Eigenvalues of every level in `levels`, for extrapolation.
pub fn eigenvalue_sequence(
    disc: &Discretization,
    levels: core::ops::RangeInclusive<usize>,
    n_eigs: usize,
    options: &SolverOptions,
) -> Result<Vec<Vec<f64>>> {
    levels
        .map(|l| solve_level(disc, l, n_eigs, options).map(|s| s.spectrum.eigenvalues))
        .collect()
}

/// Richardson-extrapolated reference eigenvalues at the 0-based `indices`
/// from a high-order sequence with convergence `rate`. The estimate is
/// `|E₂ − E₁|` of the last two extrapolants; callers decide whether it is
/// small enough.
pub fn extrapolated_reference(
    disc: &Discretization,
    levels: core::ops::RangeInclusive<usize>,
    indices: &[usize],
    rate: f64,
    options: &SolverOptions,
) -> Result<Vec<Extrapolated>> {
    let count = indices.iter().max().map_or(0, |m| m + 1);
    if count == 0 {
        return Err(Error::InvalidArgument("no reference indices requested".into()));
    }
    let seq = eigenvalue_sequence(disc, levels, count, options)?;
    indices
        .iter()
        .map(|&i| {
            let values: Vec<f64> = seq.iter().map(|v| v[i]).collect();
            analysis::richardson(&values, rate, f64::INFINITY)
        })
        .collect()
}
