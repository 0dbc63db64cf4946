use alloc::string::String;

/// Failures raised anywhere in the discretization pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("closest-point iteration did not converge in {iterations} steps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("point lies outside the tubular neighborhood: |d| = {distance:e} > {halfwidth:e}")]
    OutsideStrip { distance: f64, halfwidth: f64 },
    #[error("tangential Hessian could not be diagonalized")]
    DegenerateHessian,
    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),
    #[error("vertex {vertex} could not be projected onto the surface")]
    ProjectionFailure { vertex: usize },
    #[error("lifted surface is discontinuous across a shared facet")]
    ContinuityViolation,
    #[error("cell {cell} has a non-positive area factor {area_factor:e}")]
    DegenerateCell { cell: usize, area_factor: f64 },
    #[error("quadrature oracle is not converged: {0}")]
    OracleInsufficient(String),
    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("mass matrix is not positive definite (pivot {pivot} = {value:e})")]
    IndefiniteMass { pivot: usize, value: f64 },
    #[error("shifted operator is singular (pivot {pivot} = {value:e})")]
    SingularShift { pivot: usize, value: f64 },
    #[error("cluster around {target} is not separated: gap {gap:e} <= spread {spread:e}")]
    ClusterNotSeparated { target: f64, gap: f64, spread: f64 },
    #[error("cluster covers every computed eigenvalue; no complement to measure separation")]
    EmptyComplement,
    #[error("no closed-form spectrum for this surface")]
    UnsupportedSurface,
    #[error("Richardson extrapolation is unstable: estimate {estimate:e} exceeds {limit:e}")]
    ExtrapolationUnstable { estimate: f64, limit: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
