use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("sector mismatch: {0}")]
    SectorMismatch(String),

    #[error("empty sector: no basis states with 2*Sz = {two_sz} on {sites} sites")]
    EmptySector { sites: usize, two_sz: i32 },

    #[error("dimension {dimension} exceeds the configured cap {cap}")]
    CapacityExceeded { dimension: u128, cap: usize },

    #[error("parameter index {index} out of range for a model with {count} parameters")]
    BadParameterIndex { index: usize, count: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Lanczos did not converge after {iterations} iterations (best residual {best_residual:.3e})")]
    NotConverged { iterations: usize, best_residual: f64 },

    #[error("ground state is degenerate within tolerance (gap {gap:.3e} < {tol:.1e})")]
    DegenerateGroundState { gap: f64, tol: f64 },

    #[error("quadrature did not converge after {evaluations} evaluations (error estimate {error_estimate:.3e})")]
    QuadratureNotConverged { evaluations: usize, error_estimate: f64 },

    #[error("plaquette phase {phase:.3} exceeds pi/2; refine the mesh")]
    MeshTooCoarse { phase: f64 },

    #[error("loop endpoints are different rays (fidelity {fidelity:.3e})")]
    LoopNotClosed { fidelity: f64 },

    #[error("gap vanishes at finite size ({gap:.3e})")]
    GaplessAtFiniteSize { gap: f64 },

    #[error("exponent undefined: scaling dimension of the driving parameter is zero")]
    UndefinedExponent,

    #[error("{value} is outside the domain {domain}")]
    OutOfDomain { value: f64, domain: &'static str },

    #[error("ill-conditioned fit (condition number {condition:.3e})")]
    IllConditionedFit { condition: f64 },

    #[error("bad data: {0}")]
    BadData(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}
