use thiserror::Error;

/// Errors produced by the chain algebra, the operator models and the index evaluators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("no boundary in degree 0")]
    NoBoundaryInDegreeZero,
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("not an idempotent: ||E^2 - E|| = {0:.3e}")]
    NotIdempotent(f64),
    #[error("not a projection: ||P^2 - P|| + ||P - P*|| = {0:.3e}")]
    NotProjection(f64),
    #[error("singular operator (reciprocal condition estimate {0:.3e})")]
    Singular(f64),
    #[error("not selfadjoint: ||A - A*|| = {0:.3e}")]
    NotSelfAdjoint(f64),
    #[error("spectrally degenerate; adjust shift (smallest |eigenvalue| = {0:.3e})")]
    SpectrallyDegenerate(f64),
    #[error("pair is not mutually inverse: ||V Vinv - I|| = {0:.3e}")]
    NotInverse(f64),
    #[error("antisymmetrization size cap: {0} slots exceeds 8")]
    AntisymmetrizationCap(usize),
    #[error("multicommutator size cap: {0} operators exceeds 8")]
    MulticommutatorCap(usize),
    #[error("parity mismatch: {0}")]
    Parity(String),
    #[error("model mismatch: {0}")]
    ModelMismatch(String),
    #[error("bandwidth {bandwidth} too large for truncation {n}")]
    Bandwidth { bandwidth: usize, n: usize },
    #[error("interior window violation: {0}")]
    Window(String),
    #[error("oracle defined at top degree only (degree {degree}, dimension {dim})")]
    NotTopDegree { degree: usize, dim: usize },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("size guard: {0}")]
    SizeGuard(String),
    #[error("quadrature did not reach target {target:.1e} (residual {residual:.3e} with {nodes} nodes)")]
    Quadrature { target: f64, residual: f64, nodes: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
