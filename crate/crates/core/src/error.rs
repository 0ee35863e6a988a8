use thiserror::Error;

/// Failure modes of the solvers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("hyperbolicity violated at state {state:?}: {reason}")]
    HyperbolicityViolated { state: Vec<f64>, reason: String },
    #[error("multiple characteristic fields unsupported (families {0:?})")]
    MultipleCharacteristicFields(Vec<usize>),
    #[error("small-data regime violated: state {state:?} leaves the admissible ball")]
    SmallDataViolated { state: Vec<f64> },
    #[error("Riemann solver failed: residual {residual:.3e} after {iterations} iterations")]
    RiemannFailed { residual: f64, iterations: usize },
    #[error("characteristic hyperbolic block at state {0:?}")]
    CharacteristicHyperbolicBlock(Vec<f64>),
    #[error("degenerate trace system: {0}")]
    DegenerateTrace(String),
    #[error("marginal spectrum: eigenvalue {0} within margin of the imaginary axis")]
    MarginalSpectrum(f64),
    #[error("DAE reduction failed: {0}")]
    DaeReductionFailed(String),
    #[error("boundary Riemann solver failed: {0}")]
    BoundaryRiemannFailed(String),
    #[error("small-data guard: data size {size:.4} exceeds {limit:.4}")]
    SmallDataGuard { size: f64, limit: f64 },
    #[error("variation blow-up: total variation {tv:.4e} exceeds cap {cap:.4e} at t = {time:.6}")]
    VariationBlowUp { tv: f64, cap: f64, time: f64 },
    #[error("front explosion: more than {0} events")]
    FrontExplosion(usize),
    #[error("viscous solver out of regime at x = {x:.4e}, t = {time:.4e}")]
    ViscousOutOfRegime { x: f64, time: f64 },
    #[error("invalid system definition: {0}")]
    InvalidSystem(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
