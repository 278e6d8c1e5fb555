use thiserror::Error;

/// Errors raised by the model, analysis and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {field} must be {requirement} (got {value})")]
    Domain { field: &'static str, requirement: &'static str, value: f64 },

    #[error("no positive equilibrium exists for these parameters")]
    NoPositiveEquilibrium,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("residual does not change sign over the bracket [{lo}, {hi}]")]
    NotBracketed { lo: f64, hi: f64 },

    #[error("transversality condition fails: d(Re lambda)/dt = {0}")]
    NonTransversal(f64),

    #[error("eigenvector basis is ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("center-manifold system is resonant (|lambda3|/omega0 = {0:.3e})")]
    Resonance(f64),

    #[error("first Lyapunov coefficient is degenerate (|sigma| = {0:.3e})")]
    Degenerate(f64),

    #[error("zero-Hopf reduction is degenerate: {0}")]
    DegenerateReduction(String),

    #[error("normal-form parameter a = {0} lies on a catalog boundary")]
    BoundaryCase(f64),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("located point has b(delta) = {0} <= 0")]
    WrongBranch(f64),

    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    Stiffness { t: f64, h: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable code, used in scan output cells.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::NoPositiveEquilibrium => "no_equilibrium",
            Error::Precondition(_) => "precondition",
            Error::NotBracketed { .. } => "not_bracketed",
            Error::NonTransversal(_) => "non_transversal",
            Error::IllConditioned(_) => "ill_conditioned",
            Error::Resonance(_) => "resonance",
            Error::Degenerate(_) => "degenerate",
            Error::DegenerateReduction(_) => "degenerate_reduction",
            Error::BoundaryCase(_) => "boundary",
            Error::NotConverged { .. } => "not_converged",
            Error::WrongBranch(_) => "wrong_branch",
            Error::Stiffness { .. } => "stiffness",
        }
    }
}
