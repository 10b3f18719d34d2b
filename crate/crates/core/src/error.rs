use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not Hermitian (max |m - m^†| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NotConverged { sweeps: usize, off_norm: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("frequency {omega} outside tabulated range [{lo}, {hi}]")]
    OutOfRange { omega: f64, lo: f64, hi: f64 },

    #[error("bath is population-inverted at omega = {omega} (G(-w)/G(w) = {ratio}); a thermometer would not thermalize")]
    UnsupportedInversion { omega: f64, ratio: f64 },

    #[error("stability guard violated: dt * (max rate * d + max |E|) = {value} > 0.1")]
    StabilityGuard { value: f64 },

    #[error("state invariant violated at t = {t}: {detail}")]
    StateInvariant { t: f64, detail: String },

    #[error("steady state is not unique: {0}")]
    AmbiguousSteadyState(String),

    #[error("unknown bath id `{0}`")]
    UnknownBath(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("generalized Carnot bound violated: eta = {eta} > bound = {bound}; {params}")]
    BoundViolation { eta: f64, bound: f64, params: String },

    #[error("no positive-work operating point in omega_h range [{lo}, {hi}]")]
    NoPositiveWork { lo: f64, hi: f64 },

    #[error("spectrum file line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Errors caused by the physics guards (stability, inversion, state
    /// invariants, non-unique steady states) rather than by bad input.
    pub fn is_physics_guard(&self) -> bool {
        matches!(
            self,
            Error::StabilityGuard { .. }
                | Error::UnsupportedInversion { .. }
                | Error::StateInvariant { .. }
                | Error::AmbiguousSteadyState(_)
                | Error::NotConverged { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
