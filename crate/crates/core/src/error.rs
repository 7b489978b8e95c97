use crate::spectral::FourierState;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A product or operator output does not fit in the requested resolution.
    #[error("resolution overflow: operation needs n_max >= {needed}, buffer has {have}")]
    ResolutionOverflow { needed: usize, have: usize },

    /// A coefficient became NaN/Inf during time integration. Carries the last
    /// finite state so censored trajectories can be reported, not just dropped.
    #[error("non-finite coefficient at t = {t}; trajectory aborted")]
    Blowup { t: f64, last_finite: Box<FourierState> },

    /// Regularity parameter outside the admissible interval (0, 0.25).
    #[error("parameter s = {0} outside (0, 0.25)")]
    ParameterDomain(f64),

    /// All importance weights vanished; no expectation can be formed.
    #[error("degenerate ensemble: sum of weights is zero")]
    DegenerateEnsemble,

    /// An enumeration box too small to guarantee a complete count.
    #[error("enumeration box too small: {0}")]
    BoxTooSmall(String),

    /// Configuration violates an operation precondition.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
