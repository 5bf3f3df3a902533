use thiserror::Error;

/// Errors raised by the registration library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The curve has (numerically) zero total variation, so its local
    /// variation distribution is undefined.
    #[error("curve {} has zero total variation", curve.map_or_else(|| "?".to_string(), |c| c.to_string()))]
    ZeroVariation { curve: Option<usize> },

    #[error("empty sample")]
    EmptySample,

    /// No grid point of the curve falls strictly inside the kernel window.
    #[error("no observation within bandwidth {bandwidth} of t = {t}")]
    EmptyWindow {
        t: f64,
        bandwidth: f64,
        curve: Option<usize>,
    },

    /// The weighted local-polynomial design is underdetermined at `t`.
    #[error("singular local polynomial fit at t = {t} (bandwidth {bandwidth})")]
    SingularFit {
        t: f64,
        bandwidth: f64,
        curve: Option<usize>,
    },

    #[error("every candidate bandwidth produced a singular leave-one-out fit")]
    AllCandidatesSingular,

    #[error("warp samples are not monotone nondecreasing")]
    NonMonotoneInput,

    #[error("curves are not observed on a common grid")]
    GridMismatch,

    #[error("matrix is not symmetric")]
    NonSymmetric,

    #[error("model is not of rank one")]
    NotRankOne,

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Attach a curve index to errors that carry one.
    pub fn for_curve(self, index: usize) -> Self {
        match self {
            Error::ZeroVariation { .. } => Error::ZeroVariation { curve: Some(index) },
            Error::EmptyWindow { t, bandwidth, .. } => Error::EmptyWindow {
                t,
                bandwidth,
                curve: Some(index),
            },
            Error::SingularFit { t, bandwidth, .. } => Error::SingularFit {
                t,
                bandwidth,
                curve: Some(index),
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
