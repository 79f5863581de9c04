use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix required to be Hurwitz has an eigenvalue with real part
    /// above the certification threshold.
    #[error("matrix is not Hurwitz: eigenvalue {re} {sign} {im_abs}i has real part >= {threshold}",
        sign = if *im < 0.0 { "-" } else { "+" }, im_abs = im.abs())]
    NotHurwitz { re: f64, im: f64, threshold: f64 },

    #[error("(A, B) is not stabilizable: eigenvalue {re} + {im}i fails the rank test")]
    NotStabilizable { re: f64, im: f64 },

    #[error("infeasible sigma: gamma1 - sigma * gamma2 = {margin} must be positive")]
    InfeasibleSigma { margin: f64 },

    #[error("infeasible DoS class: 1/T + mu*Delta/tau_D = {ratio} must be below 1")]
    InfeasibleClass { ratio: f64 },

    #[error("prediction horizon too short: {0}")]
    HorizonTooShort(String),

    #[error("computation delay of {skip} samples does not fit a horizon of {horizon}")]
    DelayExceedsHorizon { skip: usize, horizon: usize },

    #[error("time regression: packet at {new} precedes the armed packet at {armed}")]
    Ordering { armed: f64, new: f64 },

    #[error("{0}")]
    Config(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    /// True for the errors that mean "the requested design or class has no
    /// stability certificate", as opposed to malformed input.
    pub fn is_infeasibility(&self) -> bool {
        matches!(
            self,
            Error::NotHurwitz { .. }
                | Error::NotStabilizable { .. }
                | Error::InfeasibleSigma { .. }
                | Error::InfeasibleClass { .. }
                | Error::HorizonTooShort(_)
                | Error::DelayExceedsHorizon { .. }
        )
    }
}
