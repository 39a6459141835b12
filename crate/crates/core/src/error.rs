use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error(
        "fixed-point iteration did not converge after {iterations} iterations (last relative step {last_step:.3e})"
    )]
    NoConvergence {
        iterations: usize,
        last_step: f64,
        /// Static displacement q_s after every iteration.
        trace: Vec<f64>,
    },

    #[error("fixed-point iteration diverged at iteration {iteration}")]
    Divergence { iteration: usize, trace: Vec<f64> },

    #[error("no stationary state: drift matrix has spectral abscissa {abscissa:.6e} >= 0")]
    NoStationaryState { abscissa: f64 },

    #[error("eigenvalue solver failed: {0}")]
    EigenSolver(String),

    #[error("singular Lyapunov system (drift matrix marginally stable or singular)")]
    SingularLyapunov,

    #[error("quadrature did not converge: achieved relative error {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("unphysical reduced CM: discriminant {discriminant:.6e}")]
    UnphysicalCovariance { discriminant: f64 },

    #[error("unphysical channel: det Gamma = {det:.6e}")]
    UnphysicalChannel { det: f64 },
}
