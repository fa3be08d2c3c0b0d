use alloc::string::String;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Scenario, deployment or sweep parameters that cannot describe a valid setup.
    #[error("configuration error: {0}")]
    Config(String),
    /// An argument outside the operation's domain (negative variance, mismatched sizes).
    #[error("invalid argument: {0}")]
    Argument(String),
    /// The channel sub-matrix handed to zero-forcing is (numerically) rank deficient.
    #[error("rank-deficient channel matrix (condition number estimate {condition:.3e})")]
    RankDeficient { condition: f64 },
    /// LS-MIMO needs every BS to carry at least as many antennas as there are UEs.
    #[error("infeasible: BS {bs} has {antennas} antennas but {ues} UEs must be nulled")]
    Infeasible { bs: usize, antennas: usize, ues: usize },
    /// Power allocation was called without a single channel above the gain floor.
    #[error("no usable channel")]
    NoUsableChannel,
    /// An iterative solver hit its iteration cap.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e}, last value {last:.6e})")]
    NoConvergence { iterations: usize, residual: f64, last: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
