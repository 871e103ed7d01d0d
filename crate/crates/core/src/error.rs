use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("degenerate model: {0}")]
    Degenerate(String),
    #[error("incoherent structural model (kappa = {kappa})")]
    Incoherent { kappa: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("misuse: {0}")]
    Misuse(String),
    #[error("likelihood is -inf at t = {t}: all particle weights are zero")]
    ZeroWeights { t: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("optimizer failed: {0}")]
    Optimizer(String),
    #[error("too many failed replications: {failed} of {total}")]
    Replications { failed: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
