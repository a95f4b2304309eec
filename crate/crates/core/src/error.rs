use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alpha must be > 1, got {0}")]
    AlphaOutOfRange(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("brute force limited to n <= {max_n}, m <= {max_m}; got n = {n}, m = {m}")]
    BruteForceCap {
        n: usize,
        m: usize,
        max_n: usize,
        max_m: usize,
    },
    #[error("dilogarithm evaluated only on z <= 0, got {0}")]
    DilogDomain(f64),
    #[error(
        "quadrature did not converge: achieved error estimate {achieved:e} > target {target:e}"
    )]
    Quadrature { achieved: f64, target: f64 },
    #[error("tree too large: {nodes} nodes exceeds cap {cap}")]
    TreeTooLarge { nodes: u128, cap: u128 },
    #[error("malformed instance file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}
