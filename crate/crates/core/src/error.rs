use thiserror::Error;

/// Errors raised by the core numerical routines.
///
/// Degenerate inputs are hard errors rather than clamped values: silently
/// clamping a radius or a mode index would mask caller bugs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("radius {0} outside [0, 1]")]
    RadiusOutOfRange(f64),

    #[error("order (|j|={j_abs}, k={k}) beyond supported range |j| <= {max_j}, k <= {max_k}")]
    UnsupportedOrder {
        j_abs: u32,
        k: u32,
        max_j: u32,
        max_k: u32,
    },

    #[error("Fourier mode index must be nonzero")]
    ZeroFourierMode,

    #[error("mode pair (m={m}, n={n}) must satisfy m*n > 0")]
    InvalidModePair { m: i32, n: i32 },

    #[error("coefficient index (j={j}, k={k}) outside declared bounds J={j_max}, K={k_max}")]
    IndexOutOfBounds { j: i32, k: u32, j_max: u32, k_max: u32 },

    #[error("matrix truncation bound must be at least 1, got {0}")]
    InvalidTruncation(i32),

    #[error("matrix entry (m={m}, n={n}) outside truncation |m|,|n| <= {m_bound}")]
    TruncationTooSmall { m: i32, n: i32, m_bound: i32 },

    #[error("perturbation is identically zero; no injectivity witness exists")]
    ZeroPerturbation,

    #[error(
        "witness search exhausted at n0 <= {limit} for angular frequency j={j} \
         (profile norm {profile_norm:.3e})"
    )]
    WitnessSearchExhausted { j: i32, limit: u32, profile_norm: f64 },

    #[error("invalid quadrature grid: {0}")]
    InvalidGrid(String),

    #[error("invalid conformal map parameters: {0}")]
    InvalidMapParameters(String),
}

pub type Result<T> = std::result::Result<T, Error>;
