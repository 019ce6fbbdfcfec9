//! Unified error type for the crate.

/// Errors reported by geometry construction, assembly and the linear solvers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("singular geometry jacobian at parameter point ({0:.6}, {1:.6})")]
    SingularJacobian(f64, f64),

    #[error("matrix not positive definite at pivot {index} (value {value:.3e}); likely an indefinite system or a constraint bug")]
    NotPositiveDefinite { index: usize, value: f64 },

    #[error("constraint block rank-deficient: {0}")]
    RankDeficient(String),

    #[error("solver stagnated at relative residual {achieved:.3e} (required {required:.3e})")]
    Residual { achieved: f64, required: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
