use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("subsystem label {0:?} registered twice")]
    LabelCollision(String),

    #[error("unknown subsystem label {0:?}")]
    UnknownLabel(String),

    #[error("subsystem dimension must be at least 1")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("registries differ where they must agree")]
    RegistryMismatch,

    #[error("subsystem labels must appear in registry order")]
    LabelOrder,

    #[error("bipartition must be a nonempty proper subset of the registry")]
    EmptyBipartition,

    #[error("operator is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("operator is not a density operator (trace defect {0:.3e})")]
    NotDensity(f64),

    #[error("collection is not a projective decomposition of the identity (defect {0:.3e})")]
    NotDecomposition(f64),

    #[error("decomposition is not rank-1")]
    NotRankOne,

    #[error("kets are not orthonormal (defect {0:.3e})")]
    NotOrthonormal(f64),

    #[error("map is not an isometry (defect {0:.3e})")]
    NotIsometry(f64),

    #[error("map is not unitary (defect {0:.3e})")]
    NotUnitary(f64),

    #[error("dynamical operator violates its marginal law (residual {0:.3e})")]
    MalformedDynamical(f64),

    #[error("a channel ket needs entrance, exit, and environment subsystems")]
    ChannelKetShape,

    #[error("environment dimension {got} is smaller than the state rank {needed}")]
    EnvironmentTooSmall { needed: usize, got: usize },

    #[error("parameter {name} = {value} outside the valid range [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("unknown name {0:?}")]
    UnknownName(String),

    #[error("operator basis requires dimension >= 2, got {0}")]
    BasisDimension(usize),

    #[error("coefficient tensor shape does not match the registry")]
    ShapeMismatch,

    #[error("probabilities are malformed (value {0:.3e})")]
    BadProbability(f64),

    #[error("precondition violated: subsystems are correlated (residual {0:.3e})")]
    NotUncorrelated(f64),

    #[error("density-operator input requires two caller-supplied decompositions")]
    NeedsDecompositions,

    #[error("decompositions are not strongly incompatible")]
    NotStronglyIncompatible,

    #[error(
        "security routes disagree on subset {subset:?}: factorization residual {factorization:.3e}, operator residual {operator:.3e}"
    )]
    RouteDisagreement {
        subset: Vec<usize>,
        factorization: f64,
        operator: f64,
    },

    #[error("channel decompositions must sit on the entrance and exit subsystems")]
    ChannelSubsystems,

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
