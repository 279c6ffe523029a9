use thiserror::Error;

pub type Result<T> = std::result::Result<T, FemError>;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown problem '{name}' (catalog: {available})")]
    UnknownProblem { name: String, available: String },

    #[error("problem '{0}' requires a coefficient")]
    MissingCoefficient(String),

    #[error("problem '{0}' has no exact solution")]
    ExactUnavailable(String),

    #[error("{var} is not available for {flavor} FEM with p = {p}")]
    VariableUnavailable {
        var: String,
        flavor: String,
        p: usize,
    },

    #[error("singular pivot at index {index}")]
    SingularPivot { index: usize },

    #[error(
        "{stage}: no convergence after {iterations} iterations (relative residual {residual:e})"
    )]
    NotConverged {
        stage: String,
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("operator is not sign-definite; CG is not applicable")]
    NotDefinite,

    #[error("fields are not on adjacent refinement levels ({coarse} vs {fine})")]
    MeshMismatch { coarse: u32, fine: u32 },

    #[error("scaling scheme {scheme} cannot be applied: {reason}")]
    ScalingMismatch { scheme: String, reason: String },

    #[error(
        "normalization did not stabilise before N_max (last norm {last_norm:e} at REF {level})"
    )]
    NormalizationFailed { last_norm: f64, level: u32 },

    #[error("floor fit needs at least 3 post-minimum records, found {found}")]
    InsufficientFloorPoints { found: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl FemError {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        FemError::InvalidArgument(msg.into())
    }

    /// True for failures caused by the numerics rather than by the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            FemError::SingularPivot { .. }
                | FemError::NotConverged { .. }
                | FemError::NotDefinite
                | FemError::NormalizationFailed { .. }
                | FemError::InsufficientFloorPoints { .. }
        )
    }
}
