use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid evidence: {0}")]
    InvalidEvidence(String),

    #[error("invalid opinion: {0}")]
    InvalidOpinion(String),

    #[error("invalid Dirichlet parameters: {0}")]
    InvalidDirichlet(String),

    #[error("invalid label: {0}")]
    InvalidLabel(String),

    #[error("class count mismatch: expected {expected}, got {actual}")]
    ClassMismatch { expected: usize, actual: usize },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("total conflict between opinions (normalization factor {0:e})")]
    TotalConflict(f64),

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("{function} is undefined at x = {x}")]
    Domain { function: &'static str, x: f64 },

    #[error("non-finite value produced at graph node #{index} ({op})")]
    NonFinite { index: usize, op: &'static str },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("image has zero variance; cannot z-score normalize")]
    ZeroVariance,

    #[error("segmentation produced an empty foreground mask")]
    EmptyMask,

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("manifest verification failed: {0}")]
    Manifest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Wraps an I/O error so the message names the file involved.
    pub fn io_at(path: &std::path::Path, e: std::io::Error) -> Error {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    }

    /// Short machine-readable class of the error.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io(_) => "io",
            Error::Json(_) | Error::Csv(_) | Error::Image(_) | Error::Malformed(_) => "malformed_input",
            Error::InvalidEvidence(_)
            | Error::InvalidOpinion(_)
            | Error::InvalidDirichlet(_)
            | Error::InvalidLabel(_)
            | Error::ClassMismatch { .. }
            | Error::Dimension { .. }
            | Error::Empty(_)
            | Error::Domain { .. }
            | Error::InvalidParameter { .. }
            | Error::Geometry(_) => "invalid_value",
            Error::TotalConflict(_) | Error::NonFinite { .. } | Error::Diverged { .. } => "numerical",
            Error::ZeroVariance | Error::EmptyMask => "image_content",
            Error::Manifest(_) => "manifest",
        }
    }

    /// Process exit code of the command-line tool for this error.
    ///
    /// | code | kind |
    /// |------|------|
    /// | 2 | usage (bad flags, reported by the argument parser) |
    /// | 3 | `io` |
    /// | 4 | `malformed_input` |
    /// | 5 | `invalid_value` |
    /// | 6 | `numerical` |
    /// | 7 | `image_content` |
    /// | 8 | `manifest` |
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "io" => 3,
            "malformed_input" => 4,
            "invalid_value" => 5,
            "numerical" => 6,
            "image_content" => 7,
            _ => 8,
        }
    }
}
