use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("SVD failed to converge on a {rows}x{cols} matrix (max |entry| {max_abs:.3e})")]
    SvdFailure {
        rows: usize,
        cols: usize,
        max_abs: f64,
    },

    #[error(
        "input correlation matrix is rank deficient: {null_dims} null direction(s) \
         out of {dim} (condition number {condition:.3e} exceeds cap {cap:.3e})"
    )]
    RankDeficient {
        null_dims: usize,
        dim: usize,
        condition: f64,
        cap: f64,
    },

    #[error("training diverged at iteration {iteration} (loss {loss:.3e})")]
    Diverged { iteration: usize, loss: f64 },

    #[error("non-finite {what} at iteration {iteration}")]
    NonFinite { what: &'static str, iteration: usize },

    #[error(
        "input correlations are not aligned with the task singular basis \
         (consistency score {score:.4} < required {required:.4}); use plain `train`"
    )]
    Misaligned { score: f64, required: f64 },

    #[error("bad IDX magic in {path}: expected {expected:#010x}, found {found:#010x}")]
    IdxMagic {
        path: String,
        expected: u32,
        found: u32,
    },

    #[error("truncated IDX payload in {path}: needed {needed} bytes, found {found}")]
    IdxTruncated {
        path: String,
        needed: usize,
        found: usize,
    },

    #[error("label {label} out of range for one-hot dimension {dim} (example {index})")]
    LabelOutOfRange {
        label: usize,
        dim: usize,
        index: usize,
    },

    #[error("IDX image/label counts disagree: {images} images vs {labels} labels")]
    IdxCountMismatch { images: usize, labels: usize },

    #[error("malformed file {path}: {detail}")]
    Format { path: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
