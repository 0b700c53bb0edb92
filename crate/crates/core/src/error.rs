use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series too short: need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("zero-norm vector at paragraph {index}")]
    ZeroVector { index: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("terminal/initial ratio undefined: initial window mean is zero")]
    DegenerateTI,

    #[error("empty series")]
    EmptySeries,

    #[error("empty input")]
    EmptyInput,

    #[error("Sakoe-Chiba band of half-width {band} cannot connect series of lengths {a} and {b}")]
    BandInfeasible { band: usize, a: usize, b: usize },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("silhouette is undefined for a single cluster")]
    SingleCluster,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("shapelet of length {len} exceeds series length {series}")]
    ShapeletTooLong { len: usize, series: usize },

    #[error("both classes must be present")]
    SingleClass,

    #[error("input has zero rank variance")]
    ConstantInput,

    #[error("control variable is perfectly rank-correlated with an input")]
    DegenerateControl,

    #[error("design matrix is rank deficient (columns {columns:?})")]
    RankDeficient { columns: Vec<usize> },

    #[error("contingency table has a zero marginal")]
    ZeroMarginal,

    #[error("all observations are identical")]
    AllIdentical,

    #[error("empty text")]
    EmptyText,

    #[error("bad magic bytes {found:?}")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported format version {0}")]
    VersionUnsupported(u32),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("failed to write {path}: {source}")]
    WriteFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
