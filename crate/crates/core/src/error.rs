use std::path::PathBuf;

/// Errors produced by the engine, the file formats and the evaluation tools.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("failed to parse config {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("invalid neighbor order {0} (expected 1 or 2)")]
    InvalidOrder(u8),

    #[error("lattice {width}x{height} is too small (minimum 8x8)")]
    LatticeTooSmall { width: usize, height: usize },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("negative concentration {value} at site {site}")]
    NegativeConcentration { site: usize, value: f64 },

    #[error("copy attempt requires distinct ids (both {0})")]
    SameId(u32),

    #[error("{count} cells do not fit on a lattice of {capacity} sites")]
    CapacityExceeded { count: usize, capacity: usize },

    #[error("bad magic bytes {0:?}")]
    BadMagic([u8; 4]),

    #[error("unsupported snapshot version {0}")]
    UnsupportedVersion(u16),

    #[error("truncated snapshot: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("snapshot has {extra} trailing bytes")]
    TrailingData { extra: usize },

    #[error("invalid snapshot dimensions {width}x{height}")]
    InvalidDimensions { width: u32, height: u32 },

    #[error("invalid field value {value} at site {site}")]
    InvalidField { site: usize, value: f64 },

    #[error("snapshot window [{first}, {last}] is invalid")]
    InvalidWindow { first: u64, last: u64 },

    #[error("missing snapshots for mcs {0:?}")]
    MissingSnapshots(Vec<u64>),

    #[error("horizon 0 pairs every snapshot with itself; pass allow_zero_horizon to permit it")]
    ZeroHorizon,

    #[error("duplicate seed {0}")]
    DuplicateSeed(u64),

    #[error("need {needed} seeds, found {found}")]
    NotEnoughSeeds { needed: usize, found: usize },

    #[error("cannot compare an empty distribution with a non-empty one")]
    EmptyDistribution,

    #[error("no samples for {0}")]
    EmptySample(String),

    #[error("run {run} at mcs {mcs}: {source}")]
    Run {
        run: String,
        mcs: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// The underlying error with file and run context removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::File { source, .. } | Error::Run { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}
