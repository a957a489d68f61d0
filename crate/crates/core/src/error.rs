use thiserror::Error;

/// Every failure the library reports. The `Display` form is a single line
/// prefixed with the module that raised it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("hmd_ingest: empty input")]
    EmptyInput,
    #[error("hmd_ingest: malformed row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("hmd_ingest: non-contiguous years: {0}")]
    NonContiguousYears(String),
    #[error("hmd_ingest: year {0} has no usable rates")]
    AllMissingYear(i32),
    #[error("hmd_ingest: schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("hmd_ingest: invalid surface: {0}")]
    InvalidSurface(String),

    #[error("smoothing: singular penalized system")]
    SingularSystem,
    #[error("{0}: non-finite input")]
    NonFiniteInput(&'static str),
    #[error("{module}: invalid configuration: {reason}")]
    InvalidConfig { module: &'static str, reason: String },

    #[error("ufpca: kappa {0} outside (0, 1)")]
    KappaOutOfRange(f64),
    #[error("ufpca: need at least {need} years, got {got}")]
    InsufficientYears { need: usize, got: usize },
    #[error("{module}: index {index} out of range (len {len})")]
    IndexOutOfRange {
        module: &'static str,
        index: usize,
        len: usize,
    },
    #[error("mfpca: empty bundle")]
    EmptyBundle,
    #[error("{module}: shape mismatch: {reason}")]
    ShapeMismatch { module: &'static str, reason: String },

    #[error("tsmodels: series of length {len} is shorter than {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("forecasters: alpha {0} outside (0, 1)")]
    AlphaOutOfRange(f64),
    #[error("forecasters: {0}")]
    Model(String),

    #[error("evaluation: insufficient span: {0}")]
    InsufficientSpan(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("io: csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
