use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument {value} outside the domain [0, 1]")]
    OutsideDomain { value: f64 },

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dyadic depth {depth} exceeds the supported maximum {max}")]
    DepthTooLarge { depth: u32, max: u32 },

    #[error("truncation level {requested} needs pyramid depth {needed}, have {available}")]
    TruncationTooDeep {
        requested: u32,
        needed: u32,
        available: u32,
    },

    #[error("Gaussian normalizer |W(1)| = {value:e} is at or below the degeneracy threshold")]
    DegenerateNormalizer { value: f64 },

    #[error("cell [{left}, {right}) has zero mass under f but holds {count} observation(s)")]
    ImpossibleMass { left: f64, right: f64, count: u64 },

    #[error("paths have different depths ({left} vs {right})")]
    MismatchedDepth { left: u32, right: u32 },

    #[error("distributions have different atom counts ({left} vs {right})")]
    MismatchedAtoms { left: usize, right: usize },

    #[error("unsupported law pairing: {0}")]
    UnsupportedLaw(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
