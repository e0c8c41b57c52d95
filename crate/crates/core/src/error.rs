use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },

    #[error("image has zero width or height")]
    ZeroDimension,

    #[error("buffer of {actual} pixels does not match {width}x{height}")]
    BufferSize {
        width: u32,
        height: u32,
        actual: usize,
    },

    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: u32,
        left_height: u32,
        right_width: u32,
        right_height: u32,
    },

    #[error("label {0} does not fit in a 16-bit indexed image")]
    LabelOverflow(u32),

    #[error("no blob lines detected")]
    NoBlobLines,

    #[error("blob line {label} out of range 1..={count}")]
    LabelOutOfRange { label: u32, count: u32 },

    #[error("point ({x}, {y}) lies outside the page")]
    PointOutOfBounds { x: f64, y: f64 },

    #[error("beta undefined: neighbour graph has no edges")]
    BetaUndefined,

    #[error("labeling covers {actual} components, model has {expected}")]
    IncompleteLabeling { expected: usize, actual: usize },

    #[error("label index {label} invalid for a model with {count} labels")]
    InvalidLabel { label: usize, count: usize },

    #[error("tiles do not cover pixel ({x}, {y})")]
    MissingTile { x: u32, y: u32 },

    #[error("invalid tile spec: {0}")]
    TileSpec(String),

    #[error("strip too small to warp: {width}x{height}")]
    DegenerateStrip { width: u32, height: u32 },

    #[error("infeasible synthetic page: {0}")]
    InfeasibleSynth(String),

    #[error("invalid threshold {0}: must lie in (0, 1]")]
    Threshold(f64),

    #[error("malformed PAGE XML: {0}")]
    PageXml(String),
}

impl Error {
    /// Stable machine-readable code, used by the CLI on failure.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Read { .. } => "E_READ",
            Error::Write { .. } => "E_WRITE",
            Error::ZeroDimension => "E_ZERO_DIMENSION",
            Error::BufferSize { .. } => "E_BUFFER_SIZE",
            Error::DimensionMismatch { .. } => "E_DIMENSION_MISMATCH",
            Error::LabelOverflow(_) => "E_LABEL_OVERFLOW",
            Error::NoBlobLines => "E_NO_BLOB_LINES",
            Error::LabelOutOfRange { .. } => "E_LABEL_OUT_OF_RANGE",
            Error::PointOutOfBounds { .. } => "E_POINT_OUT_OF_BOUNDS",
            Error::BetaUndefined => "E_BETA_UNDEFINED",
            Error::IncompleteLabeling { .. } => "E_INCOMPLETE_LABELING",
            Error::InvalidLabel { .. } => "E_INVALID_LABEL",
            Error::MissingTile { .. } => "E_MISSING_TILE",
            Error::TileSpec(_) => "E_TILE_SPEC",
            Error::DegenerateStrip { .. } => "E_DEGENERATE_STRIP",
            Error::InfeasibleSynth(_) => "E_INFEASIBLE_SYNTH",
            Error::Threshold(_) => "E_THRESHOLD",
            Error::PageXml(_) => "E_PAGE_XML",
        }
    }

    pub fn read(
        path: impl Into<PathBuf>,
        source: impl std::error::Error + Send + Sync + 'static,
    ) -> Self {
        Error::Read {
            path: path.into(),
            source: Box::new(source),
        }
    }

    pub fn write(
        path: impl Into<PathBuf>,
        source: impl std::error::Error + Send + Sync + 'static,
    ) -> Self {
        Error::Write {
            path: path.into(),
            source: Box::new(source),
        }
    }
}
