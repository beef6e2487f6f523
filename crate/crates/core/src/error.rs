use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("triangle {triangle} references vertex {index} but the mesh has {count} vertices")]
    VertexIndexOutOfRange {
        triangle: usize,
        index: usize,
        count: usize,
    },

    #[error("joint member {index} is out of range ({count} triangles)")]
    JointTriangleOutOfRange { index: usize, count: usize },

    #[error("joint axis must have unit length, got norm {norm}")]
    JointAxisNotUnit { norm: f64 },

    #[error("invalid pose: {0}")]
    InvalidPose(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid histogram: {0}")]
    InvalidHistogram(String),

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("malformed PGM: {0}")]
    MalformedPgm(String),

    #[error("unsupported PGM maxval {0} (only 255 is supported)")]
    UnsupportedMaxval(u32),

    #[error("config error: {0}")]
    Config(String),

    #[error("frame {frame}: {source}")]
    Frame {
        frame: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("no frames found in {}", .0.display())]
    NoFrames(PathBuf),

    #[error("{0}")]
    Empty(String),

    #[error("index {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    /// True for errors caused by user input (bad config, bad spec, missing
    /// inputs) rather than a failure while processing valid input.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::Config(_) | Error::NoFrames(_) | Error::Parse { .. } => true,
            Error::Frame { source, .. } => source.is_usage(),
            _ => false,
        }
    }
}
