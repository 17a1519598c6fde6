use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported mesh format for {0} (expected .obj or .ply)")]
    UnsupportedFormat(PathBuf),

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("malformed file {path}: {message}")]
    Malformed { path: PathBuf, message: String },

    #[error("face with {0} vertices cannot be triangulated")]
    DegenerateFace(usize),

    #[error("triangle {triangle} references vertex {index} but the mesh has {count} vertices")]
    IndexOutOfRange {
        triangle: usize,
        index: usize,
        count: usize,
    },

    #[error("mesh has no non-degenerate triangles")]
    EmptyMesh,

    #[error("invalid camera: {0}")]
    InvalidCamera(String),

    #[error("pixel ({u}, {v}) outside a {width}x{height} image")]
    PixelOutOfRange {
        u: usize,
        v: usize,
        width: usize,
        height: usize,
    },

    #[error("mesh is not entirely in front of the camera")]
    BehindCamera,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("epsilon {epsilon} must lie strictly between 0 and the background distance {background}")]
    EpsilonOutOfRange { epsilon: f64, background: f64 },

    #[error("resolution mismatch: {0} vs {1}")]
    ResolutionMismatch(usize, usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("ground truth has no foreground pixels")]
    NoForeground,

    #[error("JSON error in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Malformed {
            path: path.into(),
            message: message.into(),
        }
    }
}
