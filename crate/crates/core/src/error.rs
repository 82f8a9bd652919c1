use thiserror::Error;

/// Errors produced anywhere in the discretization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("meshing error in layer {layer}: {message}")]
    Meshing { layer: usize, message: String },

    #[error("parse error at line {line} (section `{section}`): {message}")]
    Parse {
        line: usize,
        section: String,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("singular matrix: zero pivot at step {pivot}")]
    Singular { pivot: usize },

    #[error("matrix is not positive definite (step {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("point ({x}, {t}) could not be located in the mesh")]
    PointLocation { x: f64, t: f64 },

    #[error("convergence study error: {0}")]
    Study(String),

    /// Failure while processing one refinement level; keeps the inner kind.
    #[error("level with {layers} layers: {source}")]
    AtLevel { layers: usize, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Broad failure class, used by front ends to pick exit codes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Domain(_) | Error::Config(_) => ErrorKind::Usage,
            Error::Geometry(_)
            | Error::Meshing { .. }
            | Error::Validation(_)
            | Error::PointLocation { .. } => ErrorKind::Geometry,
            Error::Assembly(_)
            | Error::Singular { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::DimensionMismatch { .. }
            | Error::Solver(_)
            | Error::Study(_) => ErrorKind::Solver,
            Error::Parse { .. } | Error::Io(_) | Error::Csv(_) => ErrorKind::Io,
            Error::AtLevel { source, .. } => source.kind(),
        }
    }

    pub fn at_level(self, layers: usize) -> Self {
        Error::AtLevel {
            layers,
            source: Box::new(self),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Geometry,
    Solver,
    Io,
}

pub type Result<T> = std::result::Result<T, Error>;
