use std::path::PathBuf;

/// Crate-wide error type. Variants carry enough context (indices, step counts,
/// paths) that a failure deep in a study can be reported without re-running it.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("size-field expression error: {0}")]
    Expression(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("simulation diverged at step {step}: {detail}")]
    SimulationDiverged { step: usize, detail: String },

    #[error("degenerate triangulation input: {0}")]
    DegenerateInput(String),

    #[error("duplicate points (index pairs): {0:?}")]
    DuplicatePoints(Vec<(usize, usize)>),

    #[error("empty mesh: {0}")]
    EmptyMesh(String),

    #[error("mesh format error in {path}: {detail}")]
    MeshFormat { path: PathBuf, detail: String },

    #[error("linear solver stalled: residual {residual:.3e} after {iterations} iterations")]
    SolverStalled { iterations: usize, residual: f64 },

    #[error("{stage} failed for domain '{domain}' at size {h}: {source}")]
    Stage {
        domain: String,
        h: f64,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps an error with (domain, size, stage) context for study pipelines.
    pub fn in_stage(self, domain: &str, h: f64, stage: &'static str) -> Self {
        Error::Stage {
            domain: domain.to_string(),
            h,
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
