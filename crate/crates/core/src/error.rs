use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A characteristic step would move further than the extension band.
    #[error("time step too coarse: displacement {displacement:.4e} per step exceeds {limit:.4e}; refine the time grid")]
    StepTooCoarse { displacement: f64, limit: f64 },

    #[error("{what} did not converge after {iterations} iterations (last gap {last:.3e})")]
    NonConvergence {
        what: String,
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn in_stage(self, stage: &str) -> Self {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }

    /// Innermost error, looking through stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}
