use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error(transparent)]
    Solver(#[from] spider_vr::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv { path: String, source: csv::Error },

    #[error("json error in {path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },

    #[error("trace {path} does not match the trace schema: {message}")]
    Schema { path: String, message: String },

    #[error("insufficient points: {0}")]
    InsufficientPoints(String),
}

impl BenchError {
    /// Process exit code: 1 for configuration problems, 2 for anything that
    /// failed while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) | BenchError::InsufficientPoints(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
