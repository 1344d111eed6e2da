use std::path::PathBuf;

use crate::model::TaskId;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown task {0}")]
    UnknownTask(TaskId),
    #[error("unknown node index {0}")]
    UnknownNode(usize),
    #[error("unknown dependency {0} -> {1}")]
    UnknownEdge(TaskId, TaskId),
    #[error("cycle detected: {}", format_cycle(.0))]
    Cycle(Vec<TaskId>),
    #[error("duplicate task {0} in merge")]
    DuplicateTask(TaskId),
    #[error("invalid task graph: {0}")]
    InvalidGraph(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("sampling starved after {attempts} rejections (bounds [{lower}, {upper}])")]
    SamplingStarvation { attempts: u64, lower: f64, upper: f64 },
    #[error("simulation time regression: clock {clock}, requested {requested}")]
    TimeRegression { clock: f64, requested: f64 },
    #[error("scheduler failed on arrival {arrival}: {source}")]
    Scheduler {
        arrival: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("cell {cell}: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<Error>,
    },
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),
    #[error("normalization requires positive values, got {0}")]
    Normalization(f64),
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn format_cycle(ids: &[TaskId]) -> String {
    ids.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" -> ")
}

impl Error {
    /// Innermost error behind any `Scheduler` or `Cell` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Scheduler { source, .. } | Error::Cell { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
