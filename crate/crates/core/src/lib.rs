//! Dynamic task-graph scheduling on heterogeneous networks.
//!
//! Task graphs arrive over time and are placed by classic list schedulers
//! (HEFT, CPOP, Min-Min, Max-Min, Random) under one of three preemption
//! policies: fully preemptive, non-preemptive, or Last-K, which only
//! reschedules not-yet-started tasks of the K most recent prior graphs.

pub mod engine;
pub mod error;
pub mod experiment;
pub mod gantt;
pub mod metrics;
pub mod model;
pub mod schedulers;
pub mod validate;
pub mod workloads;

pub use engine::{run_simulation, PreemptionPolicy, SimulationResult, SimulationState, TaskState};
pub use error::{Error, Result};
pub use metrics::MetricVector;
pub use model::{Assignment, Network, Node, NodeId, Schedule, TaskGraph, TaskId};
pub use schedulers::SchedulerKind;
pub use validate::{validate_schedule, ValidityReport, Violation};
pub use workloads::{Workload, WorkloadSpec};
