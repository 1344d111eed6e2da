//! Schedule validity checking against the five constraints of the
//! dynamic related-machines model.

use std::fmt;

use crate::model::{Assignment, NodeId, Network, Schedule, TaskGraph, TaskId, TIME_EPS};

/// Relative tolerance for the duration check.
pub const DURATION_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// A task of some graph has no assignment.
    Unassigned { task: TaskId },
    /// Assignment references a task that is in no graph, or a node outside the network.
    Unknown { task: TaskId, node: NodeId },
    /// Negative start, or start after finish.
    BadInterval { task: TaskId, start: f64, finish: f64 },
    Duration { task: TaskId, expected: f64, actual: f64 },
    Overlap { node: NodeId, first: TaskId, second: TaskId },
    BeforeArrival { task: TaskId, start: f64, arrival: f64 },
    Precedence { src: TaskId, dst: TaskId, ready: f64, start: f64 },
}

impl Violation {
    /// Number (1-5) of the broken constraint.
    pub fn constraint(&self) -> u8 {
        match self {
            Violation::Unassigned { .. } | Violation::Unknown { .. } | Violation::BadInterval { .. } => 1,
            Violation::Duration { .. } => 2,
            Violation::Overlap { .. } => 3,
            Violation::BeforeArrival { .. } => 4,
            Violation::Precedence { .. } => 5,
        }
    }

    pub fn tasks(&self) -> Vec<TaskId> {
        match *self {
            Violation::Unassigned { task }
            | Violation::Unknown { task, .. }
            | Violation::BadInterval { task, .. }
            | Violation::Duration { task, .. }
            | Violation::BeforeArrival { task, .. } => vec![task],
            Violation::Overlap { first, second, .. } => vec![first, second],
            Violation::Precedence { src, dst, .. } => vec![src, dst],
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[constraint {}] ", self.constraint())?;
        match self {
            Violation::Unassigned { task } => write!(f, "task {task} is not scheduled"),
            Violation::Unknown { task, node } => write!(f, "assignment of {task} to {node} references an unknown task or node"),
            Violation::BadInterval { task, start, finish } => {
                write!(f, "task {task} has invalid interval [{start}, {finish}]")
            }
            Violation::Duration { task, expected, actual } => {
                write!(f, "task {task} runs for {actual}, expected {expected}")
            }
            Violation::Overlap { node, first, second } => {
                write!(f, "tasks {first} and {second} overlap on {node}")
            }
            Violation::BeforeArrival { task, start, arrival } => {
                write!(f, "task {task} starts at {start} before its arrival {arrival}")
            }
            Violation::Precedence { src, dst, ready, start } => {
                write!(f, "task {dst} starts at {start} before data from {src} is ready at {ready}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `schedule` against every graph in `graphs` (indexed by graph index)
/// and returns all violations found.
pub fn validate_schedule(schedule: &Schedule, graphs: &[TaskGraph], network: &Network) -> ValidityReport {
    let mut violations = Vec::new();
    let task_of = |id: TaskId| graphs.get(id.graph).and_then(|g| g.task(id));

    for graph in graphs {
        for task in graph.tasks() {
            if schedule.get(task.id).is_none() {
                violations.push(Violation::Unassigned { task: task.id });
            }
        }
    }

    let mut per_node: Vec<Vec<&Assignment>> = vec![Vec::new(); network.len()];
    for a in schedule.iter() {
        let Some(task) = task_of(a.task) else {
            violations.push(Violation::Unknown { task: a.task, node: a.node });
            continue;
        };
        if a.node.0 >= network.len() {
            violations.push(Violation::Unknown { task: a.task, node: a.node });
            continue;
        }
        if !(a.start >= 0.0 && a.start <= a.finish && a.finish.is_finite()) {
            violations.push(Violation::BadInterval {
                task: a.task,
                start: a.start,
                finish: a.finish,
            });
        }
        let expected = network.exec_duration(task.cost, a.node);
        let actual = a.finish - a.start;
        let scale = expected.max(a.finish.abs()).max(1.0);
        // negated so that NaN counts as a violation
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !((actual - expected).abs() <= DURATION_RTOL * scale) {
            violations.push(Violation::Duration {
                task: a.task,
                expected,
                actual,
            });
        }
        if a.start < task.release - TIME_EPS {
            violations.push(Violation::BeforeArrival {
                task: a.task,
                start: a.start,
                arrival: task.release,
            });
        }
        per_node[a.node.0].push(a);
    }

    for (node, list) in per_node.iter_mut().enumerate() {
        list.sort_by(|x, y| x.start.total_cmp(&y.start).then(x.task.cmp(&y.task)));
        for i in 0..list.len() {
            for later in &list[i + 1..] {
                if later.start >= list[i].finish - TIME_EPS {
                    break;
                }
                violations.push(Violation::Overlap {
                    node: NodeId(node),
                    first: list[i].task,
                    second: later.task,
                });
            }
        }
    }

    for graph in graphs {
        for dep in graph.dependencies() {
            let (Some(src), Some(dst)) = (schedule.get(dep.src), schedule.get(dep.dst)) else {
                continue;
            };
            if src.node.0 >= network.len() || dst.node.0 >= network.len() {
                continue;
            }
            let ready = src.finish + network.comm_duration(dep.size, src.node, dst.node);
            if dst.start < ready - TIME_EPS {
                violations.push(Violation::Precedence {
                    src: dep.src,
                    dst: dep.dst,
                    ready,
                    start: dst.start,
                });
            }
        }
    }

    ValidityReport { violations }
}
