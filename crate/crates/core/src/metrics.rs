//! Evaluation metrics computed from a final schedule.

use serde::{Deserialize, Serialize};

use crate::engine::SimulationResult;
use crate::error::{Error, Result};
use crate::model::{Network, Schedule, TaskGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub total_makespan: f64,
    pub mean_makespan: f64,
    pub mean_flowtime: f64,
    /// Per node, in node order.
    pub utilization: Vec<f64>,
    pub mean_utilization: f64,
    /// Seconds of wall-clock time spent inside the scheduler.
    pub scheduler_runtime: f64,
}

impl MetricVector {
    pub fn compute(result: &SimulationResult, graphs: &[TaskGraph], network: &Network) -> Result<Self> {
        Self::from_schedule(&result.schedule, graphs, network, scheduler_runtime(result))
    }

    pub fn from_schedule(schedule: &Schedule, graphs: &[TaskGraph], network: &Network, runtime: f64) -> Result<Self> {
        let utilization = utilization(schedule, graphs, network)?;
        let mean_utilization = utilization.iter().sum::<f64>() / utilization.len() as f64;
        Ok(Self {
            total_makespan: total_makespan(schedule)?,
            mean_makespan: mean_makespan(schedule, graphs)?,
            mean_flowtime: mean_flowtime(schedule, graphs)?,
            utilization,
            mean_utilization,
            scheduler_runtime: runtime,
        })
    }
}

/// Latest finish over all tasks.
pub fn total_makespan(schedule: &Schedule) -> Result<f64> {
    schedule.makespan().ok_or(Error::UndefinedMetric("total makespan of an empty schedule"))
}

/// Per graph `(earliest start, latest finish)` over its scheduled tasks.
fn graph_spans(schedule: &Schedule, graphs: &[TaskGraph]) -> Result<Vec<(f64, f64)>> {
    let mut spans = vec![(f64::INFINITY, f64::NEG_INFINITY); graphs.len()];
    for a in schedule.iter() {
        let span = spans
            .get_mut(a.task.graph)
            .ok_or(Error::UnknownTask(a.task))?;
        span.0 = span.0.min(a.start);
        span.1 = span.1.max(a.finish);
    }
    if graphs.is_empty() || spans.iter().any(|s| !s.1.is_finite()) {
        return Err(Error::UndefinedMetric("graph without scheduled tasks"));
    }
    Ok(spans)
}

/// Mean over graphs of `latest finish - arrival`.
pub fn mean_makespan(schedule: &Schedule, graphs: &[TaskGraph]) -> Result<f64> {
    let spans = graph_spans(schedule, graphs)?;
    let sum: f64 = spans.iter().zip(graphs).map(|((_, end), g)| end - g.arrival()).sum();
    Ok(sum / graphs.len() as f64)
}

/// Mean over graphs of `latest finish - earliest start`.
pub fn mean_flowtime(schedule: &Schedule, graphs: &[TaskGraph]) -> Result<f64> {
    let spans = graph_spans(schedule, graphs)?;
    let sum: f64 = spans.iter().map(|(start, end)| end - start).sum();
    Ok(sum / graphs.len() as f64)
}

/// Execution time `c(t) / s(v)` of the tasks on each node divided by the total makespan.
pub fn utilization(schedule: &Schedule, graphs: &[TaskGraph], network: &Network) -> Result<Vec<f64>> {
    let makespan = total_makespan(schedule)?;
    if makespan <= 0.0 {
        return Err(Error::UndefinedMetric("utilization with zero makespan"));
    }
    let mut busy = vec![0.0; network.len()];
    for a in schedule.iter() {
        let cost = graphs
            .get(a.task.graph)
            .and_then(|g| g.task(a.task))
            .ok_or(Error::UnknownTask(a.task))?
            .cost;
        network.check_node(a.node)?;
        busy[a.node.0] += network.exec_duration(cost, a.node);
    }
    Ok(busy.into_iter().map(|b| b / makespan).collect())
}

/// Total wall-clock seconds the scheduler ran across all arrivals.
pub fn scheduler_runtime(result: &SimulationResult) -> f64 {
    // integer nanoseconds add exactly; convert once
    result.scheduler_durations.iter().sum::<std::time::Duration>().as_secs_f64()
}

/// Divides every value by the minimum, so the best (smallest) maps to 1.
pub fn normalize(values: &[f64]) -> Result<Vec<f64>> {
    if let Some(&bad) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Normalization(bad));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(values.iter().map(|v| v / min).collect())
}
