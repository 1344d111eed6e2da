//! Rank-based list schedulers: HEFT and CPOP.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::Result;
use crate::model::{NodeId, Network, Schedule, TaskGraph, TaskId};

use super::timeline::{Planner, SchedulingContext};

/// Mean execution-time factor (mean of `1 / speed` over nodes) and mean
/// communication factor (mean of `1 / strength` over distinct node pairs).
fn mean_factors(network: &Network) -> (f64, f64) {
    let n = network.len() as f64;
    let exec = network.nodes().iter().map(|v| 1.0 / v.speed).sum::<f64>() / n;
    let (sum, count) = network
        .links()
        .fold((0.0, 0usize), |(s, c), (_, _, strength)| (s + 1.0 / strength, c + 1));
    let comm = if count == 0 { 0.0 } else { sum / count as f64 };
    (exec, comm)
}

pub(crate) fn upward_ranks(graph: &TaskGraph, network: &Network) -> Vec<f64> {
    let (exec, comm) = mean_factors(network);
    let mut rank = vec![0.0; graph.len()];
    for &i in graph.topo_indices().iter().rev() {
        let tail = graph
            .successors(i)
            .iter()
            .map(|&(j, size)| size * comm + rank[j])
            .fold(0.0, f64::max);
        rank[i] = graph.tasks()[i].cost * exec + tail;
    }
    rank
}

pub(crate) fn downward_ranks(graph: &TaskGraph, network: &Network) -> Vec<f64> {
    let (exec, comm) = mean_factors(network);
    let mut rank = vec![0.0; graph.len()];
    for &i in graph.topo_indices() {
        rank[i] = graph
            .predecessors(i)
            .iter()
            .map(|&(p, size)| rank[p] + graph.tasks()[p].cost * exec + size * comm)
            .fold(0.0, f64::max);
    }
    rank
}

/// Heap entry: highest priority first, then lowest task id.
#[derive(PartialEq)]
struct Ready {
    priority: f64,
    id: TaskId,
    index: usize,
}

impl Eq for Ready {}

impl Ord for Ready {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Ready {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Priority-ordered list scheduling over the ready set. `place` picks the
/// node for each task popped from the queue.
fn list_schedule(
    graph: &TaskGraph,
    ctx: &SchedulingContext<'_>,
    priority: &[f64],
    mut place: impl FnMut(&Planner<'_, '_>, usize) -> (NodeId, f64, f64),
) -> Result<Schedule> {
    let mut planner = Planner::new(graph, ctx)?;
    let mut waiting: Vec<usize> = (0..graph.len()).map(|i| graph.predecessors(i).len()).collect();
    let mut heap: BinaryHeap<Ready> = (0..graph.len())
        .filter(|&i| waiting[i] == 0)
        .map(|i| Ready {
            priority: priority[i],
            id: graph.tasks()[i].id,
            index: i,
        })
        .collect();
    while let Some(Ready { index, .. }) = heap.pop() {
        let (node, start, finish) = place(&planner, index);
        planner.commit(index, node, start, finish);
        for &(j, _) in graph.successors(index) {
            waiting[j] -= 1;
            if waiting[j] == 0 {
                heap.push(Ready {
                    priority: priority[j],
                    id: graph.tasks()[j].id,
                    index: j,
                });
            }
        }
    }
    planner.into_schedule()
}

/// Heterogeneous Earliest Finish Time: descending upward rank, each task on
/// the node giving the earliest finish (insertion-based).
pub fn heft(graph: &TaskGraph, ctx: &SchedulingContext<'_>) -> Result<Schedule> {
    let rank = upward_ranks(graph, ctx.network);
    list_schedule(graph, ctx, &rank, |planner, i| planner.best_slot(i))
}

/// Tasks on the critical path: starting from the entry task with the
/// highest `upward + downward` priority, follow the highest-priority
/// successor until an exit task.
pub(crate) fn critical_path(graph: &TaskGraph, priority: &[f64]) -> Vec<usize> {
    let pick = |candidates: &mut dyn Iterator<Item = usize>| {
        candidates.max_by(|&a, &b| {
            priority[a]
                .total_cmp(&priority[b])
                .then_with(|| graph.tasks()[b].id.cmp(&graph.tasks()[a].id))
        })
    };
    let mut entries = (0..graph.len()).filter(|&i| graph.predecessors(i).is_empty());
    let mut path = Vec::new();
    let mut cur = pick(&mut entries);
    while let Some(i) = cur {
        path.push(i);
        cur = pick(&mut graph.successors(i).iter().map(|&(j, _)| j));
    }
    path
}

/// Critical Path On a Processor: critical-path tasks are pinned to the node
/// minimizing their total execution time, the rest go to the earliest-finish node.
pub fn cpop(graph: &TaskGraph, ctx: &SchedulingContext<'_>) -> Result<Schedule> {
    let up = upward_ranks(graph, ctx.network);
    let down = downward_ranks(graph, ctx.network);
    let priority: Vec<f64> = up.iter().zip(&down).map(|(u, d)| u + d).collect();
    let path = critical_path(graph, &priority);
    let mut on_path = vec![false; graph.len()];
    for &i in &path {
        on_path[i] = true;
    }
    let path_cost: f64 = path.iter().map(|&i| graph.tasks()[i].cost).sum();
    let pinned = ctx
        .network
        .node_ids()
        .map(|v| (v, ctx.network.exec_duration(path_cost, v)))
        .fold(None, |best: Option<(NodeId, f64)>, (v, t)| match best {
            Some((_, bt)) if bt <= t => best,
            _ => Some((v, t)),
        })
        .map(|(v, _)| v);
    list_schedule(graph, ctx, &priority, |planner, i| match pinned {
        Some(node) if on_path[i] => {
            let (start, finish) = planner.slot(i, node);
            (node, start, finish)
        }
        _ => planner.best_slot(i),
    })
}
