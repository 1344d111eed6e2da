use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{Assignment, NodeId, Network, Schedule, TaskGraph, TaskId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub finish: f64,
    pub task: TaskId,
}

/// Committed, pairwise disjoint intervals on one node, sorted by start.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTimeline {
    pub node: NodeId,
    committed: Vec<Interval>,
}

impl NodeTimeline {
    pub fn new(node: NodeId) -> Self {
        Self {
            node,
            committed: Vec::new(),
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.committed
    }

    /// Earliest start `>= ready` of an idle window of length `duration`,
    /// either in a gap between commitments or after the last one.
    pub fn earliest_slot(&self, ready: f64, duration: f64) -> f64 {
        // finishes are sorted too, since intervals are disjoint
        let first = self.committed.partition_point(|iv| iv.finish <= ready);
        let mut candidate = ready;
        for iv in &self.committed[first..] {
            if candidate + duration <= iv.start {
                return candidate;
            }
            candidate = candidate.max(iv.finish);
        }
        candidate
    }

    /// Inserts an interval, keeping the list sorted. Panics on overlap,
    /// which would mean a scheduler bypassed [`Self::earliest_slot`].
    pub fn insert(&mut self, iv: Interval) {
        let at = self.committed.partition_point(|x| x.start < iv.start);
        if let Some(next) = self.committed.get(at) {
            assert!(iv.finish <= next.start, "interval for {} overlaps {}", iv.task, next.task);
        }
        if at > 0 {
            let prev = &self.committed[at - 1];
            assert!(prev.finish <= iv.start, "interval for {} overlaps {}", iv.task, prev.task);
        }
        self.committed.insert(at, iv);
    }
}

/// Everything a static scheduler sees besides the graph it places.
#[derive(Debug, Clone)]
pub struct SchedulingContext<'a> {
    pub network: &'a Network,
    /// One timeline per node, in node order.
    pub timelines: Vec<NodeTimeline>,
    /// Node and finish time of already-fixed tasks that feed the graph.
    pub fixed_finish: HashMap<TaskId, (NodeId, f64)>,
    /// Incoming edges from fixed tasks: graph task -> [(fixed predecessor, data size)].
    pub fixed_preds: HashMap<TaskId, Vec<(TaskId, f64)>>,
    pub now: f64,
}

impl<'a> SchedulingContext<'a> {
    /// Context with idle timelines and no fixed predecessors.
    pub fn empty(network: &'a Network, now: f64) -> Self {
        Self {
            network,
            timelines: network.node_ids().map(NodeTimeline::new).collect(),
            fixed_finish: HashMap::new(),
            fixed_preds: HashMap::new(),
            now,
        }
    }

    /// Commits the intervals of `schedule` to the timelines.
    pub fn commit_all(&mut self, schedule: &Schedule) {
        for a in schedule.iter() {
            self.timelines[a.node.0].insert(Interval {
                start: a.start,
                finish: a.finish,
                task: a.task,
            });
        }
    }
}

/// Earliest `(start, finish)` of `task` on `node`, given the data-ready time
/// of each predecessor at that node.
pub fn earliest_start(
    task: &crate::model::Task,
    node: NodeId,
    context: &SchedulingContext<'_>,
    pred_ready: &[f64],
) -> (f64, f64) {
    let ready = pred_ready.iter().copied().fold(task.release.max(context.now), f64::max);
    let duration = context.network.exec_duration(task.cost, node);
    let start = context.timelines[node.0].earliest_slot(ready, duration);
    (start, start + duration)
}

/// Working state shared by the list schedulers: a private copy of the
/// timelines plus the placements made so far.
pub(crate) struct Planner<'g, 'c> {
    pub graph: &'g TaskGraph,
    pub network: &'c Network,
    now: f64,
    timelines: Vec<NodeTimeline>,
    fixed: Vec<Vec<(NodeId, f64, f64)>>,
    placed: Vec<Option<Assignment>>,
}

impl<'g, 'c> Planner<'g, 'c> {
    pub fn new(graph: &'g TaskGraph, ctx: &SchedulingContext<'c>) -> Result<Self> {
        if ctx.timelines.len() != ctx.network.len() {
            return Err(Error::Consistency(format!(
                "{} timelines for {} nodes",
                ctx.timelines.len(),
                ctx.network.len()
            )));
        }
        let mut fixed = vec![Vec::new(); graph.len()];
        for (i, task) in graph.tasks().iter().enumerate() {
            for &(pred, size) in ctx.fixed_preds.get(&task.id).map(Vec::as_slice).unwrap_or_default() {
                let &(node, finish) = ctx.fixed_finish.get(&pred).ok_or_else(|| {
                    Error::Consistency(format!("fixed predecessor {pred} of {} has no finish time", task.id))
                })?;
                fixed[i].push((node, finish, size));
            }
        }
        Ok(Self {
            graph,
            network: ctx.network,
            now: ctx.now,
            timelines: ctx.timelines.clone(),
            fixed,
            placed: vec![None; graph.len()],
        })
    }

    /// Time at which task `i` may start on `node` as far as release time,
    /// the current clock and predecessor data are concerned.
    pub fn data_ready(&self, i: usize, node: NodeId) -> f64 {
        let task = &self.graph.tasks()[i];
        let mut ready = task.release.max(self.now);
        for &(p, size) in self.graph.predecessors(i) {
            let a = self.placed[p].as_ref().expect("predecessor placed first");
            ready = ready.max(a.finish + self.network.comm_duration(size, a.node, node));
        }
        for &(pnode, finish, size) in &self.fixed[i] {
            ready = ready.max(finish + self.network.comm_duration(size, pnode, node));
        }
        ready
    }

    pub fn slot(&self, i: usize, node: NodeId) -> (f64, f64) {
        let duration = self.network.exec_duration(self.graph.tasks()[i].cost, node);
        let start = self.timelines[node.0].earliest_slot(self.data_ready(i, node), duration);
        (start, start + duration)
    }

    /// Node with the earliest finish for task `i`; ties go to the lower node index.
    pub fn best_slot(&self, i: usize) -> (NodeId, f64, f64) {
        let mut best: Option<(NodeId, f64, f64)> = None;
        for node in self.network.node_ids() {
            let (start, finish) = self.slot(i, node);
            if best.is_none_or(|(_, _, f)| finish < f) {
                best = Some((node, start, finish));
            }
        }
        best.expect("network has at least one node")
    }

    pub fn commit(&mut self, i: usize, node: NodeId, start: f64, finish: f64) {
        let task = self.graph.tasks()[i].id;
        self.timelines[node.0].insert(Interval { start, finish, task });
        self.placed[i] = Some(Assignment {
            task,
            node,
            start,
            finish,
        });
    }

    pub fn into_schedule(self) -> Result<Schedule> {
        self.placed
            .into_iter()
            .enumerate()
            .map(|(i, a)| {
                a.ok_or_else(|| Error::Consistency(format!("task {} left unplaced", self.graph.tasks()[i].id)))
            })
            .collect()
    }
}
