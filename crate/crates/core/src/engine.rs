//! Dynamic simulation loop.
//!
//! Graphs arrive in time order. At each arrival the engine advances the
//! task lifecycle clock, reverts the tasks the preemption policy allows to
//! move, merges them with the arriving graph and hands the result to a
//! static scheduler together with every commitment that stays fixed.
//!
//! Only tasks in state [`TaskState::Scheduled`] can be reverted. A task whose
//! start equals the arrival time is already executing. Under
//! [`PreemptionPolicy::LastK`] the window counts prior graphs only: the
//! arriving graph is always scheduled and is not part of the `K`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{merge_graphs, Assignment, Network, Schedule, Task, TaskGraph, TaskId};
use crate::schedulers::{Interval, NodeTimeline, SchedulerKind, SchedulingContext};
use crate::validate::validate_schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskState {
    Unscheduled,
    Scheduled,
    Executing,
    Finished,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PreemptionPolicy {
    FullyPreemptive,
    NonPreemptive,
    /// Reschedule not-yet-started tasks of the `preemption_window` most
    /// recent prior graphs.
    LastK(usize),
}

impl PreemptionPolicy {
    /// `LastK(0)` collapses to `NonPreemptive`.
    pub fn last_k(preemption_window: usize) -> Self {
        if preemption_window == 0 {
            PreemptionPolicy::NonPreemptive
        } else {
            PreemptionPolicy::LastK(preemption_window)
        }
    }

    pub fn normalized(self) -> Self {
        match self {
            PreemptionPolicy::LastK(0) => PreemptionPolicy::NonPreemptive,
            other => other,
        }
    }

    /// Window size, or `None` for unbounded.
    pub fn window(self) -> Option<usize> {
        match self {
            PreemptionPolicy::FullyPreemptive => None,
            PreemptionPolicy::NonPreemptive => Some(0),
            PreemptionPolicy::LastK(w) => Some(w),
        }
    }

    /// Short label: `P`, `NP`, or `<K>P`.
    pub fn label(self) -> String {
        match self {
            PreemptionPolicy::FullyPreemptive => "P".into(),
            PreemptionPolicy::NonPreemptive => "NP".into(),
            PreemptionPolicy::LastK(w) => format!("{w}P"),
        }
    }
}

impl fmt::Display for PreemptionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for PreemptionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        match upper.as_str() {
            "P" | "PREEMPTIVE" | "FULL" => Ok(PreemptionPolicy::FullyPreemptive),
            "NP" | "NONPREEMPTIVE" | "NON-PREEMPTIVE" => Ok(PreemptionPolicy::NonPreemptive),
            _ => upper
                .strip_suffix('P')
                .and_then(|k| k.parse::<usize>().ok())
                .map(PreemptionPolicy::LastK)
                .ok_or_else(|| Error::Config(format!("unknown preemption policy '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Arrival,
    Revert,
    Place,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub graph: usize,
    /// Present for revert/place events.
    pub assignment: Option<Assignment>,
}

#[derive(Debug, Clone)]
pub struct SimulationState {
    pub clock: f64,
    pub states: BTreeMap<TaskId, TaskState>,
    pub schedule: Schedule,
    pub graphs: Vec<TaskGraph>,
    pub events: Vec<Event>,
}

impl Default for SimulationState {
    fn default() -> Self {
        Self::new()
    }
}

impl SimulationState {
    pub fn new() -> Self {
        Self {
            clock: 0.0,
            states: BTreeMap::new(),
            schedule: Schedule::new(),
            graphs: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn state(&self, task: TaskId) -> Option<TaskState> {
        self.states.get(&task).copied()
    }

    /// Moves the clock forward and updates task lifecycles. Assignments are untouched.
    pub fn advance_to(&mut self, time: f64) -> Result<()> {
        if time < self.clock {
            return Err(Error::TimeRegression {
                clock: self.clock,
                requested: time,
            });
        }
        self.clock = time;
        for (id, state) in self.states.iter_mut() {
            let Some(a) = self.schedule.get(*id) else { continue };
            if *state == TaskState::Scheduled && a.start <= time {
                *state = TaskState::Executing;
            }
            if *state == TaskState::Executing && a.finish <= time {
                *state = TaskState::Finished;
            }
        }
        Ok(())
    }

    /// Tasks the policy lets the scheduler move when graph `new_graph_index` arrives.
    pub fn reschedulable_set(&self, policy: PreemptionPolicy, new_graph_index: usize) -> BTreeSet<TaskId> {
        let oldest = match policy.window() {
            None => 0,
            Some(w) => new_graph_index.saturating_sub(w),
        };
        self.states
            .range(TaskId::new(oldest, 0)..TaskId::new(new_graph_index, 0))
            .filter(|(_, &s)| s == TaskState::Scheduled)
            .map(|(&id, _)| id)
            .collect()
    }

    /// Processes one arrival and returns the wall-clock time spent inside the scheduler.
    pub fn handle_arrival(
        &mut self,
        graph: TaskGraph,
        policy: PreemptionPolicy,
        scheduler: SchedulerKind,
        rng_seed: u64,
        network: &Network,
    ) -> Result<Duration> {
        let index = self.graphs.len();
        if let Some(t) = graph.tasks().iter().find(|t| t.id.graph != index) {
            return Err(Error::Consistency(format!(
                "arrival {index} carries task {} of another graph",
                t.id
            )));
        }
        self.advance_to(graph.arrival())?;
        let now = self.clock;
        self.events.push(Event {
            t: now,
            kind: EventKind::Arrival,
            graph: index,
            assignment: None,
        });

        let reverted = self.reschedulable_set(policy, index);
        for &id in &reverted {
            let a = self.schedule.remove(id).expect("scheduled task has an assignment");
            self.states.insert(id, TaskState::Unscheduled);
            self.events.push(Event {
                t: now,
                kind: EventKind::Revert,
                graph: id.graph,
                assignment: Some(a),
            });
        }

        for task in graph.tasks() {
            self.states.insert(task.id, TaskState::Unscheduled);
        }
        self.graphs.push(graph);

        let (merged, fixed_preds) = self.pending_graph(&reverted, index)?;
        let mut ctx = SchedulingContext {
            network,
            timelines: network.node_ids().map(NodeTimeline::new).collect(),
            fixed_finish: HashMap::new(),
            fixed_preds,
            now,
        };
        for a in self.schedule.iter() {
            // intervals ending by `now` cannot constrain placements starting at or after it
            if a.finish > now {
                ctx.timelines[a.node.0].insert(Interval {
                    start: a.start,
                    finish: a.finish,
                    task: a.task,
                });
            }
        }
        for preds in ctx.fixed_preds.values() {
            for (pred, _) in preds {
                let a = self.schedule.get(*pred).ok_or_else(|| {
                    Error::Consistency(format!("fixed predecessor {pred} has no assignment"))
                })?;
                ctx.fixed_finish.insert(*pred, (a.node, a.finish));
            }
        }

        let seed = rng_seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let started = Instant::now();
        let fragment = scheduler.schedule(&merged, &ctx, seed);
        let elapsed = started.elapsed();
        let fragment = fragment.map_err(|e| Error::Scheduler {
            arrival: index,
            source: Box::new(e),
        })?;

        if fragment.len() != merged.len() || fragment.iter().any(|a| !merged.contains(a.task)) {
            return Err(Error::Consistency(format!(
                "scheduler {scheduler} returned {} assignments for {} pending tasks",
                fragment.len(),
                merged.len()
            )));
        }
        for a in fragment.iter() {
            self.schedule.insert(*a);
            self.states.insert(a.task, TaskState::Scheduled);
            self.events.push(Event {
                t: now,
                kind: EventKind::Place,
                graph: a.task.graph,
                assignment: Some(*a),
            });
        }
        Ok(elapsed)
    }

    /// Merges the reverted tasks (with their internal edges) and the newest
    /// graph. Edges from fixed tasks into the merge are returned separately.
    #[allow(clippy::type_complexity)]
    fn pending_graph(
        &self,
        reverted: &BTreeSet<TaskId>,
        new_index: usize,
    ) -> Result<(TaskGraph, HashMap<TaskId, Vec<(TaskId, f64)>>)> {
        let mut by_graph: BTreeMap<usize, Vec<TaskId>> = BTreeMap::new();
        for id in reverted {
            by_graph.entry(id.graph).or_default().push(*id);
        }
        let mut fragments = Vec::with_capacity(by_graph.len() + 1);
        let mut fixed_preds: HashMap<TaskId, Vec<(TaskId, f64)>> = HashMap::new();
        for (&g, ids) in &by_graph {
            let graph = &self.graphs[g];
            let tasks: Vec<Task> = ids.iter().map(|id| graph.task(*id).expect("own task").clone()).collect();
            let mut deps = Vec::new();
            for dep in graph.dependencies() {
                match (reverted.contains(&dep.src), reverted.contains(&dep.dst)) {
                    (true, true) => deps.push(*dep),
                    (false, true) => fixed_preds.entry(dep.dst).or_default().push((dep.src, dep.size)),
                    (true, false) => {
                        return Err(Error::Consistency(format!(
                            "reverted task {} feeds fixed task {}",
                            dep.src, dep.dst
                        )))
                    }
                    (false, false) => {}
                }
            }
            fragments.push(TaskGraph::from_parts(tasks, deps)?);
        }
        let merged = merge_graphs(fragments.iter().chain(std::iter::once(&self.graphs[new_index])))?;
        Ok((merged, fixed_preds))
    }
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub schedule: Schedule,
    /// Wall-clock time inside the scheduler, one entry per arrival.
    pub scheduler_durations: Vec<Duration>,
    pub events: Vec<Event>,
}

impl SimulationResult {
    /// Rebuilds the final schedule by applying place and revert events in order.
    pub fn replay(&self) -> Schedule {
        replay_events(&self.events)
    }
}

pub fn replay_events(events: &[Event]) -> Schedule {
    let mut schedule = Schedule::new();
    for e in events {
        match (e.kind, e.assignment) {
            (EventKind::Place, Some(a)) => {
                schedule.insert(a);
            }
            (EventKind::Revert, Some(a)) => {
                schedule.remove(a.task);
            }
            _ => {}
        }
    }
    schedule
}

/// Runs a full simulation and checks the final schedule.
pub fn run_simulation(
    graphs: &[TaskGraph],
    network: &Network,
    policy: PreemptionPolicy,
    scheduler: SchedulerKind,
    rng_seed: u64,
) -> Result<SimulationResult> {
    let result = run_simulation_unchecked(graphs, network, policy, scheduler, rng_seed)?;
    let report = validate_schedule(&result.schedule, graphs, network);
    if let Some(v) = report.violations.first() {
        return Err(Error::Consistency(format!(
            "{scheduler}/{policy}: final schedule has {} violations, first: {v}",
            report.violations.len()
        )));
    }
    Ok(result)
}

/// Same as [`run_simulation`] without the final validity check.
pub fn run_simulation_unchecked(
    graphs: &[TaskGraph],
    network: &Network,
    policy: PreemptionPolicy,
    scheduler: SchedulerKind,
    rng_seed: u64,
) -> Result<SimulationResult> {
    if let Some(w) = graphs.windows(2).position(|w| w[1].arrival() < w[0].arrival()) {
        return Err(Error::Parameter(format!(
            "arrivals must be nondecreasing (graph {} arrives before graph {w})",
            w + 1
        )));
    }
    let mut state = SimulationState::new();
    let mut durations = Vec::with_capacity(graphs.len());
    for graph in graphs {
        durations.push(state.handle_arrival(graph.clone(), policy, scheduler, rng_seed, network)?);
    }
    if let Some(end) = state.schedule.makespan() {
        state.advance_to(end.max(state.clock))?;
    }
    if let Some((id, s)) = state.states.iter().find(|(_, &s)| s != TaskState::Finished) {
        return Err(Error::Consistency(format!("task {id} ended in state {s:?}")));
    }
    Ok(SimulationResult {
        schedule: state.schedule,
        scheduler_durations: durations,
        events: state.events,
    })
}

#[derive(Serialize)]
struct EventLine<'a> {
    t: f64,
    event: EventKind,
    graph: usize,
    task: Option<&'a str>,
    node: Option<&'a str>,
    start: Option<f64>,
    finish: Option<f64>,
}

/// Writes the event log as JSON lines. Tasks are identified by their name
/// within the graph given in the `graph` field; nodes by name.
pub fn write_event_log(
    events: &[Event],
    graphs: &[TaskGraph],
    network: &Network,
    mut out: impl Write,
) -> std::io::Result<()> {
    for e in events {
        let task = e
            .assignment
            .and_then(|a| graphs.get(a.task.graph).and_then(|g| g.task(a.task)))
            .map(|t| t.name.as_str());
        let node = e.assignment.map(|a| network.nodes()[a.node.0].name.as_str());
        let line = EventLine {
            t: e.t,
            event: e.kind,
            graph: e.graph,
            task,
            node,
            start: e.assignment.map(|a| a.start),
            finish: e.assignment.map(|a| a.finish),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
