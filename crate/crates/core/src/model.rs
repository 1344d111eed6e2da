//! Task graphs, networks and schedules under the related-machines model.
//!
//! A task runs for `cost / speed` on a node, and a dependency edge carrying
//! `size` data units costs `size / strength` between two distinct nodes and
//! nothing when both endpoints share a node.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Absolute slack used for every time comparison.
pub const TIME_EPS: f64 = 1e-9;

/// Identity of a task: owning graph (arrival order) and ordinal inside it.
///
/// Ordering is `(graph, local)`, which is the tie-break order used everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaskId {
    pub graph: usize,
    pub local: usize,
}

impl TaskId {
    pub const fn new(graph: usize, local: usize) -> Self {
        Self { graph, local }
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.graph, self.local)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: TaskId,
    /// External label (the id used in workflow files).
    pub name: String,
    pub cost: f64,
    /// Earliest permitted start: the arrival time of the task's origin graph.
    pub release: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dependency {
    pub src: TaskId,
    pub dst: TaskId,
    pub size: f64,
}

/// A DAG of tasks. Either a single arriving graph or a merge of several
/// fragments, in which case each task keeps its own release time.
#[derive(Debug, Clone)]
pub struct TaskGraph {
    arrival: f64,
    tasks: Vec<Task>,
    deps: Vec<Dependency>,
    position: HashMap<TaskId, usize>,
    succs: Vec<Vec<(usize, f64)>>,
    preds: Vec<Vec<(usize, f64)>>,
    topo: Vec<usize>,
}

impl PartialEq for TaskGraph {
    fn eq(&self, other: &Self) -> bool {
        self.arrival == other.arrival && self.tasks == other.tasks && self.deps == other.deps
    }
}

impl TaskGraph {
    /// Builds graph `graph_index` arriving at `arrival`. Tasks are given as
    /// `(name, cost)` and edges as `(src_local, dst_local, size)`.
    pub fn build(
        graph_index: usize,
        arrival: f64,
        tasks: impl IntoIterator<Item = (String, f64)>,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        if !(arrival >= 0.0 && arrival.is_finite()) {
            return Err(Error::InvalidGraph(format!(
                "graph {graph_index}: arrival time must be nonnegative, got {arrival}"
            )));
        }
        let tasks: Vec<Task> = tasks
            .into_iter()
            .enumerate()
            .map(|(local, (name, cost))| Task {
                id: TaskId::new(graph_index, local),
                name,
                cost,
                release: arrival,
            })
            .collect();
        let mut deps = Vec::new();
        for (src, dst, size) in edges {
            for end in [src, dst] {
                if end >= tasks.len() {
                    return Err(Error::InvalidGraph(format!(
                        "graph {graph_index}: edge endpoint {end} out of range"
                    )));
                }
            }
            deps.push(Dependency {
                src: TaskId::new(graph_index, src),
                dst: TaskId::new(graph_index, dst),
                size,
            });
        }
        let mut graph = Self::from_parts(tasks, deps)?;
        graph.arrival = arrival;
        Ok(graph)
    }

    /// Validates and indexes an arbitrary task/edge set.
    pub fn from_parts(tasks: Vec<Task>, deps: Vec<Dependency>) -> Result<Self> {
        let mut position = HashMap::with_capacity(tasks.len());
        for (i, task) in tasks.iter().enumerate() {
            if !(task.cost > 0.0 && task.cost.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "task {} ({}): cost must be positive, got {}",
                    task.id, task.name, task.cost
                )));
            }
            if !(task.release >= 0.0 && task.release.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "task {}: release time must be nonnegative, got {}",
                    task.id, task.release
                )));
            }
            if position.insert(task.id, i).is_some() {
                return Err(Error::DuplicateTask(task.id));
            }
        }
        let mut succs = vec![Vec::new(); tasks.len()];
        let mut preds = vec![Vec::new(); tasks.len()];
        for dep in &deps {
            let (Some(&s), Some(&d)) = (position.get(&dep.src), position.get(&dep.dst)) else {
                return Err(Error::InvalidGraph(format!(
                    "dependency {} -> {} references a task outside the graph",
                    dep.src, dep.dst
                )));
            };
            if !(dep.size > 0.0 && dep.size.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "dependency {} -> {}: data size must be positive, got {}",
                    dep.src, dep.dst, dep.size
                )));
            }
            succs[s].push((d, dep.size));
            preds[d].push((s, dep.size));
        }
        let topo = kahn_order(&tasks, &succs, &preds)?;
        let arrival = tasks.iter().map(|t| t.release).fold(f64::INFINITY, f64::min);
        Ok(Self {
            arrival: if arrival.is_finite() { arrival } else { 0.0 },
            tasks,
            deps,
            position,
            succs,
            preds,
            topo,
        })
    }

    pub fn arrival(&self) -> f64 {
        self.arrival
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn dependencies(&self) -> &[Dependency] {
        &self.deps
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn task(&self, id: TaskId) -> Option<&Task> {
        self.position.get(&id).map(|&i| &self.tasks[i])
    }

    pub fn contains(&self, id: TaskId) -> bool {
        self.position.contains_key(&id)
    }

    /// Dense index of `id` in [`Self::tasks`].
    pub fn index_of(&self, id: TaskId) -> Option<usize> {
        self.position.get(&id).copied()
    }

    /// Successors of the task at dense index `i` as `(index, data_size)`.
    pub fn successors(&self, i: usize) -> &[(usize, f64)] {
        &self.succs[i]
    }

    pub fn predecessors(&self, i: usize) -> &[(usize, f64)] {
        &self.preds[i]
    }

    pub fn edge_size(&self, src: TaskId, dst: TaskId) -> Option<f64> {
        let s = self.index_of(src)?;
        let d = self.index_of(dst)?;
        self.succs[s].iter().find(|(j, _)| *j == d).map(|(_, size)| *size)
    }

    /// Dense indices in deterministic topological order.
    pub fn topo_indices(&self) -> &[usize] {
        &self.topo
    }

    /// Copy of this graph with every task's release (and the arrival) set to `arrival`.
    pub fn with_arrival(&self, arrival: f64) -> Result<Self> {
        let tasks = self
            .tasks
            .iter()
            .cloned()
            .map(|t| Task {
                release: arrival,
                ..t
            })
            .collect();
        let mut graph = Self::from_parts(tasks, self.deps.clone())?;
        graph.arrival = arrival;
        Ok(graph)
    }
}

fn kahn_order(tasks: &[Task], succs: &[Vec<(usize, f64)>], preds: &[Vec<(usize, f64)>]) -> Result<Vec<usize>> {
    let mut indegree: Vec<usize> = preds.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<Reverse<(TaskId, usize)>> = indegree
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0)
        .map(|(i, _)| Reverse((tasks[i].id, i)))
        .collect();
    let mut order = Vec::with_capacity(tasks.len());
    while let Some(Reverse((_, i))) = ready.pop() {
        order.push(i);
        for &(j, _) in &succs[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push(Reverse((tasks[j].id, j)));
            }
        }
    }
    if order.len() == tasks.len() {
        return Ok(order);
    }
    // Every leftover task has a leftover predecessor, so walking
    // predecessors must revisit a task.
    let start = (0..tasks.len()).find(|&i| indegree[i] > 0).expect("leftover task");
    let mut seen = vec![usize::MAX; tasks.len()];
    let mut path = Vec::new();
    let mut cur = start;
    while seen[cur] == usize::MAX {
        seen[cur] = path.len();
        path.push(cur);
        cur = preds[cur]
            .iter()
            .map(|&(p, _)| p)
            .find(|&p| indegree[p] > 0)
            .expect("leftover predecessor");
    }
    let mut cycle: Vec<TaskId> = path[seen[cur]..].iter().map(|&i| tasks[i].id).collect();
    cycle.reverse();
    cycle.push(cycle[0]);
    Err(Error::Cycle(cycle))
}

/// Tasks of `graph` such that every task precedes its successors; ties by
/// `(graph, local)` ascending.
pub fn topological_order(graph: &TaskGraph) -> Vec<TaskId> {
    graph.topo.iter().map(|&i| graph.tasks[i].id).collect()
}

/// Disjoint union of graph fragments. Each task keeps its own release time.
pub fn merge_graphs<'a>(fragments: impl IntoIterator<Item = &'a TaskGraph>) -> Result<TaskGraph> {
    let mut tasks = Vec::new();
    let mut deps = Vec::new();
    for fragment in fragments {
        tasks.extend(fragment.tasks.iter().cloned());
        deps.extend(fragment.deps.iter().copied());
    }
    TaskGraph::from_parts(tasks, deps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub name: String,
    pub speed: f64,
}

/// Complete network of compute nodes with symmetric link strengths.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: Vec<Node>,
    // Row-major node_count x node_count, infinite on the diagonal.
    strength: Vec<f64>,
}

impl Network {
    /// `links` holds `(a, b, strength)` over node indices; every unordered pair
    /// of distinct nodes must appear exactly once.
    pub fn new(nodes: Vec<Node>, links: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let n = nodes.len();
        if n == 0 {
            return Err(Error::InvalidNetwork("network has no nodes".into()));
        }
        for node in &nodes {
            if !(node.speed > 0.0 && node.speed.is_finite()) {
                return Err(Error::InvalidNetwork(format!(
                    "node {}: speed must be positive, got {}",
                    node.name, node.speed
                )));
            }
        }
        let mut strength = vec![f64::NAN; n * n];
        for i in 0..n {
            strength[i * n + i] = f64::INFINITY;
        }
        for (a, b, s) in links {
            if a >= n || b >= n {
                return Err(Error::InvalidNetwork(format!("link ({a}, {b}) references an unknown node")));
            }
            if a == b {
                return Err(Error::InvalidNetwork(format!("self link on node {}", nodes[a].name)));
            }
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidNetwork(format!(
                    "link ({}, {}): strength must be positive, got {s}",
                    nodes[a].name, nodes[b].name
                )));
            }
            if !strength[a * n + b].is_nan() {
                return Err(Error::InvalidNetwork(format!(
                    "duplicate link ({}, {})",
                    nodes[a].name, nodes[b].name
                )));
            }
            strength[a * n + b] = s;
            strength[b * n + a] = s;
        }
        if let Some(k) = strength.iter().position(|s| s.is_nan()) {
            return Err(Error::InvalidNetwork(format!(
                "missing link ({}, {})",
                nodes[k / n].name,
                nodes[k % n].name
            )));
        }
        Ok(Self { nodes, strength })
    }

    /// Network with named nodes `n0..` and a strength for each distinct pair
    /// supplied by `strength(a, b)` with `a < b`.
    pub fn complete(speeds: &[f64], mut strength: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let nodes = speeds
            .iter()
            .enumerate()
            .map(|(i, &speed)| Node {
                name: format!("n{i}"),
                speed,
            })
            .collect();
        let mut links = Vec::new();
        for a in 0..speeds.len() {
            for b in a + 1..speeds.len() {
                links.push((a, b, strength(a, b)));
            }
        }
        Self::new(nodes, links)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + Clone {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn speed(&self, node: NodeId) -> f64 {
        self.nodes[node.0].speed
    }

    /// Link strength; infinite when `a == b`.
    pub fn strength(&self, a: NodeId, b: NodeId) -> f64 {
        self.strength[a.0 * self.nodes.len() + b.0]
    }

    /// Distinct unordered pairs `(a, b, strength)` with `a < b`.
    pub fn links(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        let n = self.nodes.len();
        (0..n).flat_map(move |a| (a + 1..n).map(move |b| (NodeId(a), NodeId(b), self.strength[a * n + b])))
    }

    pub fn exec_duration(&self, cost: f64, node: NodeId) -> f64 {
        cost / self.speed(node)
    }

    pub fn comm_duration(&self, size: f64, src: NodeId, dst: NodeId) -> f64 {
        if src == dst {
            0.0
        } else {
            size / self.strength(src, dst)
        }
    }

    pub fn check_node(&self, node: NodeId) -> Result<()> {
        if node.0 < self.nodes.len() {
            Ok(())
        } else {
            Err(Error::UnknownNode(node.0))
        }
    }
}

fn lookup_task(graphs: &[TaskGraph], id: TaskId) -> Result<&Task> {
    graphs
        .get(id.graph)
        .and_then(|g| g.task(id))
        .ok_or(Error::UnknownTask(id))
}

/// Execution time `c(t) / s(v)`.
pub fn exec_time(task: TaskId, node: NodeId, graphs: &[TaskGraph], network: &Network) -> Result<f64> {
    let task = lookup_task(graphs, task)?;
    network.check_node(node)?;
    Ok(network.exec_duration(task.cost, node))
}

/// Communication time `c(t, t') / s(v, v')` for edge `(src, dst)`; zero on a single node.
pub fn comm_time(
    edge: (TaskId, TaskId),
    src_node: NodeId,
    dst_node: NodeId,
    graphs: &[TaskGraph],
    network: &Network,
) -> Result<f64> {
    let size = graphs
        .get(edge.0.graph)
        .and_then(|g| g.edge_size(edge.0, edge.1))
        .ok_or(Error::UnknownEdge(edge.0, edge.1))?;
    network.check_node(src_node)?;
    network.check_node(dst_node)?;
    Ok(network.comm_duration(size, src_node, dst_node))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assignment {
    pub task: TaskId,
    pub node: NodeId,
    pub start: f64,
    pub finish: f64,
}

/// Task assignments keyed by task id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Schedule {
    assignments: BTreeMap<TaskId, Assignment>,
}

impl Schedule {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces the assignment for `a.task`.
    pub fn insert(&mut self, a: Assignment) -> Option<Assignment> {
        self.assignments.insert(a.task, a)
    }

    pub fn remove(&mut self, task: TaskId) -> Option<Assignment> {
        self.assignments.remove(&task)
    }

    pub fn get(&self, task: TaskId) -> Option<&Assignment> {
        self.assignments.get(&task)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Assignments in task-id order.
    pub fn iter(&self) -> impl Iterator<Item = &Assignment> {
        self.assignments.values()
    }

    /// Latest finish time, or `None` for an empty schedule.
    pub fn makespan(&self) -> Option<f64> {
        self.iter().map(|a| a.finish).reduce(f64::max)
    }
}

impl FromIterator<Assignment> for Schedule {
    fn from_iter<I: IntoIterator<Item = Assignment>>(iter: I) -> Self {
        let mut s = Schedule::new();
        for a in iter {
            s.insert(a);
        }
        s
    }
}

impl Extend<Assignment> for Schedule {
    fn extend<I: IntoIterator<Item = Assignment>>(&mut self, iter: I) {
        for a in iter {
            self.insert(a);
        }
    }
}
