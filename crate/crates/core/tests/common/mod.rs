//! Test oracles that share no code with the library's schedulers or validator.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use dagpreempt::workloads::{ArrivalProcess, SizeRange};
use dagpreempt::{Assignment, Network, NodeId, Schedule, TaskGraph, TaskId, WorkloadSpec};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const EPS: f64 = 1e-9;

/// Plain-data view of a workload: everything the oracles need, read once.
pub struct Flat {
    pub ids: Vec<TaskId>,
    pub cost: Vec<f64>,
    pub release: Vec<f64>,
    /// (src index, dst index, size)
    pub edges: Vec<(usize, usize, f64)>,
    pub speed: Vec<f64>,
    pub strength: Vec<Vec<f64>>,
}

impl Flat {
    pub fn new(graphs: &[TaskGraph], network: &Network) -> Self {
        let mut ids = Vec::new();
        let mut cost = Vec::new();
        let mut release = Vec::new();
        for g in graphs {
            for t in g.tasks() {
                ids.push(t.id);
                cost.push(t.cost);
                release.push(g.arrival());
            }
        }
        let index: HashMap<TaskId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let edges = graphs
            .iter()
            .flat_map(|g| g.dependencies())
            .map(|d| (index[&d.src], index[&d.dst], d.size))
            .collect();
        let n = network.len();
        let speed = (0..n).map(|v| network.nodes()[v].speed).collect();
        let mut strength = vec![vec![f64::INFINITY; n]; n];
        for (a, b, s) in network.links() {
            strength[a.0][b.0] = s;
            strength[b.0][a.0] = s;
        }
        Self {
            ids,
            cost,
            release,
            edges,
            speed,
            strength,
        }
    }

    pub fn exec(&self, task: usize, node: usize) -> f64 {
        self.cost[task] / self.speed[node]
    }

    pub fn comm(&self, size: f64, a: usize, b: usize) -> f64 {
        if a == b {
            0.0
        } else {
            size / self.strength[a][b]
        }
    }
}

/// Optimal makespan by exhaustive search over every topological order and
/// every node assignment, each task starting as early as its node, release
/// time and inputs allow.
pub fn brute_force_optimum(graphs: &[TaskGraph], network: &Network) -> f64 {
    let f = Flat::new(graphs, network);
    let n = f.ids.len();
    let mut preds = vec![Vec::new(); n];
    for &(s, d, size) in &f.edges {
        preds[d].push((s, size));
    }
    let mut best = f64::INFINITY;
    let mut placed: Vec<Option<(usize, f64)>> = vec![None; n];
    let mut free = vec![0.0; f.speed.len()];
    search(&f, &preds, &mut placed, &mut free, 0, 0.0, &mut best);
    best
}

fn search(
    f: &Flat,
    preds: &[Vec<(usize, f64)>],
    placed: &mut [Option<(usize, f64)>],
    free: &mut [f64],
    count: usize,
    span: f64,
    best: &mut f64,
) {
    if count == placed.len() {
        *best = best.min(span);
        return;
    }
    for t in 0..placed.len() {
        if placed[t].is_some() || preds[t].iter().any(|&(p, _)| placed[p].is_none()) {
            continue;
        }
        for v in 0..free.len() {
            let mut start = f.release[t].max(free[v]);
            for &(p, size) in &preds[t] {
                let (pv, pf) = placed[p].unwrap();
                start = start.max(pf + f.comm(size, pv, v));
            }
            let finish = start + f.exec(t, v);
            let saved = free[v];
            free[v] = finish;
            placed[t] = Some((v, finish));
            search(f, preds, placed, free, count + 1, span.max(finish), best);
            placed[t] = None;
            free[v] = saved;
        }
    }
}

/// Constraint numbers (1-5) broken by `schedule`, checked pair by pair
/// straight from the definitions.
pub fn oracle_violations(schedule: &Schedule, graphs: &[TaskGraph], network: &Network) -> BTreeSet<u8> {
    let f = Flat::new(graphs, network);
    let mut broken = BTreeSet::new();
    let list: Vec<&Assignment> = schedule.iter().collect();
    let index_of = |id: TaskId| f.ids.iter().position(|&x| x == id);

    for &id in &f.ids {
        if !list.iter().any(|a| a.task == id) {
            broken.insert(1);
        }
    }
    let mut known = Vec::new();
    for a in &list {
        let Some(t) = index_of(a.task) else {
            broken.insert(1);
            continue;
        };
        if a.node.0 >= f.speed.len() {
            broken.insert(1);
            continue;
        }
        if !(0.0 <= a.start && a.start <= a.finish) {
            broken.insert(1);
        }
        let expected = f.exec(t, a.node.0);
        if (a.finish - a.start - expected).abs() > EPS * expected.max(a.finish.abs()).max(1.0) {
            broken.insert(2);
        }
        if a.start + EPS < f.release[t] {
            broken.insert(4);
        }
        known.push((t, **a));
    }
    for (i, (_, a)) in known.iter().enumerate() {
        for (_, b) in &known[i + 1..] {
            if a.node == b.node && !(a.finish <= b.start + EPS || b.finish <= a.start + EPS) {
                broken.insert(3);
            }
        }
    }
    for &(s, d, size) in &f.edges {
        let find = |t: usize| known.iter().find(|(k, _)| *k == t).map(|(_, a)| *a);
        if let (Some(a), Some(b)) = (find(s), find(d)) {
            if a.finish + f.comm(size, a.node.0, b.node.0) > b.start + EPS {
                broken.insert(5);
            }
        }
    }
    broken
}

/// Random instance with at most 4 tasks, 2 nodes and 2 graphs.
pub fn micro_instance<R: Rng>(rng: &mut R) -> (Vec<TaskGraph>, Network) {
    let nodes = rng.random_range(1..=2);
    let speeds: Vec<f64> = (0..nodes).map(|_| *[0.5, 1.0, 2.0].choose(rng).unwrap()).collect();
    let strength = *[0.5, 1.0, 4.0].choose(rng).unwrap();
    let network = Network::complete(&speeds, |_, _| strength).unwrap();
    let graph_count = rng.random_range(1..=2);
    let mut remaining = 4;
    let mut graphs = Vec::new();
    let mut arrival = 0.0;
    for g in 0..graph_count {
        let max = if g + 1 == graph_count { remaining } else { remaining - 1 };
        let n = rng.random_range(1..=max.clamp(1, 3));
        remaining -= n;
        let costs: Vec<(String, f64)> = (0..n)
            .map(|i| (format!("t{i}"), *[1.0, 2.0, 3.0, 4.0].choose(rng).unwrap()))
            .collect();
        let mut edges = Vec::new();
        for d in 1..n {
            for s in 0..d {
                if rng.random_bool(0.5) {
                    edges.push((s, d, *[0.5, 1.0, 2.0].choose(rng).unwrap()));
                }
            }
        }
        graphs.push(TaskGraph::build(g, arrival, costs, edges).unwrap());
        arrival += *[0.0, 0.5, 1.0, 2.0, 3.0].choose(rng).unwrap();
    }
    (graphs, network)
}

/// Desk-scale generator parameters: at most `max_graphs` graphs, 30 tasks
/// per graph and 8 nodes.
pub fn desk_spec<R: Rng>(rng: &mut R, max_graphs: usize) -> WorkloadSpec {
    let adversarial = rng.random_bool(0.25);
    let mut spec = if adversarial {
        WorkloadSpec::adversarial()
    } else {
        WorkloadSpec::default()
    };
    spec.graph_count = rng.random_range(1..=max_graphs);
    // CCR calibration needs a link, so adversarial networks have two nodes or more
    spec.node_count = rng.random_range(if adversarial { 2 } else { 1 }..=8);
    spec.tree_levels = SizeRange::new(1, 3);
    spec.tree_branching = SizeRange::new(1, 3);
    spec.fork_join_width = SizeRange::new(1, 5);
    spec.fork_join_stages = SizeRange::new(1, 4);
    spec.chain_length = SizeRange::new(1, 20);
    spec.adversarial.successor_count = rng.random_range(1..=29);
    spec.arrivals = if rng.random_bool(0.5) {
        ArrivalProcess::Poisson {
            rate: *[0.01, 0.05, 0.1, 0.5, 2.0].choose(rng).unwrap(),
        }
    } else {
        ArrivalProcess::FixedInterval {
            interval: *[0.5, 3.0, 10.0, 40.0].choose(rng).unwrap(),
        }
    };
    spec.seed = rng.random();
    spec
}

/// Σ_v u(v)·s(v)·T must equal the total work Σ c(t).
pub fn work_conservation_error(utilization: &[f64], network: &Network, makespan: f64, graphs: &[TaskGraph]) -> f64 {
    let lhs: f64 = utilization
        .iter()
        .enumerate()
        .map(|(v, u)| u * network.speed(NodeId(v)) * makespan)
        .sum();
    let work: f64 = graphs.iter().flat_map(|g| g.tasks()).map(|t| t.cost).sum();
    (lhs - work).abs() / work
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
