//! Synthetic and adversarial workload generation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Network, TaskGraph};

use super::mixture::{MixtureComponent, TruncatedGaussianMixture};
use super::topology::{gen_topology, Shape, TopologyKind};

/// A network plus arrival-ordered graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct Workload {
    pub network: Network,
    pub graphs: Vec<TaskGraph>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "snake_case")]
pub enum ArrivalProcess {
    Poisson { rate: f64 },
    FixedInterval { interval: f64 },
}

impl Default for ArrivalProcess {
    fn default() -> Self {
        ArrivalProcess::Poisson { rate: 0.1 }
    }
}

/// Arrival times starting at 0: exponential gaps for Poisson, constant otherwise.
pub fn gen_arrivals<R: Rng + ?Sized>(count: usize, process: ArrivalProcess, rng: &mut R) -> Result<Vec<f64>> {
    let mut times = Vec::with_capacity(count);
    match process {
        ArrivalProcess::Poisson { rate } => {
            let exp = Exp::new(rate)
                .ok()
                .filter(|_| rate > 0.0 && rate.is_finite())
                .ok_or_else(|| Error::Parameter(format!("arrival rate must be positive, got {rate}")))?;
            let mut t = 0.0;
            for i in 0..count {
                if i > 0 {
                    t += exp.sample(rng);
                }
                times.push(t);
            }
        }
        ArrivalProcess::FixedInterval { interval } => {
            if !(interval > 0.0 && interval.is_finite()) {
                return Err(Error::Parameter(format!(
                    "arrival interval must be positive, got {interval}"
                )));
            }
            times.extend((0..count).map(|i| i as f64 * interval));
        }
    }
    Ok(times)
}

/// Complete network with sampled speeds and link strengths.
pub fn gen_network<R: Rng + ?Sized>(
    node_count: usize,
    speed: &TruncatedGaussianMixture,
    strength: &TruncatedGaussianMixture,
    rng: &mut R,
) -> Result<Network> {
    if node_count == 0 {
        return Err(Error::Parameter("node_count must be at least 1".into()));
    }
    let speeds = (0..node_count).map(|_| speed.sample(rng)).collect::<Result<Vec<_>>>()?;
    let mut strengths = Vec::with_capacity(node_count * (node_count - 1) / 2);
    for _ in 0..node_count * (node_count - 1) / 2 {
        strengths.push(strength.sample(rng)?);
    }
    let mut next = strengths.into_iter();
    Network::complete(&speeds, |_, _| next.next().expect("one strength per pair"))
}

/// Mean communication time over all edges divided by mean computation time
/// over all tasks, each averaged over the nodes (pairs) of `network`.
pub fn ccr(graphs: &[TaskGraph], network: &Network) -> Result<f64> {
    let pairs: Vec<f64> = network.links().map(|(_, _, s)| 1.0 / s).collect();
    if pairs.is_empty() {
        return Err(Error::Parameter("CCR needs at least two nodes".into()));
    }
    let inv_strength = pairs.iter().sum::<f64>() / pairs.len() as f64;
    let inv_speed = network.nodes().iter().map(|v| 1.0 / v.speed).sum::<f64>() / network.len() as f64;
    let (mut comm, mut edges, mut comp, mut tasks) = (0.0, 0usize, 0.0, 0usize);
    for g in graphs {
        comm += g.dependencies().iter().map(|d| d.size).sum::<f64>();
        edges += g.dependencies().len();
        comp += g.tasks().iter().map(|t| t.cost).sum::<f64>();
        tasks += g.len();
    }
    if edges == 0 || tasks == 0 {
        return Err(Error::Parameter("CCR needs at least one task and one edge".into()));
    }
    Ok((comm / edges as f64 * inv_strength) / (comp / tasks as f64 * inv_speed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdversarialSpec {
    pub successor_count: usize,
    pub root_cost: f64,
    pub ccr: f64,
    /// Children costs and raw edge sizes are scaled by a uniform factor in `[1 - noise, 1 + noise]`.
    pub noise: f64,
}

impl Default for AdversarialSpec {
    fn default() -> Self {
        Self {
            successor_count: 24,
            root_cost: 100.0,
            ccr: 0.2,
            noise: 0.2,
        }
    }
}

/// Depth-one out-tree: one heavy root feeding `successor_count` light
/// children, with edge sizes calibrated so the CCR over `reference` equals `spec.ccr`.
pub fn gen_adversarial<R: Rng + ?Sized>(
    spec: &AdversarialSpec,
    graph_index: usize,
    arrival: f64,
    reference: &Network,
    rng: &mut R,
) -> Result<TaskGraph> {
    if spec.successor_count == 0 {
        return Err(Error::Parameter("successor_count must be at least 1".into()));
    }
    if !(spec.ccr > 0.0 && spec.ccr.is_finite()) {
        return Err(Error::Parameter(format!("ccr must be positive, got {}", spec.ccr)));
    }
    if !(spec.root_cost > 0.0 && spec.root_cost.is_finite()) {
        return Err(Error::Parameter(format!("root_cost must be positive, got {}", spec.root_cost)));
    }
    if !(0.0..1.0).contains(&spec.noise) {
        return Err(Error::Parameter(format!("noise must lie in [0, 1), got {}", spec.noise)));
    }
    let mut jitter = || {
        if spec.noise == 0.0 {
            1.0
        } else {
            rng.random_range(1.0 - spec.noise..=1.0 + spec.noise)
        }
    };
    let child = spec.root_cost / spec.successor_count as f64;
    let mut tasks = vec![("root".to_string(), spec.root_cost)];
    tasks.extend((1..=spec.successor_count).map(|k| (format!("leaf{k}"), child * jitter())));
    let raw: Vec<f64> = (0..spec.successor_count).map(|_| jitter()).collect();

    let unscaled = TaskGraph::build(
        graph_index,
        arrival,
        tasks.clone(),
        raw.iter().enumerate().map(|(k, &s)| (0, k + 1, s)),
    )?;
    let factor = spec.ccr / ccr(std::slice::from_ref(&unscaled), reference)?;
    TaskGraph::build(
        graph_index,
        arrival,
        tasks,
        raw.iter().enumerate().map(|(k, &s)| (0, k + 1, s * factor)),
    )
}

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeRange {
    pub min: usize,
    pub max: usize,
}

impl SizeRange {
    pub const fn new(min: usize, max: usize) -> Self {
        Self { min, max }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, what: &str) -> Result<usize> {
        if self.min == 0 || self.min > self.max {
            return Err(Error::Parameter(format!(
                "{what} range must satisfy 1 <= min <= max, got [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(rng.random_range(self.min..=self.max))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TopologyMix {
    pub out_tree: f64,
    pub in_tree: f64,
    pub fork_join: f64,
    pub chain: f64,
}

impl Default for TopologyMix {
    fn default() -> Self {
        Self {
            out_tree: 0.25,
            in_tree: 0.25,
            fork_join: 0.25,
            chain: 0.25,
        }
    }
}

impl TopologyMix {
    fn weights(&self) -> [(TopologyKind, f64); 4] {
        [
            (TopologyKind::OutTree, self.out_tree),
            (TopologyKind::InTree, self.in_tree),
            (TopologyKind::ForkJoin, self.fork_join),
            (TopologyKind::Chain, self.chain),
        ]
    }

    /// Per-kind counts for `total` graphs by largest remainder.
    pub fn counts(&self, total: usize) -> Result<[(TopologyKind, usize); 4]> {
        let weights = self.weights();
        let sum: f64 = weights.iter().map(|(_, w)| w).sum();
        if weights.iter().any(|(_, w)| w.is_nan() || *w < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!(
                "topology proportions must be nonnegative and sum to 1, got {sum}"
            )));
        }
        let exact: Vec<f64> = weights.iter().map(|(_, w)| w * total as f64).collect();
        let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
        let missing = total - counts.iter().sum::<usize>();
        for &k in order.iter().take(missing) {
            counts[k] += 1;
        }
        Ok(std::array::from_fn(|k| (weights[k].0, counts[k])))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkloadKind {
    #[default]
    Synthetic,
    Adversarial,
}

/// Everything needed to generate one workload instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadSpec {
    pub kind: WorkloadKind,
    pub graph_count: usize,
    pub topology_mix: TopologyMix,
    pub tree_levels: SizeRange,
    pub tree_branching: SizeRange,
    pub fork_join_width: SizeRange,
    pub fork_join_stages: SizeRange,
    pub chain_length: SizeRange,
    pub task_weight: TruncatedGaussianMixture,
    pub edge_weight: TruncatedGaussianMixture,
    pub node_count: usize,
    pub node_speed: TruncatedGaussianMixture,
    pub link_strength: TruncatedGaussianMixture,
    pub arrivals: ArrivalProcess,
    pub adversarial: AdversarialSpec,
    pub seed: u64,
}

fn five_component(means: [f64; 5], lower: f64, upper: f64) -> TruncatedGaussianMixture {
    TruncatedGaussianMixture {
        components: means
            .iter()
            .map(|&mean| MixtureComponent {
                weight: 0.2,
                mean,
                stddev: mean / 3.0,
            })
            .collect(),
        lower,
        upper,
    }
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        Self {
            kind: WorkloadKind::Synthetic,
            graph_count: 100,
            topology_mix: TopologyMix::default(),
            tree_levels: SizeRange::new(2, 4),
            tree_branching: SizeRange::new(2, 3),
            fork_join_width: SizeRange::new(2, 5),
            fork_join_stages: SizeRange::new(1, 3),
            chain_length: SizeRange::new(2, 10),
            task_weight: five_component([1.0, 2.5, 5.0, 8.0, 12.0], 0.1, 20.0),
            edge_weight: five_component([0.5, 1.0, 2.0, 4.0, 6.0], 0.05, 10.0),
            node_count: 4,
            node_speed: TruncatedGaussianMixture {
                components: vec![MixtureComponent {
                    weight: 1.0,
                    mean: 1.0,
                    stddev: 0.3,
                }],
                lower: 0.2,
                upper: 2.0,
            },
            link_strength: TruncatedGaussianMixture {
                components: vec![MixtureComponent {
                    weight: 1.0,
                    mean: 1.0,
                    stddev: 0.3,
                }],
                lower: 0.2,
                upper: 2.0,
            },
            arrivals: ArrivalProcess::default(),
            adversarial: AdversarialSpec::default(),
            seed: 0,
        }
    }
}

const STREAM_NETWORK: u64 = 1;
const STREAM_ARRIVALS: u64 = 2;
const STREAM_TOPOLOGY: u64 = 3;
const STREAM_GRAPH: u64 = 4;

/// Independent random stream derived from the master seed.
fn stream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((tag << 48) | index);
    rng
}

impl WorkloadSpec {
    /// Adversarial out-trees arriving fast enough that each root lands
    /// while the previous graph's leaves are still queued.
    pub fn adversarial() -> Self {
        Self {
            kind: WorkloadKind::Adversarial,
            graph_count: 20,
            arrivals: ArrivalProcess::Poisson { rate: 0.02 },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.graph_count == 0 {
            return Err(Error::Parameter("graph_count must be at least 1".into()));
        }
        if self.node_count == 0 {
            return Err(Error::Parameter("node_count must be at least 1".into()));
        }
        for m in [&self.task_weight, &self.edge_weight, &self.node_speed, &self.link_strength] {
            m.validate()?;
        }
        self.topology_mix.counts(self.graph_count)?;
        Ok(())
    }

    fn shape<R: Rng + ?Sized>(&self, kind: TopologyKind, rng: &mut R) -> Result<Shape> {
        Ok(match kind {
            TopologyKind::OutTree => Shape::OutTree {
                levels: self.tree_levels.sample(rng, "tree_levels")?,
                branching: self.tree_branching.sample(rng, "tree_branching")?,
            },
            TopologyKind::InTree => Shape::InTree {
                levels: self.tree_levels.sample(rng, "tree_levels")?,
                branching: self.tree_branching.sample(rng, "tree_branching")?,
            },
            TopologyKind::ForkJoin => Shape::ForkJoin {
                width: self.fork_join_width.sample(rng, "fork_join_width")?,
                stages: self.fork_join_stages.sample(rng, "fork_join_stages")?,
            },
            TopologyKind::Chain => Shape::Chain {
                length: self.chain_length.sample(rng, "chain_length")?,
            },
        })
    }

    /// Topology of each graph in arrival order.
    pub fn topology_sequence(&self) -> Result<Vec<TopologyKind>> {
        let mut kinds = Vec::with_capacity(self.graph_count);
        for (kind, n) in self.topology_mix.counts(self.graph_count)? {
            kinds.extend(std::iter::repeat_n(kind, n));
        }
        kinds.shuffle(&mut stream(self.seed, STREAM_TOPOLOGY, 0));
        Ok(kinds)
    }

    pub fn generate(&self) -> Result<Workload> {
        self.validate()?;
        let network = gen_network(
            self.node_count,
            &self.node_speed,
            &self.link_strength,
            &mut stream(self.seed, STREAM_NETWORK, 0),
        )?;
        let arrivals = gen_arrivals(self.graph_count, self.arrivals, &mut stream(self.seed, STREAM_ARRIVALS, 0))?;
        let graphs = match self.kind {
            WorkloadKind::Synthetic => {
                let kinds = self.topology_sequence()?;
                kinds
                    .iter()
                    .zip(&arrivals)
                    .enumerate()
                    .map(|(i, (&kind, &arrival))| {
                        let mut rng = stream(self.seed, STREAM_GRAPH, i as u64);
                        let skeleton = gen_topology(self.shape(kind, &mut rng)?)?;
                        let costs = (0..skeleton.task_count)
                            .map(|k| Ok((k.to_string(), self.task_weight.sample(&mut rng)?)))
                            .collect::<Result<Vec<_>>>()?;
                        let edges = skeleton
                            .edges
                            .iter()
                            .map(|&(s, d)| Ok((s, d, self.edge_weight.sample(&mut rng)?)))
                            .collect::<Result<Vec<_>>>()?;
                        TaskGraph::build(i, arrival, costs, edges)
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            WorkloadKind::Adversarial => arrivals
                .iter()
                .enumerate()
                .map(|(i, &arrival)| {
                    gen_adversarial(
                        &self.adversarial,
                        i,
                        arrival,
                        &network,
                        &mut stream(self.seed, STREAM_GRAPH, i as u64),
                    )
                })
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(Workload { network, graphs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_interval_arrivals() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = gen_arrivals(3, ArrivalProcess::FixedInterval { interval: 2.0 }, &mut rng).unwrap();
        assert_eq!(t, [0.0, 2.0, 4.0]);
        assert!(gen_arrivals(3, ArrivalProcess::FixedInterval { interval: 0.0 }, &mut rng).is_err());
        assert!(gen_arrivals(3, ArrivalProcess::Poisson { rate: -1.0 }, &mut rng).is_err());
    }

    #[test]
    fn poisson_arrivals() {
        let p = ArrivalProcess::Poisson { rate: 1.0 };
        let a = gen_arrivals(50, p, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = gen_arrivals(50, p, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0], 0.0);
        assert!(a.windows(2).all(|w| w[0] <= w[1]));

        let n = 10_000;
        let t = gen_arrivals(n + 1, p, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let mean_gap = t[n] / n as f64;
        // exponential(1): sd of the gap is 1, standard error 1/sqrt(n)
        assert!((mean_gap - 1.0).abs() < 3.0 / (n as f64).sqrt(), "{mean_gap}");
    }

    #[test]
    fn network_generation() {
        let m = TruncatedGaussianMixture::single(1.0, 0.5, 0.1, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(gen_network(1, &m, &m, &mut rng).unwrap().links().count(), 0);
        assert_eq!(gen_network(4, &m, &m, &mut rng).unwrap().links().count(), 6);
        assert!(gen_network(0, &m, &m, &mut rng).is_err());

        let c = TruncatedGaussianMixture::single(2.0, 0.0, 1.0, 3.0).unwrap();
        let net = gen_network(3, &c, &c, &mut rng).unwrap();
        assert!(net.nodes().iter().all(|v| v.speed == 2.0));
        assert!(net.links().all(|(_, _, s)| s == 2.0));
    }

    #[test]
    fn adversarial_structure_and_ccr() {
        let net = Network::complete(&[1.0, 1.5, 0.7], |a, b| 1.0 + (a * 3 + b) as f64 * 0.3).unwrap();
        let spec = AdversarialSpec {
            successor_count: 4,
            root_cost: 100.0,
            ccr: 0.2,
            noise: 0.1,
        };
        let g = gen_adversarial(&spec, 0, 0.0, &net, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.dependencies().len(), 4);
        assert_eq!(g.tasks()[0].cost, 100.0);
        assert!(g.dependencies().iter().all(|d| d.src.local == 0));
        let measured = ccr(std::slice::from_ref(&g), &net).unwrap();
        assert!((measured - 0.2).abs() < 1e-6, "{measured}");

        let single = Network::complete(&[1.0], |_, _| 1.0).unwrap();
        assert!(gen_adversarial(&spec, 0, 0.0, &single, &mut ChaCha8Rng::seed_from_u64(5)).is_err());
        let zero = AdversarialSpec {
            successor_count: 0,
            ..spec
        };
        assert!(gen_adversarial(&zero, 0, 0.0, &net, &mut ChaCha8Rng::seed_from_u64(5)).is_err());
    }

    #[test]
    fn topology_counts_follow_proportions() {
        let mix = TopologyMix::default();
        let counts = mix.counts(100).unwrap();
        assert!(counts.iter().all(|&(_, n)| n == 25));
        let skewed = TopologyMix {
            out_tree: 0.5,
            in_tree: 0.3,
            fork_join: 0.2,
            chain: 0.0,
        };
        let counts: Vec<usize> = skewed.counts(7).unwrap().iter().map(|&(_, n)| n).collect();
        assert_eq!(counts.iter().sum::<usize>(), 7);
        assert_eq!(counts[3], 0);
        let bad = TopologyMix { chain: 0.5, ..skewed };
        assert!(bad.counts(7).is_err());
    }

    #[test]
    fn generation_is_seeded() {
        let spec = WorkloadSpec {
            graph_count: 12,
            ..WorkloadSpec::default()
        };
        let a = spec.generate().unwrap();
        assert_eq!(a, spec.generate().unwrap());
        let b = WorkloadSpec { seed: 1, ..spec.clone() }.generate().unwrap();
        assert_ne!(a, b);
        assert_eq!(a.graphs.len(), 12);
        assert_eq!(a.graphs[0].arrival(), 0.0);

        let adv = WorkloadSpec {
            kind: WorkloadKind::Adversarial,
            graph_count: 3,
            ..WorkloadSpec::default()
        }
        .generate()
        .unwrap();
        assert_eq!(adv.graphs.len(), 3);
        assert!(adv.graphs.iter().all(|g| g.len() == 25));
        assert!((ccr(&adv.graphs, &adv.network).unwrap() - 0.2).abs() < 1e-6);
    }
}
