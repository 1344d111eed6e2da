use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    OutTree,
    InTree,
    ForkJoin,
    Chain,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 4] = [
        TopologyKind::OutTree,
        TopologyKind::InTree,
        TopologyKind::ForkJoin,
        TopologyKind::Chain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TopologyKind::OutTree => "out_tree",
            TopologyKind::InTree => "in_tree",
            TopologyKind::ForkJoin => "fork_join",
            TopologyKind::Chain => "chain",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TopologyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown topology '{s}'")))
    }
}

/// Concrete shape parameters for one skeleton.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Complete tree with `levels` levels, every internal node having `branching` children.
    OutTree { levels: usize, branching: usize },
    InTree { levels: usize, branching: usize },
    /// `stages` fork/join blocks of `width` parallel tasks; consecutive
    /// blocks share the join task.
    ForkJoin { width: usize, stages: usize },
    Chain { length: usize },
}

/// Unweighted DAG: task count plus `(src, dst)` edges over `0..task_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    pub kind: TopologyKind,
    pub task_count: usize,
    pub edges: Vec<(usize, usize)>,
}

pub fn gen_topology(shape: Shape) -> Result<Skeleton> {
    let positive = |name: &str, v: usize| {
        if v == 0 {
            Err(Error::Parameter(format!("{name} must be at least 1")))
        } else {
            Ok(())
        }
    };
    match shape {
        Shape::OutTree { levels, branching } | Shape::InTree { levels, branching } => {
            positive("levels", levels)?;
            positive("branching", branching)?;
            let mut edges = Vec::new();
            let mut frontier = vec![0usize];
            let mut count = 1;
            for _ in 1..levels {
                let mut next = Vec::with_capacity(frontier.len() * branching);
                for &parent in &frontier {
                    for _ in 0..branching {
                        edges.push((parent, count));
                        next.push(count);
                        count += 1;
                    }
                }
                frontier = next;
            }
            let kind = if matches!(shape, Shape::OutTree { .. }) {
                TopologyKind::OutTree
            } else {
                // mirror: reverse edges and renumber so the sink is last
                edges = edges
                    .into_iter()
                    .map(|(p, c)| (count - 1 - c, count - 1 - p))
                    .collect();
                edges.sort_unstable();
                TopologyKind::InTree
            };
            Ok(Skeleton {
                kind,
                task_count: count,
                edges,
            })
        }
        Shape::ForkJoin { width, stages } => {
            positive("width", width)?;
            positive("stages", stages)?;
            let mut edges = Vec::new();
            let mut source = 0;
            let mut count = 1;
            for _ in 0..stages {
                let sink = count + width;
                for k in 0..width {
                    edges.push((source, count + k));
                    edges.push((count + k, sink));
                }
                count = sink + 1;
                source = sink;
            }
            Ok(Skeleton {
                kind: TopologyKind::ForkJoin,
                task_count: count,
                edges,
            })
        }
        Shape::Chain { length } => {
            positive("length", length)?;
            Ok(Skeleton {
                kind: TopologyKind::Chain,
                task_count: length,
                edges: (1..length).map(|i| (i - 1, i)).collect(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let chain = gen_topology(Shape::Chain { length: 3 }).unwrap();
        assert_eq!(chain.edges, [(0, 1), (1, 2)]);

        let tree = gen_topology(Shape::OutTree { levels: 2, branching: 2 }).unwrap();
        assert_eq!((tree.task_count, tree.edges.len()), (3, 2));

        let fj = gen_topology(Shape::ForkJoin { width: 3, stages: 1 }).unwrap();
        assert_eq!((fj.task_count, fj.edges.len()), (5, 6));

        let fj2 = gen_topology(Shape::ForkJoin { width: 2, stages: 3 }).unwrap();
        assert_eq!((fj2.task_count, fj2.edges.len()), (10, 12));
    }

    #[test]
    fn in_tree_has_single_sink() {
        let t = gen_topology(Shape::InTree { levels: 3, branching: 2 }).unwrap();
        assert_eq!(t.task_count, 7);
        let mut out_degree = vec![0; t.task_count];
        for &(s, d) in &t.edges {
            assert!(s < d);
            out_degree[s] += 1;
        }
        let sinks: Vec<usize> = (0..t.task_count).filter(|&i| out_degree[i] == 0).collect();
        assert_eq!(sinks, [6]);
        assert!(out_degree[..6].iter().all(|&d| d == 1));
    }

    #[test]
    fn zero_sizes_rejected() {
        assert!(gen_topology(Shape::OutTree { levels: 0, branching: 2 }).is_err());
        assert!(gen_topology(Shape::ForkJoin { width: 0, stages: 1 }).is_err());
        assert!(gen_topology(Shape::Chain { length: 0 }).is_err());
    }
}
