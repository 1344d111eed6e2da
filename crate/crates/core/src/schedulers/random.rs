use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{NodeId, Schedule, TaskGraph};

use super::timeline::{Planner, SchedulingContext};

/// Topological order, each task on a uniformly random node at its earliest slot.
pub fn random_scheduler(graph: &TaskGraph, ctx: &SchedulingContext<'_>, rng_seed: u64) -> Result<Schedule> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut planner = Planner::new(graph, ctx)?;
    for &i in graph.topo_indices() {
        let node = NodeId(rng.random_range(0..ctx.network.len()));
        let (start, finish) = planner.slot(i, node);
        planner.commit(i, node, start, finish);
    }
    planner.into_schedule()
}
