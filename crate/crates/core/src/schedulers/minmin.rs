//! Min-Min and Max-Min adapted to DAGs by iterating over the ready set.

use crate::error::Result;
use crate::model::{NodeId, Schedule, TaskGraph};

use super::timeline::{Planner, SchedulingContext};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Pick {
    Smallest,
    Largest,
}

pub fn minmin(graph: &TaskGraph, ctx: &SchedulingContext<'_>) -> Result<Schedule> {
    ready_set_schedule(graph, ctx, Pick::Smallest)
}

pub fn maxmin(graph: &TaskGraph, ctx: &SchedulingContext<'_>) -> Result<Schedule> {
    ready_set_schedule(graph, ctx, Pick::Largest)
}

fn ready_set_schedule(graph: &TaskGraph, ctx: &SchedulingContext<'_>, pick: Pick) -> Result<Schedule> {
    let mut planner = Planner::new(graph, ctx)?;
    let nodes = ctx.network.len();
    let mut waiting: Vec<usize> = (0..graph.len()).map(|i| graph.predecessors(i).len()).collect();
    // Per ready task, the (start, finish) slot on every node. Committing to a
    // node only invalidates that node's column.
    let mut ready: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    let slots = |planner: &Planner<'_, '_>, i: usize| -> Vec<(f64, f64)> {
        (0..nodes).map(|v| planner.slot(i, NodeId(v))).collect()
    };
    for (i, _) in waiting.iter().enumerate().filter(|(_, &w)| w == 0) {
        ready.push((i, slots(&planner, i)));
    }

    while !ready.is_empty() {
        let mut chosen: Option<(usize, NodeId, f64, f64)> = None;
        for (k, (i, row)) in ready.iter().enumerate() {
            let (v, &(start, finish)) = row
                .iter()
                .enumerate()
                .reduce(|best, cur| if cur.1 .1 < best.1 .1 { cur } else { best })
                .expect("at least one node");
            let better = match chosen {
                None => true,
                Some((kb, _, _, fb)) => {
                    let id = graph.tasks()[*i].id;
                    let best_id = graph.tasks()[ready[kb].0].id;
                    match pick {
                        Pick::Smallest => finish < fb || (finish == fb && id < best_id),
                        Pick::Largest => finish > fb || (finish == fb && id < best_id),
                    }
                }
            };
            if better {
                chosen = Some((k, NodeId(v), start, finish));
            }
        }
        let (k, node, start, finish) = chosen.expect("ready set is nonempty");
        let (i, _) = ready.swap_remove(k);
        planner.commit(i, node, start, finish);
        for (j, row) in ready.iter_mut() {
            row[node.0] = planner.slot(*j, node);
        }
        for &(j, _) in graph.successors(i) {
            waiting[j] -= 1;
            if waiting[j] == 0 {
                ready.push((j, slots(&planner, j)));
            }
        }
    }
    planner.into_schedule()
}
