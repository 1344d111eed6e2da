//! Gantt traces: a JSON array of `{task, graph, node, start, finish}`
//! entries sorted by node, then start. Tasks and nodes are referenced by name.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Assignment, Network, NodeId, Schedule, TaskGraph, TaskId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GanttEntry {
    pub task: String,
    pub graph: usize,
    pub node: String,
    pub start: f64,
    pub finish: f64,
}

pub fn gantt_entries(schedule: &Schedule, graphs: &[TaskGraph], network: &Network) -> Result<Vec<GanttEntry>> {
    let mut rows: Vec<(NodeId, &Assignment)> = schedule.iter().map(|a| (a.node, a)).collect();
    rows.sort_by(|(n1, a1), (n2, a2)| n1.cmp(n2).then(a1.start.total_cmp(&a2.start)).then(a1.task.cmp(&a2.task)));
    rows.into_iter()
        .map(|(node, a)| {
            let task = graphs
                .get(a.task.graph)
                .and_then(|g| g.task(a.task))
                .ok_or(Error::UnknownTask(a.task))?;
            network.check_node(node)?;
            Ok(GanttEntry {
                task: task.name.clone(),
                graph: a.task.graph,
                node: network.nodes()[node.0].name.clone(),
                start: a.start,
                finish: a.finish,
            })
        })
        .collect()
}

pub fn to_gantt_json(schedule: &Schedule, graphs: &[TaskGraph], network: &Network) -> Result<String> {
    let entries = gantt_entries(schedule, graphs, network)?;
    Ok(serde_json::to_string_pretty(&entries).expect("gantt entries serialize"))
}

pub fn emit_gantt(schedule: &Schedule, graphs: &[TaskGraph], network: &Network, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_gantt_json(schedule, graphs, network)?).map_err(|e| Error::io(path, e))
}

/// Resolves task and node names against the workload.
pub fn parse_gantt(text: &str, graphs: &[TaskGraph], network: &Network) -> Result<Schedule> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let entries: Vec<GanttEntry> = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    let nodes: HashMap<&str, usize> = network
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| (n.name.as_str(), i))
        .collect();
    let mut schedule = Schedule::new();
    for (i, e) in entries.iter().enumerate() {
        let bad = |field: &str, message: String| Error::Parse {
            path: format!("[{i}].{field}"),
            message,
        };
        let graph = graphs
            .get(e.graph)
            .ok_or_else(|| bad("graph", format!("no graph {}", e.graph)))?;
        let task = graph
            .tasks()
            .iter()
            .find(|t| t.name == e.task)
            .ok_or_else(|| bad("task", format!("graph {} has no task '{}'", e.graph, e.task)))?;
        let &node = nodes
            .get(e.node.as_str())
            .ok_or_else(|| bad("node", format!("unknown node '{}'", e.node)))?;
        let assignment = Assignment {
            task: TaskId::new(e.graph, task.id.local),
            node: NodeId(node),
            start: e.start,
            finish: e.finish,
        };
        if schedule.insert(assignment).is_some() {
            return Err(bad("task", format!("task '{}' of graph {} listed twice", e.task, e.graph)));
        }
    }
    Ok(schedule)
}

pub fn load_gantt(path: impl AsRef<Path>, graphs: &[TaskGraph], network: &Network) -> Result<Schedule> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_gantt(&text, graphs, network)
}
