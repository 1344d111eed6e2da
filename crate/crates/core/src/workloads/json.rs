//! Workflow JSON: one network plus arrival-ordered task graphs.
//!
//! ```json
//! {"network": {"nodes": [{"id": "n0", "speed": 1.0}],
//!              "links": [{"a": "n0", "b": "n1", "strength": 2.0}]},
//!  "graphs": [{"arrival": 0.0,
//!              "tasks": [{"id": "a", "cost": 3.0}],
//!              "edges": [{"src": "a", "dst": "b", "size": 1.0}]}]}
//! ```
//!
//! Node ids are unique across the network; task ids are unique per graph.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Network, Node, TaskGraph};

use super::generate::Workload;

#[derive(Debug, Serialize, Deserialize)]
struct NodeJson {
    id: String,
    speed: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct LinkJson {
    a: String,
    b: String,
    strength: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct NetworkJson {
    nodes: Vec<NodeJson>,
    #[serde(default)]
    links: Vec<LinkJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TaskJson {
    id: String,
    cost: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeJson {
    src: String,
    dst: String,
    size: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphJson {
    arrival: f64,
    tasks: Vec<TaskJson>,
    #[serde(default)]
    edges: Vec<EdgeJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WorkflowJson {
    network: NetworkJson,
    graphs: Vec<GraphJson>,
}

fn invalid(path: String, message: impl Into<String>) -> Error {
    Error::Parse {
        path,
        message: message.into(),
    }
}

pub fn parse_workflow_json(text: &str) -> Result<Workload> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: WorkflowJson = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;

    let mut node_index = HashMap::new();
    for (i, n) in raw.network.nodes.iter().enumerate() {
        if node_index.insert(n.id.as_str(), i).is_some() {
            return Err(invalid(format!("network.nodes[{i}].id"), format!("duplicate node id '{}'", n.id)));
        }
    }
    let mut links = Vec::with_capacity(raw.network.links.len());
    for (i, l) in raw.network.links.iter().enumerate() {
        let end = |id: &str, field: &str| {
            node_index
                .get(id)
                .copied()
                .ok_or_else(|| invalid(format!("network.links[{i}].{field}"), format!("unknown node '{id}'")))
        };
        links.push((end(&l.a, "a")?, end(&l.b, "b")?, l.strength));
    }
    let nodes = raw
        .network
        .nodes
        .into_iter()
        .map(|n| Node {
            name: n.id,
            speed: n.speed,
        })
        .collect();
    let network = Network::new(nodes, links)?;

    let mut graphs = Vec::with_capacity(raw.graphs.len());
    let mut last_arrival = 0.0;
    for (g, graph) in raw.graphs.into_iter().enumerate() {
        if !(graph.arrival >= last_arrival && graph.arrival.is_finite()) {
            return Err(invalid(
                format!("graphs[{g}].arrival"),
                format!("arrival {} must be nonnegative and not earlier than the previous graph", graph.arrival),
            ));
        }
        last_arrival = graph.arrival;
        let mut task_index = HashMap::new();
        for (k, t) in graph.tasks.iter().enumerate() {
            if task_index.insert(t.id.as_str(), k).is_some() {
                return Err(invalid(format!("graphs[{g}].tasks[{k}].id"), format!("duplicate task id '{}'", t.id)));
            }
            if !(t.cost > 0.0 && t.cost.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "graph {g} task '{}': cost must be positive, got {}",
                    t.id, t.cost
                )));
            }
        }
        let mut edges = Vec::with_capacity(graph.edges.len());
        for (k, e) in graph.edges.iter().enumerate() {
            let end = |id: &str, field: &str| {
                task_index
                    .get(id)
                    .copied()
                    .ok_or_else(|| invalid(format!("graphs[{g}].edges[{k}].{field}"), format!("unknown task '{id}'")))
            };
            let (src, dst) = (end(&e.src, "src")?, end(&e.dst, "dst")?);
            if !(e.size > 0.0 && e.size.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "graph {g} edge '{}' -> '{}': size must be positive, got {}",
                    e.src, e.dst, e.size
                )));
            }
            edges.push((src, dst, e.size));
        }
        let tasks = graph.tasks.into_iter().map(|t| (t.id, t.cost));
        graphs.push(TaskGraph::build(g, graph.arrival, tasks, edges)?);
    }
    Ok(Workload { network, graphs })
}

pub fn load_workflow_json(path: impl AsRef<Path>) -> Result<Workload> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_workflow_json(&text)
}

pub fn to_workflow_json(workload: &Workload) -> String {
    let net = &workload.network;
    let raw = WorkflowJson {
        network: NetworkJson {
            nodes: net
                .nodes()
                .iter()
                .map(|n| NodeJson {
                    id: n.name.clone(),
                    speed: n.speed,
                })
                .collect(),
            links: net
                .links()
                .map(|(a, b, strength)| LinkJson {
                    a: net.nodes()[a.0].name.clone(),
                    b: net.nodes()[b.0].name.clone(),
                    strength,
                })
                .collect(),
        },
        graphs: workload
            .graphs
            .iter()
            .map(|g| GraphJson {
                arrival: g.arrival(),
                tasks: g
                    .tasks()
                    .iter()
                    .map(|t| TaskJson {
                        id: t.name.clone(),
                        cost: t.cost,
                    })
                    .collect(),
                edges: g
                    .dependencies()
                    .iter()
                    .map(|d| EdgeJson {
                        src: g.task(d.src).expect("edge endpoint").name.clone(),
                        dst: g.task(d.dst).expect("edge endpoint").name.clone(),
                        size: d.size,
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("workflow JSON serializes")
}

pub fn save_workflow_json(workload: &Workload, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_workflow_json(workload)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workloads::WorkloadSpec;

    const MINIMAL: &str = r#"{"network": {"nodes": [{"id": "cpu", "speed": 2.0}], "links": []},
        "graphs": [{"arrival": 0, "tasks": [{"id": "only", "cost": 4}], "edges": []}]}"#;

    #[test]
    fn minimal_file_parses() {
        let w = parse_workflow_json(MINIMAL).unwrap();
        assert_eq!(w.network.len(), 1);
        assert_eq!(w.graphs.len(), 1);
        assert_eq!(w.graphs[0].tasks()[0].name, "only");
    }

    #[test]
    fn negative_cost_names_the_task() {
        let text = MINIMAL.replace(r#""cost": 4"#, r#""cost": -4"#);
        let err = parse_workflow_json(&text).unwrap_err();
        assert!(matches!(err, Error::InvalidGraph(_)));
        assert!(err.to_string().contains("'only'"), "{err}");
    }

    #[test]
    fn schema_errors_carry_a_path() {
        let text = MINIMAL.replace(r#""cost": 4"#, r#""cost": "four""#);
        match parse_workflow_json(&text).unwrap_err() {
            Error::Parse { path, .. } => assert_eq!(path, "graphs[0].tasks[0].cost"),
            other => panic!("unexpected {other}"),
        }
        let text = MINIMAL.replace(r#""speed": 2.0"#, r#""sped": 2.0"#);
        assert!(matches!(parse_workflow_json(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn cycles_and_bad_references_rejected() {
        let cyclic = r#"{"network": {"nodes": [{"id": "n", "speed": 1}]},
            "graphs": [{"arrival": 0, "tasks": [{"id": "a", "cost": 1}, {"id": "b", "cost": 1}],
                        "edges": [{"src": "a", "dst": "b", "size": 1}, {"src": "b", "dst": "a", "size": 1}]}]}"#;
        assert!(matches!(parse_workflow_json(cyclic), Err(Error::Cycle(_))));
        let dangling = cyclic.replace(r#""dst": "a""#, r#""dst": "zzz""#);
        assert!(matches!(parse_workflow_json(&dangling), Err(Error::Parse { .. })));
        let incomplete = r#"{"network": {"nodes": [{"id": "n", "speed": 1}, {"id": "m", "speed": 1}]}, "graphs": []}"#;
        assert!(matches!(parse_workflow_json(incomplete), Err(Error::InvalidNetwork(_))));
    }

    #[test]
    fn generated_workload_round_trips() {
        let spec = WorkloadSpec {
            graph_count: 8,
            ..WorkloadSpec::default()
        };
        let w = spec.generate().unwrap();
        let back = parse_workflow_json(&to_workflow_json(&w)).unwrap();
        assert_eq!(back, w);
    }
}
