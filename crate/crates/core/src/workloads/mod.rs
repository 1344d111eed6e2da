//! Workload generators and the workflow JSON format.

mod generate;
mod json;
mod mixture;
mod topology;

pub use generate::{
    ccr, gen_adversarial, gen_arrivals, gen_network, AdversarialSpec, ArrivalProcess, SizeRange, TopologyMix,
    Workload, WorkloadKind, WorkloadSpec,
};
pub use json::{load_workflow_json, parse_workflow_json, save_workflow_json, to_workflow_json};
pub use mixture::{MixtureComponent, TruncatedGaussianMixture, MAX_REJECTIONS};
pub use topology::{gen_topology, Shape, Skeleton, TopologyKind};
