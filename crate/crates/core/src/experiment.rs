//! Experiment sweeps over workload seed × scheduler × policy.
//!
//! A run writes into its output directory:
//!
//! * `results.csv`, one row per cell, in config order (seed, then
//!   scheduler, then policy). Columns:
//!   `workload_seed, scheduler, policy, k, total_makespan, mean_makespan,
//!   mean_flowtime, mean_utilization, scheduler_runtime, utilization`, then
//!   `norm_*` versions of the first five metrics. `k` is empty for `P` and
//!   `NP`. `utilization` lists per-node fractions separated by `;`.
//!   Normalized values divide by the minimum over all cells sharing the
//!   workload seed; a column is left empty when that minimum is not positive.
//!   `scheduler_runtime` and `norm_scheduler_runtime` are wall-clock seconds
//!   and differ between machines and runs. Every other column is reproducible.
//! * `summary.csv`: per (scheduler, policy), medians over seeds of every
//!   raw and normalized metric.
//! * `gantt/<seed>_<scheduler>_<policy>.json` and
//!   `events/<seed>_<scheduler>_<policy>.jsonl` when requested.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run_simulation, run_simulation_unchecked, write_event_log, PreemptionPolicy};
use crate::error::{Error, Result};
use crate::gantt::emit_gantt;
use crate::metrics::{normalize, MetricVector};
use crate::schedulers::SchedulerKind;
use crate::workloads::{load_workflow_json, Workload, WorkloadSpec};

pub const DEFAULT_K_VALUES: [usize; 4] = [2, 5, 10, 20];

fn default_k_values() -> Vec<usize> {
    DEFAULT_K_VALUES.to_vec()
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Generator parameters; the `seed` field is replaced by each entry of `seeds`.
    #[serde(default)]
    pub workload: Option<WorkloadSpec>,
    /// Workflow JSON used for every seed instead of a generated workload.
    /// Relative paths resolve against the config file.
    #[serde(default)]
    pub workload_file: Option<PathBuf>,
    pub schedulers: Vec<SchedulerKind>,
    /// `P`, `NP`, `KP` (expands to every entry of `k_values`) or a literal `<K>P`.
    pub policies: Vec<String>,
    #[serde(default = "default_k_values")]
    pub k_values: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads; 0 or absent uses every core.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub emit_gantt: bool,
    #[serde(default)]
    pub emit_events: bool,
    #[serde(default = "default_true")]
    pub validate: bool,
}

impl ExperimentConfig {
    pub fn new(workload: WorkloadSpec, schedulers: Vec<SchedulerKind>, policies: &[&str], seeds: Vec<u64>) -> Self {
        Self {
            workload: Some(workload),
            workload_file: None,
            schedulers,
            policies: policies.iter().map(|p| p.to_string()).collect(),
            k_values: default_k_values(),
            seeds,
            output_dir: None,
            workers: None,
            emit_gantt: false,
            emit_events: false,
            validate: true,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Config(format!("{}: {}", e.path(), e.inner())))
    }

    /// Loads TOML, or JSON when the extension is `.json`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json_str(&text)?
        } else {
            Self::from_toml_str(&text)?
        };
        if let (Some(file), Some(dir)) = (&mut config.workload_file, path.parent()) {
            if file.is_relative() {
                *file = dir.join(&*file);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.workload, &self.workload_file) {
            (Some(_), Some(_)) => return Err(Error::Config("set either workload or workload_file, not both".into())),
            (None, None) => return Err(Error::Config("missing workload or workload_file".into())),
            (Some(spec), None) => spec.validate().map_err(|e| Error::Config(format!("workload: {e}")))?,
            (None, Some(_)) => {}
        }
        if self.schedulers.is_empty() {
            return Err(Error::Config("schedulers must not be empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must not be empty".into()));
        }
        if let Some(k) = self.k_values.iter().find(|&&k| k == 0) {
            return Err(Error::Config(format!("k_values must be positive, got {k}")));
        }
        self.variants().map(drop)
    }

    /// Policy variants in config order, `KP` expanded, duplicates dropped.
    pub fn variants(&self) -> Result<Vec<PreemptionPolicy>> {
        if self.policies.is_empty() {
            return Err(Error::Config("policies must not be empty".into()));
        }
        let mut out = Vec::new();
        for p in &self.policies {
            let expanded = if p.trim().eq_ignore_ascii_case("KP") {
                if self.k_values.is_empty() {
                    return Err(Error::Config("policy KP needs a nonempty k_values".into()));
                }
                self.k_values.iter().map(|&k| PreemptionPolicy::LastK(k)).collect()
            } else {
                match p.parse()? {
                    PreemptionPolicy::LastK(0) => {
                        return Err(Error::Config(format!("policy '{p}': K must be positive")));
                    }
                    policy => vec![policy],
                }
            };
            for policy in expanded {
                if !out.contains(&policy) {
                    out.push(policy);
                }
            }
        }
        Ok(out)
    }

    fn workers(&self) -> usize {
        self.workers.unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub workload_seed: u64,
    pub scheduler: SchedulerKind,
    pub policy: PreemptionPolicy,
    pub metrics: MetricVector,
    /// Filled in after all cells of the seed finish.
    pub normalized: Normalized,
}

/// Per-seed normalized metrics; `None` when the seed's minimum is not positive.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Normalized {
    pub total_makespan: Option<f64>,
    pub mean_makespan: Option<f64>,
    pub mean_flowtime: Option<f64>,
    pub mean_utilization: Option<f64>,
    pub scheduler_runtime: Option<f64>,
}

fn cell_name(seed: u64, scheduler: SchedulerKind, policy: PreemptionPolicy) -> String {
    format!("{seed}_{}_{}", scheduler.name(), policy.label())
}

fn workload_for(config: &ExperimentConfig, seed: u64) -> Result<Workload> {
    match (&config.workload, &config.workload_file) {
        (Some(spec), _) => WorkloadSpec { seed, ..spec.clone() }.generate(),
        (None, Some(path)) => load_workflow_json(path),
        (None, None) => Err(Error::Config("missing workload".into())),
    }
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn run_cell(
    config: &ExperimentConfig,
    workload: &Workload,
    seed: u64,
    scheduler: SchedulerKind,
    policy: PreemptionPolicy,
    out_dir: &Path,
) -> Result<CellResult> {
    let run = if config.validate {
        run_simulation
    } else {
        run_simulation_unchecked
    };
    let result = run(&workload.graphs, &workload.network, policy, scheduler, seed)?;
    let metrics = MetricVector::compute(&result, &workload.graphs, &workload.network)?;
    let name = cell_name(seed, scheduler, policy);
    if config.emit_gantt {
        let path = out_dir.join("gantt").join(format!("{name}.json"));
        emit_gantt(&result.schedule, &workload.graphs, &workload.network, path)?;
    }
    if config.emit_events {
        let path = out_dir.join("events").join(format!("{name}.jsonl"));
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        write_event_log(&result.events, &workload.graphs, &workload.network, BufWriter::new(file))
            .map_err(|e| Error::io(&path, e))?;
    }
    Ok(CellResult {
        workload_seed: seed,
        scheduler,
        policy,
        metrics,
        normalized: Normalized::default(),
    })
}

fn normalize_seed(rows: &mut [CellResult]) {
    type Get = fn(&MetricVector) -> f64;
    type Set = fn(&mut Normalized, f64);
    let columns: [(Get, Set); 5] = [
        (|m| m.total_makespan, |n, v| n.total_makespan = Some(v)),
        (|m| m.mean_makespan, |n, v| n.mean_makespan = Some(v)),
        (|m| m.mean_flowtime, |n, v| n.mean_flowtime = Some(v)),
        (|m| m.mean_utilization, |n, v| n.mean_utilization = Some(v)),
        (|m| m.scheduler_runtime, |n, v| n.scheduler_runtime = Some(v)),
    ];
    for (get, set) in columns {
        let values: Vec<f64> = rows.iter().map(|r| get(&r.metrics)).collect();
        if let Ok(norm) = normalize(&values) {
            for (row, v) in rows.iter_mut().zip(norm) {
                set(&mut row.normalized, v);
            }
        }
    }
}

/// Runs every cell and writes the artifacts into `out_dir`. Rows come back
/// in config order. On failure the error names the first failing cell.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<CellResult>> {
    config.validate()?;
    let variants = config.variants()?;
    create_dir(out_dir)?;
    if config.emit_gantt {
        create_dir(&out_dir.join("gantt"))?;
    }
    if config.emit_events {
        create_dir(&out_dir.join("events"))?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers())
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;

    let mut rows = pool.install(|| -> Result<Vec<CellResult>> {
        let workloads = match &config.workload_file {
            Some(_) => vec![workload_for(config, config.seeds[0])?],
            None => config
                .seeds
                .par_iter()
                .map(|&seed| {
                    workload_for(config, seed).map_err(|e| Error::Cell {
                        cell: format!("workload seed {seed}"),
                        source: Box::new(e),
                    })
                })
                .collect::<Vec<_>>()
                .into_iter()
                .collect::<Result<Vec<_>>>()?,
        };
        let cells: Vec<(usize, SchedulerKind, PreemptionPolicy)> = (0..config.seeds.len())
            .flat_map(|s| {
                let variants = &variants;
                config
                    .schedulers
                    .iter()
                    .flat_map(move |&sch| variants.iter().map(move |&p| (s, sch, p)))
            })
            .collect();
        let results: Vec<Result<CellResult>> = cells
            .par_iter()
            .map(|&(s, scheduler, policy)| {
                let seed = config.seeds[s];
                let workload = &workloads[s.min(workloads.len() - 1)];
                run_cell(config, workload, seed, scheduler, policy, out_dir).map_err(|e| Error::Cell {
                    cell: format!("seed {seed} {}-{}", policy.label(), scheduler.name()),
                    source: Box::new(e),
                })
            })
            .collect();
        results.into_iter().collect()
    })?;

    let per_seed = config.schedulers.len() * variants.len();
    for chunk in rows.chunks_mut(per_seed) {
        normalize_seed(chunk);
    }
    write_results_csv(&rows, &out_dir.join("results.csv"))?;
    write_summary_csv(&rows, &out_dir.join("summary.csv"))?;
    Ok(rows)
}

pub const RESULTS_HEADER: [&str; 15] = [
    "workload_seed",
    "scheduler",
    "policy",
    "k",
    "total_makespan",
    "mean_makespan",
    "mean_flowtime",
    "mean_utilization",
    "scheduler_runtime",
    "utilization",
    "norm_total_makespan",
    "norm_mean_makespan",
    "norm_mean_flowtime",
    "norm_mean_utilization",
    "norm_scheduler_runtime",
];

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let kind = match e.kind() {
        csv::ErrorKind::Io(io) => io.kind(),
        _ => std::io::ErrorKind::Other,
    };
    Error::io(path, std::io::Error::new(kind, e.to_string()))
}

pub fn write_results_csv(rows: &[CellResult], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(RESULTS_HEADER).map_err(|e| csv_err(path, e))?;
    for r in rows {
        let m = &r.metrics;
        let n = &r.normalized;
        let utilization: Vec<String> = m.utilization.iter().map(f64::to_string).collect();
        let k = match r.policy {
            PreemptionPolicy::LastK(k) => k.to_string(),
            _ => String::new(),
        };
        w.write_record([
            r.workload_seed.to_string(),
            r.scheduler.name().to_string(),
            r.policy.label(),
            k,
            m.total_makespan.to_string(),
            m.mean_makespan.to_string(),
            m.mean_flowtime.to_string(),
            m.mean_utilization.to_string(),
            m.scheduler_runtime.to_string(),
            utilization.join(";"),
            opt(n.total_makespan),
            opt(n.mean_makespan),
            opt(n.mean_flowtime),
            opt(n.mean_utilization),
            opt(n.scheduler_runtime),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Median of the finite values, or `None` if there are none.
pub fn median(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

pub fn write_summary_csv(rows: &[CellResult], path: &Path) -> Result<()> {
    let mut groups: Vec<(SchedulerKind, PreemptionPolicy)> = Vec::new();
    for r in rows {
        if !groups.contains(&(r.scheduler, r.policy)) {
            groups.push((r.scheduler, r.policy));
        }
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header: Vec<String> = ["scheduler", "policy", "k", "seeds"].map(String::from).into();
    header.extend(RESULTS_HEADER[4..9].iter().chain(&RESULTS_HEADER[10..]).map(|h| format!("median_{h}")));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for (scheduler, policy) in groups {
        let members: Vec<&CellResult> = rows
            .iter()
            .filter(|r| r.scheduler == scheduler && r.policy == policy)
            .collect();
        let raw: [fn(&CellResult) -> f64; 5] = [
            |r| r.metrics.total_makespan,
            |r| r.metrics.mean_makespan,
            |r| r.metrics.mean_flowtime,
            |r| r.metrics.mean_utilization,
            |r| r.metrics.scheduler_runtime,
        ];
        let norm: [fn(&CellResult) -> Option<f64>; 5] = [
            |r| r.normalized.total_makespan,
            |r| r.normalized.mean_makespan,
            |r| r.normalized.mean_flowtime,
            |r| r.normalized.mean_utilization,
            |r| r.normalized.scheduler_runtime,
        ];
        let k = match policy {
            PreemptionPolicy::LastK(k) => k.to_string(),
            _ => String::new(),
        };
        let mut record = vec![scheduler.name().to_string(), policy.label(), k, members.len().to_string()];
        record.extend(raw.iter().map(|f| opt(median(members.iter().map(|r| f(r))))));
        record.extend(norm.iter().map(|f| opt(median(members.iter().filter_map(|r| f(r))))));
        w.write_record(&record).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
