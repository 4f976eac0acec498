//! Grid benchmark: one row per (instance, method) run plus summaries.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Mutex;

use anyhow::{Context, Result};
use clap::ValueEnum;
use rayon::prelude::*;
use serde::Deserialize;

use qap_core::instance::{generate_partial_orders, generate_synthetic};
use qap_core::{Instance, OfflineConstraint, SolveStatus};

use crate::{run_method, MethodArg};

fn default_alpha0() -> f64 {
    0.5
}
fn default_k() -> usize {
    2
}
fn default_gap() -> f64 {
    1e-4
}
fn default_luce() -> Vec<bool> {
    vec![false]
}
fn default_methods() -> Vec<String> {
    vec!["ch".into(), "milp".into()]
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub u_on0: Vec<f64>,
    #[serde(default = "default_luce")]
    pub luce: Vec<bool>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_alpha0")]
    pub alpha0: f64,
    #[serde(default)]
    pub cardinality: Option<usize>,
    #[serde(default = "default_methods")]
    pub methods: Vec<String>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_gap")]
    pub gap: f64,
    /// Seconds per run.
    #[serde(default)]
    pub time_limit: Option<f64>,
}

struct Job {
    config: String,
    instance: String,
    inst: Instance,
}

struct Outcome {
    config: String,
    instance: String,
    method: String,
    solved: bool,
    objective: f64,
    time: f64,
    nodes: usize,
}

const RUN_HEADER: [&str; 12] =
    ["config", "instance", "method", "status", "obj", "bound", "gap", "nodes", "cuts", "rounds", "time_s", "error"];

fn build_jobs(cfg: &GridConfig) -> Result<Vec<Job>> {
    let mut jobs = Vec::new();
    for &n in &cfg.n {
        for &m in &cfg.m {
            for &u in &cfg.u_on0 {
                for &luce in &cfg.luce {
                    let config = format!("n{n}_m{m}_u{u}_{}", if luce { "luce" } else { "mnl" });
                    for &seed in &cfg.seeds {
                        let mut inst = generate_synthetic(n, m, cfg.alpha0, u, seed)
                            .with_context(|| format!("generating {config} seed {seed}"))?;
                        if luce {
                            inst = inst.with_orders(generate_partial_orders(n, m, seed));
                        }
                        if let Some(k) = cfg.cardinality {
                            inst = inst.with_constraint(OfflineConstraint::Cardinality(k));
                        }
                        jobs.push(Job { instance: format!("{config}_s{seed}"), config: config.clone(), inst });
                    }
                }
            }
        }
    }
    Ok(jobs)
}

fn write_probabilities(path: &Path, probs: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let n = probs.first().map_or(0, Vec::len);
    let mut header = vec!["segment".to_string()];
    header.extend((1..=n).map(|j| format!("p{j}")));
    w.write_record(&header)?;
    for (i, row) in probs.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(row.iter().map(|p| format!("{p:.9}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(config: &Path, out_dir: &Path, jobs: usize) -> Result<()> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let cfg: GridConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", config.display()))?;
    let methods = cfg
        .methods
        .iter()
        .map(|s| MethodArg::from_str(s, true).map_err(|e| anyhow::anyhow!("method {s}: {e}")))
        .collect::<Result<Vec<_>>>()?;
    let grid = build_jobs(&cfg)?;
    fs::create_dir_all(out_dir.join("probabilities"))?;
    let runs = Mutex::new(csv::Writer::from_path(out_dir.join("runs.csv"))?);
    runs.lock().unwrap().write_record(RUN_HEADER)?;

    let tasks: Vec<(&Job, MethodArg)> = grid.iter().flat_map(|j| methods.iter().map(move |&m| (j, m))).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    let outcomes: Vec<Outcome> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(job, method)| {
                let name = format!("{method:?}").to_lowercase();
                let result = run_method(&job.inst, method, cfg.k, cfg.gap, cfg.time_limit);
                let (row, outcome) = match &result {
                    Ok(sol) => {
                        let mut rec = sol.csv_record(&job.instance).to_vec();
                        rec.insert(0, job.config.clone());
                        rec.insert(3, format!("{:?}", sol.status));
                        rec.push(String::new());
                        let solved = matches!(sol.status, SolveStatus::Optimal | SolveStatus::Heuristic);
                        let path = out_dir.join("probabilities").join(format!("{}_{name}.csv", job.instance));
                        if let Err(e) = write_probabilities(&path, &sol.probabilities) {
                            eprintln!("{}: {e:#}", path.display());
                        }
                        let o = Outcome {
                            config: job.config.clone(),
                            instance: job.instance.clone(),
                            method: name.clone(),
                            solved,
                            objective: sol.objective,
                            time: sol.stats.time_s,
                            nodes: sol.stats.nodes,
                        };
                        (rec, o)
                    }
                    Err(e) => {
                        let mut rec = vec![String::new(); RUN_HEADER.len()];
                        rec[0] = job.config.clone();
                        rec[1] = job.instance.clone();
                        rec[2] = name.clone();
                        rec[3] = "Error".into();
                        rec[11] = e.to_string();
                        let o = Outcome {
                            config: job.config.clone(),
                            instance: job.instance.clone(),
                            method: name.clone(),
                            solved: false,
                            objective: f64::NAN,
                            time: f64::NAN,
                            nodes: 0,
                        };
                        (rec, o)
                    }
                };
                let mut w = runs.lock().unwrap();
                if let Err(e) = w.write_record(&row).and_then(|_| w.flush().map_err(Into::into)) {
                    eprintln!("runs.csv: {e}");
                }
                outcome
            })
            .collect()
    });

    write_aggregate(&out_dir.join("aggregate.csv"), &outcomes)?;
    write_profile(&out_dir.join("profile.csv"), &outcomes)?;
    Ok(())
}

/// Mean, min, max and population standard deviation of solve times over
/// solved runs, mean node count, and the number solved.
fn write_aggregate(path: &Path, outcomes: &[Outcome]) -> Result<()> {
    let mut groups: BTreeMap<String, Vec<&Outcome>> = BTreeMap::new();
    for o in outcomes {
        groups.entry(format!("{}_{}", o.config, o.method)).or_default().push(o);
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["config", "Time", "Min", "Max", "Std", "Nds", "Solved"])?;
    for (key, runs) in groups {
        let solved: Vec<&&Outcome> = runs.iter().filter(|o| o.solved).collect();
        let times: Vec<f64> = solved.iter().map(|o| o.time).collect();
        let k = times.len().max(1) as f64;
        let mean = times.iter().sum::<f64>() / k;
        let std = (times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / k).sqrt();
        let min = times.iter().copied().fold(f64::INFINITY, f64::min);
        let max = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let nodes = solved.iter().map(|o| o.nodes as f64).sum::<f64>() / k;
        let fmt = |v: f64| if v.is_finite() { format!("{v:.4}") } else { String::new() };
        w.write_record([
            key,
            fmt(if times.is_empty() { f64::NAN } else { mean }),
            fmt(min),
            fmt(max),
            fmt(if times.is_empty() { f64::NAN } else { std }),
            fmt(if times.is_empty() { f64::NAN } else { nodes }),
            format!("{}/{}", solved.len(), runs.len()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Time of each run over the best time on the same instance; unsolved runs
/// get an empty ratio. The empirical distribution of `ratio` per method is
/// the performance profile.
fn write_profile(path: &Path, outcomes: &[Outcome]) -> Result<()> {
    let mut best: BTreeMap<&str, f64> = BTreeMap::new();
    for o in outcomes.iter().filter(|o| o.solved) {
        let b = best.entry(&o.instance).or_insert(f64::INFINITY);
        *b = b.min(o.time);
    }
    let mut rows: Vec<&Outcome> = outcomes.iter().collect();
    rows.sort_by(|a, b| (&a.instance, &a.method).cmp(&(&b.instance, &b.method)));
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["instance", "method", "obj", "time_s", "ratio"])?;
    for o in rows {
        let ratio = if o.solved { format!("{:.6}", o.time / best[o.instance.as_str()].max(1e-9)) } else { String::new() };
        w.write_record([
            o.instance.clone(),
            o.method.clone(),
            if o.objective.is_finite() { format!("{:.9}", o.objective) } else { String::new() },
            if o.time.is_finite() { format!("{:.6}", o.time) } else { String::new() },
            ratio,
        ])?;
    }
    w.flush()?;
    Ok(())
}
