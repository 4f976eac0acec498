use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qap_core::instance::{generate_idm, generate_partial_orders, generate_synthetic, read_instance, write_instance};
use qap_core::inventory::{round_inventory, simulate, SimulationReport, DEFAULT_PATHS, DEFAULT_UNIT_COST};
use qap_core::lp::MipOptions;
use qap_core::{
    brute_force_qap, build_rounding, improved_ro, solve_qap, solve_qap_idm, two_step_ro, Formulation, IdmInstance,
    OfflineConstraint, QapSolution, SolveOptions, SolveStatus,
};

mod bench;

#[derive(Parser)]
#[command(name = "qap", version, about = "Omnichannel assortment optimization under MNL choice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Ch,
    Milp,
    Ro,
    Iro,
    Oracle,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0.5)]
        alpha0: f64,
        #[arg(long = "u-on0", default_value_t = 5.0)]
        u_on0: f64,
        /// Attach random dominance orders to every online segment.
        #[arg(long)]
        luce: bool,
        /// Limit the offline assortment to this many products.
        #[arg(long)]
        cardinality: Option<usize>,
        /// Attach independent-demand data (online purchase probabilities and
        /// offline precedence arcs).
        #[arg(long)]
        idm: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one instance.
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Ch)]
        method: MethodArg,
        /// Cut rounds before branching.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Relative optimality gap.
        #[arg(long, default_value_t = 1e-4)]
        gap: f64,
        /// Seconds.
        #[arg(long = "time-limit")]
        time_limit: Option<f64>,
        /// Solution JSON; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append a stats row to this CSV file.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Run a grid of generated instances and write run, aggregate,
    /// performance-profile and purchase-probability files.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Solve an independent-demand instance and optionally sample
    /// assortments from the rounding of its LP optimum.
    Idm {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve, set inventory from the fluid demand and simulate sales.
    Simulate {
        #[arg(long = "in")]
        input: PathBuf,
        /// Horizon lengths, comma separated.
        #[arg(long = "t", value_delimiter = ',', default_value = "500,1000,2000")]
        periods: Vec<u64>,
        #[arg(long, default_value_t = DEFAULT_PATHS)]
        paths: usize,
        /// Unit ordering cost, the same for every product.
        #[arg(long, default_value_t = DEFAULT_UNIT_COST)]
        cost: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Simulation CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn instance_id(path: &Path) -> String {
    path.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
}

pub fn run_method(
    inst: &qap_core::Instance,
    method: MethodArg,
    k: usize,
    gap: f64,
    time_limit: Option<f64>,
) -> qap_core::Result<QapSolution> {
    let mip = MipOptions { mip_gap: gap, time_limit: time_limit.map(Duration::from_secs_f64), ..Default::default() };
    let start = std::time::Instant::now();
    let mut sol = match method {
        MethodArg::Ch => solve_qap(inst, &SolveOptions { formulation: Formulation::Ch, k, mip, warm_start: true })?,
        MethodArg::Milp => solve_qap(inst, &SolveOptions { formulation: Formulation::Milp, k, mip, warm_start: true })?,
        MethodArg::Ro => two_step_ro(inst)?,
        MethodArg::Iro => improved_ro(inst)?,
        MethodArg::Oracle => brute_force_qap(inst)?,
    };
    if matches!(method, MethodArg::Ro | MethodArg::Iro | MethodArg::Oracle) {
        sol.stats.time_s = start.elapsed().as_secs_f64();
        sol.stats.bound = sol.objective;
    }
    Ok(sol)
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn append_csv(path: &Path, header: &[&str], row: &[String]) -> Result<()> {
    let fresh = !path.exists() || fs::metadata(path)?.len() == 0;
    let file = fs::OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(header)?;
    }
    w.write_record(row)?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate { n, m, alpha0, u_on0, luce, cardinality, idm, seed, out } => {
            let mut inst = if idm {
                generate_idm(n, m, alpha0, u_on0, seed)?.base
            } else {
                generate_synthetic(n, m, alpha0, u_on0, seed)?
            };
            if luce {
                inst = inst.with_orders(generate_partial_orders(n, m, seed));
            }
            if let Some(k) = cardinality {
                inst = inst.with_constraint(OfflineConstraint::Cardinality(k));
            }
            write_instance(&inst, &out)?;
        }
        Command::Solve { input, method, k, gap, time_limit, out, stats } => {
            let inst = read_instance(&input)?;
            let sol = run_method(&inst, method, k, gap, time_limit)?;
            write_text(out.as_deref(), &sol.to_json())?;
            if let Some(p) = stats {
                append_csv(&p, &QapSolution::CSV_HEADER, &sol.csv_record(&instance_id(&input)))?;
            }
            if out.is_some() {
                println!("{} objective {:.6} status {:?}", sol.method, sol.objective, sol.status);
            }
            if sol.status == SolveStatus::Feasible {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Bench { config, out_dir, jobs } => bench::run(&config, &out_dir, jobs)?,
        Command::Idm { input, samples, seed, out } => {
            let inst = read_instance(&input)?;
            let idm = IdmInstance::from_instance(&inst)?;
            let sol = solve_qap_idm(&idm)?;
            let dist = build_rounding(&idm, &sol)?;
            let draws: Vec<Vec<usize>> = qap_core::idm::sample_many(&dist, seed, samples)
                .into_iter()
                .map(|s| s.into_iter().map(|j| j + 1).collect())
                .collect();
            let doc = serde_json::json!({
                "objective": sol.objective,
                "expected_revenue": dist.expected_revenue(&idm),
                "x": sol.x,
                "y0": sol.y0,
                "y": sol.y,
                "rounds": sol.rounds,
                "cuts": sol.cuts,
                "distribution": serde_json::from_str::<serde_json::Value>(&dist.to_json())?,
                "samples": draws,
            });
            write_text(out.as_deref(), &serde_json::to_string_pretty(&doc)?)?;
        }
        Command::Simulate { input, periods, paths, cost, seed, out } => {
            let inst = read_instance(&input)?;
            if periods.is_empty() {
                bail!("--t needs at least one horizon");
            }
            let sol = solve_qap(&inst, &SolveOptions::default())?;
            let costs = vec![cost; inst.n];
            let id = instance_id(&input);
            let mut buf = Vec::new();
            {
                let mut w = csv::Writer::from_writer(&mut buf);
                w.write_record(SimulationReport::CSV_HEADER)?;
                for &t in &periods {
                    let plan = round_inventory(&inst, &sol, t)?;
                    if plan.shortfall > 0 {
                        eprintln!("T={t}: {} round-ups did not fit in the offline assortment", plan.shortfall);
                    }
                    let rep = simulate(&inst, &sol, &plan.order, t, paths, &costs, seed)?;
                    w.write_record(rep.csv_record(&id))?;
                }
                w.flush()?;
            }
            let text = String::from_utf8(buf)?;
            match out {
                Some(p) => fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => std::io::stdout().write_all(text.as_bytes())?,
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
