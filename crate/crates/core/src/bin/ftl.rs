use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use ftl_core::engine::AlnsConfig;
use ftl_core::instances::{parse_gh, read_instance, transform, write_instance, TransformConfig};
use ftl_core::model::{Instance, Solution};
use ftl_core::oracle::{brute_force, build_arc_graph, emit_lp};
use ftl_core::scenarios::{compare, dump_schedules, run_scenario, Scenario, ScenarioResult};

#[derive(Parser)]
#[command(name = "ftl", version, about = "FTL tender planning with own fleet and spot market")]
struct Cli {
    /// Also write every trip's driver schedule as CSV to this file.
    #[arg(long, global = true, value_name = "FILE")]
    dump_schedule: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Turn a Gehring & Homberger file into a native FTL instance.
    Transform {
        #[arg(long)]
        gh: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Coordinate scale factor; overrides the settings file.
        #[arg(long)]
        factor: Option<f64>,
        /// JSON transformation settings; defaults are used for missing keys.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run one scenario.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "mixed")]
        scenario: Scenario,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Solution and run report as JSON.
        #[arg(long)]
        out: PathBuf,
        /// Cost trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run all three scenarios and write the comparison reports.
    Compare {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Solve a small instance exactly by enumeration.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Write the routing model with minimum driving distance as an LP file.
    EmitLp {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Input(String),
    Config(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Config(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Config(m) => m,
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    read_instance(path).map_err(|e| Failure::Input(e.to_string()))
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<AlnsConfig, Failure> {
    let mut cfg = match path {
        Some(p) => AlnsConfig::read(p).map_err(|e| Failure::Config(e.to_string()))?,
        None => AlnsConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn solution_json(instance: &Instance, solution: &Solution) -> serde_json::Value {
    let trips: Vec<Vec<u32>> = solution
        .trips
        .iter()
        .map(|t| t.requests().iter().map(|&r| instance.requests[r].id).collect())
        .collect();
    let bank: Vec<u32> = solution.bank.iter().map(|&r| instance.requests[r].id).collect();
    json!({ "trips": trips, "outsourced": bank, "cost": solution.cost })
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

fn maybe_dump(path: Option<&Path>, instance: &Instance, solution: &Solution) -> Result<(), Failure> {
    match path {
        Some(p) => write(p, &dump_schedules(instance, solution)),
        None => Ok(()),
    }
}

fn print_result(r: &ScenarioResult) {
    println!(
        "{:<8} total {:>14}  vehicles {:>4}  own {:>6.2}%  empty {:>10} km  residual {}",
        r.scenario.tag(),
        r.total_cost.to_string(),
        r.vehicles,
        r.pct_own,
        r.empty_km.to_string(),
        r.residual
    );
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let dump = cli.dump_schedule.as_deref();
    match cli.command {
        Command::Transform {
            gh: input,
            out,
            factor,
            config,
        } => {
            let mut cfg = match config {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| io_error(&p, e))?;
                    let mut de = serde_json::Deserializer::from_str(&text);
                    let cfg: TransformConfig = serde_path_to_error::deserialize(&mut de)
                        .map_err(|e| Failure::Config(format!("{}: {}", e.path(), e.inner())))?;
                    cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
                    cfg
                }
                None => TransformConfig::default(),
            };
            if let Some(f) = factor {
                cfg.factor = f;
                cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
            }
            let text = std::fs::read_to_string(&input).map_err(|e| io_error(&input, e))?;
            let gh = parse_gh(&text).map_err(|e| Failure::Input(format!("{}: {e}", input.display())))?;
            let instance = transform(&gh, &cfg).map_err(|e| Failure::Input(e.to_string()))?;
            write_instance(&instance, &out).map_err(|e| Failure::Input(e.to_string()))?;
            println!(
                "{}: {} requests, {} days, minimum distance {} km",
                instance.name,
                instance.requests.len(),
                instance.horizon.days,
                instance.mu
            );
        }
        Command::Solve {
            instance,
            scenario,
            config,
            seed,
            out,
            trace,
        } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let inst = load_instance(&instance)?;
            let run = run_scenario(&inst, scenario, &cfg).map_err(|e| Failure::Config(e.to_string()))?;
            let doc = json!({
                "instance": inst.name,
                "result": run.result,
                "solution": solution_json(&inst, &run.solution),
                "report": run.report,
            });
            write(&out, &(serde_json::to_string_pretty(&doc).expect("serializes") + "\n"))?;
            if let (Some(p), Some(report)) = (trace, &run.report) {
                write(&p, &report.trace_csv())?;
            }
            maybe_dump(dump, &inst, &run.solution)?;
            print_result(&run.result);
        }
        Command::Compare {
            instance,
            config,
            seed,
            out_dir,
        } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let inst = load_instance(&instance)?;
            let cmp = compare(&inst, &cfg).map_err(|e| Failure::Config(e.to_string()))?;
            cmp.write(&inst.name, &out_dir).map_err(|e| io_error(&out_dir, e))?;
            maybe_dump(dump, &inst, &cmp.mixed.solution)?;
            for r in cmp.results() {
                print_result(r);
            }
        }
        Command::Oracle { instance } => {
            let inst = load_instance(&instance)?;
            let best = brute_force(&inst).map_err(|e| Failure::Input(e.to_string()))?;
            println!("{}", serde_json::to_string_pretty(&solution_json(&inst, &best)).expect("serializes"));
            maybe_dump(dump, &inst, &best)?;
        }
        Command::EmitLp { instance, out } => {
            let inst = load_instance(&instance)?;
            let graph = build_arc_graph(&inst);
            emit_lp(&graph, &inst, &out).map_err(|e| io_error(&out, e))?;
            println!("{} nodes, {} arcs", graph.nodes.len(), graph.arcs.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
