use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dcpath::pipeline::{self, RunConfig};
use dcpath::{oracle, Error};

#[derive(Parser)]
#[command(version, about = "Confidence-guided path search and relation reasoning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// TOML config file
    #[arg(short, long)]
    config: PathBuf,
    /// Search seed
    #[arg(long)]
    seed: Option<u64>,
    /// Run only these tasks (repeatable)
    #[arg(long = "task")]
    tasks: Vec<String>,
    /// Output directory
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Extra key=value overrides (repeatable)
    #[arg(long = "set")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> dcpath::Result<RunConfig> {
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        let mut cfg = RunConfig::load(&self.config, &overrides)?;
        if !self.tasks.is_empty() {
            cfg.tasks = self.tasks.clone();
        }
        if let Some(out) = &self.output {
            cfg.output_dir = out.clone();
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Search, select, train and evaluate every task
    Run(ConfigArgs),
    /// Compare exhaustive search with exact enumeration on random graphs
    OracleCheck {
        /// Maximum number of entities per random graph
        #[arg(long, default_value_t = 50)]
        bound: usize,
        #[arg(long, default_value_t = 200)]
        graphs: usize,
        #[arg(long, default_value_t = 3)]
        max_path_length: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// MAP and path count across confidence thresholds, reusing cached pools
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated thresholds; defaults to sweep_grid from the config
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
    },
    /// Summarize a pool.jsonl snapshot
    InspectPool {
        pool: PathBuf,
        #[arg(long, default_value_t = 20)]
        top: usize,
    },
}

fn config_error(e: &Error) -> bool {
    matches!(e, Error::Config(_) | Error::Io { .. } | Error::Parse { .. } | Error::InverseAlreadyPresent(_))
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    if config_error(&e) {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let cfg = match args.load() {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            match pipeline::cmd_run(&cfg) {
                Ok(summary) => {
                    for t in &summary.completed {
                        let m = &t.metrics;
                        println!("{}\tpaths={}\tMAP={:.4}\tMRR={:.4}", m.task, m.path_count, m.map, m.mrr);
                    }
                    if let Some(avg) = summary.average_map() {
                        println!("average MAP {avg:.4} over {} tasks", summary.completed.len());
                    }
                    for (name, e) in &summary.failed {
                        eprintln!("{name}: {e}");
                    }
                    if summary.failed.is_empty() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => fail(e),
            }
        }
        Command::OracleCheck {
            bound,
            graphs,
            max_path_length,
            seed,
        } => match oracle::oracle_check(bound, graphs, max_path_length, seed) {
            Ok(report) => {
                println!(
                    "{} graphs, {} sequences checked, {} pooled paths",
                    report.graphs, report.sequences_checked, report.pool_paths
                );
                if report.vacuous {
                    println!("warning: nothing checked");
                }
                match report.counterexample {
                    None => {
                        println!("PASS");
                        ExitCode::SUCCESS
                    }
                    Some(c) => {
                        println!("FAIL: {c}");
                        ExitCode::from(1)
                    }
                }
            }
            Err(e) => fail(e),
        },
        Command::Sweep { config, grid } => {
            let cfg = match config.load() {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let grid = grid.unwrap_or_else(|| cfg.sweep_grid.clone());
            match pipeline::cmd_threshold_sweep(&cfg, &grid) {
                Ok(rows) => {
                    println!("task,threshold,path_count,map");
                    for (task, points) in rows {
                        for p in points {
                            println!("{task},{},{},{}", p.threshold, p.path_count, p.map);
                        }
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::InspectPool { pool, top } => match pipeline::inspect_pool(&pool, top) {
            Ok(summary) => {
                let _ = pipeline::print_pool_summary(&summary, std::io::stdout().lock());
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
    }
}
