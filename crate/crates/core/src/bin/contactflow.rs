use anyhow::Context;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use contactflow::harness::{self, Check, RunConfig, SweepConfig};

#[derive(Parser)]
#[command(name = "contactflow", version, about = "Allen-Cahn flow with contact-angle boundary conditions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write a run directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Continue from a checkpoint written by the same configuration.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Run a sweep over epsilon and write the cross-epsilon tables.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Concurrent runs; defaults to the number of epsilon values capped at the core count.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Check a stored run.
    Analyze {
        #[arg(long)]
        run: PathBuf,
        /// energy, semidecreasing, boundary-budget, first-variation, angle, trace,
        /// nonconcentration, monotonicity or all. May be repeated.
        #[arg(long, default_value = "all")]
        check: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render SVG plots from the CSVs of a run, analysis or sweep directory.
    Plot {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Run { config, out, resume } => {
            let cfg = RunConfig::load(&config).with_context(|| format!("reading {}", config.display()))?;
            let rec = harness::execute(&cfg, &out, resume.as_deref())?;
            let last = rec.series.last().expect("a run records its initial state");
            println!("{}: t = {} after step {}, energy {:e}", out.display(), last.time, last.step, last.energy);
            Ok(true)
        }
        Command::Sweep { config, out, jobs } => {
            let cfg = SweepConfig::load(&config).with_context(|| format!("reading {}", config.display()))?;
            let jobs = jobs.unwrap_or_else(|| harness::sweep::default_jobs(&cfg));
            harness::execute_sweep(&cfg, &out, jobs)?;
            println!("{}: {} runs", out.display(), cfg.epsilons.len());
            Ok(true)
        }
        Command::Analyze { run, check, out } => {
            let mut checks = Vec::new();
            for c in &check {
                checks.extend(Check::parse_list(c)?);
            }
            let loaded = harness::load_run(&run).with_context(|| format!("loading {}", run.display()))?;
            let summary = harness::analyze(&loaded.record, &loaded.manifest.config_hash, &checks, &out)?;
            for c in &summary.checks {
                println!("{:<18} {}", c.check, if c.pass { "pass" } else { "FAIL" });
            }
            Ok(summary.all_pass())
        }
        Command::Plot { run, out } => {
            for p in harness::emit_plots(&run, &out)? {
                println!("{}", p.display());
            }
            Ok(true)
        }
    }
}
