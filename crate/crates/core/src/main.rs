use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use peckorder::error::{Error, Result};
use peckorder::ingestion::{parse_events, parse_roster};
use peckorder::par::Execution;
use peckorder::report::{emit_figures, run_pipeline_with, AnalysisParams};
use peckorder::selftest;
use peckorder::simulation::{replica_config, simulate, write_simulation, SimulationConfig};

/// Status hierarchies from directed correction-event logs.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full analysis and write report.json plus figure data.
    Analyze {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        roster: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        figures: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        #[arg(long, default_value_t = 4)]
        window: usize,
        #[arg(long, default_value_t = 24)]
        horizon: usize,
        /// Count each corrector/target pair once per week.
        #[arg(long)]
        binarize: bool,
        /// Also render each figure as a static SVG.
        #[arg(long)]
        svg: bool,
        /// Compute weeks one at a time.
        #[arg(long)]
        sequential: bool,
    },
    /// Generate a synthetic community (events.csv, roster.csv, ground_truth.csv).
    Simulate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Start from the tuned 82-bed replica instead of the defaults.
        #[arg(long)]
        replica: bool,
        /// Flat `key = value` file overriding configuration fields.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Check the numerical core against independent reference implementations.
    Selftest {
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        sequential: bool,
    },
}

const EXIT_INPUT: u8 = 1;
const EXIT_NONCONVERGED: u8 = 2;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn with_path(path: &Path, e: Error) -> Error {
    Error::InvalidArgument(format!("{}: {e}", path.display()))
}

fn exec(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Analyze {
            events,
            roster,
            out,
            figures,
            epsilon,
            tol,
            max_iter,
            window,
            horizon,
            binarize,
            svg,
            sequential,
        } => {
            let ev = parse_events(&read(&events)?).map_err(|e| with_path(&events, e))?;
            let ro = parse_roster(&read(&roster)?).map_err(|e| with_path(&roster, e))?;
            let params = AnalysisParams {
                epsilon,
                tol,
                max_iter,
                window,
                horizon,
                binarize,
                ..AnalysisParams::default()
            };
            let report = run_pipeline_with(&ev, &ro, &params, exec(sequential))?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| Error::Io {
                    path: dir.to_path_buf(),
                    source: e,
                })?;
            }
            fs::write(&out, report.to_json()?).map_err(|e| Error::Io {
                path: out.clone(),
                source: e,
            })?;
            emit_figures(&report, &figures, svg)?;

            let s = &report.shape;
            println!(
                "peak week {}: {} residents, {} corrections",
                s.peak_week, s.n_nodes, s.total_corrections
            );
            if let Some(w) = &report.seniority.wilcoxon {
                println!("wilcoxon first4 vs last4: W+ = {}, p = {:.4e}", w.statistic, w.p_value);
            }
            if let Some(k) = &report.seniority.ks {
                println!("ks first4 vs last4: D = {:.4}, p = {:.4e}", k.statistic, k.p_value);
            }
            if let Some(f) = &report.graduation.fit {
                println!("graduation ~ last4: beta1 = {:.4}, se = {:.4}, p = {:.4e}", f.beta1, f.se1, f.p_value);
            }
            for w in &report.metadata.warnings {
                eprintln!("warning: {w}");
            }
            if report.converged() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("numerical non-convergence; report written with converged=false flags");
                Ok(ExitCode::from(EXIT_NONCONVERGED))
            }
        }
        Command::Simulate {
            out,
            seed,
            replica,
            config,
        } => {
            let mut cfg = if replica {
                replica_config()
            } else {
                SimulationConfig::default()
            };
            if let Some(path) = &config {
                cfg.apply_kv(&read(path)?).map_err(|e| with_path(path, e))?;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let sim = simulate(&cfg)?;
            for p in write_simulation(&sim, &out)? {
                println!("{}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest {
            cases,
            seed,
            sequential,
        } => {
            let outcomes = selftest::run_all(cases, seed, exec(sequential));
            for o in &outcomes {
                println!("{o}");
            }
            Ok(if outcomes.iter().all(|o| o.passed()) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
