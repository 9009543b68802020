use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use ising_ge_cli::commands::{run_evolve, run_sweep, write_evolve, write_sweep};
use ising_ge_cli::config::ExperimentConfig;
use ising_ge_cli::figures::{run_figure, FigureId};
use ising_ge_cli::output::{Manifest, OutputDir};
use ising_ge_cli::{AppError, Workers};

#[derive(Parser)]
#[command(name = "ising-ge", version, about = "Entanglement and fidelity decay in disordered spin lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one disorder ensemble and write series.csv and summary.txt.
    Evolve {
        config: PathBuf,
        /// Overrides output.directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Critical times over a coupling grid; writes tc.csv and summary.txt.
    SweepTc {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Preset datasets: fig1, fig2, fig3 or fig4.
    Figure {
        id: String,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value = "figures")]
        out: PathBuf,
    },
    /// Parse and check a configuration without running it.
    Validate { config: PathBuf },
}

fn manifest(command: String, configs: &[ExperimentConfig], workers: usize, det: bool, start: Instant, failures: Vec<String>) -> Manifest {
    let mut seeds: Vec<u64> = configs.iter().map(|c| c.ensemble.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        config: configs.iter().map(ExperimentConfig::to_toml).collect(),
        seeds,
        workers,
        deterministic: det,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        partial: !failures.is_empty(),
        failures,
        files: Vec::new(),
    }
}

fn out_dir(cfg: &ExperimentConfig, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| cfg.output.directory.clone())
}

fn run(cli: Cli) -> Result<bool, AppError> {
    let start = Instant::now();
    let workers = Workers::from_env()?;
    let threads = workers.install();
    let det = workers.deterministic;
    match cli.command {
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let points = cfg.points()?;
            println!("{}: ok ({} qubits, {} point(s))", config.display(), cfg.lattice()?.n(), points.len());
            Ok(true)
        }
        Command::Evolve { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let points = cfg.points()?;
            if points.len() != 1 {
                return Err(AppError::Usage(format!(
                    "evolve takes one (delta, J) point, {} configured; use sweep-tc",
                    points.len()
                )));
            }
            let mut dir = OutputDir::create(&out_dir(&cfg, out))?;
            let report = run_evolve(&cfg, points[0]);
            let failures = match &report {
                Ok(r) => {
                    write_evolve(&mut dir, "", &cfg, r)?;
                    Vec::new()
                }
                Err(e) => vec![e.to_string()],
            };
            finish(dir, manifest(format!("evolve {}", config.display()), &[cfg], threads, det, start, failures))
        }
        Command::SweepTc { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let mut dir = OutputDir::create(&out_dir(&cfg, out))?;
            let report = run_sweep(&cfg)?;
            write_sweep(&mut dir, "", &cfg, &report)?;
            let failures = report.failures.clone();
            finish(dir, manifest(format!("sweep-tc {}", config.display()), &[cfg], threads, det, start, failures))
        }
        Command::Figure { id, n, out } => {
            let fig: FigureId = id.parse()?;
            let mut dir = OutputDir::create(&out)?;
            let fr = run_figure(fig, n, &mut dir)?;
            finish(dir, manifest(format!("figure {id} --n {n}"), &fr.configs, threads, det, start, fr.failures))
        }
    }
}

fn finish(dir: OutputDir, m: Manifest) -> Result<bool, AppError> {
    let ok = !m.partial;
    for f in &m.failures {
        eprintln!("failed: {f}");
    }
    let root: &Path = dir.root();
    println!("wrote {}", root.display());
    dir.finish(m)?;
    Ok(ok)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
