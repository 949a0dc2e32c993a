use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eplex::gp::Strategy;
use eplex::{ErrorMatrix, Exec, Result};
use eplex_cli::analyze::{analyze, AnalyzeOptions, EpsMode, Fitness, ProbabilityMethod};
use eplex_cli::config::ExperimentSpec;
use eplex_cli::dataset::gen_uball5d;
use eplex_cli::experiment::{run_experiment, write_outputs};
use eplex_cli::sweep::{sweep, SweepOptions};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "eplex", version, about = "Lexicase and epsilon-lexicase selection for symbolic regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML spec file.
    Run {
        spec: PathBuf,
        /// Output directory for results.csv, metrics.csv and summary.json.
        #[arg(long, default_value = "eplex-out")]
        out: PathBuf,
        /// Override the spec's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Record selection wall-clock time (makes metrics.csv non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Selection probabilities, ε thresholds and Pareto sets of an error matrix CSV.
    Analyze {
        /// Headerless CSV, one row per individual, one column per case.
        matrix: PathBuf,
        #[arg(long = "method", value_enum)]
        methods: Vec<ProbabilityMethod>,
        #[arg(long = "eps", value_enum)]
        eps: Vec<EpsMode>,
        /// Monte-Carlo trials.
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        tournament_size: usize,
        /// Aggregate fitness used by the tournament formula.
        #[arg(long, value_enum, default_value_t = Fitness::Mean)]
        fitness: Fitness,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time engine runs across population sizes and fit the scaling exponent.
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "50,200,800")]
        pop_sizes: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, default_value_t = 10)]
        generations: usize,
        #[arg(long, value_delimiter = ',')]
        methods: Vec<Strategy>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a UBall5D sample as CSV.
    GenUball5d {
        #[arg(long, default_value_t = 1024)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit_json<T: Serialize>(value: &T, out: Option<&PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(io::Error::from)? + "\n";
    match out {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { spec, out, seed, timing } => {
            let mut spec = ExperimentSpec::load(&spec)?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            let output = run_experiment(&spec, timing)?;
            write_outputs(&output, &out)?;
            let failed: usize = output.summary.methods.iter().map(|m| m.failures).sum();
            if failed > 0 {
                eprintln!("{failed} run(s) failed; see results.csv");
            }
            if output.summary.dataset.rejected_rows > 0 {
                eprintln!("warning: {} malformed dataset row(s) skipped", output.summary.dataset.rejected_rows);
            }
        }
        Command::Analyze { matrix, methods, eps, trials, seed, tournament_size, fitness, out } => {
            let errors = ErrorMatrix::from_csv_path(&matrix)?;
            let defaults = AnalyzeOptions::default();
            let opts = AnalyzeOptions {
                methods: if methods.is_empty() { defaults.methods } else { methods },
                eps: if eps.is_empty() { defaults.eps } else { eps },
                trials,
                seed,
                tournament_size,
                fitness,
                exec: Exec::default(),
            };
            let report = analyze(&errors, &opts)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            emit_json(&report, out.as_ref())?;
        }
        Command::Sweep { pop_sizes, samples, trials, generations, methods, seed, out } => {
            let defaults = SweepOptions::default();
            let opts = SweepOptions {
                pop_sizes,
                samples,
                trials,
                generations,
                seed,
                methods: if methods.is_empty() { defaults.methods } else { methods },
            };
            emit_json(&sweep(&opts)?, out.as_ref())?;
        }
        Command::GenUball5d { samples, seed, out } => {
            let d = gen_uball5d(samples, seed)?;
            match out {
                Some(p) => d.write_csv(fs::File::create(p)?)?,
                None => d.write_csv(io::stdout().lock())?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
