use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adaqec_core::decoder::{decode, score};
use adaqec_core::estimator::{estimate_all, ClassEstimates, EstimatorConfig, MomentAccumulator};
use adaqec_core::harness::{exp_convergence, exp_fluctuation, ExperimentConfig, OneOrMany, SCHEMA};
use adaqec_core::matching::MatchingProblem;
use adaqec_core::weights::{weights_all, Backend};
use adaqec_core::{build_repetition_dem, sample_trial, SyndromeRecord};
use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "adaqec", version, about = "Adaptive MWPM decoding of the repetition code")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one closed syndrome record.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Cycles to simulate (defaults to rounds_test).
        #[arg(long)]
        rounds: Option<usize>,
    },
    /// Estimate edge probabilities from a syndrome record.
    Estimate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        /// Keep only the last N cycles.
        #[arg(long)]
        window: Option<usize>,
    },
    /// Decode a syndrome record.
    Decode {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        /// Estimates JSON; the configured schedule is used when absent.
        #[arg(long)]
        estimates: Option<PathBuf>,
    },
    /// Run the training-length convergence experiment.
    ExpConvergence {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        repetitions: Option<usize>,
    },
    /// Run the sliding-window experiment under drifting noise.
    ExpFluctuation {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        repetitions: Option<usize>,
        /// Window lengths, comma separated.
        #[arg(long, value_delimiter = ',')]
        window: Vec<usize>,
    },
    /// Print the detector error model of the configured code.
    DumpDem {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long)]
        estimates: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Exact,
    Dijkstra,
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<adaqec_core::Error> for Failure {
    fn from(e: adaqec_core::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, Failure> {
        let text = fs::read_to_string(&self.config)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", self.config.display())))?;
        let mut cfg = ExperimentConfig::from_json(&text).map_err(|e| Failure::Usage(e.to_string()))?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(b) = self.backend {
            cfg.backend = match b {
                BackendArg::Exact => Backend::Exact,
                BackendArg::Dijkstra => Backend::Dijkstra,
            };
        }
        if self.out.is_some() {
            cfg.out.clone_from(&self.out);
        }
        Ok(cfg)
    }
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_record(path: &Path) -> anyhow::Result<SyndromeRecord> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(SyndromeRecord::from_text(&text)?)
}

fn read_estimates(path: &Path) -> anyhow::Result<ClassEstimates> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ClassEstimates::from_json(&text)?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { common, rounds } => {
            let cfg = common.load()?;
            let schedule = cfg.schedule.to_schedule(cfg.d)?;
            let record = sample_trial(&schedule, rounds.unwrap_or(cfg.rounds_test), cfg.lag, cfg.seed, 0)
                ?;
            emit(cfg.out.as_deref(), &record.to_text())?;
        }
        Command::Estimate { common, input, window } => {
            let cfg = common.load()?;
            let record = read_record(&input)?;
            let mut acc = MomentAccumulator::new(record.d, record.lag, window)?;
            acc.accumulate_record(&record)?;
            let est_cfg = EstimatorConfig { z: cfg.z, ..EstimatorConfig::default() };
            let est = estimate_all(acc.counts(), &est_cfg)?;
            emit(cfg.out.as_deref(), &(est.to_json() + "\n"))?;
        }
        Command::Decode { common, input, estimates } => {
            let cfg = common.load()?;
            let record = read_record(&input)?;
            let model = match estimates {
                Some(path) => build_repetition_dem(record.d, record.rounds, record.lag, &read_estimates(&path)?),
                None => {
                    let schedule = cfg.schedule.to_schedule(record.d)?;
                    build_repetition_dem(record.d, record.rounds, record.lag, &schedule.window(0))
                }
            }
            ?;
            let table = weights_all(&model, cfg.backend)?;
            let result = decode(&record, &table)?;
            let problem = MatchingProblem::from_table(&table, &record.events())?;
            let text = format!(
                "{}predicted {}\ntrue {}\nsuccess {}\n",
                result.matching.to_text(&problem),
                u8::from(result.predicted_logical),
                u8::from(record.true_logical),
                u8::from(score(&record, &result))
            );
            emit(cfg.out.as_deref(), &text)?;
        }
        Command::ExpConvergence { common, repetitions } => {
            let mut cfg = common.load()?;
            if repetitions.is_some() {
                cfg.repetitions = repetitions;
            }
            let result = exp_convergence(&cfg)?;
            emit(cfg.out.as_deref(), &result.to_csv())?;
        }
        Command::ExpFluctuation { common, repetitions, window } => {
            let mut cfg = common.load()?;
            if repetitions.is_some() {
                cfg.repetitions = repetitions;
            }
            if !window.is_empty() {
                cfg.window = Some(OneOrMany::Many(window));
            }
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let result = exp_fluctuation(&cfg)?;
            emit(cfg.out.as_deref(), &result.to_csv())?;
        }
        Command::DumpDem { common, rounds, estimates } => {
            let cfg = common.load()?;
            let rounds = rounds.unwrap_or(cfg.rounds_test);
            let model = match estimates {
                Some(path) => build_repetition_dem(cfg.d, rounds, cfg.lag, &read_estimates(&path)?),
                None => {
                    let schedule = cfg.schedule.to_schedule(cfg.d)?;
                    build_repetition_dem(cfg.d, rounds, cfg.lag, &schedule.window(0))
                }
            }
            ?;
            emit(cfg.out.as_deref(), &model.to_text())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            eprintln!("\nconfig schema:\n{SCHEMA}");
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nconfig schema:\n{SCHEMA}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
