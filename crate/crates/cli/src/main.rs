//! `definetti`: reproducible experiments on exchangeable qubit priors.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 zero evidence,
//! 4 numerical invariant violation.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use definetti_core::bayes::{self, TrajectoryPlan};
use definetti_core::definetti::{self, MomentSummary};
use definetti_core::discord::{self, DiscordReport, MeasurementAxis};
use definetti_core::linalg::Vec3;
use definetti_core::priors::ParticleEnsemble;
use definetti_core::rng::RNG_ALGORITHM;
use definetti_core::state::{DensityMatrix, Subsystem};
use serde::Serialize;

use config::ExperimentConfig;
use output::OutputDir;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("zero evidence: the observed data are impossible under every particle of the prior")]
    ZeroEvidence,
    #[error("numerical invariant violated: {0}")]
    Numerical(definetti_core::Error),
    #[error("i/o error on {path}: {1}", path = .0.display())]
    Io(PathBuf, std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(..) => 1,
            CliError::Config(_) => 2,
            CliError::ZeroEvidence => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<definetti_core::Error> for CliError {
    fn from(e: definetti_core::Error) -> Self {
        match e {
            definetti_core::Error::ZeroEvidence => CliError::ZeroEvidence,
            other => CliError::Numerical(other),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "definetti", version, about = "Discord of de Finetti states and Bayesian qubit tomography")]
struct Cli {
    /// Experiment configuration (JSON, `"schema": 1`).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Replace every seed in the configuration.
    #[arg(long, global = true, value_name = "U64")]
    seed_override: Option<u64>,
    /// Worker threads (changes speed, never output bytes).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Prior moments, correlation matrix and rank test.
    Moments,
    /// Discord report for the prior's two-copy state.
    Discord,
    /// Simulated sequential Bayesian tomography.
    Tomo,
    /// Dump the N-copy de Finetti state of the prior.
    Definetti,
    /// Distance from invariance under local dephasing.
    Zerotest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Moments => "moments",
            Command::Discord => "discord",
            Command::Tomo => "tomo",
            Command::Definetti => "definetti",
            Command::Zerotest => "zerotest",
        }
    }
}

#[derive(Serialize)]
struct MomentsBody<'a> {
    particle_count: usize,
    #[serde(flatten)]
    moments: &'a MomentSummary,
}

#[derive(Serialize)]
struct RankBody {
    tolerance: f64,
    rank_tau: usize,
    rank_r: usize,
    flags_nonzero_discord: bool,
}

#[derive(Serialize)]
struct DiscordBody<'a> {
    source: &'static str,
    #[serde(flatten)]
    report: &'a DiscordReport,
}

#[derive(Serialize)]
struct PosteriorBody<'a> {
    rng: &'static str,
    resample_threshold: Option<f64>,
    measured_copies: u64,
    ensemble_size: u64,
    log_evidence: f64,
    ess: f64,
    posterior: &'a ParticleEnsemble,
}

#[derive(Serialize)]
struct RhoNBody<'a> {
    copies: usize,
    state: &'a DensityMatrix,
}

#[derive(Serialize)]
struct ZeroTestBody {
    source: &'static str,
    side: Subsystem,
    residual: f64,
    best_axis: MeasurementAxis,
    grid_size: usize,
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("`--config PATH` is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed_override {
        cfg.override_seeds(seed);
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("`--threads` must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("`--threads`: {e}")))?;
    }
    let out = OutputDir::create(&cli.out, cfg.hash(), cli.command.name())?;
    let prior = cfg.build_prior()?;

    match cli.command {
        Command::Moments => {
            let m = definetti::moments(&prior);
            let rank = definetti::rank_test(&m, cfg.rank_tolerance)?;
            out.json("moments.json", &MomentsBody { particle_count: prior.len(), moments: &m })?;
            out.json("correlation.json", &definetti::correlation_matrix(&m))?;
            out.json(
                "rank_test.json",
                &RankBody {
                    tolerance: cfg.rank_tolerance,
                    rank_tau: rank.rank_tau,
                    rank_r: rank.rank_r,
                    flags_nonzero_discord: rank.flags_nonzero_discord,
                },
            )?;
            Ok(format!(
                "rank_tau={} rank_r={} flags_nonzero_discord={}",
                rank.rank_tau, rank.rank_r, rank.flags_nonzero_discord
            ))
        }
        Command::Discord => {
            let report = discord::discord_report(&definetti::moments(&prior), &cfg.discord)?;
            out.json("discord.json", &DiscordBody { source: "prior", report: &report })?;
            Ok(format!("geometric_discord={}", report.geometric_closed))
        }
        Command::Tomo => {
            let plan = TrajectoryPlan {
                schedule: cfg.measurement_schedule()?,
                steps: cfg.steps,
                seed: cfg.require_seed()?,
                resample_threshold: cfg.resample_threshold,
            };
            let truth = cfg.require_true_state()?;
            let run = bayes::run_tomography(&prior, &truth, &plan, cfg.remaining_copies)?;
            let last = run.trajectory.last().expect("trajectory includes the prior row");
            out.csv("trajectory.csv", |w| bayes::write_trajectory_csv(&run.trajectory, w))?;
            out.json("record.json", &run.record)?;
            out.json(
                "posterior.json",
                &PosteriorBody {
                    rng: RNG_ALGORITHM,
                    resample_threshold: plan.resample_threshold,
                    measured_copies: run.record.total_shots(),
                    ensemble_size: run.ensemble_size,
                    log_evidence: last.log_evidence,
                    ess: run.posterior.effective_sample_size(),
                    posterior: &run.posterior,
                },
            )?;
            let report = discord::discord_report(&definetti::moments(&run.posterior), &cfg.discord)?;
            out.json("discord.json", &DiscordBody { source: "posterior", report: &report })?;
            Ok(format!("steps={} final_geometric_discord={}", plan.steps, last.geom_discord))
        }
        Command::Definetti => {
            let state = definetti::rho_n(&prior, cfg.copies)?;
            out.json("rho_n.json", &RhoNBody { copies: cfg.copies, state: &state })?;
            Ok(format!("copies={} dim={}", cfg.copies, state.dim()))
        }
        Command::Zerotest => {
            let (source, state) = match &cfg.zerotest.state {
                Some(s) => ("config", s.clone()),
                None => ("prior", definetti::rho2(&definetti::moments(&prior))?),
            };
            let grid_size = cfg.discord.grid_size;
            let r = discord::zero_discord_residual(&state, cfg.zerotest.side, &discord::residual_search(grid_size))?;
            let best: Vec3 = r.best_axis.vector();
            out.json(
                "zerotest.json",
                &ZeroTestBody { source, side: cfg.zerotest.side, residual: r.residual, best_axis: r.best_axis, grid_size },
            )?;
            Ok(format!("residual={} best_axis={best:?}", r.residual))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            println!("{}: {summary}", cli.command.name());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
