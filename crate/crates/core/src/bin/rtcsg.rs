//! `rtcsg run|sweep|score`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rtcsg::error::Result;
use rtcsg::harness::score::{format_scores, trace_files_in};
use rtcsg::harness::{cmd_run, cmd_score, cmd_sweep, Config, EgoSource, PoolMode, RunRequest};

#[derive(Parser)]
#[command(name = "rtcsg", version, about = "Adaptive cut-in scenario generation against an ego controller")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Adapt the agent for one initial condition.
    Run(RunArgs),
    /// Repeat the adaptation over a grid of initial conditions.
    Sweep(SweepArgs),
    /// Recompute scores of saved trace files.
    Score(ScoreArgs),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// External ego controller, run through `sh -c` once per episode.
    #[arg(long)]
    ego_cmd: Option<String>,
}

impl Common {
    fn load(&self) -> Result<Config> {
        match &self.config {
            Some(p) => Config::load(p),
            None => Ok(Config::default()),
        }
    }

    fn ego(&self) -> EgoSource {
        match &self.ego_cmd {
            Some(c) => EgoSource::External(c.clone()),
            None => EgoSource::Acc,
        }
    }

    fn config_id(&self) -> String {
        self.config
            .as_ref()
            .and_then(|p| p.file_stem())
            .map_or("default".into(), |s| s.to_string_lossy().into_owned())
    }
}

#[derive(Args)]
struct RunArgs {
    /// Initial longitudinal offset of the agent (m).
    #[arg(long, allow_hyphen_values = true)]
    dx: Option<f64>,
    /// Initial speed of the agent relative to the ego (km/h).
    #[arg(long, allow_hyphen_values = true)]
    dv: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Episode budget.
    #[arg(long)]
    episodes: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Episode budget per adaptation.
    #[arg(long)]
    episodes: Option<usize>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Pooled,
    Pairwise,
    Both,
}

#[derive(Args)]
struct ScoreArgs {
    /// Trace files, or directories holding them.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "pooled")]
    mode: ModeArg,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(a) => {
            let cfg = a.common.load()?;
            let mut req = RunRequest::from_config(&cfg);
            req.dx = a.dx.unwrap_or(req.dx);
            req.dv = a.dv.unwrap_or(req.dv);
            req.seed = a.seed.unwrap_or(req.seed);
            req.max_episodes = a.episodes.unwrap_or(req.max_episodes);
            req.ego = a.common.ego();
            req.config_id = a.common.config_id();
            let out = a.common.out.clone().unwrap_or_else(|| "out/run".into());
            let s = cmd_run(&cfg, &req, &out)?;
            println!(
                "best episode {} score {:.4} after {} episodes (converged: {}); summary in {}",
                s.best_episode,
                s.best_score,
                s.episodes_used,
                s.converged,
                out.join("run_summary.json").display()
            );
        }
        Command::Sweep(a) => {
            let mut cfg = a.common.load()?;
            cfg.sweep.master_seed = a.seed.unwrap_or(cfg.sweep.master_seed);
            cfg.sweep.max_episodes = a.episodes.unwrap_or(cfg.sweep.max_episodes);
            let out = a.common.out.clone().unwrap_or_else(|| "out/sweep".into());
            let s = cmd_sweep(&cfg, &a.common.ego(), a.jobs, &out)?;
            println!(
                "{} runs, {} failed; median best score {:.4}, {} outliers; summary in {}",
                s.runs_total,
                s.failures,
                s.median_score,
                s.outliers.len(),
                out.join("sweep_summary.json").display()
            );
        }
        Command::Score(a) => {
            let cfg = match &a.config {
                Some(p) => Config::load(p)?,
                None => Config::default(),
            };
            let mut files = Vec::new();
            for f in &a.files {
                if f.is_dir() {
                    files.extend(trace_files_in(f)?);
                } else {
                    files.push(f.clone());
                }
            }
            let modes: &[PoolMode] = match a.mode {
                ModeArg::Pooled => &[PoolMode::Pooled],
                ModeArg::Pairwise => &[PoolMode::Pairwise],
                ModeArg::Both => &[PoolMode::Pooled, PoolMode::Pairwise],
            };
            let rows = cmd_score(&files, modes, &cfg.vehicles, &cfg.scoring)?;
            print!("{}", format_scores(&rows));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rtcsg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
