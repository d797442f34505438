//! One adaptation run for a single initial condition, its summary and its
//! files on disk.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::Config;
use super::{plot, stats, trace_csv};
use crate::adapt::{run_adaptation, Adaptation, Outcome};
use crate::ego::{AccController, EgoController, ExternalEgo};
use crate::error::{Error, Result};
use crate::sim::{run_episode, EpisodeConfig, EpisodeResult, Termination};

/// Pairwise score from which an episode counts as a usable critical scenario.
pub const CRITICAL_SCORE: f64 = 0.9;

/// Where the ego's actions come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EgoSource {
    /// The built-in adaptive cruise controller.
    Acc,
    /// A controller process speaking the bridge protocol, one per episode.
    External(String),
}

impl EgoSource {
    pub fn connect(&self, cfg: &Config) -> Result<Box<dyn EgoController>> {
        Ok(match self {
            EgoSource::Acc => Box::new(AccController::new(cfg.acc, cfg.vehicles.ego)),
            EgoSource::External(cmd) => Box::new(ExternalEgo::spawn(cmd, cfg.bridge)?),
        })
    }
}

/// Runs the coefficient adaptation for one `(dx, dv)` cell.
pub fn run_adaptive(
    cfg: &Config,
    dx: f64,
    dv: f64,
    seed: u64,
    max_episodes: usize,
    ego: &EgoSource,
    config_id: &str,
) -> Result<Adaptation<EpisodeResult>> {
    let episode = EpisodeConfig {
        delta_x: dx,
        delta_v: dv,
        seed,
        ..cfg.episode
    };
    episode.validate(&cfg.kinematics)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_adaptation(
        &cfg.adapt,
        |u, index| {
            let mut controller = ego.connect(cfg)?;
            let r = run_episode(&episode, u, controller.as_mut(), &cfg.agent, &cfg.vehicles, &cfg.kinematics, config_id, index)?;
            if r.termination == Termination::EgoBridgeError {
                return Err(Error::BridgeAborted {
                    episode: index,
                    msg: r.bridge_error.clone().unwrap_or_default(),
                });
            }
            Ok(r)
        },
        max_episodes,
        &cfg.vehicles,
        &cfg.scoring,
        &mut rng,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub index: usize,
    pub u: [f64; 4],
    pub termination: Termination,
    pub min_gap: f64,
    pub min_gap_step: usize,
    pub steps_used: usize,
    /// Score pooled with the previous episode (own sample for the first).
    pub pair_score: f64,
    pub ratio: Option<f64>,
    pub outcome: Outcome,
    /// Score pooled over every episode of the run.
    pub pooled_score: f64,
    pub critical_step: usize,
    pub t_c: f64,
    pub latency_mean_ms: f64,
    pub latency_p99_ms: f64,
    pub trace_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config_id: String,
    pub delta_x: f64,
    pub delta_v: f64,
    pub seed: u64,
    pub episodes_used: usize,
    pub converged: bool,
    /// Last episode when the iteration converged.
    pub convergence_episode: Option<usize>,
    pub best_episode: usize,
    pub best_score: f64,
    pub critical_threshold: f64,
    /// First episode whose pairwise score reaches `critical_threshold`.
    pub first_critical_episode: Option<usize>,
    /// Simulation steps over all episodes.
    pub steps_used: usize,
    /// Simulation steps up to and including the best episode.
    pub steps_to_best: usize,
    pub latency_mean_ms: f64,
    pub latency_p99_ms: f64,
    pub final_u: [f64; 4],
    pub episodes: Vec<EpisodeSummary>,
}

pub fn trace_file_name(index: usize) -> String {
    format!("episode_{index:03}.csv")
}

fn ms(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|s| s * 1e3).collect()
}

impl RunSummary {
    pub fn new(run: &Adaptation<EpisodeResult>, dx: f64, dv: f64, seed: u64, config_id: &str) -> Self {
        let episodes: Vec<EpisodeSummary> = run
            .episodes
            .iter()
            .map(|l| {
                let lat = ms(&l.result.decision_latency);
                EpisodeSummary {
                    index: l.index,
                    u: l.u.0,
                    termination: l.result.termination,
                    min_gap: l.result.min_gap,
                    min_gap_step: l.result.min_gap_step,
                    steps_used: l.result.steps_used,
                    pair_score: l.pair_score.score,
                    ratio: l.ratio,
                    outcome: l.outcome,
                    pooled_score: l.pooled_score.score,
                    critical_step: l.pooled_score.critical_step,
                    t_c: l.pooled_score.t_c,
                    latency_mean_ms: stats::mean(&lat),
                    latency_p99_ms: stats::percentile(&lat, 99),
                    trace_file: trace_file_name(l.index),
                }
            })
            .collect();
        let all_lat: Vec<f64> = run.episodes.iter().flat_map(|l| ms(&l.result.decision_latency)).collect();
        let best = run.best_episode();
        RunSummary {
            config_id: config_id.to_string(),
            delta_x: dx,
            delta_v: dv,
            seed,
            episodes_used: run.episodes_used(),
            converged: run.state.converged,
            convergence_episode: run.state.converged.then(|| run.episodes.len() - 1),
            best_episode: best.index,
            best_score: best.pooled_score.score,
            critical_threshold: CRITICAL_SCORE,
            first_critical_episode: run
                .episodes
                .iter()
                .find(|l| l.pair_score.score >= CRITICAL_SCORE)
                .map(|l| l.index),
            steps_used: episodes.iter().map(|e| e.steps_used).sum(),
            steps_to_best: episodes[..=best.index].iter().map(|e| e.steps_used).sum(),
            latency_mean_ms: stats::mean(&all_lat),
            latency_p99_ms: stats::percentile(&all_lat, 99),
            final_u: run.state.u.0,
            episodes,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("summary serializes") + "\n";
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Writes every episode trace, the summary JSON and the gap and speed plots
/// of the best episode under `out`.
pub fn write_run(out: &Path, run: &Adaptation<EpisodeResult>, summary: &RunSummary, cfg: &Config) -> Result<()> {
    let traces = out.join("traces");
    create_dir(&traces)?;
    for l in &run.episodes {
        trace_csv::save_trace(&traces.join(trace_file_name(l.index)), &l.result.trace, &cfg.vehicles)?;
    }
    write_json(&out.join("run_summary.json"), summary)?;
    let best = &run.best_episode().result.trace;
    plot::gap_plot(&out.join("gap.svg"), best, &cfg.vehicles)?;
    plot::velocity_plot(&out.join("velocity.svg"), best)?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct RunRequest {
    pub dx: f64,
    pub dv: f64,
    pub seed: u64,
    pub max_episodes: usize,
    pub ego: EgoSource,
    pub config_id: String,
}

impl RunRequest {
    pub fn from_config(cfg: &Config) -> Self {
        Self {
            dx: cfg.episode.delta_x,
            dv: cfg.episode.delta_v,
            seed: cfg.run.seed,
            max_episodes: cfg.run.max_episodes,
            ego: EgoSource::Acc,
            config_id: "default".into(),
        }
    }
}

/// The `run` command: adaptation plus artifacts.
pub fn cmd_run(cfg: &Config, req: &RunRequest, out: &Path) -> Result<RunSummary> {
    cfg.validate()?;
    let run = run_adaptive(cfg, req.dx, req.dv, req.seed, req.max_episodes, &req.ego, &req.config_id)?;
    let summary = RunSummary::new(&run, req.dx, req.dv, req.seed, &req.config_id);
    create_dir(out)?;
    write_run(out, &run, &summary, cfg)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_run_summary_is_consistent() {
        let cfg = Config::default();
        let run = run_adaptive(&cfg, 12.0, 0.0, 3, 3, &EgoSource::Acc, "t").unwrap();
        let s = RunSummary::new(&run, 12.0, 0.0, 3, "t");
        assert_eq!(s.episodes.len(), run.episodes.len());
        assert_eq!(s.steps_used, s.episodes.iter().map(|e| e.steps_used).sum::<usize>());
        assert!(s.steps_to_best <= s.steps_used);
        assert!(s.best_score > 0.0 && s.best_score <= 1.0);
        assert!(s.episodes.iter().all(|e| e.pooled_score <= s.best_score));
        assert_eq!(s.episodes[0].ratio, None);
        assert!(s.latency_mean_ms >= 0.0);
    }

    #[test]
    fn rejects_agent_behind() {
        let cfg = Config::default();
        let err = run_adaptive(&cfg, 0.0, 0.0, 0, 2, &EgoSource::Acc, "t").unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn missing_controller_is_a_bridge_error() {
        let cfg = Config::default();
        let ego = EgoSource::External("exit 0".into());
        let err = run_adaptive(&cfg, 12.0, 0.0, 0, 2, &ego, "t").unwrap_err();
        assert_eq!(err.exit_code(), 2, "{err}");
    }
}
