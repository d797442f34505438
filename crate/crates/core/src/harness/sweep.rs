//! Grid sweeps: one adaptation per (dV, dX, repetition), run on a worker
//! pool when the `parallel` feature is on.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::Config;
use super::run::{create_dir, run_adaptive, write_json, EgoSource, RunSummary};
use super::{derive_seed, plot, stats};
use crate::error::{Error, Result};
use crate::sim::Termination;

/// One planned adaptation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannedRun {
    pub cell: usize,
    pub dv: f64,
    pub dx: f64,
    pub rep: usize,
    pub seed: u64,
}

/// Random stream of repetition `rep` in cell `cell`.
pub fn run_stream(cell: usize, rep: usize) -> u64 {
    ((cell as u64) << 32) | rep as u64
}

/// Every run of the grid, ordered by (dV, dX, repetition).
pub fn plan(cfg: &Config) -> Result<Vec<PlannedRun>> {
    let sw = &cfg.sweep;
    sw.validate()?;
    let (dvs, dxs) = (sw.dv_values()?, sw.dx_values()?);
    let mut out = Vec::with_capacity(dvs.len() * dxs.len() * sw.mc_runs);
    for (i, &dv) in dvs.iter().enumerate() {
        for (j, &dx) in dxs.iter().enumerate() {
            let cell = i * dxs.len() + j;
            for rep in 0..sw.mc_runs {
                out.push(PlannedRun {
                    cell,
                    dv,
                    dx,
                    rep,
                    seed: derive_seed(sw.master_seed, run_stream(cell, rep)),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub dv: f64,
    pub dx: f64,
    pub run: usize,
    pub seed: u64,
    /// NaN when the run failed.
    pub best_score: f64,
    pub best_episode: Option<usize>,
    pub episodes_used: usize,
    pub converged: bool,
    pub first_critical_episode: Option<usize>,
    pub steps_used: usize,
    pub steps_to_best: usize,
    pub best_termination: Option<Termination>,
    pub best_min_gap: f64,
    pub error: Option<String>,
}

fn execute(cfg: &Config, ego: &EgoSource, p: &PlannedRun) -> SweepRun {
    let mut row = SweepRun {
        dv: p.dv,
        dx: p.dx,
        run: p.rep,
        seed: p.seed,
        best_score: f64::NAN,
        best_episode: None,
        episodes_used: 0,
        converged: false,
        first_critical_episode: None,
        steps_used: 0,
        steps_to_best: 0,
        best_termination: None,
        best_min_gap: f64::NAN,
        error: None,
    };
    match run_adaptive(cfg, p.dx, p.dv, p.seed, cfg.sweep.max_episodes, ego, "sweep") {
        Ok(run) => {
            let s = RunSummary::new(&run, p.dx, p.dv, p.seed, "sweep");
            let best = &s.episodes[s.best_episode];
            row.best_score = s.best_score;
            row.best_episode = Some(s.best_episode);
            row.episodes_used = s.episodes_used;
            row.converged = s.converged;
            row.first_critical_episode = s.first_critical_episode;
            row.steps_used = s.steps_used;
            row.steps_to_best = s.steps_to_best;
            row.best_termination = Some(best.termination);
            row.best_min_gap = best.min_gap;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Runs the grid one run after another.
pub fn sweep_runs_seq(cfg: &Config, ego: &EgoSource) -> Result<Vec<SweepRun>> {
    cfg.validate()?;
    Ok(plan(cfg)?.iter().map(|p| execute(cfg, ego, p)).collect())
}

/// Runs the grid on a pool of `jobs` workers (all cores when `None`).
#[cfg(feature = "parallel")]
pub fn sweep_runs_par(cfg: &Config, ego: &EgoSource, jobs: Option<usize>) -> Result<Vec<SweepRun>> {
    use rayon::prelude::*;

    cfg.validate()?;
    let planned = plan(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| planned.par_iter().map(|p| execute(cfg, ego, p)).collect()))
}

pub fn sweep_runs(cfg: &Config, ego: &EgoSource, jobs: Option<usize>) -> Result<Vec<SweepRun>> {
    if jobs == Some(0) {
        return Err(Error::config("--jobs must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    if jobs != Some(1) {
        return sweep_runs_par(cfg, ego, jobs);
    }
    sweep_runs_seq(cfg, ego)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub dv: f64,
    pub dx: f64,
    pub runs: usize,
    pub failures: usize,
    pub mean_best_score: f64,
    pub median_best_score: f64,
    pub mean_episodes_used: f64,
    pub mean_steps_used: f64,
    pub best_collisions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outlier {
    pub dv: f64,
    pub dx: f64,
    pub run: usize,
    pub best_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub master_seed: u64,
    pub mc_runs: usize,
    pub dv_values: Vec<f64>,
    pub dx_values: Vec<f64>,
    pub runs_total: usize,
    pub failures: usize,
    pub median_score: f64,
    pub mean_score: f64,
    pub min_cell_mean: f64,
    pub fences: (f64, f64),
    pub outliers: Vec<Outlier>,
    pub cells: Vec<CellStats>,
}

impl SweepSummary {
    pub fn new(cfg: &Config, runs: &[SweepRun]) -> Result<Self> {
        let (dvs, dxs) = (cfg.sweep.dv_values()?, cfg.sweep.dx_values()?);
        let mut cells = Vec::with_capacity(dvs.len() * dxs.len());
        for &dv in &dvs {
            for &dx in &dxs {
                let rs: Vec<&SweepRun> = runs.iter().filter(|r| r.dv == dv && r.dx == dx).collect();
                let ok: Vec<&SweepRun> = rs.iter().copied().filter(|r| r.error.is_none()).collect();
                let scores: Vec<f64> = ok.iter().map(|r| r.best_score).collect();
                cells.push(CellStats {
                    dv,
                    dx,
                    runs: rs.len(),
                    failures: rs.len() - ok.len(),
                    mean_best_score: stats::mean(&scores),
                    median_best_score: stats::median(&scores),
                    mean_episodes_used: stats::mean(&ok.iter().map(|r| r.episodes_used as f64).collect::<Vec<_>>()),
                    mean_steps_used: stats::mean(&ok.iter().map(|r| r.steps_used as f64).collect::<Vec<_>>()),
                    best_collisions: ok.iter().filter(|r| r.best_termination == Some(Termination::Collision)).count(),
                });
            }
        }
        let scores: Vec<f64> = runs.iter().filter(|r| r.error.is_none()).map(|r| r.best_score).collect();
        let fences = if scores.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            stats::tukey_fences(&scores)
        };
        let outliers = runs
            .iter()
            .filter(|r| r.error.is_none() && (r.best_score < fences.0 || r.best_score > fences.1))
            .map(|r| Outlier {
                dv: r.dv,
                dx: r.dx,
                run: r.run,
                best_score: r.best_score,
            })
            .collect();
        Ok(SweepSummary {
            master_seed: cfg.sweep.master_seed,
            mc_runs: cfg.sweep.mc_runs,
            dv_values: dvs,
            dx_values: dxs,
            runs_total: runs.len(),
            failures: runs.len() - scores.len(),
            median_score: stats::median(&scores),
            mean_score: stats::mean(&scores),
            min_cell_mean: cells.iter().map(|c| c.mean_best_score).fold(f64::INFINITY, f64::min),
            fences,
            outliers,
            cells,
        })
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::io(path, std::io::Error::other(e))
}

pub fn write_runs_csv(path: &Path, runs: &[SweepRun]) -> Result<()> {
    let err = csv_err(path);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(&err)?;
    w.write_record([
        "dv", "dx", "run", "seed", "best_score", "best_episode", "episodes_used", "converged", "first_critical_episode",
        "steps_used", "steps_to_best", "best_termination", "best_min_gap", "error",
    ])
    .map_err(&err)?;
    for r in runs {
        let term = r.best_termination.map(|t| serde_json::to_value(t).expect("enum").as_str().unwrap_or("").to_string());
        w.write_record([
            r.dv.to_string(),
            r.dx.to_string(),
            r.run.to_string(),
            r.seed.to_string(),
            r.best_score.to_string(),
            opt(r.best_episode),
            r.episodes_used.to_string(),
            r.converged.to_string(),
            opt(r.first_critical_episode),
            r.steps_used.to_string(),
            r.steps_to_best.to_string(),
            term.unwrap_or_default(),
            r.best_min_gap.to_string(),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_cells_csv(path: &Path, cells: &[CellStats]) -> Result<()> {
    let err = csv_err(path);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(&err)?;
    w.write_record([
        "dv", "dx", "runs", "failures", "mean_best_score", "median_best_score", "mean_episodes_used", "mean_steps_used",
        "best_collisions",
    ])
    .map_err(&err)?;
    for c in cells {
        w.write_record([
            c.dv.to_string(),
            c.dx.to_string(),
            c.runs.to_string(),
            c.failures.to_string(),
            c.mean_best_score.to_string(),
            c.median_best_score.to_string(),
            c.mean_episodes_used.to_string(),
            c.mean_steps_used.to_string(),
            c.best_collisions.to_string(),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_sweep(out: &Path, runs: &[SweepRun], summary: &SweepSummary) -> Result<()> {
    create_dir(out)?;
    write_runs_csv(&out.join("runs.csv"), runs)?;
    write_cells_csv(&out.join("cells.csv"), &summary.cells)?;
    write_json(&out.join("sweep_summary.json"), summary)?;
    let nx = summary.dx_values.len();
    let grid: Vec<Vec<f64>> = summary
        .cells
        .chunks(nx)
        .map(|row| row.iter().map(|c| c.mean_best_score).collect())
        .collect();
    plot::score_surface(&out.join("score_surface.svg"), &summary.dv_values, &summary.dx_values, &grid)?;
    let groups: Vec<(String, Vec<f64>)> = summary
        .dv_values
        .iter()
        .map(|&dv| {
            let xs = runs
                .iter()
                .filter(|r| r.dv == dv && r.error.is_none())
                .map(|r| r.best_score)
                .collect();
            (dv.to_string(), xs)
        })
        .collect();
    plot::score_boxplot(&out.join("score_boxplot.svg"), &groups)?;
    Ok(())
}

/// The `sweep` command.
pub fn cmd_sweep(cfg: &Config, ego: &EgoSource, jobs: Option<usize>, out: &Path) -> Result<SweepSummary> {
    let runs = sweep_runs(cfg, ego, jobs)?;
    let summary = SweepSummary::new(cfg, &runs)?;
    write_sweep(out, &runs, &summary)?;
    Ok(summary)
}
