//! Offline scoring of saved traces.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::trace_csv::load_trace;
use crate::error::{Error, Result};
use crate::scoring::{score_pair, score_with, DiffSample, EpisodeScore, ScoringConfig};
use crate::types::{Specs, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolMode {
    /// Covariance pooled over every given trace.
    Pooled,
    /// Each trace pooled with the one before it; the first with itself.
    Pairwise,
}

impl fmt::Display for PoolMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PoolMode::Pooled => "pooled",
            PoolMode::Pairwise => "pairwise",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTrace {
    pub mode: PoolMode,
    pub file: String,
    pub score: EpisodeScore,
}

pub fn score_traces(traces: &[Trace], mode: PoolMode, specs: &Specs, cfg: &ScoringConfig) -> Result<Vec<EpisodeScore>> {
    if traces.is_empty() {
        return Err(Error::config("no traces to score"));
    }
    match mode {
        PoolMode::Pooled => {
            let metric = DiffSample::from_traces(traces, specs).metric(cfg.lambda);
            traces.iter().map(|t| score_with(t, &metric, specs, cfg)).collect()
        }
        PoolMode::Pairwise => traces
            .iter()
            .enumerate()
            .map(|(i, t)| {
                if i == 0 {
                    let own = DiffSample::from_traces([t], specs).metric(cfg.lambda);
                    score_with(t, &own, specs, cfg)
                } else {
                    Ok(score_pair(t, &traces[i - 1], specs, cfg)?.0)
                }
            })
            .collect(),
    }
}

/// The `score` command: loads the files and scores them under each mode.
pub fn cmd_score(files: &[PathBuf], modes: &[PoolMode], specs: &Specs, cfg: &ScoringConfig) -> Result<Vec<ScoredTrace>> {
    if files.is_empty() {
        return Err(Error::config("score needs at least one trace file"));
    }
    let traces = files.iter().map(|f| load_trace(f)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for &mode in modes {
        for (file, score) in files.iter().zip(score_traces(&traces, mode, specs, cfg)?) {
            out.push(ScoredTrace {
                mode,
                file: file.display().to_string(),
                score,
            });
        }
    }
    Ok(out)
}

pub fn format_scores(rows: &[ScoredTrace]) -> String {
    let mut s = String::from("mode\tfile\tepisode\tcritical_step\tt_c\tdistance\tscore\n");
    for r in rows {
        s += &format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.mode, r.file, r.score.episode_index, r.score.critical_step, r.score.t_c, r.score.distance, r.score.score
        );
    }
    s
}

pub fn trace_files_in(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    Ok(files)
}
