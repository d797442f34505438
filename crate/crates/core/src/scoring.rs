//! Criticality scoring of finished traces.
//!
//! The deviation series of a trace is `agent - ideal` at every step. Its
//! Mahalanobis length under the (regularized) covariance of a pooled set of
//! deviation series measures how far the agent was from the ideal critical
//! state. A trace's critical moment is the step minimising
//! `(V_ego + M) / V_ego` under its own covariance; its score is
//! `V_ego / (V_ego + M)` at that moment under the pooled covariance.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::agent::ideal_state;
use crate::error::{Error, Result};
use crate::types::{Specs, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringConfig {
    /// Ridge added to the covariance diagonal.
    pub lambda: f64,
    /// Lower bound on the ego speed used in the ratios (m/s).
    pub v_floor: f64,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-6,
            v_floor: 0.1,
        }
    }
}

impl ScoringConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.v_floor > 0.0) {
            return Err(Error::config("scoring lambda and v_floor must be positive"));
        }
        Ok(())
    }
}

/// Per-step `agent - ideal` deviation of a trace.
pub fn diff_series(trace: &Trace, specs: &Specs) -> Vec<[f64; 4]> {
    trace
        .steps
        .iter()
        .map(|s| s.agent.diff(&ideal_state(&s.ego, specs)))
        .collect()
}

/// Pooled deviation vectors from one or more traces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiffSample {
    pub diffs: Vec<[f64; 4]>,
}

impl DiffSample {
    pub fn new(diffs: Vec<[f64; 4]>) -> Self {
        Self { diffs }
    }

    pub fn from_traces<'a>(traces: impl IntoIterator<Item = &'a Trace>, specs: &Specs) -> Self {
        Self {
            diffs: traces.into_iter().flat_map(|t| diff_series(t, specs)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.diffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diffs.is_empty()
    }

    /// Unbiased sample covariance; zero when fewer than two samples.
    pub fn covariance(&self) -> Matrix4<f64> {
        let n = self.diffs.len();
        if n < 2 {
            return Matrix4::zeros();
        }
        let mean = self
            .diffs
            .iter()
            .fold(Vector4::zeros(), |acc, d| acc + Vector4::from(*d))
            / n as f64;
        let scatter = self.diffs.iter().fold(Matrix4::zeros(), |acc, d| {
            let c = Vector4::from(*d) - mean;
            acc + c * c.transpose()
        });
        scatter / (n - 1) as f64
    }

    pub fn metric(&self, lambda: f64) -> Metric {
        let reg = self.covariance() + Matrix4::identity() * lambda;
        let precision = reg
            .cholesky()
            .map(|c| c.inverse())
            .or_else(|| reg.try_inverse())
            .unwrap_or_else(|| Matrix4::identity() / lambda);
        Metric { precision }
    }
}

/// Mahalanobis length under a fixed precision matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric {
    pub precision: Matrix4<f64>,
}

impl Metric {
    pub fn distance(&self, diff: &[f64; 4]) -> f64 {
        let d = Vector4::from(*diff);
        (d.transpose() * self.precision * d)[(0, 0)].max(0.0).sqrt()
    }
}

/// Mahalanobis length of `diff` under the covariance of `sample`.
pub fn mahalanobis(diff: &[f64; 4], sample: &DiffSample, cfg: &ScoringConfig) -> f64 {
    sample.metric(cfg.lambda).distance(diff)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeScore {
    pub episode_index: usize,
    /// Step index of the critical moment.
    pub critical_step: usize,
    pub t_c: f64,
    pub score: f64,
    /// Mahalanobis length at the critical moment under the pooled sample.
    pub distance: f64,
}

/// Step index and time of the critical moment; earliest on ties.
pub fn critical_time(trace: &Trace, specs: &Specs, cfg: &ScoringConfig) -> Result<(usize, f64)> {
    if trace.is_empty() {
        return Err(Error::InvalidTrace("cannot score an empty trace".into()));
    }
    let diffs = diff_series(trace, specs);
    let metric = DiffSample::new(diffs.clone()).metric(cfg.lambda);
    let mut best = (0, f64::INFINITY);
    for (i, (step, d)) in trace.steps.iter().zip(&diffs).enumerate() {
        let v = step.ego.v.max(cfg.v_floor);
        let ratio = (v + metric.distance(d)) / v;
        if ratio < best.1 {
            best = (i, ratio);
        }
    }
    Ok((best.0, trace.steps[best.0].t))
}

/// Score of `trace` with the distance measured against `pooled`.
pub fn score(trace: &Trace, pooled: &DiffSample, specs: &Specs, cfg: &ScoringConfig) -> Result<EpisodeScore> {
    let metric = pooled.metric(cfg.lambda);
    score_with(trace, &metric, specs, cfg)
}

pub fn score_with(trace: &Trace, pooled: &Metric, specs: &Specs, cfg: &ScoringConfig) -> Result<EpisodeScore> {
    let (critical_step, t_c) = critical_time(trace, specs, cfg)?;
    let step = &trace.steps[critical_step];
    let diff = step.agent.diff(&ideal_state(&step.ego, specs));
    let distance = pooled.distance(&diff);
    let v = step.ego.v.max(cfg.v_floor);
    Ok(EpisodeScore {
        episode_index: trace.episode_index,
        critical_step,
        t_c,
        score: v / (v + distance),
        distance,
    })
}

/// Scores of `current` and `previous` under their shared pooled sample.
pub fn score_pair(current: &Trace, previous: &Trace, specs: &Specs, cfg: &ScoringConfig) -> Result<(EpisodeScore, EpisodeScore)> {
    let metric = DiffSample::from_traces([current, previous], specs).metric(cfg.lambda);
    Ok((score_with(current, &metric, specs, cfg)?, score_with(previous, &metric, specs, cfg)?))
}

/// Ratio of the current to the previous score under shared pooling.
pub fn score_ratio(current: &Trace, previous: &Trace, specs: &Specs, cfg: &ScoringConfig) -> Result<f64> {
    let (cur, prev) = score_pair(current, previous, specs, cfg)?;
    Ok(cur.score / prev.score)
}
