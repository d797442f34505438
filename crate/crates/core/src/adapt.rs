//! Self-adaptive iteration of the cost coefficients between episodes.
//!
//! After each episode one coefficient is grown by its growth rate. The next
//! episode's score ratio against the previous one decides, through a
//! temperature-gated test, whether the change is kept (cooling the
//! temperature) or rolled back. The growth rate of the touched coefficient is
//! multiplied by `beta` when the ratio improved and divided by it otherwise.
//! Too many consecutive rejections end the iteration.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::CostCoefficients;
use crate::error::{Error, Result};
use crate::scoring::{score_pair, score_with, DiffSample, EpisodeScore, ScoringConfig};
use crate::types::{Specs, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptConfig {
    /// Cooling factor applied on acceptance, > 1.
    pub alpha: f64,
    /// Growth-rate factor, > 1.
    pub beta: f64,
    /// Acceptance scale `K`.
    pub k: f64,
    pub max_fails: u32,
    pub t0: f64,
    pub gamma0: [f64; 4],
    pub u0: [f64; 4],
}

impl Default for AdaptConfig {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            beta: 2.0,
            k: 0.1,
            max_fails: 5,
            t0: 1.0,
            gamma0: [0.5; 4],
            u0: [1.0, 0.03, 1.0, 0.1],
        }
    }
}

impl AdaptConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0 && self.beta > 1.0) {
            return Err(Error::config("alpha and beta must exceed 1"));
        }
        if !(self.k > 0.0 && self.t0 > 0.0) {
            return Err(Error::config("K and T0 must be positive"));
        }
        if self.gamma0.iter().any(|g| !(*g > 0.0)) {
            return Err(Error::config("initial growth rates must be positive"));
        }
        if self.u0.iter().any(|u| !(*u > 0.0 && u.is_finite())) {
            return Err(Error::config("initial coefficients must be positive"));
        }
        Ok(())
    }

    pub fn initial_state(&self) -> AdaptState {
        AdaptState {
            u: CostCoefficients(self.u0),
            gamma: self.gamma0,
            temperature: self.t0,
            n_prev: None,
            fails: 0,
            converged: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptState {
    pub u: CostCoefficients,
    pub gamma: [f64; 4],
    pub temperature: f64,
    /// Index (0-based) of the coefficient changed by the last proposal.
    pub n_prev: Option<usize>,
    pub fails: u32,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// No previous proposal to judge.
    Initial,
    Accepted,
    Rejected,
}

impl AdaptState {
    /// One pass of the iteration. `ratio` is ignored when there is no
    /// previous proposal.
    pub fn iterate<G: Rng + ?Sized>(&mut self, ratio: f64, cfg: &AdaptConfig, rng: &mut G) -> Outcome {
        debug_assert!(!self.converged);
        let mut outcome = Outcome::Initial;
        if let Some(n) = self.n_prev {
            if ratio > 1.0 {
                self.gamma[n] *= cfg.beta;
            } else {
                self.gamma[n] /= cfg.beta;
            }
            let threshold = ((ratio - 1.0) / (cfg.k * self.temperature)).exp();
            let draw: f64 = rng.random();
            if draw < threshold {
                self.temperature /= cfg.alpha;
                self.fails = 0;
                outcome = Outcome::Accepted;
            } else {
                self.fails += 1;
                self.u.0[n] /= 1.0 + self.gamma[n] * cfg.beta;
                outcome = Outcome::Rejected;
            }
        }
        if self.fails > cfg.max_fails {
            self.converged = true;
            return outcome;
        }
        let n = rng.random_range(0..self.u.0.len());
        self.u.0[n] *= 1.0 + self.gamma[n];
        self.n_prev = Some(n);
        outcome
    }
}

/// Functional form of [`AdaptState::iterate`].
pub fn coef_iterate<G: Rng + ?Sized>(state: &AdaptState, ratio: f64, cfg: &AdaptConfig, rng: &mut G) -> (AdaptState, Outcome) {
    let mut next = *state;
    let outcome = next.iterate(ratio, cfg, rng);
    (next, outcome)
}

/// One generated episode and what the iteration made of it.
#[derive(Debug, Clone)]
pub struct EpisodeLog<E> {
    pub index: usize,
    /// Coefficients the episode was generated with.
    pub u: CostCoefficients,
    pub result: E,
    /// Score under pooling with the previous episode (own sample for the first).
    pub pair_score: EpisodeScore,
    /// Ratio against the previous episode, absent for the first.
    pub ratio: Option<f64>,
    pub outcome: Outcome,
    /// Score under pooling over every episode of the run.
    pub pooled_score: EpisodeScore,
}

#[derive(Debug, Clone)]
pub struct Adaptation<E> {
    pub episodes: Vec<EpisodeLog<E>>,
    pub best: usize,
    pub state: AdaptState,
}

impl<E> Adaptation<E> {
    pub fn best_episode(&self) -> &EpisodeLog<E> {
        &self.episodes[self.best]
    }

    /// Number of episodes generated before the iteration converged, or all
    /// of them if it never did.
    pub fn episodes_used(&self) -> usize {
        self.episodes.len()
    }
}

/// Generates episodes until the iteration converges or `max_episodes` is
/// reached. `runner` receives the coefficients and the episode index.
pub fn run_adaptation<E, F, G>(
    cfg: &AdaptConfig,
    mut runner: F,
    max_episodes: usize,
    specs: &Specs,
    scoring: &ScoringConfig,
    rng: &mut G,
) -> Result<Adaptation<E>>
where
    E: AsRef<Trace>,
    F: FnMut(&CostCoefficients, usize) -> Result<E>,
    G: Rng + ?Sized,
{
    cfg.validate()?;
    if max_episodes == 0 {
        return Err(Error::config("max_episodes must be at least 1"));
    }
    let mut state = cfg.initial_state();
    let mut logs: Vec<EpisodeLog<E>> = Vec::new();

    for index in 0..max_episodes {
        let u = state.u;
        let result = runner(&u, index).map_err(|e| Error::Episode {
            index,
            source: Box::new(e),
        })?;
        let trace = result.as_ref();
        let (pair_score, ratio) = match logs.last() {
            None => {
                let own = DiffSample::from_traces([trace], specs).metric(scoring.lambda);
                (score_with(trace, &own, specs, scoring)?, None)
            }
            Some(prev) => {
                let (cur, before) = score_pair(trace, prev.result.as_ref(), specs, scoring)?;
                (cur, Some(cur.score / before.score))
            }
        };
        let outcome = if max_episodes == 1 {
            Outcome::Initial
        } else {
            state.iterate(ratio.unwrap_or(1.0), cfg, rng)
        };
        logs.push(EpisodeLog {
            index,
            u,
            result,
            pair_score,
            ratio,
            outcome,
            pooled_score: pair_score,
        });
        if state.converged {
            break;
        }
    }

    let pooled = DiffSample::from_traces(logs.iter().map(|l| l.result.as_ref()), specs).metric(scoring.lambda);
    for log in &mut logs {
        log.pooled_score = score_with(log.result.as_ref(), &pooled, specs, scoring)?;
    }
    let best = logs
        .iter()
        .enumerate()
        .fold(0, |best, (i, l)| if l.pooled_score.score > logs[best].pooled_score.score { i } else { best });
    Ok(Adaptation { episodes: logs, best, state })
}
