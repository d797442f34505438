//! Closed-loop episode engine: observe, let the ego and the agent act,
//! advance both vehicles one fixed step, log, check termination.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::agent::{select_action, AgentConfig, CostCoefficients, Selection};
use crate::ego::{EgoController, EgoObservation};
use crate::error::{Error, Result};
use crate::geometry::Obb;
use crate::kinematics::{step, KinematicsConfig};
use crate::types::{bumper_gap, kmh_to_ms, ScenarioState, Specs, Trace, VehicleAction, VehicleState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    /// Initial longitudinal offset of the agent ahead of the ego (m).
    pub delta_x: f64,
    /// Initial agent speed minus ego speed (km/h).
    pub delta_v: f64,
    pub ego_initial: VehicleState,
    pub lane_width: f64,
    pub t_max: f64,
    /// Gap re-opening beyond the minimum that ends a completed cut-in (m).
    pub gap_done: f64,
    /// Lateral offset below which the cut-in counts as completed (m).
    pub cut_in_tolerance: f64,
    pub seed: u64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            delta_x: 15.0,
            delta_v: 10.0,
            ego_initial: VehicleState::new(0.0, 0.0, 0.0, kmh_to_ms(70.0)),
            lane_width: 3.5,
            t_max: 30.0,
            gap_done: 5.0,
            cut_in_tolerance: 0.5,
            seed: 0,
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self, kin: &KinematicsConfig) -> Result<()> {
        if !(self.delta_x > 0.0 && self.delta_x.is_finite()) {
            return Err(Error::config(format!(
                "delta_x must be positive (got {}): the agent has to start ahead",
                self.delta_x
            )));
        }
        if !self.delta_v.is_finite() || !self.ego_initial.is_finite() {
            return Err(Error::config("initial conditions must be finite"));
        }
        if !(self.t_max >= kin.step_size) {
            return Err(Error::config("t_max must be at least one step"));
        }
        if !(self.lane_width > 0.0 && self.gap_done > 0.0 && self.cut_in_tolerance > 0.0) {
            return Err(Error::config("lane_width, gap_done and cut_in_tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Collision,
    NearMissComplete,
    Timeout,
    EgoBridgeError,
}

#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub trace: Trace,
    pub termination: Termination,
    pub min_gap: f64,
    /// Trace index at which `min_gap` was first reached.
    pub min_gap_step: usize,
    pub steps_used: usize,
    /// Wall-clock seconds spent in the agent decision at each step.
    pub decision_latency: Vec<f64>,
    pub bridge_error: Option<String>,
}

impl AsRef<Trace> for EpisodeResult {
    fn as_ref(&self) -> &Trace {
        &self.trace
    }
}

/// Initial scenario: ego at its configured state, agent one lane to the left
/// `delta_x` ahead at `delta_v` relative speed, both headings zero.
pub fn init_scenario(cfg: &EpisodeConfig, kin: &KinematicsConfig) -> Result<ScenarioState> {
    cfg.validate(kin)?;
    let ego = cfg.ego_initial;
    let agent = VehicleState::new(
        ego.x + cfg.delta_x,
        ego.y + cfg.lane_width,
        0.0,
        ego.v + kmh_to_ms(cfg.delta_v),
    );
    Ok(ScenarioState {
        t: 0.0,
        ego,
        agent,
        ego_action: VehicleAction::ZERO,
        agent_action: VehicleAction::ZERO,
    })
}

/// Oriented-rectangle overlap of the two vehicle footprints.
pub fn detect_collision(ego: &VehicleState, agent: &VehicleState, specs: &Specs) -> bool {
    Obb::of(ego, &specs.ego).overlaps(&Obb::of(agent, &specs.agent))
}

/// Decides the agent's action each step. Sees the scenario state and an
/// estimate of the ego's current action, nothing of the ego controller.
pub trait AgentPolicy {
    fn decide(&mut self, now: &ScenarioState, ego_action_estimate: &VehicleAction) -> Selection;
}

/// The minimax planner as an [`AgentPolicy`].
#[derive(Debug, Clone)]
pub struct Planner<'a> {
    pub u: CostCoefficients,
    pub cfg: &'a AgentConfig,
    pub specs: &'a Specs,
    pub kin: &'a KinematicsConfig,
}

impl AgentPolicy for Planner<'_> {
    fn decide(&mut self, now: &ScenarioState, ego_action_estimate: &VehicleAction) -> Selection {
        // Inside a worker pool (sweeps) the outer loop already saturates it.
        #[cfg(feature = "parallel")]
        if rayon::current_thread_index().is_none() {
            return crate::agent::select_action_par(now, &self.u, self.cfg, self.specs, ego_action_estimate, self.kin);
        }
        select_action(now, &self.u, self.cfg, self.specs, ego_action_estimate, self.kin)
    }
}

/// Holds one action forever.
#[derive(Debug, Clone, Copy)]
pub struct ConstantPolicy(pub VehicleAction);

impl AgentPolicy for ConstantPolicy {
    fn decide(&mut self, _now: &ScenarioState, _ego: &VehicleAction) -> Selection {
        Selection {
            action: self.0,
            cost: 0.0,
            index: 0,
        }
    }
}

/// Ego action inferred from two consecutive observed states.
pub fn estimate_action(prev: &VehicleState, cur: &VehicleState, wheelbase: f64, dt: f64) -> VehicleAction {
    let accel = (cur.v - prev.v) / dt;
    let yaw_rate = (cur.yaw - prev.yaw) / dt;
    let steer = if prev.v > 0.0 {
        (yaw_rate * wheelbase / prev.v).atan()
    } else {
        0.0
    };
    VehicleAction::new(accel, steer)
}

pub fn run_episode(
    cfg: &EpisodeConfig,
    u: &CostCoefficients,
    ego: &mut dyn EgoController,
    agent_cfg: &AgentConfig,
    specs: &Specs,
    kin: &KinematicsConfig,
    config_id: &str,
    episode_index: usize,
) -> Result<EpisodeResult> {
    u.validate()?;
    agent_cfg.validate()?;
    let mut planner = Planner {
        u: *u,
        cfg: agent_cfg,
        specs,
        kin,
    };
    run_episode_with(cfg, ego, &mut planner, specs, kin, config_id, episode_index)
}

pub fn run_episode_with(
    cfg: &EpisodeConfig,
    ego: &mut dyn EgoController,
    agent: &mut dyn AgentPolicy,
    specs: &Specs,
    kin: &KinematicsConfig,
    config_id: &str,
    episode_index: usize,
) -> Result<EpisodeResult> {
    kin.validate()?;
    specs.validate()?;
    let mut now = init_scenario(cfg, kin)?;
    let dt = kin.step_size;
    let max_steps = ((cfg.t_max / dt) + 1e-9).floor() as usize;

    let mut trace = Trace::new(config_id, cfg.seed, episode_index);
    let mut latency = Vec::with_capacity(max_steps);
    let mut prev_ego = now.ego;
    let mut min_gap = bumper_gap(&now.ego, &now.agent, specs);
    let mut min_gap_step = 0;
    let mut cut_in_done = false;
    let mut bridge_error = None;

    let termination = if detect_collision(&now.ego, &now.agent, specs) {
        Termination::Collision
    } else {
        let mut k = 0;
        loop {
            let obs = EgoObservation {
                t: now.t,
                own: now.ego,
                others: vec![(now.agent, specs.agent)],
            };
            let ego_action = match ego.control(&obs) {
                Ok(a) => a,
                Err(e) => {
                    bridge_error = Some(e.to_string());
                    break Termination::EgoBridgeError;
                }
            };
            let ego_estimate = if k == 0 {
                VehicleAction::ZERO
            } else {
                estimate_action(&prev_ego, &now.ego, specs.ego.wheelbase, dt)
            };
            let started = Instant::now();
            let selection = agent.decide(&now, &ego_estimate);
            latency.push(started.elapsed().as_secs_f64());

            now.ego_action = ego_action;
            now.agent_action = selection.action;
            trace.push(now, selection.cost);

            prev_ego = now.ego;
            k += 1;
            now = ScenarioState {
                t: k as f64 * dt,
                ego: step(&now.ego, &ego_action, &specs.ego, dt, kin)?,
                agent: step(&now.agent, &selection.action, &specs.agent, dt, kin)?,
                ego_action: VehicleAction::ZERO,
                agent_action: VehicleAction::ZERO,
            };

            let gap = bumper_gap(&now.ego, &now.agent, specs);
            if gap < min_gap {
                min_gap = gap;
                min_gap_step = k;
            }
            if detect_collision(&now.ego, &now.agent, specs) {
                break Termination::Collision;
            }
            cut_in_done |= (now.agent.y - now.ego.y).abs() < cfg.cut_in_tolerance;
            if cut_in_done && gap > min_gap + cfg.gap_done {
                break Termination::NearMissComplete;
            }
            if k >= max_steps {
                break Termination::Timeout;
            }
        }
    };
    trace.push(now, f64::NAN);

    Ok(EpisodeResult {
        steps_used: trace.len() - 1,
        trace,
        termination,
        min_gap,
        min_gap_step,
        decision_latency: latency,
        bridge_error,
    })
}
