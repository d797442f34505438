//! Aggressive-driving planner for the agent vehicle.
//!
//! Every candidate action is held constant over each prediction horizon.
//! Its score is the worst (largest) cost over the horizons, where the cost
//! is the weighted squared distance from the ideal critical state plus a
//! flat penalty when the predicted state breaks a scenario requirement. The
//! candidate with the smallest score is driven.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Obb;
use crate::kinematics::{predict_horizons, KinematicsConfig};
use crate::types::{
    bumper_gap, kmh_to_ms, ScenarioState, Specs, StateOffset, VehicleAction, VehicleState,
};

/// Diagonal weights on the `[x, y, yaw, v]` deviation from the ideal state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostCoefficients(pub [f64; 4]);

impl Default for CostCoefficients {
    fn default() -> Self {
        CostCoefficients([1.0; 4])
    }
}

impl CostCoefficients {
    pub fn new(u: [f64; 4]) -> Result<Self> {
        let c = CostCoefficients(u);
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.iter().any(|u| !(u.is_finite() && *u >= 0.0)) {
            return Err(Error::config("cost coefficients must be finite and non-negative"));
        }
        if self.0.iter().all(|u| *u == 0.0) {
            return Err(Error::config("at least one cost coefficient must be positive"));
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        CostCoefficients(self.0.map(|u| u * c))
    }
}

/// Parameters of the violation set: predicted agent states outside these
/// limits are penalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Requirements {
    pub y_road_min: f64,
    pub y_road_max: f64,
    /// Legal speed limit (m/s).
    pub v_legal: f64,
    pub yaw_max: f64,
    /// Minimum bumper gap of the agent ahead of the ego (m).
    pub lead_min: f64,
}

impl Default for Requirements {
    fn default() -> Self {
        Self {
            y_road_min: -1.75,
            y_road_max: 5.25,
            v_legal: kmh_to_ms(120.0),
            yaw_max: 0.35,
            lead_min: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub accel_candidates: Vec<f64>,
    pub steer_candidates: Vec<f64>,
    pub horizons: Vec<f64>,
    pub kappa: f64,
    pub requirements: Requirements,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            accel_candidates: vec![-6.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0],
            steer_candidates: vec![-0.04, -0.02, -0.01, 0.0, 0.01, 0.02, 0.04],
            horizons: vec![0.5, 1.0, 1.5, 2.0],
            kappa: 1e6,
            requirements: Requirements::default(),
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.accel_candidates.is_empty() || self.steer_candidates.is_empty() {
            return Err(Error::config("candidate sets must be non-empty"));
        }
        if self.horizons.is_empty() || self.horizons.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(Error::config("horizons must be non-empty and positive"));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::config("kappa must be positive"));
        }
        let all_finite = self
            .accel_candidates
            .iter()
            .chain(&self.steer_candidates)
            .all(|c| c.is_finite());
        if !all_finite {
            return Err(Error::config("candidate actions must be finite"));
        }
        Ok(())
    }

    /// Candidate actions in enumeration order: acceleration-major.
    pub fn candidates(&self) -> Vec<VehicleAction> {
        self.accel_candidates
            .iter()
            .flat_map(|&a| self.steer_candidates.iter().map(move |&s| VehicleAction::new(a, s)))
            .collect()
    }
}

/// The agent state that realises perfect criticality: the ego state shifted
/// forward by the contact distance.
pub fn ideal_state(ego_state: &VehicleState, specs: &Specs) -> VehicleState {
    ego_state.offset(StateOffset::longitudinal(specs.contact_distance()))
}

/// Weighted squared deviation of `pred_agent` from `pred_ideal`.
pub fn cost_j1(pred_agent: &VehicleState, pred_ideal: &VehicleState, u: &CostCoefficients) -> f64 {
    let d = pred_agent.diff(pred_ideal);
    u.0.iter().zip(d).map(|(w, dk)| w * dk * dk).sum()
}

/// Which requirements a predicted agent state breaks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Violations {
    pub off_road: bool,
    pub over_speed: bool,
    pub heading: bool,
    pub no_lead: bool,
    pub collision: bool,
}

impl Violations {
    pub fn any(&self) -> bool {
        self.off_road || self.over_speed || self.heading || self.no_lead || self.collision
    }
}

pub fn violations(pred_agent: &VehicleState, pred_ego: &VehicleState, req: &Requirements, specs: &Specs) -> Violations {
    Violations {
        off_road: pred_agent.y < req.y_road_min || pred_agent.y > req.y_road_max,
        over_speed: pred_agent.v > req.v_legal,
        heading: pred_agent.yaw.abs() > req.yaw_max,
        no_lead: bumper_gap(pred_ego, pred_agent, specs) < req.lead_min,
        collision: Obb::of(pred_agent, &specs.agent).overlaps(&Obb::of(pred_ego, &specs.ego)),
    }
}

/// `kappa` when the predicted agent state is in the violation set, else 0.
pub fn cost_j2(pred_agent: &VehicleState, pred_ego: &VehicleState, cfg: &AgentConfig, specs: &Specs) -> f64 {
    if violations(pred_agent, pred_ego, &cfg.requirements, specs).any() {
        cfg.kappa
    } else {
        0.0
    }
}

/// The chosen action and its minimax cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub action: VehicleAction,
    pub cost: f64,
    pub index: usize,
}

/// Ego predictions shared by every candidate at one decision step.
struct EgoForecast {
    ego: Vec<VehicleState>,
    ideal: Vec<VehicleState>,
}

impl EgoForecast {
    fn new(now: &ScenarioState, ego_action: &VehicleAction, cfg: &AgentConfig, specs: &Specs, kin: &KinematicsConfig) -> Self {
        let mut ego = Vec::with_capacity(cfg.horizons.len());
        predict_horizons(&now.ego, ego_action, &specs.ego, &cfg.horizons, kin, &mut ego);
        let ideal = ego.iter().map(|e| ideal_state(e, specs)).collect();
        Self { ego, ideal }
    }

    fn candidate_cost(
        &self,
        agent: &VehicleState,
        zeta: &VehicleAction,
        u: &CostCoefficients,
        cfg: &AgentConfig,
        specs: &Specs,
        kin: &KinematicsConfig,
        buf: &mut Vec<VehicleState>,
    ) -> f64 {
        predict_horizons(agent, zeta, &specs.agent, &cfg.horizons, kin, buf);
        buf.iter()
            .zip(self.ego.iter().zip(&self.ideal))
            .map(|(a, (e, idl))| cost_j1(a, idl, u) + cost_j2(a, e, cfg, specs))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Total order used to pick among candidates: cost, then `|steer|`, then
/// `|accel|`, then enumeration index.
fn better(a: &Selection, b: &Selection) -> bool {
    a.cost
        .total_cmp(&b.cost)
        .then(a.action.steer.abs().total_cmp(&b.action.steer.abs()))
        .then(a.action.accel.abs().total_cmp(&b.action.accel.abs()))
        .then(a.index.cmp(&b.index))
        .is_lt()
}

fn pick(scored: impl Iterator<Item = Selection>) -> Selection {
    scored
        .reduce(|best, s| if better(&s, &best) { s } else { best })
        .expect("candidate set is non-empty")
}

/// Minimax action selection. `ego_action_now` is the ego action held
/// constant over the prediction horizons.
pub fn select_action(
    now: &ScenarioState,
    u: &CostCoefficients,
    cfg: &AgentConfig,
    specs: &Specs,
    ego_action_now: &VehicleAction,
    kin: &KinematicsConfig,
) -> Selection {
    let forecast = EgoForecast::new(now, ego_action_now, cfg, specs, kin);
    let mut buf = Vec::with_capacity(cfg.horizons.len());
    let mut index = 0;
    let scored = cfg.accel_candidates.iter().flat_map(|&a| {
        cfg.steer_candidates.iter().map(move |&s| VehicleAction::new(a, s))
    });
    pick(scored.map(|action| {
        let cost = forecast.candidate_cost(&now.agent, &action, u, cfg, specs, kin, &mut buf);
        index += 1;
        Selection { action, cost, index: index - 1 }
    }))
}

/// Same result as [`select_action`], with candidates scored on the rayon pool.
#[cfg(feature = "parallel")]
pub fn select_action_par(
    now: &ScenarioState,
    u: &CostCoefficients,
    cfg: &AgentConfig,
    specs: &Specs,
    ego_action_now: &VehicleAction,
    kin: &KinematicsConfig,
) -> Selection {
    use rayon::prelude::*;

    let forecast = EgoForecast::new(now, ego_action_now, cfg, specs, kin);
    let candidates = cfg.candidates();
    let costs: Vec<f64> = candidates
        .par_iter()
        .map_init(
            || Vec::with_capacity(cfg.horizons.len()),
            |buf, action| forecast.candidate_cost(&now.agent, action, u, cfg, specs, kin, buf),
        )
        .collect();
    pick(
        candidates
            .into_iter()
            .zip(costs)
            .enumerate()
            .map(|(index, (action, cost))| Selection { action, cost, index }),
    )
}
