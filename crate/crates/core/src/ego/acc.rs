use serde::{Deserialize, Serialize};

use super::{EgoController, EgoObservation};
use crate::error::{BridgeError, Error, Result};
use crate::types::{kmh_to_ms, ActionBounds, VehicleAction, VehicleSpec};

/// Constant-time-gap adaptive cruise control parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AccConfig {
    /// Cruise speed (m/s).
    pub set_speed: f64,
    /// Time gap `h` (s).
    pub time_gap: f64,
    /// Standstill gap `d0` (m).
    pub standstill_gap: f64,
    /// Gap error gain `k1` (1/s^2).
    pub gain_gap: f64,
    /// Speed error gain `k2` (1/s).
    pub gain_speed: f64,
    /// A vehicle is a leader candidate only when its lateral offset is below this (m).
    pub lateral_activation_threshold: f64,
    pub accel_min: f64,
    pub accel_max: f64,
}

impl Default for AccConfig {
    fn default() -> Self {
        Self {
            set_speed: kmh_to_ms(70.0),
            time_gap: 1.8,
            standstill_gap: 2.0,
            gain_gap: 0.4,
            gain_speed: 0.8,
            lateral_activation_threshold: 1.2,
            accel_min: -3.0,
            accel_max: 2.0,
        }
    }
}

impl AccConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.time_gap > 0.0 && self.standstill_gap > 0.0 && self.lateral_activation_threshold > 0.0) {
            return Err(Error::config("ACC time gap, standstill gap and activation threshold must be positive"));
        }
        if !(self.accel_min < self.accel_max) {
            return Err(Error::config("ACC accel_min must be below accel_max"));
        }
        Ok(())
    }

    pub fn bounds(&self) -> ActionBounds {
        ActionBounds {
            accel_min: self.accel_min,
            accel_max: self.accel_max,
            steer_max: 0.0,
        }
    }

    /// The control law. `own` is the ego's own geometry, needed for the
    /// bumper gap.
    pub fn control(&self, obs: &EgoObservation, own: &VehicleSpec) -> VehicleAction {
        let me = &obs.own;
        let leader = obs
            .others
            .iter()
            .filter(|(s, _)| (s.y - me.y).abs() < self.lateral_activation_threshold && s.x - me.x > 0.0)
            .min_by(|a, b| a.0.x.total_cmp(&b.0.x));

        let accel = match leader {
            None => self.gain_speed * (self.set_speed - me.v),
            Some((lead, spec)) => {
                let gap = (lead.x - me.x) - 0.5 * (own.length + spec.length);
                let desired = self.standstill_gap + self.time_gap * me.v;
                self.gain_gap * (gap - desired) + self.gain_speed * (lead.v - me.v)
            }
        };
        VehicleAction::new(accel.clamp(self.accel_min, self.accel_max), 0.0)
    }
}

/// In-process ACC ego.
#[derive(Debug, Clone)]
pub struct AccController {
    cfg: AccConfig,
    own: VehicleSpec,
}

impl AccController {
    pub fn new(cfg: AccConfig, own: VehicleSpec) -> Self {
        Self { cfg, own }
    }
}

impl EgoController for AccController {
    fn control(&mut self, obs: &EgoObservation) -> Result<VehicleAction, BridgeError> {
        Ok(self.cfg.control(obs, &self.own))
    }
}
