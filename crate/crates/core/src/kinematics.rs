//! Kinematic bicycle model: the one-step state transition used to advance
//! simulated vehicles, and the constant-action forward prediction used by
//! the agent's planner.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{VehicleAction, VehicleSpec, VehicleState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KinematicsConfig {
    /// Simulation step `epsilon` (s).
    pub step_size: f64,
    /// Integration step used by [`predict`] (s).
    pub predict_substep: f64,
    /// Upper speed clamp (m/s). The lower clamp is always 0.
    pub v_max: f64,
}

impl Default for KinematicsConfig {
    fn default() -> Self {
        Self {
            step_size: 0.05,
            predict_substep: 0.05,
            v_max: 50.0,
        }
    }
}

impl KinematicsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::config("step_size must be positive"));
        }
        if !(self.predict_substep > 0.0 && self.predict_substep <= self.step_size) {
            return Err(Error::config("predict_substep must lie in (0, step_size]"));
        }
        if !(self.v_max > 0.0) {
            return Err(Error::config("v_max must be positive"));
        }
        Ok(())
    }
}

/// Forward-Euler update, derivatives taken at the pre-step state.
#[inline]
fn advance(s: &VehicleState, a: &VehicleAction, wheelbase: f64, v_max: f64, dt: f64) -> VehicleState {
    let (sin, cos) = s.yaw.sin_cos();
    VehicleState {
        x: s.x + s.v * cos * dt,
        y: s.y + s.v * sin * dt,
        yaw: s.yaw + s.v / wheelbase * a.steer.tan() * dt,
        v: (s.v + a.accel * dt).clamp(0.0, v_max),
    }
}

/// Advance one vehicle by `dt` seconds under action `a`.
pub fn step(
    s: &VehicleState,
    a: &VehicleAction,
    spec: &VehicleSpec,
    dt: f64,
    cfg: &KinematicsConfig,
) -> Result<VehicleState> {
    if !s.is_finite() {
        return Err(Error::NonFinite("vehicle state"));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("vehicle action"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::NonFinite("step duration"));
    }
    Ok(advance(s, a, spec.wheelbase, cfg.v_max, dt))
}

/// Splits a horizon into whole substeps plus a truncated remainder.
/// Horizons within 1e-9 substeps of a whole multiple count as exact.
pub fn substep_split(tau: f64, substep: f64) -> (usize, f64) {
    let q = tau / substep;
    let n = q.round();
    if (q - n).abs() < 1e-9 {
        (n as usize, 0.0)
    } else {
        let n = q.floor();
        (n as usize, tau - n * substep)
    }
}

/// State after holding `a` for `tau` seconds, integrated at
/// `cfg.predict_substep` with the last substep truncated to land on `tau`.
pub fn predict(
    s: &VehicleState,
    a: &VehicleAction,
    spec: &VehicleSpec,
    tau: f64,
    cfg: &KinematicsConfig,
) -> Result<VehicleState> {
    if !s.is_finite() || !a.is_finite() {
        return Err(Error::NonFinite("prediction input"));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::NonFinite("prediction horizon"));
    }
    let (n, rem) = substep_split(tau, cfg.predict_substep);
    let mut cur = *s;
    for _ in 0..n {
        cur = advance(&cur, a, spec.wheelbase, cfg.v_max, cfg.predict_substep);
    }
    if rem > 0.0 {
        cur = advance(&cur, a, spec.wheelbase, cfg.v_max, rem);
    }
    Ok(cur)
}

/// Predicts at several horizons in one pass. Each output is bit-identical to
/// the corresponding [`predict`] call. `out` receives one state per horizon,
/// in input order. Inputs must be finite and horizons non-negative.
pub fn predict_horizons(
    s: &VehicleState,
    a: &VehicleAction,
    spec: &VehicleSpec,
    horizons: &[f64],
    cfg: &KinematicsConfig,
    out: &mut Vec<VehicleState>,
) {
    out.clear();
    out.resize(horizons.len(), *s);
    let mut order: Vec<(usize, usize, f64)> = horizons
        .iter()
        .enumerate()
        .map(|(i, &tau)| {
            let (n, rem) = substep_split(tau, cfg.predict_substep);
            (n, i, rem)
        })
        .collect();
    order.sort_by_key(|&(n, i, _)| (n, i));

    let mut cur = *s;
    let mut done = 0;
    for (n, i, rem) in order {
        while done < n {
            cur = advance(&cur, a, spec.wheelbase, cfg.v_max, cfg.predict_substep);
            done += 1;
        }
        out[i] = if rem > 0.0 {
            advance(&cur, a, spec.wheelbase, cfg.v_max, rem)
        } else {
            cur
        };
    }
}
