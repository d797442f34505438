//! Domain types shared by every stage of the generator: vehicle states and
//! actions, vehicle geometry, per-step scenario snapshots and traces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kilometres per hour to metres per second.
pub fn kmh_to_ms(kmh: f64) -> f64 {
    kmh / 3.6
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut w = a % (2.0 * PI);
    if w <= -PI {
        w += 2.0 * PI;
    } else if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Road-aligned vehicle state: `x` along the lane, `y` leftward positive,
/// `yaw` measured from +x, `v` the forward speed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub v: f64,
}

impl VehicleState {
    pub const fn new(x: f64, y: f64, yaw: f64, v: f64) -> Self {
        Self { x, y, yaw, v }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.yaw, self.v]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }

    /// Componentwise sum with a state offset. No clamping is applied: the
    /// result may be kinematically unreachable.
    pub fn offset(self, f: StateOffset) -> Self {
        Self::new(
            self.x + f.0[0],
            self.y + f.0[1],
            self.yaw + f.0[2],
            self.v + f.0[3],
        )
    }

    /// `self - other` with the yaw component wrapped to `(-pi, pi]`.
    pub fn diff(&self, other: &VehicleState) -> [f64; 4] {
        [
            self.x - other.x,
            self.y - other.y,
            wrap_angle(self.yaw - other.yaw),
            self.v - other.v,
        ]
    }
}

/// An additive offset in state space, `[dx, dy, dyaw, dv]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateOffset(pub [f64; 4]);

impl StateOffset {
    pub const ZERO: StateOffset = StateOffset([0.0; 4]);

    /// Purely longitudinal offset.
    pub const fn longitudinal(d: f64) -> Self {
        StateOffset([d, 0.0, 0.0, 0.0])
    }

    pub fn compose(self, other: StateOffset) -> Self {
        let mut out = self.0;
        for (o, b) in out.iter_mut().zip(other.0) {
            *o += b;
        }
        StateOffset(out)
    }
}

/// Componentwise state + offset.
pub fn state_offset_add(s: VehicleState, f: StateOffset) -> VehicleState {
    s.offset(f)
}

/// Longitudinal acceleration and front-wheel steering angle.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleAction {
    pub accel: f64,
    pub steer: f64,
}

impl VehicleAction {
    pub const ZERO: VehicleAction = VehicleAction { accel: 0.0, steer: 0.0 };

    pub const fn new(accel: f64, steer: f64) -> Self {
        Self { accel, steer }
    }

    pub fn is_finite(&self) -> bool {
        self.accel.is_finite() && self.steer.is_finite()
    }

    pub fn clamped(self, bounds: &ActionBounds) -> Self {
        Self {
            accel: self.accel.clamp(bounds.accel_min, bounds.accel_max),
            steer: self.steer.clamp(-bounds.steer_max, bounds.steer_max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActionBounds {
    pub accel_min: f64,
    pub accel_max: f64,
    pub steer_max: f64,
}

impl Default for ActionBounds {
    fn default() -> Self {
        Self {
            accel_min: -6.0,
            accel_max: 2.0,
            steer_max: 0.5,
        }
    }
}

impl ActionBounds {
    pub fn contains(&self, a: &VehicleAction) -> bool {
        (self.accel_min..=self.accel_max).contains(&a.accel)
            && (-self.steer_max..=self.steer_max).contains(&a.steer)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Ego,
    Agent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleSpec {
    pub length: f64,
    pub width: f64,
    pub wheelbase: f64,
    pub role: Role,
}

impl VehicleSpec {
    pub fn new(length: f64, width: f64, wheelbase: f64, role: Role) -> Result<Self> {
        let spec = Self {
            length,
            width,
            wheelbase,
            role,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// 4.8 m x 1.8 m passenger car with a 2.8 m wheelbase.
    pub fn passenger_car(role: Role) -> Self {
        Self {
            length: 4.8,
            width: 1.8,
            wheelbase: 2.8,
            role,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.width > 0.0) {
            return Err(Error::config(format!(
                "vehicle dimensions must be positive (length {}, width {})",
                self.length, self.width
            )));
        }
        if !(self.wheelbase > 0.0 && self.wheelbase < self.length) {
            return Err(Error::config(format!(
                "wheelbase {} must lie in (0, length {})",
                self.wheelbase, self.length
            )));
        }
        Ok(())
    }
}

/// The vehicle set of a two-vehicle cut-in scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Specs {
    pub ego: VehicleSpec,
    pub agent: VehicleSpec,
}

impl Default for Specs {
    fn default() -> Self {
        Self {
            ego: VehicleSpec::passenger_car(Role::Ego),
            agent: VehicleSpec::passenger_car(Role::Agent),
        }
    }
}

impl Specs {
    /// Longitudinal centre distance at which the two vehicles touch,
    /// `(l_ego + l_agent) / 2`.
    pub fn contact_distance(&self) -> f64 {
        0.5 * (self.ego.length + self.agent.length)
    }

    pub fn validate(&self) -> Result<()> {
        self.ego.validate()?;
        self.agent.validate()
    }
}

/// Bumper-to-bumper longitudinal distance from the ego's front to the
/// agent's rear. Negative when the bodies overlap longitudinally.
pub fn bumper_gap(ego: &VehicleState, agent: &VehicleState, specs: &Specs) -> f64 {
    (agent.x - ego.x) - specs.contact_distance()
}

/// One sampled instant of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioState {
    pub t: f64,
    pub ego: VehicleState,
    pub agent: VehicleState,
    pub ego_action: VehicleAction,
    pub agent_action: VehicleAction,
}

/// Time-indexed log of one generated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub steps: Vec<ScenarioState>,
    pub config_id: String,
    pub seed: u64,
    pub episode_index: usize,
    /// Cost of the action selected at each step, aligned with `steps`.
    /// `NaN` where no selection happened (the final logged state).
    pub selected_cost: Vec<f64>,
}

impl Trace {
    pub fn new(config_id: impl Into<String>, seed: u64, episode_index: usize) -> Self {
        Self {
            steps: Vec::new(),
            config_id: config_id.into(),
            seed,
            episode_index,
            selected_cost: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, s: ScenarioState, cost: f64) {
        self.steps.push(s);
        self.selected_cost.push(cost);
    }

    /// Checks non-emptiness and that timestamps advance by `step_size`.
    pub fn validate(&self, step_size: f64) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::InvalidTrace("trace is empty".into()));
        }
        for (i, w) in self.steps.windows(2).enumerate() {
            let dt = w[1].t - w[0].t;
            if (dt - step_size).abs() > 1e-9 {
                return Err(Error::InvalidTrace(format!(
                    "step {} -> {} advances by {dt}, expected {step_size}",
                    i,
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn gaps<'a>(&'a self, specs: &'a Specs) -> impl Iterator<Item = f64> + 'a {
        self.steps.iter().map(|s| bumper_gap(&s.ego, &s.agent, specs))
    }
}
