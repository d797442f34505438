//! The target under test. The generator sees the ego only through
//! [`EgoController`]: an observation goes in, an action comes out.

mod acc;
mod bridge;

pub use acc::{AccConfig, AccController};
pub use bridge::{
    BridgeConfig, ExternalEgo, TimeoutPolicy, WireAction, WireOther, WireRequest, WireState,
    HANDSHAKE,
};

use crate::error::BridgeError;
use crate::types::{VehicleAction, VehicleSpec, VehicleState};

/// What the ego's sensors report at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EgoObservation {
    pub t: f64,
    pub own: VehicleState,
    pub others: Vec<(VehicleState, VehicleSpec)>,
}

pub trait EgoController {
    fn control(&mut self, obs: &EgoObservation) -> Result<VehicleAction, BridgeError>;
}

impl<T: EgoController + ?Sized> EgoController for Box<T> {
    fn control(&mut self, obs: &EgoObservation) -> Result<VehicleAction, BridgeError> {
        (**self).control(obs)
    }
}
