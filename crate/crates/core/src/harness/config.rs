//! Whole-program configuration, read from a TOML file. Every section and
//! every key is optional; missing ones take the built-in defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adapt::AdaptConfig;
use crate::agent::AgentConfig;
use crate::ego::{AccConfig, BridgeConfig};
use crate::error::{Error, Result};
use crate::kinematics::KinematicsConfig;
use crate::scoring::ScoringConfig;
use crate::sim::EpisodeConfig;
use crate::types::Specs;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed of the adaptation's random stream.
    pub seed: u64,
    pub max_episodes: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            max_episodes: 30,
        }
    }
}

/// Grid of initial conditions. Both ranges are inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// km/h
    pub dv_min: f64,
    pub dv_max: f64,
    pub dv_step: f64,
    /// m
    pub dx_min: f64,
    pub dx_max: f64,
    pub dx_step: f64,
    pub mc_runs: usize,
    pub max_episodes: usize,
    pub master_seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            dv_min: -10.0,
            dv_max: 10.0,
            dv_step: 2.0,
            dx_min: 8.0,
            dx_max: 15.0,
            dx_step: 1.0,
            mc_runs: 5,
            max_episodes: 30,
            master_seed: 0,
        }
    }
}

fn axis(name: &str, min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && min <= max) {
        return Err(Error::config(format!("{name} range [{min}, {max}] is empty")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::config(format!("{name} step must be positive")));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| min + i as f64 * step).collect())
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.dv_values()?;
        self.dx_values()?;
        if self.mc_runs == 0 || self.max_episodes == 0 {
            return Err(Error::config("mc_runs and max_episodes must be at least 1"));
        }
        Ok(())
    }

    pub fn dv_values(&self) -> Result<Vec<f64>> {
        axis("dv", self.dv_min, self.dv_max, self.dv_step)
    }

    pub fn dx_values(&self) -> Result<Vec<f64>> {
        axis("dx", self.dx_min, self.dx_max, self.dx_step)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub run: RunConfig,
    pub sweep: SweepConfig,
    pub episode: EpisodeConfig,
    pub vehicles: Specs,
    pub kinematics: KinematicsConfig,
    pub agent: AgentConfig,
    pub acc: AccConfig,
    pub bridge: BridgeConfig,
    pub adapt: AdaptConfig,
    pub scoring: ScoringConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        self.kinematics.validate()?;
        self.vehicles.validate()?;
        self.episode.validate(&self.kinematics)?;
        self.agent.validate()?;
        self.acc.validate()?;
        self.adapt.validate()?;
        self.scoring.validate()?;
        self.sweep.validate()?;
        if self.run.max_episodes == 0 {
            return Err(Error::config("max_episodes must be at least 1"));
        }
        if !(self.bridge.step_timeout > 0.0 && self.bridge.handshake_timeout > 0.0) {
            return Err(Error::config("bridge timeouts must be positive"));
        }
        Ok(())
    }
}
