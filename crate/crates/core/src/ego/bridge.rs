//! Out-of-process ego controllers.
//!
//! Wire format: newline-delimited JSON over the child's stdin/stdout. Both
//! sides first exchange the handshake line [`HANDSHAKE`]. Each step the
//! generator writes one [`WireRequest`] line and reads one [`WireAction`]
//! line back.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{EgoController, EgoObservation};
use crate::error::BridgeError;
use crate::types::{ActionBounds, VehicleAction, VehicleState};

pub const HANDSHAKE: &str = r#"{"proto":"rtcsg-ego","version":1}"#;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireState {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub v: f64,
}

impl From<VehicleState> for WireState {
    fn from(s: VehicleState) -> Self {
        Self { x: s.x, y: s.y, yaw: s.yaw, v: s.v }
    }
}

impl From<WireState> for VehicleState {
    fn from(s: WireState) -> Self {
        VehicleState::new(s.x, s.y, s.yaw, s.v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireOther {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub v: f64,
    pub length: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireRequest {
    pub t: f64,
    #[serde(rename = "self")]
    pub own: WireState,
    pub others: Vec<WireOther>,
}

impl WireRequest {
    pub fn from_observation(obs: &EgoObservation) -> Self {
        Self {
            t: obs.t,
            own: obs.own.into(),
            others: obs
                .others
                .iter()
                .map(|(s, spec)| WireOther {
                    x: s.x,
                    y: s.y,
                    yaw: s.yaw,
                    v: s.v,
                    length: spec.length,
                    width: spec.width,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireAction {
    pub accel: f64,
    pub steer: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeoutPolicy {
    /// Fail the episode.
    Abort,
    /// Reuse the previous action and count the miss.
    Hold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BridgeConfig {
    /// Per-step response deadline (s).
    pub step_timeout: f64,
    /// Deadline for the handshake reply (s).
    pub handshake_timeout: f64,
    pub on_timeout: TimeoutPolicy,
    /// Responses are clamped into these bounds.
    pub bounds: ActionBounds,
}

impl Default for BridgeConfig {
    fn default() -> Self {
        Self {
            step_timeout: 0.05,
            handshake_timeout: 5.0,
            on_timeout: TimeoutPolicy::Abort,
            bounds: ActionBounds::default(),
        }
    }
}

/// A session with one controller process. One request in flight at a time.
pub struct ExternalEgo {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    cfg: BridgeConfig,
    previous: VehicleAction,
    /// Requests whose responses have not been consumed yet.
    outstanding: usize,
    timeouts: usize,
}

impl ExternalEgo {
    /// Spawns `cmd` through `sh -c` and performs the handshake.
    pub fn spawn(cmd: &str, cfg: BridgeConfig) -> Result<Self, BridgeError> {
        let mut command = Command::new("sh");
        command.arg("-c").arg(cmd);
        Self::spawn_command(command, cmd, cfg)
    }

    pub fn spawn_command(mut command: Command, label: &str, cfg: BridgeConfig) -> Result<Self, BridgeError> {
        let mut child = command
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| BridgeError::Spawn {
                cmd: label.to_string(),
                source,
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::Builder::new()
            .name("ego-bridge-reader".into())
            .spawn(move || {
                for line in BufReader::new(stdout).lines() {
                    let stop = line.is_err();
                    if tx.send(line).is_err() || stop {
                        break;
                    }
                }
            })
            .map_err(BridgeError::Pipe)?;

        let mut ego = Self {
            child,
            stdin,
            lines: rx,
            cfg,
            previous: VehicleAction::ZERO,
            outstanding: 0,
            timeouts: 0,
        };
        ego.handshake()?;
        Ok(ego)
    }

    fn handshake(&mut self) -> Result<(), BridgeError> {
        self.send_line(HANDSHAKE)?;
        let line = self.recv(Duration::from_secs_f64(self.cfg.handshake_timeout))?;
        let expected: serde_json::Value = serde_json::from_str(HANDSHAKE).expect("valid handshake literal");
        match serde_json::from_str::<serde_json::Value>(&line) {
            Ok(v) if v == expected => Ok(()),
            _ => Err(BridgeError::Handshake(format!("unexpected reply {line:?}"))),
        }
    }

    fn send_line(&mut self, line: &str) -> Result<(), BridgeError> {
        writeln!(self.stdin, "{line}")
            .and_then(|_| self.stdin.flush())
            .map_err(BridgeError::Pipe)
    }

    fn recv(&mut self, timeout: Duration) -> Result<String, BridgeError> {
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(BridgeError::Pipe(e)),
            Err(RecvTimeoutError::Timeout) => Err(BridgeError::Timeout(timeout)),
            Err(RecvTimeoutError::Disconnected) => Err(BridgeError::Closed),
        }
    }

    /// Number of steps answered late under [`TimeoutPolicy::Hold`].
    pub fn timeouts(&self) -> usize {
        self.timeouts
    }

    fn exchange(&mut self, obs: &EgoObservation) -> Result<VehicleAction, BridgeError> {
        let req = serde_json::to_string(&WireRequest::from_observation(obs)).expect("request serializes");
        self.send_line(&req)?;
        self.outstanding += 1;
        let timeout = Duration::from_secs_f64(self.cfg.step_timeout);
        loop {
            let line = self.recv(timeout)?;
            self.outstanding -= 1;
            if self.outstanding > 0 {
                // Late answer to a request we already gave up on.
                continue;
            }
            let parsed: WireAction = serde_json::from_str(&line).map_err(|e| BridgeError::Malformed {
                line: line.clone(),
                msg: e.to_string(),
            })?;
            let action = VehicleAction::new(parsed.accel, parsed.steer);
            if !action.is_finite() {
                return Err(BridgeError::Malformed {
                    line,
                    msg: "non-finite action".into(),
                });
            }
            return Ok(action.clamped(&self.cfg.bounds));
        }
    }
}

impl EgoController for ExternalEgo {
    fn control(&mut self, obs: &EgoObservation) -> Result<VehicleAction, BridgeError> {
        match self.exchange(obs) {
            Ok(a) => {
                self.previous = a;
                Ok(a)
            }
            Err(BridgeError::Timeout(_)) if self.cfg.on_timeout == TimeoutPolicy::Hold => {
                self.timeouts += 1;
                Ok(self.previous)
            }
            Err(e) => Err(e),
        }
    }
}

impl Drop for ExternalEgo {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
