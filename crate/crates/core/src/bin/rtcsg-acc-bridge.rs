//! The built-in ACC behind the stdio bridge protocol. Useful as a test
//! double for external controllers.

use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, ValueEnum};

use rtcsg::ego::{EgoObservation, WireAction, WireRequest, HANDSHAKE};
use rtcsg::harness::Config;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Answer every request.
    Echo,
    /// Complete the handshake, then never answer.
    Silent,
    /// Answer with a line that is not an action.
    Malformed,
}

#[derive(Parser)]
#[command(name = "rtcsg-acc-bridge", version)]
struct Cli {
    /// Configuration file supplying the ACC and ego vehicle parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "echo")]
    mode: Mode,
    /// Sleep before each answer (ms).
    #[arg(long, default_value_t = 0)]
    delay_ms: u64,
}

fn serve(cli: &Cli, cfg: &Config) -> io::Result<()> {
    let stdin = io::stdin();
    let mut out = io::stdout().lock();
    let mut lines = stdin.lock().lines();
    match lines.next().transpose()? {
        Some(line) if line.trim() == HANDSHAKE => writeln!(out, "{HANDSHAKE}")?,
        _ => return Ok(()),
    }
    out.flush()?;
    for line in lines {
        let req: WireRequest = serde_json::from_str(&line?).map_err(io::Error::other)?;
        if cli.mode == Mode::Silent {
            continue;
        }
        if cli.delay_ms > 0 {
            std::thread::sleep(Duration::from_millis(cli.delay_ms));
        }
        if cli.mode == Mode::Malformed {
            writeln!(out, "{{\"throttle\": 1}}")?;
        } else {
            let obs = EgoObservation {
                t: req.t,
                own: req.own.into(),
                others: req
                    .others
                    .iter()
                    .map(|o| {
                        let mut spec = cfg.vehicles.agent;
                        spec.length = o.length;
                        spec.width = o.width;
                        (rtcsg::types::VehicleState::new(o.x, o.y, o.yaw, o.v), spec)
                    })
                    .collect(),
            };
            let a = cfg.acc.control(&obs, &cfg.vehicles.ego);
            let wire = WireAction { accel: a.accel, steer: a.steer };
            writeln!(out, "{}", serde_json::to_string(&wire).map_err(io::Error::other)?)?;
        }
        out.flush()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(p) => match Config::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("rtcsg-acc-bridge: {e}");
                return ExitCode::from(e.exit_code() as u8);
            }
        },
        None => Config::default(),
    };
    match serve(&cli, &cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rtcsg-acc-bridge: {e}");
            ExitCode::from(3)
        }
    }
}
