//! Trace files: one `#` metadata line (JSON), a header row, one row per step.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back reproduces the trace bit for bit. The `gap` column is derived and
//! ignored on input.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{bumper_gap, ScenarioState, Specs, Trace, VehicleAction, VehicleState};

pub const FORMAT: &str = "rtcsg-trace";
pub const VERSION: u32 = 1;

pub const COLUMNS: [&str; 15] = [
    "t", "x_ego", "y_ego", "yaw_ego", "v_ego", "accel_ego", "steer_ego", "x_av", "y_av", "yaw_av", "v_av", "accel_av",
    "steer_av", "gap", "j_selected",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Meta {
    format: String,
    version: u32,
    config_id: String,
    seed: u64,
    episode: usize,
}

pub fn write_trace<W: Write>(out: W, trace: &Trace, specs: &Specs) -> Result<()> {
    let mut out = out;
    let meta = Meta {
        format: FORMAT.into(),
        version: VERSION,
        config_id: trace.config_id.clone(),
        seed: trace.seed,
        episode: trace.episode_index,
    };
    let io = |e| Error::io("<trace output>", e);
    writeln!(out, "# {}", serde_json::to_string(&meta).expect("metadata serializes")).map_err(io)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let csv_err = |e: csv::Error| Error::io("<trace output>", std::io::Error::other(e));
    w.write_record(COLUMNS).map_err(csv_err)?;
    for (s, cost) in trace.steps.iter().zip(&trace.selected_cost) {
        let gap = bumper_gap(&s.ego, &s.agent, specs);
        let row = [
            s.t,
            s.ego.x,
            s.ego.y,
            s.ego.yaw,
            s.ego.v,
            s.ego_action.accel,
            s.ego_action.steer,
            s.agent.x,
            s.agent.y,
            s.agent.yaw,
            s.agent.v,
            s.agent_action.accel,
            s.agent_action.steer,
            gap,
            *cost,
        ];
        w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_err)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

pub fn save_trace(path: &Path, trace: &Trace, specs: &Specs) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let buf = std::io::BufWriter::new(file);
    write_trace(buf, trace, specs).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Parses trace text. `origin` names the source in diagnostics.
pub fn parse_trace(text: &str, origin: &str) -> Result<Trace> {
    let parse_err = |line: u64, msg: String| Error::Parse {
        path: origin.to_string(),
        line,
        msg,
    };
    let first = text.lines().next().unwrap_or("");
    let meta: Meta = first
        .strip_prefix('#')
        .ok_or_else(|| parse_err(1, "missing '#' metadata line".into()))
        .and_then(|m| serde_json::from_str(m.trim()).map_err(|e| parse_err(1, format!("bad metadata: {e}"))))?;
    if meta.format != FORMAT || meta.version != VERSION {
        return Err(parse_err(
            1,
            format!("unsupported format {} v{} (expected {FORMAT} v{VERSION})", meta.format, meta.version),
        ));
    }

    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| parse_err(2, e.to_string()))?.clone();
    if header.iter().ne(COLUMNS) {
        return Err(parse_err(2, format!("unexpected header, expected {}", COLUMNS.join(","))));
    }

    let mut trace = Trace::new(meta.config_id, meta.seed, meta.episode);
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != COLUMNS.len() {
            return Err(parse_err(line, format!("expected {} fields, found {}", COLUMNS.len(), rec.len())));
        }
        let mut v = [0.0; 15];
        for (i, field) in rec.iter().enumerate() {
            v[i] = field
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("column {}: cannot parse {field:?} as a number", COLUMNS[i])))?;
        }
        trace.push(
            ScenarioState {
                t: v[0],
                ego: VehicleState::new(v[1], v[2], v[3], v[4]),
                ego_action: VehicleAction::new(v[5], v[6]),
                agent: VehicleState::new(v[7], v[8], v[9], v[10]),
                agent_action: VehicleAction::new(v[11], v[12]),
            },
            v[14],
        );
    }
    if trace.is_empty() {
        return Err(parse_err(2, "trace has no rows".into()));
    }
    Ok(trace)
}

pub fn load_trace(path: &Path) -> Result<Trace> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace(&text, &path.display().to_string())
}
