//! Event-file I/O: a CSV with header `time,node` (times in seconds, nodes
//! 0-based) plus a sidecar JSON manifest `{"T": f, "D": n}` carrying the
//! horizon and dimension. Times are written with 17 significant digits so
//! every value round-trips exactly and reruns are byte-identical.

use crate::error::HawkesError;
use crate::fmt_g17;
use crate::process::EventSequence;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Sidecar manifest for an event CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "D")]
    pub d: usize,
}

/// Manifest path next to an event CSV: `runs/a.csv -> runs/a.manifest.json`.
pub fn manifest_path(events_path: &Path) -> PathBuf {
    let stem = events_path.file_stem().unwrap_or_default().to_string_lossy();
    events_path.with_file_name(format!("{stem}.manifest.json"))
}

/// Write the CSV and its manifest.
pub fn write_events(seq: &EventSequence, events_path: &Path) -> Result<(), HawkesError> {
    let mut out = String::with_capacity(32 * seq.len() + 16);
    out.push_str("time,node\n");
    for ev in seq.events() {
        out.push_str(&fmt_g17(ev.time));
        out.push(',');
        out.push_str(&ev.node.to_string());
        out.push('\n');
    }
    let mut f = std::fs::File::create(events_path)?;
    f.write_all(out.as_bytes())?;
    let manifest = Manifest { t: seq.horizon(), d: seq.node_count() };
    let mf = manifest_path(events_path);
    std::fs::write(&mf, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

/// Read a CSV and its manifest back into a sequence.
pub fn read_events(events_path: &Path) -> Result<EventSequence, HawkesError> {
    let mf = manifest_path(events_path);
    let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(&mf).map_err(|e| {
        HawkesError::Parse {
            path: mf.display().to_string(),
            message: format!("missing or unreadable manifest: {e}"),
        }
    })?)
    .map_err(|e| HawkesError::Parse { path: mf.display().to_string(), message: e.to_string() })?;
    read_events_with(events_path, manifest.t, manifest.d)
}

/// Read a CSV with an explicitly supplied horizon and dimension.
pub fn read_events_with(
    events_path: &Path,
    horizon: f64,
    node_count: usize,
) -> Result<EventSequence, HawkesError> {
    let text = std::fs::read_to_string(events_path)?;
    let parse_err = |line: usize, message: String| HawkesError::Parse {
        path: format!("{}:{}", events_path.display(), line),
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "time,node" => {}
        Some((_, header)) => {
            return Err(parse_err(1, format!("expected header `time,node`, got `{header}`")))
        }
        None => return Err(parse_err(1, "empty file".into())),
    }
    let mut raw = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (t_str, u_str) = line
            .split_once(',')
            .ok_or_else(|| parse_err(idx + 1, format!("expected `time,node`, got `{line}`")))?;
        let time: f64 = t_str
            .trim()
            .parse()
            .map_err(|e| parse_err(idx + 1, format!("bad time `{t_str}`: {e}")))?;
        let node: usize = u_str
            .trim()
            .parse()
            .map_err(|e| parse_err(idx + 1, format!("bad node `{u_str}`: {e}")))?;
        raw.push((time, node));
    }
    EventSequence::new(raw, horizon, node_count)
}
