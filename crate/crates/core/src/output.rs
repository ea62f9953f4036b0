//! Trajectory CSV, event-log CSV and JSON summaries. Every file is written
//! to a temporary sibling and renamed into place, so an interrupted run
//! never leaves a half-written output behind.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::async_engine::{EventLogEntry, Polarity};
use crate::error::{Error, Result};
use crate::record::TrajectoryRecord;

pub const TRAJECTORY_HEADER: [&str; 7] = [
    "trial",
    "step",
    "time",
    "active_total",
    "active_excit",
    "active_inhib",
    "newly_active",
];

pub const EVENT_LOG_HEADER: [&str; 6] = [
    "event_index",
    "time",
    "target",
    "polarity",
    "source_index",
    "caused_activation",
];

fn parent_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

/// Fails early if `path` could not be created: its directory must exist
/// and accept new files.
pub fn check_writable(path: &Path) -> Result<()> {
    let dir = parent_dir(path);
    if !dir.is_dir() {
        return Err(Error::param(
            "output",
            format!("directory {} does not exist", dir.display()),
        ));
    }
    if path.is_dir() {
        return Err(Error::param(
            "output",
            format!("{} is a directory", path.display()),
        ));
    }
    NamedTempFile::new_in(dir)
        .map_err(|e| Error::param("output", format!("cannot write to {}: {e}", dir.display())))?;
    Ok(())
}

/// Runs `fill` against a temporary file next to `path`, then renames it.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut File) -> Result<()>,
{
    let mut tmp = NamedTempFile::new_in(parent_dir(path))?;
    fill(tmp.as_file_mut())?;
    tmp.as_file_mut().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_trajectories<W: Write>(writer: W, records: &[TrajectoryRecord]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(TRAJECTORY_HEADER)?;
    for (trial, record) in records.iter().enumerate() {
        for row in record.series() {
            csv.write_record(&[
                trial.to_string(),
                row.step.to_string(),
                row.time.to_string(),
                row.active_total.to_string(),
                row.active_excit.to_string(),
                row.active_inhib.to_string(),
                row.newly_active.to_string(),
            ])?;
        }
    }
    csv.flush()?;
    Ok(())
}

pub fn write_event_log<W: Write>(writer: W, log: &[EventLogEntry]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(EVENT_LOG_HEADER)?;
    for e in log {
        let polarity = match e.polarity {
            Polarity::Plus => "+",
            Polarity::Minus => "-",
        };
        csv.write_record(&[
            e.event_index.to_string(),
            e.time.to_string(),
            e.target.to_string(),
            polarity.to_string(),
            e.source_index.to_string(),
            e.caused_activation.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(writer: W, value: &T) -> Result<()> {
    let mut writer = BufWriter::new(writer);
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

pub fn write_trajectories_file(path: &Path, records: &[TrajectoryRecord]) -> Result<()> {
    write_atomic(path, |f| write_trajectories(BufWriter::new(f), records))
}

pub fn write_event_log_file(path: &Path, log: &[EventLogEntry]) -> Result<()> {
    write_atomic(path, |f| write_event_log(BufWriter::new(f), log))
}

pub fn write_json_file<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |f| write_json(f, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realization::VertexSign;
    use crate::record::{Activation, EngineKind, Termination};

    #[test]
    fn trajectory_csv_layout() {
        let rec = TrajectoryRecord {
            engine: EngineKind::Sync,
            n: 5,
            a0: 1,
            activations: vec![
                Activation {
                    vertex: 0,
                    time: 0.0,
                    sign: VertexSign::Excitatory,
                },
                Activation {
                    vertex: 3,
                    time: 1.0,
                    sign: VertexSign::Inhibitory,
                },
            ],
            round_sizes: vec![1, 2],
            steps_executed: 2,
            termination: Termination::Stalled,
            discarded_signals: 0,
        };
        let mut buf = Vec::new();
        write_trajectories(&mut buf, &[rec]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], TRAJECTORY_HEADER.join(","));
        assert_eq!(lines[1], "0,0,0,1,1,0,1");
        assert_eq!(lines[2], "0,1,1,2,1,1,1");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        write_json_file(&path, &vec![1, 2]).unwrap();
        write_json_file(&path, &vec![3]).unwrap();
        let back: Vec<i32> =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back, vec![3]);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn unwritable_location_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(check_writable(&dir.path().join("missing/out.csv")).is_err());
        assert!(check_writable(dir.path()).is_err());
        assert!(check_writable(&dir.path().join("ok.csv")).is_ok());
    }
}
