//! Append-only event log of flow runs, and replay from it.
//!
//! A trace file starts with a format line followed by one JSON event per
//! line. Events are flushed to disk at every `flow_end`.

use std::collections::{HashMap, VecDeque};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::ScriptedBackend;
use crate::message::InstanceId;
use crate::value::{Payload, Value};

pub const TRACE_FORMAT_LINE: &str = "flows-trace v1";

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace I/O on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("trace {path} line {line}: {reason}")]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    FlowStart,
    FlowEnd,
    MessageIn,
    MessageOut,
    BackendCall,
    BackendResponse,
    StateUpdate,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub seq: u64,
    pub timestamp: DateTime<Utc>,
    pub instance_id: InstanceId,
    pub kind: EventKind,
    pub body: Payload,
}

struct SinkInner {
    next_seq: u64,
    events: Vec<TraceEvent>,
    writer: Option<BufWriter<File>>,
}

/// Serializes appends from one run. Events are always kept in memory; a
/// file-backed sink additionally writes them out.
pub struct TraceSink {
    path: Option<PathBuf>,
    inner: Mutex<SinkInner>,
}

impl TraceSink {
    pub fn memory() -> Self {
        TraceSink {
            path: None,
            inner: Mutex::new(SinkInner {
                next_seq: 1,
                events: Vec::new(),
                writer: None,
            }),
        }
    }

    /// Creates (truncating) a trace file and writes the format line.
    pub fn create(path: &Path) -> Result<Self, TraceError> {
        let io = |source| TraceError::Io {
            path: path.to_path_buf(),
            source,
        };
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        let file = OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(true)
            .open(path)
            .map_err(io)?;
        let mut writer = BufWriter::new(file);
        writeln!(writer, "{TRACE_FORMAT_LINE}").map_err(io)?;
        writer.flush().map_err(io)?;
        Ok(TraceSink {
            path: Some(path.to_path_buf()),
            inner: Mutex::new(SinkInner {
                next_seq: 1,
                events: Vec::new(),
                writer: Some(writer),
            }),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn record(
        &self,
        instance_id: &InstanceId,
        kind: EventKind,
        body: Payload,
    ) -> Result<(), TraceError> {
        let mut inner = self.inner.lock().expect("trace sink poisoned");
        let event = TraceEvent {
            seq: inner.next_seq,
            timestamp: Utc::now(),
            instance_id: instance_id.clone(),
            kind,
            body,
        };
        inner.next_seq += 1;
        if let Some(writer) = inner.writer.as_mut() {
            let path = self.path.clone().unwrap_or_default();
            let line = serde_json::to_string(&event).expect("trace events serialize");
            let io = |source| TraceError::Io {
                path: path.clone(),
                source,
            };
            writeln!(writer, "{line}").map_err(io)?;
            if kind == EventKind::FlowEnd {
                writer.flush().map_err(io)?;
            }
        }
        inner.events.push(event);
        Ok(())
    }

    pub fn flush(&self) -> Result<(), TraceError> {
        let mut inner = self.inner.lock().expect("trace sink poisoned");
        if let Some(writer) = inner.writer.as_mut() {
            writer.flush().map_err(|source| TraceError::Io {
                path: self.path.clone().unwrap_or_default(),
                source,
            })?;
        }
        Ok(())
    }

    pub fn events(&self) -> Vec<TraceEvent> {
        self.inner.lock().expect("trace sink poisoned").events.clone()
    }

    /// Number of `flow_start` events whose body names the given flow.
    pub fn count_starts(&self, flow_name: &str) -> usize {
        count_starts(&self.events(), flow_name)
    }
}

pub fn count_starts(events: &[TraceEvent], flow_name: &str) -> usize {
    events
        .iter()
        .filter(|e| {
            e.kind == EventKind::FlowStart
                && e.body.get("name").and_then(Value::as_str) == Some(flow_name)
        })
        .count()
}

pub fn count_kind(events: &[TraceEvent], kind: EventKind) -> usize {
    events.iter().filter(|e| e.kind == kind).count()
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceEvent>, TraceError> {
    let file = File::open(path).map_err(|source| TraceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut events = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| TraceError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let malformed = |reason: String| TraceError::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            reason,
        };
        if i == 0 {
            if line != TRACE_FORMAT_LINE {
                return Err(malformed(format!("expected format line `{TRACE_FORMAT_LINE}`")));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let event: TraceEvent =
            serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        if let Some(prev) = events.last().map(|e: &TraceEvent| e.seq) {
            if event.seq <= prev {
                return Err(malformed(format!("seq {} does not increase", event.seq)));
            }
        }
        events.push(event);
    }
    Ok(events)
}

/// Builds a backend that serves the responses recorded in a trace, keyed by
/// canonical request hash.
pub fn replay_backend(path: &Path) -> Result<ScriptedBackend, TraceError> {
    Ok(replay_backend_from_events(&read_trace(path)?))
}

pub fn replay_backend_from_events(events: &[TraceEvent]) -> ScriptedBackend {
    let mut keyed: HashMap<String, VecDeque<String>> = HashMap::new();
    for event in events.iter().filter(|e| e.kind == EventKind::BackendResponse) {
        let hash = event.body.get("hash").and_then(Value::as_str);
        let response = event.body.get("response").and_then(Value::as_str);
        if let (Some(hash), Some(response)) = (hash, response) {
            keyed
                .entry(hash.to_string())
                .or_default()
                .push_back(response.to_string());
        }
    }
    ScriptedBackend::replay(keyed)
}

/// Normalized view of a trace for equality checks: sequence numbers and
/// timestamps dropped, identifiers replaced by first-occurrence ordinals,
/// cache flags and warnings removed.
pub fn normalize(events: &[TraceEvent]) -> Vec<Value> {
    let mut ordinals: HashMap<String, usize> = HashMap::new();
    let mut ordinal = |id: &str| -> Value {
        let next = ordinals.len();
        let n = *ordinals.entry(id.to_string()).or_insert(next);
        Value::Text(format!("#{n}"))
    };
    let mut out = Vec::new();
    for event in events.iter().filter(|e| e.kind != EventKind::Warning) {
        let mut body = event.body.clone();
        body.remove("cached");
        if let Some(Value::Map(message)) = body.get_mut("message") {
            message.remove("created_at");
            for key in ["id", "created_by"] {
                if let Some(Value::Text(id)) = message.get(key).cloned() {
                    message.insert(key.into(), ordinal(&id));
                }
            }
            if let Some(Value::List(parents)) = message.get_mut("parents") {
                for p in parents.iter_mut() {
                    if let Value::Text(id) = p.clone() {
                        *p = ordinal(&id);
                    }
                }
            }
        }
        let mut entry = Payload::new();
        entry.insert("instance".into(), ordinal(event.instance_id.as_str()));
        entry.insert(
            "kind".into(),
            Value::from_serializable(&event.kind).expect("kinds serialize"),
        );
        entry.insert("body".into(), Value::Map(body));
        out.push(Value::Map(entry));
    }
    out
}

/// Describes the first position where two normalized traces differ.
pub fn first_divergence(expected: &[Value], actual: &[Value]) -> Option<String> {
    for (i, (a, b)) in expected.iter().zip(actual).enumerate() {
        if a != b {
            return Some(format!(
                "event {}: expected {} but got {}",
                i + 1,
                serde_json::to_string(a).unwrap_or_default(),
                serde_json::to_string(b).unwrap_or_default()
            ));
        }
    }
    if expected.len() != actual.len() {
        return Some(format!(
            "length differs: expected {} events, got {}",
            expected.len(),
            actual.len()
        ));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::payload;

    #[test]
    fn seq_increments_from_one() {
        let sink = TraceSink::memory();
        let id = InstanceId::from("a");
        sink.record(&id, EventKind::FlowStart, Payload::new()).unwrap();
        sink.record(&id, EventKind::FlowEnd, Payload::new()).unwrap();
        let seqs: Vec<u64> = sink.events().iter().map(|e| e.seq).collect();
        assert_eq!(seqs, vec![1, 2]);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x/trace.log");
        let sink = TraceSink::create(&path).unwrap();
        let id = InstanceId::from("a");
        sink.record(&id, EventKind::FlowStart, payload! {"name" => "f"}).unwrap();
        sink.record(&id, EventKind::FlowEnd, payload! {"status" => "ok"}).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(TRACE_FORMAT_LINE));
        let events = read_trace(&path).unwrap();
        assert_eq!(events, sink.events());
    }

    #[test]
    fn wrong_format_line_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.log");
        std::fs::write(&path, "something else\n").unwrap();
        assert!(matches!(read_trace(&path), Err(TraceError::Malformed { .. })));
    }

    #[test]
    fn normalization_ignores_ids() {
        let a = TraceSink::memory();
        let b = TraceSink::memory();
        a.record(&InstanceId::fresh(), EventKind::FlowStart, payload! {"name" => "f"}).unwrap();
        b.record(&InstanceId::fresh(), EventKind::FlowStart, payload! {"name" => "f"}).unwrap();
        assert_eq!(normalize(&a.events()), normalize(&b.events()));
        assert!(first_divergence(&normalize(&a.events()), &normalize(&b.events())).is_none());
    }
}
