//! File formats: JSONL traces, CSV follow graphs and count tables, JSON
//! instances and schedules, CSV matrices.

use std::io::{BufRead, Write};

use serde::Serialize;

use crate::analyze::{CountRow, SizeBucket};
use crate::error::{Error, Result};
use crate::estimate::{ActivityTrace, FollowGraph, TraceEvent};

/// Reads one event per line; blank lines are skipped.
pub fn read_trace<R: BufRead>(reader: R, tz_offset_minutes: i32) -> Result<ActivityTrace> {
    let mut events = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event: TraceEvent = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: k + 1,
            message: e.to_string(),
        })?;
        event.validate().map_err(|message| Error::Parse {
            line: k + 1,
            message,
        })?;
        events.push(event);
    }
    ActivityTrace::new(events, tz_offset_minutes)
}

pub fn write_trace<W: Write>(mut writer: W, events: &[TraceEvent]) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut writer, e).map_err(|e| Error::Io(e.to_string()))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

fn require_header(reader: &mut csv::Reader<impl std::io::Read>, expected: &[&str]) -> Result<()> {
    let header = reader.headers().map_err(csv_error)?;
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != expected {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header {:?}, found {:?}",
                expected.join(","),
                names.join(",")
            ),
        });
    }
    Ok(())
}

/// Reads a `follower,followee` edge list.
pub fn read_graph<R: std::io::Read>(reader: R) -> Result<FollowGraph> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    require_header(&mut csv, &["follower", "followee"])?;
    let mut graph = FollowGraph::new();
    for record in csv.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        match (record.get(0), record.get(1)) {
            (Some(a), Some(b)) if !a.is_empty() && !b.is_empty() => {
                graph.add_edge(a, b);
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    message: "empty follower or followee".into(),
                })
            }
        }
    }
    Ok(graph)
}

pub fn write_graph<W: Write>(writer: W, edges: &[(String, String)]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["follower", "followee"])
        .map_err(csv_error)?;
    for (a, b) in edges {
        csv.write_record([a, b]).map_err(csv_error)?;
    }
    csv.flush()?;
    Ok(())
}

/// Reads a `size,reactions,total` table; `size` may be `>10`.
pub fn read_counts<R: std::io::Read>(reader: R) -> Result<Vec<CountRow>> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    require_header(&mut csv, &["size", "reactions", "total"])?;
    let mut rows = Vec::new();
    for record in csv.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let bad = |message: String| Error::Parse { line, message };
        let size: SizeBucket = record.get(0).unwrap_or_default().parse().map_err(bad)?;
        let number = |k: usize| -> Result<u64> {
            let field = record.get(k).unwrap_or_default();
            field
                .parse()
                .map_err(|_| bad(format!("invalid count {field:?}")))
        };
        rows.push(CountRow {
            size,
            reactions: number(1)?,
            total: number(2)?,
        });
    }
    Ok(rows)
}

/// Writes a matrix with leading label columns.
pub fn write_matrix<W: Write>(
    writer: W,
    header: &[String],
    rows: impl IntoIterator<Item = (Vec<String>, Vec<f64>)>,
) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(header).map_err(csv_error)?;
    for (labels, values) in rows {
        let mut record = labels;
        record.extend(values.iter().map(|v| v.to_string()));
        csv.write_record(&record).map_err(csv_error)?;
    }
    csv.flush()?;
    Ok(())
}

/// Writes serializable rows with a header derived from their fields.
pub fn write_rows<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    for row in rows {
        csv.serialize(row).map_err(csv_error)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    text
}

pub fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}
