//! Occlusion events as JSON lines:
//! `{"slice": s, "kind": "merge"|"split", "prev": [...], "next": [...]}`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use centrack_core::matching::{OcclusionEvent, OcclusionKind};
use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub slice: usize,
    pub kind: OcclusionKind,
    pub prev: Vec<usize>,
    pub next: Vec<usize>,
}

impl From<&OcclusionEvent> for EventRecord {
    fn from(e: &OcclusionEvent) -> Self {
        EventRecord {
            slice: e.slice_index,
            kind: e.kind,
            prev: e.involved_prev_indices.clone(),
            next: e.involved_next_indices.clone(),
        }
    }
}

pub fn write_events_to<W: Write>(out: W, events: &[OcclusionEvent]) -> Result<(), Error> {
    let mut out = BufWriter::new(out);
    for e in events {
        serde_json::to_writer(&mut out, &EventRecord::from(e))?;
        out.write_all(b"\n").map_err(serde_json::Error::io)?;
    }
    out.flush().map_err(serde_json::Error::io)?;
    Ok(())
}

pub fn write_events(path: &Path, events: &[OcclusionEvent]) -> Result<(), Error> {
    write_events_to(File::create(path).map_err(Error::io(path))?, events)
}

pub fn parse_events<R: Read>(input: R) -> Result<Vec<EventRecord>, Error> {
    let mut out = Vec::new();
    for (k, line) in BufReader::new(input).lines().enumerate() {
        let line = line.map_err(serde_json::Error::io)?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(k as u64 + 1, e.to_string()))?);
    }
    Ok(out)
}
