//! JSONL record formats and readers/writers.
//!
//! * items: `{id, title, ts, concepts: {term: weight}, dense?: [..]}`
//! * histories: `{user_id, item_ids: [..]}`
//! * playlists: `{playlist_id, name, item_ids: [..]}`
//! * journeys: `{user_id, journeys: [{idx, item_ids, top_terms}], pruned: [..]}`

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{JourneyError, Result};
use crate::icpc::ExtractionResult;

/// Terms listed per journey in journeys files.
pub const RECORD_TOP_TERMS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistoryRecord {
    pub user_id: String,
    pub item_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JourneyEntry {
    pub idx: usize,
    pub item_ids: Vec<String>,
    pub top_terms: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JourneysRecord {
    pub user_id: String,
    pub journeys: Vec<JourneyEntry>,
    pub pruned: Vec<String>,
}

impl From<&ExtractionResult> for JourneysRecord {
    fn from(r: &ExtractionResult) -> Self {
        Self {
            user_id: r.user_id.clone(),
            journeys: r
                .journeys
                .iter()
                .map(|j| JourneyEntry {
                    idx: j.creation_index,
                    item_ids: j.members.clone(),
                    top_terms: j.representation.top_terms(RECORD_TOP_TERMS).expect("positive k"),
                })
                .collect(),
            pruned: r.pruned_items.clone(),
        }
    }
}

/// Parses one record per non-blank line. Errors carry the 1-based line.
pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(reader: R) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| JourneyError::Parse {
            line: n + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize, W: Write>(mut writer: W, records: &[T]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r).map_err(std::io::Error::other)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_jsonl_file<T: DeserializeOwned>(path: &std::path::Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    read_jsonl(std::io::BufReader::new(file))
}

pub fn write_jsonl_file<T: Serialize>(path: &std::path::Path, records: &[T]) -> Result<()> {
    let file = std::fs::File::create(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    write_jsonl(std::io::BufWriter::new(file), records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::item::Item;

    #[test]
    fn reports_bad_line_number() {
        let text = "{\"user_id\":\"u\",\"item_ids\":[]}\n\n{\"user_id\":3}\n";
        let err = read_jsonl::<HistoryRecord, _>(text.as_bytes()).unwrap_err();
        assert!(matches!(err, JourneyError::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn item_line_format() {
        let line = r#"{"id":"a","title":"Surf","ts":5,"concepts":{"surf":0.9},"dense":[1.0,2.0]}"#;
        let items: Vec<Item> = read_jsonl(line.as_bytes()).unwrap();
        assert_eq!(items[0].timestamp, 5);
        assert_eq!(items[0].concepts.get("surf"), 0.9);
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &items).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), line);
    }

    #[test]
    fn unknown_history_keys_rejected() {
        let text = r#"{"user_id":"u","item_ids":[],"extra":1}"#;
        assert!(read_jsonl::<HistoryRecord, _>(text.as_bytes()).is_err());
    }
}
