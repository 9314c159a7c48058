//! Sample files: CSV with `value` or `value,count` per line, or a JSON array
//! of values or `{value, count}` records.

use std::collections::BTreeMap;
use std::path::Path;

use psiaxiom::{Observation, WeightedSample};
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },

    #[error("line {line}: {reason}")]
    Parse { line: u64, reason: String },

    #[error("line {line}: count must be a positive integer, got `{count}`")]
    CountNotPositive { line: u64, count: String },

    #[error("{0} contains no observations")]
    Empty(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Json,
}

impl DataFormat {
    /// `.json` files are structured, everything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => DataFormat::Json,
            _ => DataFormat::Csv,
        }
    }
}

pub fn ingest_sample(path: &Path, format: DataFormat) -> Result<WeightedSample, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let pairs = match format {
        DataFormat::Csv => parse_csv(&text)?,
        DataFormat::Json => parse_json(&text)?,
    };
    merge(pairs).ok_or_else(|| IngestError::Empty(path.display().to_string()))
}

fn merge(pairs: Vec<(Observation, u64)>) -> Option<WeightedSample> {
    let mut counts: BTreeMap<Observation, u64> = BTreeMap::new();
    for (obs, n) in pairs {
        *counts.entry(obs).or_default() += n;
    }
    WeightedSample::from_counts(counts).ok()
}

fn count(line: u64, raw: &str) -> Result<u64, IngestError> {
    match raw.trim().parse::<i64>() {
        Ok(n) if n > 0 => Ok(n as u64),
        Ok(_) => Err(IngestError::CountNotPositive {
            line,
            count: raw.trim().into(),
        }),
        Err(_) => Err(IngestError::Parse {
            line,
            reason: format!("count `{}` is not an integer", raw.trim()),
        }),
    }
}

fn observation(line: u64, raw: &str) -> Result<Observation, IngestError> {
    raw.parse()
        .map_err(|e: psiaxiom::Error| IngestError::Parse {
            line,
            reason: e.to_string(),
        })
}

pub fn parse_csv(text: &str) -> Result<Vec<(Observation, u64)>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| IngestError::Parse {
            line: e.position().map_or(i as u64 + 1, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        let fields: Vec<&str> = record.iter().filter(|f| !f.is_empty()).collect();
        match fields.as_slice() {
            [] => continue,
            ["value"] | ["value", "count"] if out.is_empty() => continue,
            [v] => out.push((observation(line, v)?, 1)),
            [v, n] => {
                let n = count(line, n)?;
                out.push((observation(line, v)?, n));
            }
            _ => {
                return Err(IngestError::Parse {
                    line,
                    reason: format!(
                        "expected `value` or `value,count`, got {} fields",
                        fields.len()
                    ),
                })
            }
        }
    }
    Ok(out)
}

fn json_observation(line: u64, v: &Value) -> Result<Observation, IngestError> {
    match v {
        Value::Number(n) => observation(line, &n.to_string()),
        Value::String(s) => observation(line, s),
        other => Err(IngestError::Parse {
            line,
            reason: format!("`{other}` is not a value"),
        }),
    }
}

/// JSON positions are reported as 1-based element indices on line 1 when
/// the document itself parses.
pub fn parse_json(text: &str) -> Result<Vec<(Observation, u64)>, IngestError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| IngestError::Parse {
        line: e.line() as u64,
        reason: e.to_string(),
    })?;
    let Value::Array(items) = doc else {
        return Err(IngestError::Parse {
            line: 1,
            reason: "expected a JSON array".into(),
        });
    };
    let mut out = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let at = i as u64 + 1;
        match item {
            Value::Object(rec) => {
                let value = rec.get("value").ok_or_else(|| IngestError::Parse {
                    line: at,
                    reason: "record without `value`".into(),
                })?;
                if let Some(key) = rec.keys().find(|k| *k != "value" && *k != "count") {
                    return Err(IngestError::Parse {
                        line: at,
                        reason: format!("unknown key `{key}`"),
                    });
                }
                let n = match rec.get("count") {
                    None => 1,
                    Some(c) => count(at, &c.to_string())?,
                };
                out.push((json_observation(at, value)?, n));
            }
            v => out.push((json_observation(at, v)?, 1)),
        }
    }
    Ok(out)
}

/// Inline block such as `0,1` or `1,3:2` (value `:` count).
pub fn parse_block(text: &str) -> Result<WeightedSample, IngestError> {
    let mut pairs = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.rsplit_once(':') {
            Some((v, n)) => {
                let n = count(1, n)?;
                pairs.push((observation(1, v)?, n));
            }
            None => pairs.push((observation(1, part)?, 1)),
        }
    }
    merge(pairs).ok_or_else(|| IngestError::Empty(format!("block `{text}`")))
}
