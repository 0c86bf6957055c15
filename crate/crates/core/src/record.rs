//! One-line JSON run records.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub graph: Option<String>,
    pub parameters: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub estimates: Value,
    pub counters: BTreeMap<String, Value>,
    pub wall_time_secs: f64,
}

impl RunRecord {
    pub fn new(command: &str) -> Self {
        RunRecord {
            command: command.to_string(),
            graph: None,
            parameters: BTreeMap::new(),
            seed: None,
            estimates: Value::Null,
            counters: BTreeMap::new(),
            wall_time_secs: 0.0,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters.insert(key.to_string(), to_value(value));
        self
    }

    pub fn counter(mut self, key: &str, value: impl Serialize) -> Self {
        self.counters.insert(key.to_string(), to_value(value));
        self
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("run records always serialize")
    }

    pub fn from_line(line: &str) -> Result<Self> {
        serde_json::from_str(line).map_err(|e| Error::Format(format!("bad run record: {e}")))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.to_line())?;
        Ok(())
    }
}

pub fn to_value(value: impl Serialize) -> Value {
    serde_json::to_value(value).expect("value serializes to JSON")
}

/// Reads every line as a record, skipping blank lines and `#` header lines.
pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<RunRecord>> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let trimmed = line.trim();
        if !trimmed.is_empty() && !trimmed.starts_with('#') {
            out.push(RunRecord::from_line(&line)?);
        }
    }
    Ok(out)
}
