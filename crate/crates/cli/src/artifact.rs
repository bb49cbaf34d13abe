// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Tabular artifact with a configuration echo, rendered as CSV or JSON.
//!
//! CSV layout: a `# config: {...}` line, the header row, data rows, then one
//! `# key: value` line per note. Readers should treat `#` as a comment
//! marker.

use serde_json::{Map, Value};

use crate::spec::Format;

#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub config: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<(String, String)>,
    /// Additional top-level members of the JSON rendering.
    pub extra: Map<String, Value>,
}

impl Artifact {
    pub fn new(config: Value, columns: &[&str]) -> Self {
        Artifact {
            config,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
            extra: Map::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl Into<String>) {
        self.notes.push((key.to_string(), value.into()));
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn cell(&self, row: usize, name: &str) -> Option<&str> {
        self.rows.get(row)?.get(self.column(name)?).map(String::as_str)
    }

    pub fn note_value(&self, key: &str) -> Option<&str> {
        self.notes.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("artifact serializes");
                s.push('\n');
                s
            }
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# config: {}\n", self.config);
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("writing to memory");
        for row in &self.rows {
            w.write_record(row).expect("writing to memory");
        }
        out.push_str(std::str::from_utf8(&w.into_inner().expect("flushing to memory")).expect("csv output is utf-8"));
        for (k, v) in &self.notes {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| Value::Object(self.columns.iter().cloned().zip(row.iter().map(|c| cell_value(c))).collect()))
            .collect();
        let mut obj = Map::new();
        obj.insert("config".into(), self.config.clone());
        obj.insert("rows".into(), Value::Array(rows));
        obj.insert(
            "notes".into(),
            Value::Object(self.notes.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect()),
        );
        for (k, v) in &self.extra {
            obj.insert(k.clone(), v.clone());
        }
        Value::Object(obj)
    }
}

/// Integers and finite reals become JSON numbers, empty cells `null`.
fn cell_value(s: &str) -> Value {
    if s.is_empty() {
        return Value::Null;
    }
    if let Ok(i) = s.parse::<i64>() {
        return Value::from(i);
    }
    match s.parse::<f64>() {
        Ok(f) if f.is_finite() => Value::from(f),
        _ => Value::String(s.to_string()),
    }
}
