//! Reports in a human-readable and a machine-readable form.

use serde_json::{Map, Value};

use crate::Format;

/// Lines for people and a JSON object for programs, built side by side.
#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<String>,
    json: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut r = Report::default();
        r.json.insert("command".into(), command.into());
        r
    }

    pub fn line(&mut self, s: impl Into<String>) -> &mut Self {
        self.lines.push(s.into());
        self
    }

    pub fn field(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.json.insert(key.into(), v.into());
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.lines.iter().map(|l| format!("{l}\n")).collect(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }
}

/// Fixed-width float for text reports.
pub fn num(x: f64) -> String {
    format!("{x:.10}")
}

pub fn labels(v: &[usize]) -> String {
    v.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
}
