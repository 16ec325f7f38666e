//! Run reports and their text and JSON forms.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Value,
    Inconclusive,
    Error,
}

impl Outcome {
    pub fn is_failure(self) -> bool {
        matches!(self, Outcome::Fail | Outcome::Inconclusive | Outcome::Error)
    }

    fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "FAIL",
            Outcome::Value => "value",
            Outcome::Inconclusive => "INCONCLUSIVE",
            Outcome::Error => "ERROR",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskReport {
    pub name: String,
    pub kind: String,
    pub outcome: Outcome,
    pub inputs_digest: String,
    pub values: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub symbol_tables: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<String>,
    pub warnings: Vec<String>,
    pub mismatches: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Wall time, shown in text output only so JSON stays reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl TaskReport {
    pub fn new(name: &str, kind: &str, inputs_digest: String) -> Self {
        TaskReport {
            name: name.into(),
            kind: kind.into(),
            outcome: Outcome::Value,
            inputs_digest,
            values: BTreeMap::new(),
            symbol_tables: Vec::new(),
            points: Vec::new(),
            warnings: Vec::new(),
            mismatches: Vec::new(),
            error: None,
            elapsed: Duration::ZERO,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub model: String,
    pub model_digest: String,
    pub seed: u64,
    pub max_stage: usize,
    pub warnings: Vec<String>,
    pub tasks: Vec<TaskReport>,
}

impl Report {
    pub fn failed(&self) -> bool {
        self.tasks.iter().any(|t| t.outcome.is_failure())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn show(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        other => other.to_string(),
    }
}

impl fmt::Display for TaskReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}] {} ({}) in {:.2?}", self.outcome.as_str(), self.name, self.kind, self.elapsed)?;
        for (k, st) in self.symbol_tables.iter().enumerate() {
            let dims: Vec<String> = st.iter().map(|d| d.to_string()).collect();
            writeln!(f, "  stage {}: ({})", k + 1, dims.join(", "))?;
        }
        for (k, v) in &self.values {
            match v {
                Value::Array(items) if items.iter().all(Value::is_string) && !items.is_empty() => {
                    writeln!(f, "  {k}:")?;
                    for i in items {
                        writeln!(f, "    {}", show(i))?;
                    }
                }
                Value::Object(map) => {
                    writeln!(f, "  {k}:")?;
                    for (n, x) in map {
                        writeln!(f, "    {n}: {}", show(x))?;
                    }
                }
                other => writeln!(f, "  {k}: {}", show(other))?,
            }
        }
        if !self.points.is_empty() {
            writeln!(f, "  sample points: {}", self.points.join(", "))?;
        }
        for w in &self.warnings {
            writeln!(f, "  warning: {w}")?;
        }
        for m in &self.mismatches {
            writeln!(f, "  mismatch: {m}")?;
        }
        if let Some(e) = &self.error {
            writeln!(f, "  error: {e}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model {} (sha256 {})", self.model, &self.model_digest[..16])?;
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        for t in &self.tasks {
            write!(f, "{t}")?;
        }
        Ok(())
    }
}
