use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
    EquivalentWithWitness,
    NotEquivalent,
    /// A computed value with nothing to pass or fail.
    Info,
}

impl Outcome {
    fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Inconclusive => "inconclusive",
            Outcome::EquivalentWithWitness => "equivalent_with_witness",
            Outcome::NotEquivalent => "not_equivalent",
            Outcome::Info => "info",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Record {
    pub subject: String,
    pub check: String,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl Record {
    pub fn new(subject: impl Into<String>, check: &str, outcome: Outcome) -> Record {
        Record { subject: subject.into(), check: check.to_string(), outcome, residual: None, witness: None, detail: None }
    }

    pub fn residual(mut self, r: impl Into<String>) -> Record {
        self.residual = Some(r.into());
        self
    }

    pub fn witness(mut self, w: Value) -> Record {
        self.witness = Some(w);
        self
    }

    pub fn detail(mut self, d: Value) -> Record {
        self.detail = Some(d);
        self
    }
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: Vec<String>,
    pub records: Vec<Record>,
    pub summary: Summary,
    pub exit_status: i32,
}

impl Report {
    /// Sorts records by subject (stable within a subject) and fills the summary.
    pub fn new(command: Vec<String>, mut records: Vec<Record>) -> Report {
        records.sort_by(|a, b| a.subject.cmp(&b.subject));
        let count = |o: Outcome| records.iter().filter(|r| r.outcome == o).count();
        let summary = Summary {
            total: records.len(),
            passed: count(Outcome::Pass),
            failed: count(Outcome::Fail),
            inconclusive: count(Outcome::Inconclusive),
        };
        let exit_status = if summary.failed > 0 { 1 } else { 0 };
        Report { schema: 1, command, records, summary, exit_status }
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&format!("{}  {}  {}", r.subject, r.check, r.outcome.as_str()));
            if let Some(res) = &r.residual {
                out.push_str(&format!("  residual: {}", res));
            }
            out.push('\n');
            if let Some(d) = &r.detail {
                push_value(&mut out, d, 1);
            }
            if let Some(w) = &r.witness {
                out.push_str("    witness:\n");
                push_value(&mut out, w, 2);
            }
        }
        out.push_str(&format!(
            "summary: {} checks, {} passed, {} failed, {} inconclusive\n",
            self.summary.total, self.summary.passed, self.summary.failed, self.summary.inconclusive
        ));
        out
    }
}

fn push_value(out: &mut String, v: &Value, depth: usize) {
    let pad = "    ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                match v {
                    Value::Object(_) => {
                        out.push_str(&format!("{}{}:\n", pad, k));
                        push_value(out, v, depth + 1);
                    }
                    Value::Array(items) if items.iter().any(|x| x.is_object()) => {
                        out.push_str(&format!("{}{}:\n", pad, k));
                        for item in items {
                            push_value(out, item, depth + 1);
                        }
                    }
                    _ => out.push_str(&format!("{}{}: {}\n", pad, k, scalar(v))),
                }
            }
        }
        _ => out.push_str(&format!("{}{}\n", pad, scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) if items.iter().any(|x| x.is_array()) => {
            items.iter().map(scalar).collect::<Vec<_>>().join("; ")
        }
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(", "),
        other => other.to_string(),
    }
}
