//! Report types shared by the text and `--json` renderings.

use std::fmt::Write;

use mbmom::scalar::{format_exact, to_f64};
use mbmom::{ExactScalar, MeanIndices};
use serde::Serialize;

/// A value in both exact and decimal form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Value {
    pub exact: String,
    pub decimal: f64,
}

impl From<&ExactScalar> for Value {
    fn from(x: &ExactScalar) -> Self {
        Value { exact: format_exact(x), decimal: to_f64(x) }
    }
}

fn values(xs: &[ExactScalar]) -> Vec<Value> {
    xs.iter().map(Value::from).collect()
}

fn table(xs: &[Vec<ExactScalar>]) -> Vec<Vec<Value>> {
    xs.iter().map(|row| values(row)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct IndicesReport {
    pub throughput: Vec<Value>,
    pub response_time: Vec<Value>,
    /// `[queue][class]`, per replica.
    pub queue_length: Vec<Vec<Value>>,
    pub utilization: Vec<Vec<Value>>,
    pub residence_time: Vec<Vec<Value>>,
}

impl From<&MeanIndices> for IndicesReport {
    fn from(ix: &MeanIndices) -> Self {
        IndicesReport {
            throughput: values(&ix.throughput),
            response_time: values(&ix.response_time),
            queue_length: table(&ix.queue_length),
            utilization: table(&ix.utilization),
            residence_time: table(&ix.residence_time),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub model: String,
    pub algorithm: String,
    pub branching: Option<String>,
    pub steps: Option<usize>,
    pub fallbacks: usize,
    pub classes: Vec<String>,
    pub queues: Vec<String>,
    pub normalizing_constant: Option<Value>,
    pub indices: IndicesReport,
}

impl SolveReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model      {}", self.model);
        let _ = write!(out, "algorithm  {}", self.algorithm);
        if let Some(b) = &self.branching {
            let _ = write!(out, " (branching {b})");
        }
        out.push('\n');
        if let Some(steps) = self.steps {
            let _ = writeln!(out, "steps      {steps} ({} by convolution fallback)", self.fallbacks);
        }
        if let Some(g) = &self.normalizing_constant {
            let _ = writeln!(out, "G(m, N)    {} = {:.10e}", g.exact, g.decimal);
        }
        out.push('\n');
        let _ = writeln!(out, "{:<12} {:>24} {:>24}", "class", "throughput", "response time");
        for (c, name) in self.classes.iter().enumerate() {
            let ix = &self.indices;
            let _ = writeln!(out, "{:<12} {:>24} {:>24}", name, cell(&ix.throughput[c]), cell(&ix.response_time[c]));
        }
        out.push('\n');
        let _ = writeln!(
            out,
            "{:<12} {:<12} {:>24} {:>24} {:>24}",
            "queue", "class", "queue length", "utilization", "residence time"
        );
        for (k, q) in self.queues.iter().enumerate() {
            for (c, name) in self.classes.iter().enumerate() {
                let ix = &self.indices;
                let _ = writeln!(
                    out,
                    "{:<12} {:<12} {:>24} {:>24} {:>24}",
                    q,
                    name,
                    cell(&ix.queue_length[k][c]),
                    cell(&ix.utilization[k][c]),
                    cell(&ix.residence_time[k][c])
                );
            }
        }
        out
    }
}

/// Exact value when short, decimal otherwise.
fn cell(v: &Value) -> String {
    if v.exact.len() <= 24 {
        v.exact.clone()
    } else {
        format!("{:.12e}", v.decimal)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareEntry {
    pub algorithm: String,
    /// `skipped: <reason>`, `error: <reason>`, or `ok`.
    pub status: String,
    pub entries: usize,
    pub agreeing: usize,
    pub disagreements: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub model: String,
    pub reference: String,
    pub results: Vec<CompareEntry>,
    pub all_equal: bool,
}

impl CompareReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model      {}", self.model);
        let _ = writeln!(out, "reference  {}\n", self.reference);
        let _ = writeln!(out, "{:<12} {:>12}  status", "algorithm", "agreement");
        for r in &self.results {
            let _ = writeln!(out, "{:<12} {:>12}  {}", r.algorithm, format!("{}/{}", r.agreeing, r.entries), r.status);
            for d in &r.disagreements {
                let _ = writeln!(out, "    {d}");
            }
        }
        let _ = writeln!(out, "\n{}", if self.all_equal { "all results exactly equal" } else { "RESULTS DIFFER" });
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbReport {
    pub model: String,
    /// Rows per queue, then the delay row; columns per class.
    pub state: Vec<Vec<u32>>,
    pub probability: Value,
}

impl ProbReport {
    pub fn render(&self) -> String {
        format!(
            "model        {}\nstate        {:?}\nprobability  {} = {:.10e}\n",
            self.model, self.state, self.probability.exact, self.probability.decimal
        )
    }
}
