//! JSON model files. Rationals are strings (`"3/10"`, `"0.3"`, `"2"`) so
//! values pass through the file exactly.

use std::fmt;

use mbmom::scalar::format_exact;
use mbmom::{parse_exact, validate_model, ExactScalar, NetworkModel, ValidatedModel};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    pub classes: Vec<ClassSpec>,
    pub queues: Vec<QueueSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    pub name: String,
    pub population: u32,
    pub think_time: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueueSpec {
    pub name: String,
    pub multiplicity: u32,
    pub demands: Vec<String>,
}

#[derive(Debug)]
pub enum ModelFileError {
    Syntax { line: usize, column: usize, message: String },
    Field { field: String, message: String },
}

impl fmt::Display for ModelFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelFileError::Syntax { line, column, message } => {
                write!(f, "line {line}, column {column}: {message}")
            }
            ModelFileError::Field { field, message } => write!(f, "{field}: {message}"),
        }
    }
}

impl std::error::Error for ModelFileError {}

fn field_error(field: impl Into<String>, message: impl fmt::Display) -> ModelFileError {
    ModelFileError::Field { field: field.into(), message: message.to_string() }
}

fn rational(field: String, text: &str) -> Result<ExactScalar, ModelFileError> {
    parse_exact(text).map_err(|e| field_error(field, e))
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self, ModelFileError> {
        serde_json::from_str(text).map_err(|e| {
            // serde_json appends " at line L column C"; keep the message bare.
            let message = e.to_string();
            let message = message.split(" at line ").next().unwrap_or(&message).to_string();
            ModelFileError::Syntax { line: e.line(), column: e.column(), message }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model files always serialize")
    }

    pub fn to_model(&self) -> Result<ValidatedModel, ModelFileError> {
        let r = self.classes.len();
        let mut demands = Vec::with_capacity(self.queues.len());
        for (k, q) in self.queues.iter().enumerate() {
            if q.demands.len() != r {
                return Err(field_error(
                    format!("queues[{k}].demands"),
                    format!("{} demands for {r} classes", q.demands.len()),
                ));
            }
            let row = q
                .demands
                .iter()
                .enumerate()
                .map(|(c, d)| rational(format!("queues[{k}].demands[{c}]"), d))
                .collect::<Result<Vec<_>, _>>()?;
            demands.push(row);
        }
        let think_times = self
            .classes
            .iter()
            .enumerate()
            .map(|(c, cl)| rational(format!("classes[{c}].think_time"), &cl.think_time))
            .collect::<Result<Vec<_>, _>>()?;
        validate_model(NetworkModel {
            demands,
            think_times,
            multiplicities: self.queues.iter().map(|q| q.multiplicity).collect(),
            populations: self.classes.iter().map(|c| c.population).collect(),
        })
        .map_err(|e| field_error("model", e))
    }

    /// Builds a file for `model` with rationals in canonical `p` / `p/q` form.
    pub fn from_model(name: &str, class_names: &[String], queue_names: &[String], model: &ValidatedModel) -> Self {
        ModelFile {
            name: name.to_string(),
            classes: (0..model.classes())
                .map(|c| ClassSpec {
                    name: class_names[c].clone(),
                    population: model.populations[c],
                    think_time: format_exact(model.think_time(c)),
                })
                .collect(),
            queues: (0..model.queues())
                .map(|k| QueueSpec {
                    name: queue_names[k].clone(),
                    multiplicity: model.multiplicities[k],
                    demands: model.demands[k].iter().map(format_exact).collect(),
                })
                .collect(),
        }
    }

    pub fn class_names(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.name.clone()).collect()
    }

    pub fn queue_names(&self) -> Vec<String> {
        self.queues.iter().map(|q| q.name.clone()).collect()
    }
}
