//! Network parameters and the index type for normalizing constants.

use std::fmt;
use std::ops::Deref;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::ExactScalar;

/// Raw model parameters: `M` distinct queues, `R` classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkModel {
    /// `demands[k][r]`: mean service demand of class `r` at queue `k`.
    pub demands: Vec<Vec<ExactScalar>>,
    /// Per-class think time at the delay station.
    pub think_times: Vec<ExactScalar>,
    /// Number of identical replicas of each distinct queue.
    pub multiplicities: Vec<u32>,
    /// Per-class job population.
    pub populations: Vec<u32>,
}

/// A [`NetworkModel`] whose invariants have been checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidatedModel(NetworkModel);

impl Deref for ValidatedModel {
    type Target = NetworkModel;

    fn deref(&self) -> &NetworkModel {
        &self.0
    }
}

impl ValidatedModel {
    pub fn queues(&self) -> usize {
        self.demands.len()
    }

    pub fn classes(&self) -> usize {
        self.think_times.len()
    }

    pub fn demand(&self, k: usize, r: usize) -> &ExactScalar {
        &self.demands[k][r]
    }

    pub fn think_time(&self, r: usize) -> &ExactScalar {
        &self.think_times[r]
    }

    /// Total number of physical queues, `Σ m_k`.
    pub fn total_queues(&self) -> u64 {
        self.multiplicities.iter().map(|&m| u64::from(m)).sum()
    }

    pub fn total_population(&self) -> u64 {
        self.populations.iter().map(|&n| u64::from(n)).sum()
    }

    /// `G(m, N)` of the model itself.
    pub fn root_index(&self) -> GIndex {
        GIndex::new(
            self.multiplicities.iter().map(|&m| i64::from(m)).collect(),
            self.populations.iter().map(|&n| i64::from(n)).collect(),
        )
    }

    pub fn into_inner(self) -> NetworkModel {
        self.0
    }
}

pub fn validate_model(raw: NetworkModel) -> Result<ValidatedModel> {
    let invalid = |msg: String| Err(Error::InvalidModel(msg));
    let m = raw.demands.len();
    let r = raw.think_times.len();
    if m == 0 {
        return invalid("model needs at least one queue".into());
    }
    if r == 0 {
        return invalid("model needs at least one class".into());
    }
    if raw.multiplicities.len() != m {
        return invalid(format!("{} multiplicities for {m} queues", raw.multiplicities.len()));
    }
    if raw.populations.len() != r {
        return invalid(format!("{} populations for {r} classes", raw.populations.len()));
    }
    for (k, row) in raw.demands.iter().enumerate() {
        if row.len() != r {
            return invalid(format!("queue {k} has {} demands for {r} classes", row.len()));
        }
    }
    if let Some(k) = raw.multiplicities.iter().position(|&mk| mk == 0) {
        return invalid(format!("multiplicity must be ≥ 1 (queue {k})"));
    }
    for (k, row) in raw.demands.iter().enumerate() {
        if row.iter().any(Signed::is_negative) {
            return invalid(format!("negative demand at queue {k}"));
        }
        if row.iter().all(Zero::is_zero) {
            return invalid(format!("queue with all-zero demands (queue {k})"));
        }
    }
    if let Some(c) = raw.think_times.iter().position(Signed::is_negative) {
        return invalid(format!("negative think time for class {c}"));
    }
    Ok(ValidatedModel(raw))
}

/// Multiplies every demand and think time by `c > 0`.
pub fn scale_model(model: &ValidatedModel, c: &ExactScalar) -> Result<ValidatedModel> {
    if !c.is_positive() {
        return Err(Error::NonPositiveScale);
    }
    let mut raw = model.0.clone();
    for d in raw.demands.iter_mut().flatten() {
        *d *= c;
    }
    for z in &mut raw.think_times {
        *z *= c;
    }
    Ok(ValidatedModel(raw))
}

/// Identifies `G(mult, pop)`: a multiplicity vector over the model's `M`
/// distinct queues and a population vector over its `R` classes. Entries may
/// go negative while relations are being generated; such indices evaluate to
/// zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GIndex {
    pub mult: Vec<i64>,
    pub pop: Vec<i64>,
}

impl GIndex {
    pub fn new(mult: Vec<i64>, pop: Vec<i64>) -> Self {
        GIndex { mult, pop }
    }

    pub fn add_queue(&self, k: usize) -> Self {
        let mut out = self.clone();
        out.mult[k] += 1;
        out
    }

    pub fn remove_queue(&self, k: usize) -> Self {
        let mut out = self.clone();
        out.mult[k] -= 1;
        out
    }

    pub fn remove_job(&self, r: usize) -> Self {
        let mut out = self.clone();
        out.pop[r] -= 1;
        out
    }

    pub fn has_negative(&self) -> bool {
        self.mult.iter().chain(&self.pop).any(|&x| x < 0)
    }

    pub fn has_no_queues(&self) -> bool {
        self.mult.iter().all(|&x| x == 0)
    }
}

impl fmt::Display for GIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G({:?}, {:?})", self.mult, self.pop)
    }
}

/// Exact mean performance indices. Queue-indexed entries refer to one replica
/// of each distinct queue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeanIndices {
    pub throughput: Vec<ExactScalar>,
    pub queue_length: Vec<Vec<ExactScalar>>,
    pub utilization: Vec<Vec<ExactScalar>>,
    pub response_time: Vec<ExactScalar>,
    pub residence_time: Vec<Vec<ExactScalar>>,
}

impl MeanIndices {
    /// Fills utilizations and response/residence times from `X` and `Q`.
    /// Classes with zero throughput get zero times.
    pub fn from_throughput_and_queues(
        model: &ValidatedModel,
        throughput: Vec<ExactScalar>,
        queue_length: Vec<Vec<ExactScalar>>,
    ) -> Self {
        let m = model.queues();
        let r = model.classes();
        let utilization = (0..m)
            .map(|k| (0..r).map(|c| model.demand(k, c) * &throughput[c]).collect())
            .collect();
        let response_time = (0..r)
            .map(|c| {
                if throughput[c].is_zero() {
                    ExactScalar::zero()
                } else {
                    ExactScalar::from_integer(model.populations[c].into()) / &throughput[c]
                }
            })
            .collect();
        let residence_time = (0..m)
            .map(|k| {
                (0..r)
                    .map(|c| {
                        if throughput[c].is_zero() {
                            ExactScalar::zero()
                        } else {
                            &queue_length[k][c] / &throughput[c]
                        }
                    })
                    .collect()
            })
            .collect();
        MeanIndices { throughput, queue_length, utilization, response_time, residence_time }
    }

    /// Index of the queue with the largest total utilization (first on ties).
    pub fn bottleneck(&self) -> usize {
        let totals: Vec<ExactScalar> =
            self.utilization.iter().map(|row| row.iter().sum()).collect();
        let mut best = 0;
        for (k, u) in totals.iter().enumerate() {
            if *u > totals[best] {
                best = k;
            }
        }
        best
    }
}
