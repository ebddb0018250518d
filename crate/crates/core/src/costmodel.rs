//! Closed-form time and space costs per solver iteration, for comparing the
//! plain moment recursion with its single- and multi-branched variants.
//!
//! Costs are abstract operation and storage counts. The logarithm inside the
//! exact-arithmetic overhead is evaluated in `f64` and converted exactly, so
//! every algorithm goes through the same rounding.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{choose, to_f64, ExactScalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CostAlgorithm {
    Mom,
    MbB1,
    MbBm,
}

impl CostAlgorithm {
    pub const ALL: [CostAlgorithm; 3] = [CostAlgorithm::Mom, CostAlgorithm::MbB1, CostAlgorithm::MbBm];

    pub fn name(self) -> &'static str {
        match self {
            CostAlgorithm::Mom => "mom",
            CostAlgorithm::MbB1 => "mb-b1",
            CostAlgorithm::MbBm => "mb-bm",
        }
    }
}

impl fmt::Display for CostAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CostAlgorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        CostAlgorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| format!("unknown cost algorithm `{s}` (expected mom, mb-b1, or mb-bm)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostReport {
    pub algorithm: CostAlgorithm,
    pub queues: u64,
    pub classes: u64,
    pub population: u64,
    pub time: ExactScalar,
    pub space: ExactScalar,
}

fn exact(x: f64) -> ExactScalar {
    ExactScalar::from_float(x).expect("finite logarithm")
}

fn nat(v: u64) -> ExactScalar {
    ExactScalar::from_integer(v.into())
}

/// `N log(M + N)`: the length of one multiprecision constant.
fn storage_per_constant(queues: u64, population: u64) -> ExactScalar {
    nat(population) * exact(((queues + population) as f64).ln())
}

/// Order of the level-`l` system over `queues` queues: `C(M+l−1, l)·R`.
fn order(queues: u64, classes: u64, level: u64) -> ExactScalar {
    nat(choose(queues + level - 1, level) * classes)
}

fn level_single(classes: u64) -> u64 {
    classes.saturating_sub(1).max(1)
}

fn level_multi(queues: u64, classes: u64, depth: u64) -> u64 {
    (classes + depth).saturating_sub(queues).max(1)
}

/// Exact-arithmetic overhead of one solver iteration on a model with
/// `m_eff` queues at basis level `l`: `N log(M_eff + N)·C(M_eff+l−1, l)·R`.
pub fn sexact(m_eff: u64, classes: u64, population: u64, level: u64) -> ExactScalar {
    assert!(m_eff >= 1 && classes >= 1 && population >= 1 && level >= 1);
    storage_per_constant(m_eff, population) * order(m_eff, classes, level)
}

/// `(C(M+R−1, R)·R)²·S_exact` at level `R`.
pub fn time_mom(queues: u64, classes: u64, population: u64) -> ExactScalar {
    let o = order(queues, classes, classes);
    &o * &o * sexact(queues, classes, population, classes)
}

fn check_branching(queues: u64, branching: u64) -> Result<CostAlgorithm> {
    if branching == 0 || branching > queues {
        return Err(Error::InvalidBranching { branching: branching as usize, queues: queues as usize });
    }
    if branching == queues {
        Ok(CostAlgorithm::MbBm)
    } else if branching == 1 {
        Ok(CostAlgorithm::MbB1)
    } else {
        Err(Error::UnsupportedBranching { branching: branching as usize, queues: queues as usize })
    }
}

/// Sum over recursion depths `d = 0..M−1` of (models at depth `d`) × (system
/// order)² × `S_exact`. `B = 1` keeps one model per depth at level
/// `max{1, R−1}`; `B = M` has `C(M, M−d)` models at level `max{1, R−M+d}`.
pub fn time_mb(queues: u64, classes: u64, population: u64, branching: u64) -> Result<ExactScalar> {
    let algorithm = check_branching(queues, branching)?;
    let mut total = ExactScalar::zero();
    for d in 0..queues {
        let width = queues - d;
        let (models, level) = match algorithm {
            CostAlgorithm::MbB1 => (1, level_single(classes)),
            _ => (choose(queues, width), level_multi(queues, classes, d)),
        };
        let o = order(width, classes, level);
        total += nat(models) * &o * &o * sexact(width, classes, population, level);
    }
    Ok(total)
}

/// `2(C(M+R−1, R)·R)² + 3(C(M+R−2, R−1)·R)·S_nc`.
pub fn space_mom(queues: u64, classes: u64, population: u64) -> ExactScalar {
    let o = order(queues, classes, classes);
    let lower = order(queues, classes, classes - 1);
    nat(2) * &o * &o + nat(3) * lower * storage_per_constant(queues, population)
}

/// `B = 1`: the root system, `2o² + 3o·S_nc` with `o` the order at level
/// `max{1, R−1}`. `B = M`: the widest depth,
/// `max_d C(M, M−d)·(2o_d² + 2o_d·S_nc)` over `d = 0..M−1`.
pub fn space_mb(queues: u64, classes: u64, population: u64, branching: u64) -> Result<ExactScalar> {
    let algorithm = check_branching(queues, branching)?;
    let snc = storage_per_constant(queues, population);
    if algorithm == CostAlgorithm::MbB1 {
        let o = order(queues, classes, level_single(classes));
        return Ok(nat(2) * &o * &o + nat(3) * &o * &snc);
    }
    let mut best = ExactScalar::zero();
    for d in 0..queues {
        let width = queues - d;
        let o = order(width, classes, level_multi(queues, classes, d));
        let v = nat(choose(queues, width)) * (nat(2) * &o * &o + nat(2) * &o * &snc);
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

pub fn cost(algorithm: CostAlgorithm, queues: u64, classes: u64, population: u64) -> CostReport {
    let (time, space) = match algorithm {
        CostAlgorithm::Mom => (time_mom(queues, classes, population), space_mom(queues, classes, population)),
        CostAlgorithm::MbB1 => (
            time_mb(queues, classes, population, 1).expect("B = 1 is always supported"),
            space_mb(queues, classes, population, 1).expect("B = 1 is always supported"),
        ),
        CostAlgorithm::MbBm => (
            time_mb(queues, classes, population, queues).expect("B = M is always supported"),
            space_mb(queues, classes, population, queues).expect("B = M is always supported"),
        ),
    };
    CostReport { algorithm, queues, classes, population, time, space }
}

/// One report per `(M, R, algorithm)`, ordered by `M`, then `R`, then the
/// order of `algorithms`.
pub fn emit_surface(queues: &[u64], classes: &[u64], population: u64, algorithms: &[CostAlgorithm]) -> Vec<CostReport> {
    let mut out = Vec::with_capacity(queues.len() * classes.len() * algorithms.len());
    for &m in queues {
        for &r in classes {
            for &a in algorithms {
                out.push(cost(a, m, r, population));
            }
        }
    }
    out
}

/// Writes `algorithm,M,R,N,time,space` rows with LF line endings; costs are
/// printed as decimals.
pub fn write_csv<W: Write>(out: W, reports: &[CostReport]) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["algorithm", "M", "R", "N", "time", "space"])?;
    for r in reports {
        w.write_record([
            r.algorithm.name().to_string(),
            r.queues.to_string(),
            r.classes.to_string(),
            r.population.to_string(),
            format!("{:.6e}", to_f64(&r.time)),
            format!("{:.6e}", to_f64(&r.space)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `a / b` as a float, for reporting ratios of costs.
pub fn ratio_f64(a: &ExactScalar, b: &ExactScalar) -> f64 {
    if b.is_zero() {
        return f64::INFINITY;
    }
    to_f64(&(a / b))
}

impl CostReport {
    pub fn is_positive(&self) -> bool {
        self.time > ExactScalar::zero() && self.space > ExactScalar::zero()
    }
}
