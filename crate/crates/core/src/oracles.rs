//! Independent ground truth. Brute-force state enumeration and the
//! convolution algorithm give normalizing constants; exact MVA gives the
//! indices directly.
//!
//! The per-queue weight of a state with `n_{k,r}` class-`r` jobs at a
//! single-server queue is the multinomial `n_k! / Π_r n_{k,r}!` times
//! `Π_r D_{k,r}^{n_{k,r}}`. That orientation is the one under which the
//! enumerated constants satisfy the convolution recurrence (see the tests).
//! The delay contributes `Π_r Z_r^{j_r} / j_r!`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{GIndex, MeanIndices, ValidatedModel};
use crate::scalar::{factorial, multinomial, pow, ExactScalar};

/// Largest state space [`g_bruteforce`] will walk.
pub const MAX_STATES: u128 = 10_000_000;
/// Largest population lattice [`mva`] will walk.
pub const MAX_LATTICE: u128 = 10_000_000;

/// Mixed-radix enumeration of all population vectors `0 ≤ n ≤ max`.
/// Linear order is compatible with the componentwise order, so `n − 1_r`
/// always precedes `n`.
#[derive(Debug, Clone)]
pub(crate) struct Lattice {
    max: Vec<i64>,
    strides: Vec<usize>,
    len: usize,
}

impl Lattice {
    pub(crate) fn new(max: &[i64]) -> Self {
        let mut strides = Vec::with_capacity(max.len());
        let mut len = 1usize;
        for &m in max {
            strides.push(len);
            len *= (m + 1) as usize;
        }
        Lattice { max: max.to_vec(), strides, len }
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    pub(crate) fn index(&self, n: &[i64]) -> Option<usize> {
        let mut idx = 0;
        for (r, &v) in n.iter().enumerate() {
            if v < 0 || v > self.max[r] {
                return None;
            }
            idx += v as usize * self.strides[r];
        }
        Some(idx)
    }

    pub(crate) fn point(&self, mut idx: usize) -> Vec<i64> {
        self.max
            .iter()
            .map(|&m| {
                let radix = (m + 1) as usize;
                let v = idx % radix;
                idx /= radix;
                v as i64
            })
            .collect()
    }

    /// Index of `n − 1_r` given the index of `n`, if `n_r > 0`.
    pub(crate) fn minus(&self, idx: usize, n: &[i64], r: usize) -> Option<usize> {
        (n[r] > 0).then(|| idx - self.strides[r])
    }
}

/// Weight of `counts` jobs at one single-server queue with demand row `demands`.
pub(crate) fn queue_weight(demands: &[ExactScalar], counts: &[i64]) -> ExactScalar {
    let mut w = ExactScalar::from_integer(multinomial(counts));
    for (d, &n) in demands.iter().zip(counts) {
        if n > 0 {
            w *= pow(d, n as u64);
        }
    }
    w
}

/// Weight of `counts` thinking jobs at the delay station.
pub(crate) fn delay_weight(think: &[ExactScalar], counts: &[i64]) -> ExactScalar {
    let mut w = ExactScalar::one();
    for (z, &n) in think.iter().zip(counts) {
        if n > 0 {
            w *= pow(z, n as u64) / ExactScalar::from_integer(factorial(n as u64));
        }
    }
    w
}

/// Number of ways to spread `pop` over `slots` holding places.
fn state_count(pop: &[i64], slots: u64) -> u128 {
    let mut total: u128 = 1;
    for &n in pop {
        let n = n as u64;
        // C(n + slots − 1, slots − 1)
        let mut c: u128 = 1;
        for i in 0..n {
            c = c * u128::from(slots + i) / u128::from(i + 1);
        }
        total = total.saturating_mul(c);
    }
    total
}

/// Sums the un-normalized product-form weight over every state of the
/// physical network described by `idx`: each of the `Σ mult` queue replicas
/// and the delay are enumerated separately.
pub fn g_bruteforce(model: &ValidatedModel, idx: &GIndex) -> Result<ExactScalar> {
    if idx.has_negative() {
        return Ok(ExactScalar::zero());
    }
    let stations: Vec<usize> = idx
        .mult
        .iter()
        .enumerate()
        .flat_map(|(k, &m)| std::iter::repeat_n(k, m as usize))
        .collect();
    let states = state_count(&idx.pop, stations.len() as u64 + 1);
    if states > MAX_STATES {
        return Err(Error::StateSpaceTooLarge { states });
    }

    let lattice = Lattice::new(&idx.pop);
    let points: Vec<Vec<i64>> = (0..lattice.len()).map(|i| lattice.point(i)).collect();
    // Weight tables indexed by lattice position.
    let queue_tables: Vec<Vec<ExactScalar>> = (0..model.queues())
        .map(|k| points.iter().map(|p| queue_weight(&model.demands[k], p)).collect())
        .collect();
    let delay_table: Vec<ExactScalar> =
        points.iter().map(|p| delay_weight(&model.think_times, p)).collect();

    struct Walk<'a> {
        stations: &'a [usize],
        lattice: &'a Lattice,
        queue_tables: &'a [Vec<ExactScalar>],
        delay_table: &'a [ExactScalar],
        total: ExactScalar,
    }

    impl Walk<'_> {
        fn visit(&mut self, station: usize, remaining: &[i64], acc: &ExactScalar) {
            if station == self.stations.len() {
                let w = &self.delay_table[self.lattice.index(remaining).unwrap()];
                if !w.is_zero() {
                    self.total += acc * w;
                }
                return;
            }
            let table = &self.queue_tables[self.stations[station]];
            let sub = Lattice::new(remaining);
            for i in 0..sub.len() {
                let here = sub.point(i);
                let w = &table[self.lattice.index(&here).unwrap()];
                if w.is_zero() {
                    continue;
                }
                let rest: Vec<i64> = remaining.iter().zip(&here).map(|(a, b)| a - b).collect();
                let next = acc * w;
                self.visit(station + 1, &rest, &next);
            }
        }
    }

    let mut walk = Walk {
        stations: &stations,
        lattice: &lattice,
        queue_tables: &queue_tables,
        delay_table: &delay_table,
        total: ExactScalar::zero(),
    };
    walk.visit(0, &idx.pop, &ExactScalar::one());
    Ok(walk.total)
}

/// `G(mult, n)` for every `0 ≤ n ≤ max_pop`, built by the convolution
/// algorithm: start from the delay alone, then add one queue replica at a
/// time with `G(m, n) = G(m − 1_k, n) + Σ_r D_{k,r} G(m, n − 1_r)`.
#[derive(Debug, Clone)]
pub struct ConvolutionTable {
    lattice: Lattice,
    values: Vec<ExactScalar>,
}

impl ConvolutionTable {
    pub fn new(model: &ValidatedModel, mult: &[i64], max_pop: &[i64]) -> Self {
        assert!(mult.iter().all(|&m| m >= 0) && max_pop.iter().all(|&n| n >= 0));
        let lattice = Lattice::new(max_pop);
        let mut values: Vec<ExactScalar> =
            (0..lattice.len()).map(|i| delay_weight(&model.think_times, &lattice.point(i))).collect();
        for (k, &copies) in mult.iter().enumerate() {
            for _ in 0..copies {
                for i in 0..lattice.len() {
                    let n = lattice.point(i);
                    let mut add = ExactScalar::zero();
                    for (r, d) in model.demands[k].iter().enumerate() {
                        if d.is_zero() {
                            continue;
                        }
                        if let Some(j) = lattice.minus(i, &n, r) {
                            add += d * &values[j];
                        }
                    }
                    values[i] += add;
                }
            }
        }
        ConvolutionTable { lattice, values }
    }

    /// `G(mult, pop)`; zero for negative populations. Panics past `max_pop`.
    pub fn get(&self, pop: &[i64]) -> ExactScalar {
        if pop.iter().any(|&n| n < 0) {
            return ExactScalar::zero();
        }
        let i = self.lattice.index(pop).expect("population outside the table");
        self.values[i].clone()
    }
}

pub fn g_convolution(model: &ValidatedModel, idx: &GIndex) -> ExactScalar {
    if idx.has_negative() {
        return ExactScalar::zero();
    }
    ConvolutionTable::new(model, &idx.mult, &idx.pop).get(&idx.pop)
}

/// Exact multiclass MVA over the population lattice; every replica of queue
/// `k` is an identical single-server station.
pub fn mva(model: &ValidatedModel) -> Result<MeanIndices> {
    let m = model.queues();
    let r = model.classes();
    let target: Vec<i64> = model.populations.iter().map(|&n| i64::from(n)).collect();
    let points: u128 = target.iter().map(|&n| (n + 1) as u128).product();
    if points > MAX_LATTICE {
        return Err(Error::LatticeTooLarge { points });
    }
    let lattice = Lattice::new(&target);
    let mult: Vec<ExactScalar> =
        model.multiplicities.iter().map(|&x| ExactScalar::from_integer(x.into())).collect();

    // Per-replica total queue length at every lattice point.
    let mut qtot: Vec<Vec<ExactScalar>> = vec![vec![ExactScalar::zero(); m]; lattice.len()];
    let mut throughput = vec![ExactScalar::zero(); r];
    let mut queue_length = vec![vec![ExactScalar::zero(); r]; m];

    for i in 1..lattice.len() {
        let n = lattice.point(i);
        let mut x = vec![ExactScalar::zero(); r];
        let mut q = vec![vec![ExactScalar::zero(); r]; m];
        for c in 0..r {
            let Some(prev) = lattice.minus(i, &n, c) else { continue };
            let residence: Vec<ExactScalar> = (0..m)
                .map(|k| model.demand(k, c) * (ExactScalar::one() + &qtot[prev][k]))
                .collect();
            let cycle: ExactScalar = model.think_time(c)
                + residence.iter().zip(&mult).map(|(rk, mk)| rk * mk).sum::<ExactScalar>();
            if cycle.is_zero() {
                return Err(Error::DegenerateModel);
            }
            x[c] = ExactScalar::from_integer(BigInt::from(n[c])) / cycle;
            for k in 0..m {
                q[k][c] = &x[c] * &residence[k];
            }
        }
        qtot[i] = q.iter().map(|row| row.iter().sum()).collect();
        if i + 1 == lattice.len() {
            throughput = x;
            queue_length = q;
        }
    }
    Ok(MeanIndices::from_throughput_and_queues(model, throughput, queue_length))
}

/// Per-station class counts of a network with distinct queues: one row per
/// queue followed by one row for the delay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateVector {
    pub counts: Vec<Vec<u32>>,
}

impl StateVector {
    pub fn queue(&self, k: usize) -> &[u32] {
        &self.counts[k]
    }

    pub fn delay(&self) -> &[u32] {
        self.counts.last().expect("state has a delay row")
    }
}

/// Every feasible state of the model (`m` must be all ones). Intended for
/// small models only.
pub fn enumerate_states(model: &ValidatedModel) -> Result<Vec<StateVector>> {
    if model.multiplicities.iter().any(|&x| x != 1) {
        return Err(Error::ReplicatedQueuesUnsupported);
    }
    let pop: Vec<i64> = model.populations.iter().map(|&n| i64::from(n)).collect();
    let slots = model.queues() + 1;
    let count = state_count(&pop, slots as u64);
    if count > MAX_STATES {
        return Err(Error::StateSpaceTooLarge { states: count });
    }
    let mut out = Vec::new();
    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(slots);
    fn rec(slot: usize, slots: usize, remaining: &[i64], rows: &mut Vec<Vec<u32>>, out: &mut Vec<StateVector>) {
        if slot + 1 == slots {
            rows.push(remaining.iter().map(|&v| v as u32).collect());
            out.push(StateVector { counts: rows.clone() });
            rows.pop();
            return;
        }
        let sub = Lattice::new(remaining);
        for i in 0..sub.len() {
            let here = sub.point(i);
            let rest: Vec<i64> = remaining.iter().zip(&here).map(|(a, b)| a - b).collect();
            rows.push(here.iter().map(|&v| v as u32).collect());
            rec(slot + 1, slots, &rest, rows, out);
            rows.pop();
        }
    }
    rec(0, slots, &pop, &mut rows, &mut out);
    Ok(out)
}
