#![allow(dead_code)]

use mbmom::{int, validate_model, ExactScalar, NetworkModel, ValidatedModel};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn model(d: &[&[i64]], z: &[i64], m: &[u32], n: &[u32]) -> ValidatedModel {
    validate_model(NetworkModel {
        demands: d.iter().map(|row| row.iter().map(|&v| int(v)).collect()).collect(),
        think_times: z.iter().map(|&v| int(v)).collect(),
        multiplicities: m.to_vec(),
        populations: n.to_vec(),
    })
    .unwrap()
}

pub fn rational_model(d: Vec<Vec<ExactScalar>>, z: Vec<ExactScalar>, m: &[u32], n: &[u32]) -> ValidatedModel {
    validate_model(NetworkModel { demands: d, think_times: z, multiplicities: m.to_vec(), populations: n.to_vec() })
        .unwrap()
}

/// Random model with `M ≤ max_m`, `R ≤ max_r`, per-class population `≤ max_n`,
/// integer demands `1..=5`, and think times `0..=3`.
pub fn random_model(rng: &mut ChaCha8Rng, max_m: usize, max_r: usize, max_n: u32) -> ValidatedModel {
    let m = rng.gen_range(1..=max_m);
    let r = rng.gen_range(1..=max_r);
    validate_model(NetworkModel {
        demands: (0..m).map(|_| (0..r).map(|_| int(rng.gen_range(1..=5))).collect()).collect(),
        think_times: (0..r).map(|_| int(rng.gen_range(0..=3))).collect(),
        multiplicities: vec![1; m],
        populations: (0..r).map(|_| rng.gen_range(0..=max_n)).collect(),
    })
    .unwrap()
}

/// Like [`random_model`] but with generic rational demands `p/q`,
/// `p in 1..=1000`, `q in 1..=50`. Ties within a class, or classes that are
/// proportional on some subset of queues, make solver steps singular; with
/// generic demands the chance of such a coincidence is negligible, and the
/// 2x2 case is excluded outright.
pub fn tie_free_model(rng: &mut ChaCha8Rng, max_m: usize, max_r: usize, max_n: u32) -> ValidatedModel {
    let m = rng.gen_range(1..=max_m);
    let r = rng.gen_range(1..=max_r);
    let demands = loop {
        let d: Vec<Vec<ExactScalar>> = (0..m)
            .map(|_| (0..r).map(|_| mbmom::ratio(rng.gen_range(1..=1000), rng.gen_range(1..=50))).collect())
            .collect();
        let tie = (0..m).any(|k| {
            (k + 1..m).any(|j| {
                (0..r).any(|a| d[k][a] == d[j][a] || (a + 1..r).any(|b| &d[k][a] * &d[j][b] == &d[j][a] * &d[k][b]))
            })
        });
        if !tie {
            break d;
        }
    };
    validate_model(NetworkModel {
        demands,
        think_times: (0..r).map(|_| mbmom::ratio(rng.gen_range(0..=6), 3)).collect(),
        multiplicities: vec![1; m],
        populations: (0..r).map(|_| rng.gen_range(0..=max_n)).collect(),
    })
    .unwrap()
}

/// `g_convolution` with one table per multiplicity vector, covering every
/// population up to the model's.
pub struct Oracle<'a> {
    model: &'a ValidatedModel,
    max_pop: Vec<i64>,
    tables: std::collections::HashMap<Vec<i64>, mbmom::oracles::ConvolutionTable>,
}

impl<'a> Oracle<'a> {
    pub fn new(model: &'a ValidatedModel) -> Self {
        let max_pop = model.populations.iter().map(|&n| i64::from(n)).collect();
        Oracle { model, max_pop, tables: Default::default() }
    }

    pub fn g(&mut self, idx: &mbmom::GIndex) -> ExactScalar {
        if idx.has_negative() {
            return int(0);
        }
        let (model, max_pop) = (self.model, &self.max_pop);
        self.tables
            .entry(idx.mult.clone())
            .or_insert_with(|| mbmom::oracles::ConvolutionTable::new(model, &idx.mult, max_pop))
            .get(&idx.pop)
    }
}

/// States of the physical network behind `idx`: every queue replica and the
/// delay hold jobs independently per class.
pub fn state_count(idx: &mbmom::GIndex) -> u128 {
    if idx.has_negative() {
        return 0;
    }
    let slots: i64 = idx.mult.iter().sum::<i64>() + 1;
    idx.pop
        .iter()
        .map(|&n| {
            let mut c: u128 = 1;
            for i in 0..n as u128 {
                c = c * (slots as u128 + i) / (i + 1);
            }
            c
        })
        .product()
}

pub fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}
