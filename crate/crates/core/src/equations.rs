//! Linear recurrences among normalizing constants, generated as symbolic
//! relations over [`GIndex`] terms.
//!
//! The convolution expression (CE) adds a copy of queue `k`, and its
//! generalized form (GCE) removes one:
//!
//! ```text
//! CE:  G(m+1_k, N) = G(m, N) + Σ_r D_{k,r} G(m+1_k, N−1_r)
//! GCE: G(m, N)     = G(m−1_k, N) + Σ_r D_{k,r} G(m, N−1_r)
//! ```
//!
//! The population constraint (PC) removes a class-`r` job:
//! `N_r G(m, N) = Z_r G(m, N−1_r) + Σ_k m_k D_{k,r} G(m+1_k, N−1_r)`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{GIndex, ValidatedModel};
use crate::oracles::{delay_weight, ConvolutionTable};
use crate::scalar::ExactScalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelationKind {
    Ce,
    Pc,
    Gce,
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelationKind::Ce => "CE",
            RelationKind::Pc => "PC",
            RelationKind::Gce => "GCE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub coeff: ExactScalar,
    pub idx: GIndex,
}

/// `Σ lhs = Σ rhs`. Right-hand terms with a zero coefficient are dropped; the
/// single defining left-hand term is always kept (its coefficient is zero only
/// for a PC anchored at `N_r = 0`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearRelation {
    pub kind: RelationKind,
    /// Queue index for CE/GCE, class index for PC.
    pub index: usize,
    pub anchor: GIndex,
    pub lhs: Vec<Term>,
    pub rhs: Vec<Term>,
}

impl LinearRelation {
    /// All terms moved to one side: `Σ c·G = 0`, merged by index, zeros dropped.
    pub fn normalized(&self) -> BTreeMap<GIndex, ExactScalar> {
        let mut out: BTreeMap<GIndex, ExactScalar> = BTreeMap::new();
        for t in &self.lhs {
            *out.entry(t.idx.clone()).or_insert_with(ExactScalar::zero) += &t.coeff;
        }
        for t in &self.rhs {
            *out.entry(t.idx.clone()).or_insert_with(ExactScalar::zero) -= &t.coeff;
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// `Σ lhs − Σ rhs` with `g` supplying each constant.
    pub fn residual(&self, mut g: impl FnMut(&GIndex) -> ExactScalar) -> ExactScalar {
        let mut acc = ExactScalar::zero();
        for t in &self.lhs {
            acc += &t.coeff * g(&t.idx);
        }
        for t in &self.rhs {
            acc -= &t.coeff * g(&t.idx);
        }
        acc
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.lhs.iter().chain(&self.rhs)
    }
}

fn push(terms: &mut Vec<Term>, coeff: ExactScalar, idx: GIndex) {
    if !coeff.is_zero() {
        terms.push(Term { coeff, idx });
    }
}

/// CE for queue `k` anchored at `(m′, N′)`:
/// `G(m′+1_k, N′) = G(m′, N′) + Σ_r D_{k,r} G(m′+1_k, N′−1_r)`.
pub fn ce(model: &ValidatedModel, k: usize, anchor: &GIndex) -> LinearRelation {
    let top = anchor.add_queue(k);
    let mut rhs = vec![Term { coeff: ExactScalar::one(), idx: anchor.clone() }];
    for r in 0..model.classes() {
        push(&mut rhs, model.demand(k, r).clone(), top.remove_job(r));
    }
    LinearRelation {
        kind: RelationKind::Ce,
        index: k,
        anchor: anchor.clone(),
        lhs: vec![Term { coeff: ExactScalar::one(), idx: top }],
        rhs,
    }
}

/// PC for class `r` anchored at `(m′, N′)`; the queue coefficients use the
/// anchor's multiplicities `m′_k`.
pub fn pc(model: &ValidatedModel, r: usize, anchor: &GIndex) -> LinearRelation {
    let lower = anchor.remove_job(r);
    let mut rhs = Vec::new();
    push(&mut rhs, model.think_time(r).clone(), lower.clone());
    for k in 0..model.queues() {
        let mk = anchor.mult[k];
        if mk > 0 {
            push(&mut rhs, ExactScalar::from_integer(mk.into()) * model.demand(k, r), lower.add_queue(k));
        }
    }
    LinearRelation {
        kind: RelationKind::Pc,
        index: r,
        anchor: anchor.clone(),
        lhs: vec![Term { coeff: ExactScalar::from_integer(anchor.pop[r].into()), idx: anchor.clone() }],
        rhs,
    }
}

/// GCE for queue `k` anchored at `(m′, N′)` with `m′_k ≥ 1`:
/// `G(m′, N′) = G(m′−1_k, N′) + Σ_r D_{k,r} G(m′, N′−1_r)`.
pub fn gce(model: &ValidatedModel, k: usize, anchor: &GIndex) -> Result<LinearRelation> {
    if anchor.mult[k] < 1 {
        return Err(Error::QueueAbsent { queue: k });
    }
    let mut rhs = vec![Term { coeff: ExactScalar::one(), idx: anchor.remove_queue(k) }];
    for r in 0..model.classes() {
        push(&mut rhs, model.demand(k, r).clone(), anchor.remove_job(r));
    }
    Ok(LinearRelation {
        kind: RelationKind::Gce,
        index: k,
        anchor: anchor.clone(),
        lhs: vec![Term { coeff: ExactScalar::one(), idx: anchor.clone() }],
        rhs,
    })
}

/// Known values: zero for any negative entry, and the delay-only constant
/// `Π_r Z_r^{N_r} / N_r!` when no queue is present (so `G(0, 0) = 1`).
pub fn terminal_value(model: &ValidatedModel, idx: &GIndex) -> Option<ExactScalar> {
    if idx.has_negative() {
        return Some(ExactScalar::zero());
    }
    if idx.has_no_queues() {
        return Some(delay_weight(&model.think_times, &idx.pop));
    }
    None
}

/// `G` of a model with at most one distinct queue type (plus the delay), by
/// the convolution recurrence on that queue's multiplicity.
pub fn leaf_g(model: &ValidatedModel, idx: &GIndex) -> Result<ExactScalar> {
    if idx.mult.iter().filter(|&&m| m != 0).count() > 1 {
        return Err(Error::NotLeaf);
    }
    if let Some(v) = terminal_value(model, idx) {
        return Ok(v);
    }
    Ok(ConvolutionTable::new(model, &idx.mult, &idx.pop).get(&idx.pop))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_model, NetworkModel};
    use crate::oracles::{g_bruteforce, g_convolution};
    use crate::scalar::{int, ratio};

    fn model(d: &[&[i64]], z: &[i64], m: &[u32], n: &[u32]) -> ValidatedModel {
        validate_model(NetworkModel {
            demands: d.iter().map(|row| row.iter().map(|&v| int(v)).collect()).collect(),
            think_times: z.iter().map(|&v| int(v)).collect(),
            multiplicities: m.to_vec(),
            populations: n.to_vec(),
        })
        .unwrap()
    }

    fn gi(m: &[i64], n: &[i64]) -> GIndex {
        GIndex::new(m.to_vec(), n.to_vec())
    }

    #[test]
    fn ce_single_queue_instance() {
        let md = model(&[&[2]], &[0], &[1], &[1]);
        let rel = ce(&md, 0, &gi(&[0], &[1]));
        assert_eq!(rel.lhs, vec![Term { coeff: int(1), idx: gi(&[1], &[1]) }]);
        assert_eq!(
            rel.rhs,
            vec![
                Term { coeff: int(1), idx: gi(&[0], &[1]) },
                Term { coeff: int(2), idx: gi(&[1], &[0]) },
            ]
        );
        assert!(rel.residual(|i| g_convolution(&md, i)).is_zero());
    }

    #[test]
    fn ce_at_zero_population() {
        let md = model(&[&[2, 3]], &[1, 1], &[1], &[0, 0]);
        let rel = ce(&md, 0, &gi(&[1], &[0, 0]));
        // population-decremented terms are terminal zeros
        for t in &rel.rhs[1..] {
            assert_eq!(terminal_value(&md, &t.idx), Some(int(0)));
        }
        assert!(rel.residual(|i| g_convolution(&md, i)).is_zero());
    }

    #[test]
    fn pc_matches_printed_block_row() {
        // Row for PC r=1 anchored at m + 1_1 in the 2-queue 2-class system:
        // N_1 G^{+1} − Z_1 G^{+1}_1 − 2 D_{1,1} G^{+1,1}_1 − D_{2,1} G^{+1,2}_1.
        let md = model(&[&[3, 5], &[7, 11]], &[13, 17], &[1, 1], &[4, 3]);
        let rel = pc(&md, 0, &gi(&[2, 1], &[4, 3]));
        let norm = rel.normalized();
        assert_eq!(norm[&gi(&[2, 1], &[4, 3])], int(4));
        assert_eq!(norm[&gi(&[2, 1], &[3, 3])], int(-13));
        assert_eq!(norm[&gi(&[3, 1], &[3, 3])], int(-6));
        assert_eq!(norm[&gi(&[2, 2], &[3, 3])], int(-7));
        assert_eq!(norm.len(), 4);
    }

    #[test]
    fn pc_with_empty_class() {
        let md = model(&[&[1, 2]], &[1, 1], &[1], &[0, 2]);
        let rel = pc(&md, 0, &gi(&[1], &[0, 2]));
        assert!(rel.lhs[0].coeff.is_zero());
        assert!(rel.rhs.iter().all(|t| t.idx.has_negative()));
        assert!(rel.residual(|i| g_convolution(&md, i)).is_zero());
    }

    #[test]
    fn gce_external_term() {
        let md = model(&[&[1, 2], &[3, 4]], &[0, 0], &[1, 1], &[2, 2]);
        // anchored at m + 2·1_1, removing queue 2
        let rel = gce(&md, 1, &gi(&[3, 1], &[2, 2])).unwrap();
        assert!(rel.rhs.iter().any(|t| t.idx == gi(&[3, 0], &[2, 2])));
        assert!(rel.residual(|i| g_convolution(&md, i)).is_zero());
    }

    #[test]
    fn gce_needs_the_queue() {
        let md = model(&[&[1], &[3]], &[0], &[1, 1], &[2]);
        assert!(matches!(gce(&md, 1, &gi(&[1, 0], &[2])), Err(Error::QueueAbsent { queue: 1 })));
    }

    #[test]
    fn gce_above_anchor_is_ce() {
        let md = model(&[&[1, 2], &[3, 4]], &[1, 0], &[1, 1], &[2, 2]);
        for k in 0..2 {
            let anchor = gi(&[1, 2], &[2, 1]);
            let c = ce(&md, k, &anchor);
            let g = gce(&md, k, &anchor.add_queue(k)).unwrap();
            assert_eq!(c.normalized(), g.normalized());
        }
    }

    #[test]
    fn terminal_values() {
        let md = model(&[&[1]], &[1], &[1], &[2]);
        assert_eq!(terminal_value(&md, &gi(&[1], &[-1])), Some(int(0)));
        assert_eq!(terminal_value(&md, &gi(&[-1], &[1])), Some(int(0)));
        assert_eq!(terminal_value(&md, &gi(&[0], &[0])), Some(int(1)));
        assert_eq!(terminal_value(&md, &gi(&[0], &[2])), Some(ratio(1, 2)));
        assert_eq!(terminal_value(&md, &gi(&[1], &[2])), None);
        assert_eq!(g_bruteforce(&md, &gi(&[0], &[2])).unwrap(), ratio(1, 2));
    }

    #[test]
    fn leaf_values() {
        let md = model(&[&[3]], &[0], &[1], &[4]);
        assert_eq!(leaf_g(&md, &gi(&[1], &[4])).unwrap(), int(81));
        assert_eq!(leaf_g(&md, &gi(&[0], &[0])).unwrap(), int(1));

        let md = model(&[&[1, 2], &[3, 1]], &[1, 2], &[2, 1], &[2, 2]);
        for n1 in 0..3 {
            for n2 in 0..3 {
                let idx = gi(&[2, 0], &[n1, n2]);
                assert_eq!(leaf_g(&md, &idx).unwrap(), g_bruteforce(&md, &idx).unwrap());
            }
        }
        assert!(matches!(leaf_g(&md, &gi(&[1, 1], &[1, 1])), Err(Error::NotLeaf)));
    }
}
