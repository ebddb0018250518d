//! Bases of normalizing constants: which `G(m + δ, N − 1_s)` a recursion step
//! tracks and how many equations are available to pin them down.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use crate::equations::{ce, gce, pc, LinearRelation};
use crate::model::{validate_model, GIndex, NetworkModel, ValidatedModel};
use crate::scalar::{choose, int};

/// Compares two multiplicity increments from the highest queue index down,
/// so that for two queues `(2,0) < (1,1) < (0,2)`.
pub fn colex(a: &[i64], b: &[i64]) -> Ordering {
    for (x, y) in a.iter().zip(b).rev() {
        match x.cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// All increments of total size `size` spread over `present` (zero elsewhere),
/// in colexicographic order.
pub fn deltas_of_size(queues: usize, present: &[usize], size: usize) -> Vec<Vec<i64>> {
    fn rec(present: &[usize], left: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        match present.split_first() {
            None => {
                if left == 0 {
                    out.push(cur.clone());
                }
            }
            Some((&k, rest)) => {
                for v in 0..=left {
                    cur[k] = v as i64;
                    rec(rest, left - v, cur, out);
                }
                cur[k] = 0;
            }
        }
    }
    let mut out = Vec::new();
    rec(present, size, &mut vec![0; queues], &mut out);
    out.sort_by(|a, b| colex(a, b));
    out
}

/// One tracked constant: `G(m + delta, variant population)`, where variant 0 is
/// the step population `N` and variant `s ≥ 1` is `N − 1_{s−1}` (zero-based
/// class `s − 1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisEntry {
    pub delta: Vec<i64>,
    pub variant: usize,
}

impl BasisEntry {
    pub fn layer(&self) -> usize {
        self.delta.iter().sum::<i64>() as usize
    }
}

/// Ordered set of basis entries for layers `lo..=hi` over a subset of queues.
///
/// Entries are grouped by population variant (`N` first), then by layer from
/// `hi` down to `lo`, then by increment in colexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisLayout {
    queues: usize,
    classes: usize,
    level: usize,
    present: Vec<usize>,
    lo: usize,
    entries: Vec<BasisEntry>,
    positions: HashMap<BasisEntry, usize>,
}

impl BasisLayout {
    /// Layers `lo..=level` over the queues in `present`, with `classes`
    /// population variants.
    pub fn for_queues(queues: usize, present: &[usize], classes: usize, lo: usize, level: usize) -> Self {
        assert!(lo <= level && classes >= 1);
        let mut present = present.to_vec();
        present.sort_unstable();
        present.dedup();
        let layers: Vec<Vec<Vec<i64>>> =
            (lo..=level).rev().map(|size| deltas_of_size(queues, &present, size)).collect();
        let mut entries = Vec::new();
        for variant in 0..classes {
            for layer in &layers {
                for delta in layer {
                    entries.push(BasisEntry { delta: delta.clone(), variant });
                }
            }
        }
        let positions = entries.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        BasisLayout { queues, classes, level, present, lo, entries, positions }
    }

    pub fn queues(&self) -> usize {
        self.queues
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Lowest layer held.
    pub fn lowest_layer(&self) -> usize {
        self.lo
    }

    pub fn present(&self) -> &[usize] {
        &self.present
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[BasisEntry] {
        &self.entries
    }

    pub fn entry(&self, pos: usize) -> &BasisEntry {
        &self.entries[pos]
    }

    pub fn position(&self, delta: &[i64], variant: usize) -> Option<usize> {
        self.positions.get(&BasisEntry { delta: delta.to_vec(), variant }).copied()
    }

    /// Positions of the entries in layers `layer_lo..=layer_hi`, in layout order.
    pub fn positions_in_layers(&self, layer_lo: usize, layer_hi: usize) -> Vec<usize> {
        (0..self.entries.len())
            .filter(|&i| (layer_lo..=layer_hi).contains(&self.entries[i].layer()))
            .collect()
    }

    /// Increments of the given layer, in colexicographic order.
    pub fn layer_deltas(&self, layer: usize) -> Vec<Vec<i64>> {
        deltas_of_size(self.queues, &self.present, layer)
    }

    /// The constant an entry stands for, relative to base multiplicity `mult`
    /// and step population `pop`.
    pub fn index_of(&self, pos: usize, mult: &[i64], pop: &[i64]) -> GIndex {
        let e = &self.entries[pos];
        GIndex::new(
            mult.iter().zip(&e.delta).map(|(m, d)| m + d).collect(),
            variant_population(pop, e.variant),
        )
    }
}

/// `N` for variant 0, `N − 1_{s−1}` for variant `s ≥ 1`.
pub fn variant_population(pop: &[i64], variant: usize) -> Vec<i64> {
    let mut out = pop.to_vec();
    if variant > 0 {
        out[variant - 1] -= 1;
    }
    out
}

/// The level-`l` basis over all `M` queues: layers `l − 1` and `l`, `R` variants.
pub fn enumerate_basis(queues: usize, classes: usize, level: usize) -> BasisLayout {
    assert!(queues >= 1 && classes >= 1 && level >= 1);
    let all: Vec<usize> = (0..queues).collect();
    BasisLayout::for_queues(queues, &all, classes, level - 1, level)
}

fn as_u64(v: usize) -> u64 {
    v as u64
}

/// Layer-`l` unknowns of one step: `C(M+l−1, l)·R`.
pub fn unknown_count(queues: usize, classes: usize, level: usize) -> u64 {
    let (m, l) = (as_u64(queues), as_u64(level));
    choose(m + l - 1, l) * as_u64(classes)
}

/// CEs and non-recursion-class PCs anchored on layer `l − 1`:
/// `C(M+l−2, l−1)·(M+R−1)`.
pub fn count_ce_pc(queues: usize, classes: usize, level: usize) -> u64 {
    let (m, l) = (as_u64(queues), as_u64(level));
    choose(m + l - 2, l - 1) * (m + as_u64(classes) - 1)
}

/// GCEs on layer-`l` constants that do not coincide with a CE, when the
/// `B` highest-indexed queues are removable.
///
/// Each removable queue `k` contributes one row per layer-`l` increment with
/// `δ_k = 0`, which gives `C(M+l−2, l)·M` for `B = M` and `C(M+l−2, l)` for
/// `B = 1`. For `1 < B < M` the count comes from enumerating those rows.
pub fn count_gce_not_ce(queues: usize, level: usize, branching: usize) -> u64 {
    assert!(branching >= 1 && branching <= queues);
    let (m, l) = (as_u64(queues), as_u64(level));
    if branching == queues {
        choose(m + l - 2, l) * m
    } else if branching == 1 {
        choose(m + l - 2, l)
    } else {
        let all: Vec<usize> = (0..queues).collect();
        let layer = deltas_of_size(queues, &all, level);
        (queues - branching..queues)
            .map(|k| layer.iter().filter(|d| d[k] == 0).count() as u64)
            .sum()
    }
}

/// `max{1, R − B}`.
pub fn min_level(queues: usize, classes: usize, branching: usize) -> usize {
    assert!(branching >= 1 && branching <= queues);
    classes.saturating_sub(branching).max(1)
}

/// `(count_ce_pc + count_gce_not_ce, unknown_count)`.
pub fn equation_balance(queues: usize, classes: usize, level: usize, branching: usize) -> (u64, u64) {
    (
        count_ce_pc(queues, classes, level) + count_gce_not_ce(queues, level, branching),
        unknown_count(queues, classes, level),
    )
}

/// Basis level per recursion depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSchedule {
    levels: Vec<usize>,
}

impl LevelSchedule {
    /// Levels at depths `0..M` of a tree over `M` distinct queues with
    /// branching `B`: `max{1, R − min(B, M − d)}`. This is `max{1, R − M + d}`
    /// for `B = M` and the constant `max{1, R − 1}` for `B = 1`.
    pub fn new(queues: usize, classes: usize, branching: usize) -> Self {
        let levels = (0..queues)
            .map(|d| {
                let width = queues - d;
                min_level(width, classes, branching.min(width))
            })
            .collect();
        LevelSchedule { levels }
    }

    pub fn level(&self, depth: usize) -> Option<usize> {
        self.levels.get(depth).copied()
    }

    pub fn depths(&self) -> usize {
        self.levels.len()
    }
}

/// Relation counts obtained by generating relations rather than by formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumeratedCounts {
    pub unknowns: u64,
    pub ce_pc: u64,
    pub gce_not_ce: u64,
}

/// Generates every relation anchored on an entry of the level-`l` basis and
/// counts the ones usable in a step that determines the layer-`l` constants
/// of the top class. A usable relation keeps its terms in the current or
/// previous-step basis (a GCE may also reach a model with one of the `B`
/// highest-indexed queues removed) and touches at least one layer-`l`
/// constant of the current step. GCEs identical to a generated CE are not
/// counted.
pub fn enumerate_counts(queues: usize, classes: usize, level: usize, branching: usize) -> EnumeratedCounts {
    let model = unit_model(queues, classes);
    let layout = enumerate_basis(queues, classes, level);
    let mult = vec![1i64; queues];
    let pop = vec![level as i64 + 2; classes];
    let recursion = classes - 1;
    let prev_pop = variant_population(&pop, recursion + 1);

    let current: HashMap<GIndex, usize> =
        (0..layout.len()).map(|i| (layout.index_of(i, &mult, &pop), layout.entry(i).layer())).collect();
    let previous: HashSet<GIndex> = (0..layout.len()).map(|i| layout.index_of(i, &mult, &prev_pop)).collect();
    let removable: Vec<usize> = if queues > 1 { (queues - branching..queues).collect() } else { Vec::new() };

    let usable = |rel: &LinearRelation, allow_removed: bool| -> bool {
        let mut touches_top = false;
        for t in rel.terms() {
            let known = if let Some(&layer) = current.get(&t.idx) {
                touches_top |= layer == level;
                true
            } else {
                previous.contains(&t.idx)
                    || (allow_removed
                        && t.idx.pop == pop
                        && removable.iter().any(|&k| {
                            t.idx.mult[k] == mult[k] - 1
                                && (0..queues).all(|j| j == k || t.idx.mult[j] >= mult[j])
                        }))
            };
            if !known {
                return false;
            }
        }
        touches_top
    };

    let mut ce_forms = HashSet::new();
    let mut ce_pc = 0u64;
    for i in 0..layout.len() {
        let anchor = layout.index_of(i, &mult, &pop);
        for k in 0..queues {
            let rel = ce(&model, k, &anchor);
            ce_forms.insert(rel.normalized());
            if usable(&rel, false) {
                ce_pc += 1;
            }
        }
        for r in 0..recursion {
            if usable(&pc(&model, r, &anchor), false) {
                ce_pc += 1;
            }
        }
    }
    let mut gce_not_ce = 0u64;
    for i in 0..layout.len() {
        let anchor = layout.index_of(i, &mult, &pop);
        for &k in &removable {
            let rel = gce(&model, k, &anchor).expect("every queue is present");
            if usable(&rel, true) && !ce_forms.contains(&rel.normalized()) {
                gce_not_ce += 1;
            }
        }
    }
    let unknowns = layout.entries().iter().filter(|e| e.layer() == level).count() as u64;
    EnumeratedCounts { unknowns, ce_pc, gce_not_ce }
}

/// A model whose relations keep every term: all demands and think times 1.
fn unit_model(queues: usize, classes: usize) -> ValidatedModel {
    validate_model(NetworkModel {
        demands: vec![vec![int(1); classes]; queues],
        think_times: vec![int(1); classes],
        multiplicities: vec![1; queues],
        populations: vec![0; classes],
    })
    .expect("unit model is valid")
}
