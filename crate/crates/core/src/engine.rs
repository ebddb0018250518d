//! The population recursion shared by the moment solvers.
//!
//! Each node of a [`RecursionTree`] tracks the constants `G(mult + δ, p − 1_s)`
//! for every increment `|δ| ≤ level` and every population variant. Classes are
//! brought in one at a time: starting from `p = 0`, where every constant is 1,
//! the population of class `c` is raised from 0 to `N_c` while all later
//! classes stay empty. At each step the variant equal to `p − 1_c` is copied
//! from the previous step, and variants of empty classes are zero. Layers
//! below `level − 1` follow from the class-`c` PC alone. Layers `level − 1`
//! and `level` solve a linear system of CEs and PCs, plus GCEs on nodes with
//! children; a GCE reads its removed-queue constant from a child at the same
//! population.
//!
//! Nodes are processed deepest first; nodes of equal depth are independent.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::basis::{deltas_of_size, variant_population, BasisLayout};
use crate::equations::{ce, gce, pc, terminal_value, LinearRelation, RelationKind};
use crate::error::{Error, Result};
use crate::linalg::{select_square_subsystem, ExactMatrix, ExactVector, LinalgError};
use crate::metrics::indices_from_constants;
use crate::model::{GIndex, MeanIndices, ValidatedModel};
use crate::oracles::ConvolutionTable;
use crate::scalar::ExactScalar;
use crate::tree::{RecursionNode, RecursionTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    /// Recompute a step with the convolution algorithm when its equation pool
    /// does not determine the unknowns, instead of failing.
    pub fallback: bool,
    /// Solve nodes of equal depth on the rayon pool.
    pub parallel: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { fallback: true, parallel: true }
    }
}

/// A step whose system could not be solved and was filled in by convolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FallbackDiagnostic {
    pub mult: Vec<i64>,
    pub pop: Vec<i64>,
    pub cause: LinalgError,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes: usize,
    /// Population steps taken (per node, summed).
    pub steps: usize,
    /// Linear systems solved exactly.
    pub systems: usize,
    /// Largest system order met at the root.
    pub root_order: usize,
    pub max_order: usize,
    pub fallbacks: Vec<FallbackDiagnostic>,
}

/// Constants aligned to a layout, for base multiplicity `mult` at population
/// `anchor_pop`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisValues {
    pub layout: BasisLayout,
    pub mult: Vec<i64>,
    pub anchor_pop: Vec<i64>,
    pub values: ExactVector,
}

impl BasisValues {
    pub fn get(&self, delta: &[i64], variant: usize) -> Option<&ExactScalar> {
        self.layout.position(delta, variant).map(|i| &self.values[i])
    }

    pub fn index(&self, pos: usize) -> GIndex {
        self.layout.index_of(pos, &self.mult, &self.anchor_pop)
    }

    pub fn iter(&self) -> impl Iterator<Item = (GIndex, &ExactScalar)> + '_ {
        (0..self.values.len()).map(move |i| (self.index(i), &self.values[i]))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A constant supplied by a child node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalRef {
    pub child: usize,
    /// Position in the child's full store (layers `0..=level`).
    pub position: usize,
    pub index: GIndex,
}

/// One relation with its terms sorted by where their values come from. The
/// row states
/// `coeffs·x + Σ prev + Σ external + constant = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledRow {
    pub kind: RelationKind,
    /// Queue for CE/GCE, class for PC.
    pub index: usize,
    pub anchor: GIndex,
    pub coeffs: ExactVector,
    pub prev: Vec<(usize, ExactScalar)>,
    pub external: Vec<(ExternalRef, ExactScalar)>,
    pub constant: ExactScalar,
}

/// The external terms of each selected row.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VMinusAssembly {
    pub rows: Vec<Vec<(ExternalRef, ExactScalar)>>,
}

impl VMinusAssembly {
    /// Right-hand side contribution of each row: `−Σ coeff·value`.
    pub fn assemble(&self, mut value: impl FnMut(&ExternalRef) -> Option<ExactScalar>) -> Result<ExactVector> {
        self.rows
            .iter()
            .map(|terms| {
                let mut acc = ExactScalar::zero();
                for (r, c) in terms {
                    let v = value(r).ok_or_else(|| Error::MissingChildValue(r.index.to_string()))?;
                    acc -= c * v;
                }
                Ok(acc)
            })
            .collect()
    }
}

/// Store layout of a node: all layers `0..=level`.
pub(crate) fn store_layout(model: &ValidatedModel, node: &RecursionNode) -> BasisLayout {
    BasisLayout::for_queues(model.queues(), &node.present, model.classes(), 0, node.level)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Every basis entry is a column, including ones at negative populations.
    Structural,
    /// Known entries are substituted; only true unknowns are columns.
    Solve,
}

enum Slot {
    Const(ExactScalar),
    Unknown(usize),
    Prev(usize),
    External(ExternalRef),
}

/// Everything needed to turn relations at one node and one population into rows.
pub(crate) struct StepCompiler<'a> {
    model: &'a ValidatedModel,
    tree: &'a RecursionTree,
    stores: &'a [BasisLayout],
    node: &'a RecursionNode,
    pop: Vec<i64>,
    class: usize,
    mode: Mode,
    /// Store position to unknown column.
    columns: Vec<Option<usize>>,
    /// Known current values by store position.
    known: Vec<Option<ExactScalar>>,
}

impl<'a> StepCompiler<'a> {
    fn store(&self) -> &BasisLayout {
        &self.stores[self.node.id]
    }

    fn unknowns(&self) -> usize {
        self.columns.iter().flatten().count()
    }

    fn delta(base: &[i64], mult: &[i64]) -> Option<Vec<i64>> {
        let d: Vec<i64> = mult.iter().zip(base).map(|(a, b)| a - b).collect();
        d.iter().all(|&x| x >= 0).then_some(d)
    }

    fn classify(&self, idx: &GIndex) -> Result<Slot> {
        if self.mode == Mode::Solve {
            if let Some(v) = terminal_value(self.model, idx) {
                return Ok(Slot::Const(v));
            }
        }
        let store = self.store();
        let classes = self.model.classes();
        if let Some(delta) = Self::delta(&self.node.mult, &idx.mult) {
            for v in 0..classes {
                if v == self.class + 1 {
                    continue;
                }
                if idx.pop == variant_population(&self.pop, v) {
                    if let Some(pos) = store.position(&delta, v) {
                        return match (self.columns[pos], &self.known[pos]) {
                            (Some(c), _) => Ok(Slot::Unknown(c)),
                            (None, Some(val)) => Ok(Slot::Const(val.clone())),
                            (None, None) => Err(Error::NotInBasis(idx.to_string())),
                        };
                    }
                }
            }
            let prev = variant_population(&self.pop, self.class + 1);
            for v in 0..classes {
                if idx.pop == variant_population(&prev, v) {
                    if let Some(pos) = store.position(&delta, v) {
                        return Ok(Slot::Prev(pos));
                    }
                }
            }
        }
        if idx.pop == self.pop {
            for &(_, child) in &self.node.children {
                let cnode = self.tree.node(child);
                if let Some(delta) = Self::delta(&cnode.mult, &idx.mult) {
                    if let Some(position) = self.stores[child].position(&delta, 0) {
                        return Ok(Slot::External(ExternalRef { child, position, index: idx.clone() }));
                    }
                }
            }
        }
        if let Some(v) = terminal_value(self.model, idx) {
            return Ok(Slot::Const(v));
        }
        Err(Error::NotInBasis(idx.to_string()))
    }

    fn compile(&self, rel: &LinearRelation) -> Result<CompiledRow> {
        let mut row = CompiledRow {
            kind: rel.kind,
            index: rel.index,
            anchor: rel.anchor.clone(),
            coeffs: vec![ExactScalar::zero(); self.unknowns()],
            prev: Vec::new(),
            external: Vec::new(),
            constant: ExactScalar::zero(),
        };
        for (idx, c) in rel.normalized() {
            match self.classify(&idx)? {
                Slot::Const(v) => row.constant += c * v,
                Slot::Unknown(u) => row.coeffs[u] += c,
                Slot::Prev(p) => row.prev.push((p, c)),
                Slot::External(r) => row.external.push((r, c)),
            }
        }
        Ok(row)
    }

    fn pool(&self) -> Result<Vec<CompiledRow>> {
        let skip_negative = self.mode == Mode::Solve;
        pool_relations(self.model, self.node, &self.pop, self.class, skip_negative)?
            .iter()
            .map(|rel| self.compile(rel))
            .collect()
    }
}

/// The relations of one step of `node` at population `pop` with recursion
/// class `class`, in pool order: CEs, PCs of the already completed classes,
/// PCs of the recursion class (one per population variant), then GCEs.
/// With `skip_negative`, recursion-class PCs anchored at a negative
/// population are left out.
pub fn pool_relations(
    model: &ValidatedModel,
    node: &RecursionNode,
    pop: &[i64],
    class: usize,
    skip_negative: bool,
) -> Result<Vec<LinearRelation>> {
    let level = node.level;
    let lower = deltas_of_size(model.queues(), &node.present, level - 1);
    let top = deltas_of_size(model.queues(), &node.present, level);
    let at = |delta: &[i64], pop: Vec<i64>| {
        GIndex::new(node.mult.iter().zip(delta).map(|(m, d)| m + d).collect(), pop)
    };
    let mut rels = Vec::new();
    for &k in &node.present {
        for d in &lower {
            rels.push(ce(model, k, &at(d, pop.to_vec())));
        }
    }
    for r in 0..class {
        for d in &lower {
            rels.push(pc(model, r, &at(d, pop.to_vec())));
        }
    }
    for v in 0..model.classes() {
        if v == class + 1 {
            continue;
        }
        let vp = variant_population(pop, v);
        if skip_negative && vp.iter().any(|&x| x < 0) {
            continue;
        }
        for d in &lower {
            rels.push(pc(model, class, &at(d, vp.clone())));
        }
    }
    for &(k, _) in &node.children {
        for d in top.iter().filter(|d| d[k] == 0) {
            rels.push(gce(model, k, &at(d, pop.to_vec()))?);
        }
    }
    Ok(rels)
}

/// Populations visited by the recursion, in order, each with its recursion
/// class: class `c` rises from 1 to `N_c` with later classes empty.
pub fn trajectory(populations: &[u32]) -> Vec<(Vec<i64>, usize)> {
    let target: Vec<i64> = populations.iter().map(|&n| i64::from(n)).collect();
    let mut out = Vec::new();
    for class in 0..target.len() {
        for n in 1..=target[class] {
            let mut pop = target.clone();
            pop[class] = n;
            for p in pop.iter_mut().skip(class + 1) {
                *p = 0;
            }
            out.push((pop, class));
        }
    }
    out
}

/// A compiled step in matrix form: `A x = V⁻ + B x_prev + K`.
#[derive(Debug, Clone)]
pub struct StepSystem {
    pub a: ExactMatrix,
    pub b: ExactMatrix,
    pub constant: ExactVector,
    pub assembly: VMinusAssembly,
    /// The compiled rows behind each matrix row.
    pub rows: Vec<CompiledRow>,
    /// Basis entries behind the columns of `A` and `B`, in layout order.
    pub columns: Vec<usize>,
}

/// Builds the top-class system of `node` at population `pop` with every
/// basis entry (layers `level − 1` and `level`) as a column of `A` and of
/// `B`. With `select`, a full-rank square subset of the pool is kept (greedy,
/// in pool order); otherwise the whole pool is returned.
pub fn structural_system(
    model: &ValidatedModel,
    tree: &RecursionTree,
    node: usize,
    pop: &[i64],
    select: bool,
) -> Result<StepSystem> {
    let stores: Vec<BasisLayout> = tree.nodes().iter().map(|n| store_layout(model, n)).collect();
    let node = tree.node(node);
    let store = &stores[node.id];
    let columns = store.positions_in_layers(node.level - 1, node.level);
    let mut col_of = vec![None; store.len()];
    for (c, &p) in columns.iter().enumerate() {
        col_of[p] = Some(c);
    }
    let compiler = StepCompiler {
        model,
        tree,
        stores: &stores,
        node,
        pop: pop.to_vec(),
        class: model.classes() - 1,
        mode: Mode::Structural,
        columns: col_of.clone(),
        known: vec![None; store.len()],
    };
    let pool = compiler.pool()?;
    let rows: Vec<CompiledRow> = if select {
        let coeffs: Vec<&[ExactScalar]> = pool.iter().map(|r| r.coeffs.as_slice()).collect();
        let keep = crate::linalg::select_independent_rows(&coeffs, columns.len())?;
        keep.into_iter().map(|i| pool[i].clone()).collect()
    } else {
        pool
    };
    let a = ExactMatrix::from_rows(rows.iter().map(|r| r.coeffs.clone()).collect());
    let mut b = ExactMatrix::zeros(rows.len(), columns.len());
    for (i, r) in rows.iter().enumerate() {
        for (p, c) in &r.prev {
            let col = col_of[*p].ok_or_else(|| Error::LayoutMismatch(format!("previous-step term at {p}")))?;
            b[(i, col)] -= c;
        }
    }
    let constant = rows.iter().map(|r| -r.constant.clone()).collect();
    let assembly = VMinusAssembly { rows: rows.iter().map(|r| r.external.clone()).collect() };
    Ok(StepSystem { a, b, constant, assembly, rows, columns })
}

/// Values of one node at the current step.
type Values = Vec<ExactScalar>;

struct StepOutcome {
    values: Values,
    order: usize,
    fallback: Option<FallbackDiagnostic>,
}

pub(crate) struct Engine<'a> {
    model: &'a ValidatedModel,
    tree: &'a RecursionTree,
    stores: Vec<BasisLayout>,
    options: SolveOptions,
}

impl<'a> Engine<'a> {
    pub(crate) fn new(model: &'a ValidatedModel, tree: &'a RecursionTree, options: SolveOptions) -> Self {
        let stores = tree.nodes().iter().map(|n| store_layout(model, n)).collect();
        Engine { model, tree, stores, options }
    }

    fn initial(&self, id: usize) -> Values {
        self.stores[id]
            .entries()
            .iter()
            .map(|e| if e.variant == 0 { ExactScalar::one() } else { ExactScalar::zero() })
            .collect()
    }

    /// Class-`c` PC solved for `G(mult + δ, vp)` in terms of the previous step.
    fn propagate(&self, node: &RecursionNode, prev: &[ExactScalar], delta: &[i64], variant: usize, class: usize, n: i64) -> ExactScalar {
        let store = &self.stores[node.id];
        let mut acc = self.model.think_time(class) * &prev[store.position(delta, variant).expect("in store")];
        let mut up = delta.to_vec();
        for &k in &node.present {
            let d = self.model.demand(k, class);
            if d.is_zero() {
                continue;
            }
            up[k] += 1;
            let coeff = ExactScalar::from_integer((node.mult[k] + delta[k]).into()) * d;
            acc += coeff * &prev[store.position(&up, variant).expect("in store")];
            up[k] -= 1;
        }
        acc / ExactScalar::from_integer(n.into())
    }

    fn step(&self, id: usize, prev: &[ExactScalar], current: &[Values], pop: &[i64], class: usize) -> Result<StepOutcome> {
        let node = self.tree.node(id);
        let store = &self.stores[id];
        let level = node.level;
        let n = pop[class];
        let mut known: Vec<Option<ExactScalar>> = vec![None; store.len()];
        let mut columns = vec![None; store.len()];
        let mut unknown_positions = Vec::new();
        for (pos, e) in store.entries().iter().enumerate() {
            let vp = variant_population(pop, e.variant);
            known[pos] = if vp.iter().any(|&x| x < 0) {
                Some(ExactScalar::zero())
            } else if e.variant == class + 1 {
                Some(prev[store.position(&e.delta, 0).expect("in store")].clone())
            } else if e.layer() + 1 < level {
                Some(self.propagate(node, prev, &e.delta, e.variant, class, n))
            } else {
                columns[pos] = Some(unknown_positions.len());
                unknown_positions.push(pos);
                None
            };
        }
        let compiler = StepCompiler {
            model: self.model,
            tree: self.tree,
            stores: &self.stores,
            node,
            pop: pop.to_vec(),
            class,
            mode: Mode::Solve,
            columns,
            known,
        };
        let pool = compiler.pool()?;
        let system: Vec<(ExactVector, ExactScalar)> = pool
            .iter()
            .map(|row| {
                let mut rhs = -row.constant.clone();
                for (p, c) in &row.prev {
                    rhs -= c * &prev[*p];
                }
                for (r, c) in &row.external {
                    rhs -= c * &current[r.child][r.position];
                }
                (row.coeffs.clone(), rhs)
            })
            .collect();
        let order = unknown_positions.len();
        let mut values: Values =
            compiler.known.into_iter().map(|v| v.unwrap_or_else(ExactScalar::zero)).collect();
        match select_square_subsystem(&system, order) {
            Ok(sub) => {
                for (pos, x) in unknown_positions.iter().zip(sub.solution) {
                    values[*pos] = x;
                }
                Ok(StepOutcome { values, order, fallback: None })
            }
            Err(cause) if self.options.fallback => {
                log::debug!("step at {pop:?} for node {:?} falls back to convolution: {cause}", node.mult);
                self.convolve(node, pop, &unknown_positions, &mut values);
                let fallback = FallbackDiagnostic { mult: node.mult.clone(), pop: pop.to_vec(), cause };
                Ok(StepOutcome { values, order, fallback: Some(fallback) })
            }
            Err(_) => Err(Error::SingularStep { pop: pop.to_vec() }),
        }
    }

    fn convolve(&self, node: &RecursionNode, pop: &[i64], positions: &[usize], values: &mut Values) {
        let store = &self.stores[node.id];
        let mut by_mult: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
        for &pos in positions {
            by_mult.entry(store.index_of(pos, &node.mult, pop).mult).or_default().push(pos);
        }
        for (mult, group) in by_mult {
            let table = ConvolutionTable::new(self.model, &mult, pop);
            for pos in group {
                values[pos] = table.get(&store.index_of(pos, &node.mult, pop).pop);
            }
        }
    }

    pub(crate) fn run(&self) -> Result<Solution> {
        let model = self.model;
        let classes = model.classes();
        let target: Vec<i64> = model.populations.iter().map(|&n| i64::from(n)).collect();
        let groups = self.tree.depth_groups();
        let mut current: Vec<Values> = (0..self.tree.len()).map(|id| self.initial(id)).collect();
        let mut previous: Option<Vec<Values>> = None;
        let mut stats = SolveStats { nodes: self.tree.len(), ..SolveStats::default() };

        let last = classes - 1;
        for (pop, class) in trajectory(&model.populations) {
            let before = current.clone();
            for group in &groups {
                let solve = |&id: &usize| self.step(id, &before[id], &current, &pop, class).map(|o| (id, o));
                let outcomes: Vec<Result<(usize, StepOutcome)>> = if self.options.parallel && group.len() > 1 {
                    group.par_iter().map(solve).collect()
                } else {
                    group.iter().map(solve).collect()
                };
                for outcome in outcomes {
                    let (id, o) = outcome?;
                    stats.steps += 1;
                    if o.order > 0 && o.fallback.is_none() {
                        stats.systems += 1;
                    }
                    stats.max_order = stats.max_order.max(o.order);
                    if id == 0 {
                        stats.root_order = stats.root_order.max(o.order);
                    }
                    stats.fallbacks.extend(o.fallback);
                    current[id] = o.values;
                }
            }
            if class == last {
                previous = Some(before);
            }
        }

        let root = self.tree.root();
        let store = self.stores[0].clone();
        let values = current.swap_remove(0);
        let prev_values = previous.map(|mut p| p.swap_remove(0));
        let basis_positions = store.positions_in_layers(root.level - 1, root.level);
        let basis = BasisValues {
            layout: root.layout.clone(),
            mult: root.mult.clone(),
            anchor_pop: target.clone(),
            values: basis_positions.iter().map(|&p| values[p].clone()).collect(),
        };
        Ok(Solution {
            model: model.clone(),
            store,
            values,
            previous: prev_values,
            basis,
            stats,
        })
    }
}

/// Result of a moment-recursion solve at the model population `N`.
#[derive(Debug, Clone)]
pub struct Solution {
    model: ValidatedModel,
    store: BasisLayout,
    values: Values,
    /// Root values one step before the end of the last class, when that
    /// class is nonempty.
    previous: Option<Values>,
    basis: BasisValues,
    stats: SolveStats,
}

impl Solution {
    /// The root basis (layers `level − 1` and `level`) at `N`.
    pub fn basis(&self) -> &BasisValues {
        &self.basis
    }

    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }

    pub fn model(&self) -> &ValidatedModel {
        &self.model
    }

    /// All tracked root constants at `N` (layers `0..=level`).
    pub fn all_values(&self) -> BasisValues {
        BasisValues {
            layout: self.store.clone(),
            mult: self.basis.mult.clone(),
            anchor_pop: self.basis.anchor_pop.clone(),
            values: self.values.clone(),
        }
    }

    /// Tracked root constants at `N − 1_R`, if class `R` is nonempty.
    pub fn previous(&self) -> Option<BasisValues> {
        self.previous.as_ref().map(|values| BasisValues {
            layout: self.store.clone(),
            mult: self.basis.mult.clone(),
            anchor_pop: variant_population(&self.basis.anchor_pop, self.model.classes()),
            values: values.clone(),
        })
    }

    /// `G(m, N)`.
    pub fn normalizing_constant(&self) -> ExactScalar {
        let zero = vec![0; self.model.queues()];
        self.values[self.store.position(&zero, 0).expect("layer 0 is tracked")].clone()
    }

    /// Any constant the solve determined: termination values, or
    /// `G(m + δ, P)` with `|δ| ≤ level` and `P` one of `N`, `N − 1_s`,
    /// `N − 1_R − 1_s`.
    pub fn g(&self, idx: &GIndex) -> Result<ExactScalar> {
        if let Some(v) = terminal_value(&self.model, idx) {
            return Ok(v);
        }
        let missing = || Error::NotInBasis(idx.to_string());
        let delta: Vec<i64> = idx.mult.iter().zip(&self.basis.mult).map(|(a, b)| a - b).collect();
        if delta.iter().any(|&d| d < 0) {
            return Err(missing());
        }
        let classes = self.model.classes();
        let n = &self.basis.anchor_pop;
        for v in 0..classes {
            if idx.pop == variant_population(n, v) {
                let pos = self.store.position(&delta, v).ok_or_else(missing)?;
                return Ok(self.values[pos].clone());
            }
        }
        let last = variant_population(n, classes);
        for v in 0..classes {
            if idx.pop == variant_population(&last, v) {
                let pos = self.store.position(&delta, v).ok_or_else(missing)?;
                let prev = self.previous.as_ref().ok_or_else(missing)?;
                return Ok(prev[pos].clone());
            }
        }
        Err(missing())
    }

    /// Throughputs, queue lengths, utilizations, and response times.
    pub fn indices(&self) -> Result<MeanIndices> {
        indices_from_constants(&self.model, |idx| self.g(idx))
    }
}

/// Runs the recursion over `tree`.
pub(crate) fn solve_tree(model: &ValidatedModel, tree: &RecursionTree, options: SolveOptions) -> Result<Solution> {
    Engine::new(model, tree, options).run()
}
