//! The recursion over models with queues removed, induced by the GCEs.

use std::collections::HashMap;

use crate::basis::{enumerate_basis, min_level, BasisLayout};
use crate::error::{Error, Result};
use crate::model::ValidatedModel;

/// One model in the recursion: the input network with some queue copies
/// removed.
#[derive(Debug, Clone)]
pub struct RecursionNode {
    pub id: usize,
    /// Multiplicity of each distinct queue in this model.
    pub mult: Vec<i64>,
    /// Queues with at least one copy left.
    pub present: Vec<usize>,
    /// Number of queue copies removed relative to the root.
    pub depth: usize,
    pub level: usize,
    /// Queues removed by this node's GCEs, highest index first, each paired
    /// with the id of the child that supplies the external constants.
    pub children: Vec<(usize, usize)>,
    /// Layers `level − 1` and `level` over the present queues.
    pub layout: BasisLayout,
}

impl RecursionNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct RecursionTree {
    nodes: Vec<RecursionNode>,
    branching: usize,
}

impl RecursionTree {
    pub fn root(&self) -> &RecursionNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: usize) -> &RecursionNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[RecursionNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    /// Node ids grouped by depth, deepest group first.
    pub fn depth_groups(&self) -> Vec<Vec<usize>> {
        let max = self.nodes.iter().map(|n| n.depth).max().unwrap_or(0);
        let mut groups = vec![Vec::new(); max + 1];
        for n in &self.nodes {
            groups[max - n.depth].push(n.id);
        }
        groups
    }
}

fn layout_for(model: &ValidatedModel, present: &[usize], level: usize) -> BasisLayout {
    BasisLayout::for_queues(model.queues(), present, model.classes(), level - 1, level)
}

/// A single node at level `R` with no GCEs: the plain moment recursion.
pub fn mom_tree(model: &ValidatedModel) -> RecursionTree {
    let level = model.classes();
    let mult: Vec<i64> = model.multiplicities.iter().map(|&m| i64::from(m)).collect();
    let present: Vec<usize> = (0..model.queues()).collect();
    let layout = enumerate_basis(model.queues(), model.classes(), level);
    let root = RecursionNode { id: 0, mult, present, depth: 0, level, children: Vec::new(), layout };
    RecursionTree { nodes: vec![root], branching: 0 }
}

/// Builds the recursion for branching factor `B`.
///
/// A node whose model has `P` distinct queues removes one copy of each of its
/// `min(B, P)` highest-indexed queues (none when `P = 1`) and uses basis level
/// `max{1, R − min(B, P)}`. Nodes are shared by multiplicity vector, so with
/// `B = M` and distinct queues every nonempty subset appears exactly once.
pub fn build_tree(model: &ValidatedModel, branching: usize) -> Result<RecursionTree> {
    let queues = model.queues();
    if branching < 1 || branching > queues {
        return Err(Error::InvalidBranching { branching, queues });
    }
    let classes = model.classes();
    let root: Vec<i64> = model.multiplicities.iter().map(|&m| i64::from(m)).collect();

    let mut nodes: Vec<RecursionNode> = Vec::new();
    let mut ids: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut stack = vec![root.clone()];
    ids.insert(root.clone(), 0);
    nodes.push(placeholder(0));
    while let Some(mult) = stack.pop() {
        let id = ids[&mult];
        let present: Vec<usize> = (0..queues).filter(|&k| mult[k] > 0).collect();
        let width = present.len();
        let removable = branching.min(width);
        let level = min_level(width, classes, removable);
        let mut children = Vec::new();
        if width > 1 {
            for &k in present.iter().rev().take(removable) {
                let mut child = mult.clone();
                child[k] -= 1;
                let cid = *ids.entry(child.clone()).or_insert_with(|| {
                    nodes.push(placeholder(nodes.len()));
                    stack.push(child);
                    nodes.len() - 1
                });
                children.push((k, cid));
            }
        }
        let depth = root.iter().zip(&mult).map(|(a, b)| (a - b) as usize).sum();
        let layout = layout_for(model, &present, level);
        nodes[id] = RecursionNode { id, mult, present, depth, level, children, layout };
    }
    Ok(RecursionTree { nodes, branching })
}

fn placeholder(id: usize) -> RecursionNode {
    RecursionNode {
        id,
        mult: Vec::new(),
        present: Vec::new(),
        depth: 0,
        level: 1,
        children: Vec::new(),
        layout: BasisLayout::for_queues(0, &[], 1, 0, 0),
    }
}
