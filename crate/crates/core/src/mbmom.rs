//! The multi-branched method of moments: GCEs let each step use a basis of
//! lower level, at the price of solving the models with queues removed.

use std::fmt;
use std::str::FromStr;

use crate::engine::{solve_tree, structural_system, Solution, SolveOptions, VMinusAssembly};
use crate::error::{Error, Result};
use crate::linalg::{ExactMatrix, ExactVector};
use crate::model::ValidatedModel;
use crate::tree::{build_tree, RecursionTree};

/// How many GCEs each step may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branching {
    /// One per distinct queue (`B = M`).
    #[default]
    Max,
    Fixed(usize),
}

impl Branching {
    pub fn resolve(self, queues: usize) -> Result<usize> {
        match self {
            Branching::Max => Ok(queues),
            Branching::Fixed(b) if (1..=queues).contains(&b) => Ok(b),
            Branching::Fixed(b) => Err(Error::InvalidBranching { branching: b, queues }),
        }
    }
}

impl fmt::Display for Branching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branching::Max => f.write_str("max"),
            Branching::Fixed(b) => write!(f, "{b}"),
        }
    }
}

impl FromStr for Branching {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "max" | "M" => Ok(Branching::Max),
            other => other
                .parse::<usize>()
                .map(Branching::Fixed)
                .map_err(|_| format!("branching must be `max` or a positive integer, got `{other}`")),
        }
    }
}

pub fn tree_for(model: &ValidatedModel, branching: Branching) -> Result<RecursionTree> {
    build_tree(model, branching.resolve(model.queues())?)
}

/// The system `A_l(N) V_l(N) = V⁻_l(N) + B_l(N) V_l(N − 1_R)` of one node:
/// both matrices plus the child terms that make up `V⁻_l(N)`. Rows are
/// picked greedily from the pool (CEs, PCs of classes `1..R−1`, class-`R`
/// PCs, GCEs) until the system is square and nonsingular.
pub fn build_mb_system(
    model: &ValidatedModel,
    tree: &RecursionTree,
    node: usize,
    anchor_pop: &[i64],
) -> Result<(ExactMatrix, ExactMatrix, VMinusAssembly)> {
    if anchor_pop.len() != model.classes() {
        return Err(Error::LayoutMismatch(format!("population has {} entries", anchor_pop.len())));
    }
    let system = structural_system(model, tree, node, anchor_pop, true)?;
    Ok((system.a, system.b, system.assembly))
}

/// `V⁻_l(N)`: one entry per row of the assembly, from the children's values.
pub fn assemble_vminus(
    assembly: &VMinusAssembly,
    child_value: impl FnMut(&crate::engine::ExternalRef) -> Option<crate::scalar::ExactScalar>,
) -> Result<ExactVector> {
    assembly.assemble(child_value)
}

pub fn mbmom_solve(model: &ValidatedModel, branching: Branching) -> Result<Solution> {
    mbmom_solve_with(model, branching, SolveOptions::default())
}

pub fn mbmom_solve_with(model: &ValidatedModel, branching: Branching, options: SolveOptions) -> Result<Solution> {
    solve_tree(model, &tree_for(model, branching)?, options)
}
