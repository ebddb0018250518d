//! The plain method of moments: a single model at basis level `R`, using only
//! CEs and PCs.

use crate::basis::BasisLayout;
use crate::engine::{solve_tree, structural_system, Solution, SolveOptions};
use crate::error::{Error, Result};
use crate::linalg::ExactMatrix;
use crate::model::ValidatedModel;
use crate::tree::mom_tree;

/// `A(N)` and `B(N)` of `A(N) V(N) = B(N) V(N − 1_R)` for the level-`R`
/// basis. Rows are the CEs of every queue, then the PCs of classes
/// `1..R−1`, then the class-`R` PCs of every layer-`(R−1)` entry; columns
/// follow `layout`.
pub fn build_mom_system(
    model: &ValidatedModel,
    layout: &BasisLayout,
    anchor_pop: &[i64],
) -> Result<(ExactMatrix, ExactMatrix)> {
    let tree = mom_tree(model);
    if layout != &tree.root().layout {
        return Err(Error::LayoutMismatch(format!(
            "expected the level-{} basis over {} queues and {} classes",
            model.classes(),
            model.queues(),
            model.classes()
        )));
    }
    if anchor_pop.len() != model.classes() {
        return Err(Error::LayoutMismatch(format!("population has {} entries", anchor_pop.len())));
    }
    let system = structural_system(model, &tree, 0, anchor_pop, false)?;
    Ok((system.a, system.b))
}

pub fn mom_solve(model: &ValidatedModel) -> Result<Solution> {
    mom_solve_with(model, SolveOptions::default())
}

pub fn mom_solve_with(model: &ValidatedModel, options: SolveOptions) -> Result<Solution> {
    solve_tree(model, &mom_tree(model), options)
}
