//! Performance indices and state probabilities from normalizing constants.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::{GIndex, MeanIndices, ValidatedModel};
use crate::oracles::{delay_weight, queue_weight, StateVector};
use crate::scalar::ExactScalar;

/// `X_r = G(m, N − 1_r) / G(m, N)` and
/// `Q_{k,r} = D_{k,r} G(m + 1_k, N − 1_r) / G(m, N)` (per replica of queue
/// `k`), plus the derived utilizations and times.
pub fn indices_from_constants(
    model: &ValidatedModel,
    mut g: impl FnMut(&GIndex) -> Result<ExactScalar>,
) -> Result<MeanIndices> {
    let root = model.root_index();
    let total = g(&root)?;
    if total.is_zero() {
        return Err(Error::DegenerateModel);
    }
    let classes = model.classes();
    let queues = model.queues();
    let mut throughput = Vec::with_capacity(classes);
    let mut queue_length = vec![Vec::with_capacity(classes); queues];
    for r in 0..classes {
        let less = root.remove_job(r);
        throughput.push(g(&less)? / &total);
        for (k, row) in queue_length.iter_mut().enumerate() {
            let d = model.demand(k, r);
            row.push(if d.is_zero() { ExactScalar::zero() } else { d * g(&less.add_queue(k))? / &total });
        }
    }
    Ok(MeanIndices::from_throughput_and_queues(model, throughput, queue_length))
}

/// Equilibrium probability of `state` (one row per queue, then the delay row)
/// given `G(m, N)`. Every queue must have multiplicity 1.
pub fn state_probability(model: &ValidatedModel, state: &StateVector, g_norm: &ExactScalar) -> Result<ExactScalar> {
    if model.multiplicities.iter().any(|&m| m != 1) {
        return Err(Error::ReplicatedQueuesUnsupported);
    }
    let queues = model.queues();
    let classes = model.classes();
    if state.counts.len() != queues + 1 {
        return Err(Error::InfeasibleState(format!(
            "expected {} rows (queues then delay), got {}",
            queues + 1,
            state.counts.len()
        )));
    }
    if let Some(row) = state.counts.iter().position(|row| row.len() != classes) {
        return Err(Error::InfeasibleState(format!("row {row} does not have {classes} entries")));
    }
    for r in 0..classes {
        let placed: u64 = state.counts.iter().map(|row| u64::from(row[r])).sum();
        if placed != u64::from(model.populations[r]) {
            return Err(Error::InfeasibleState(format!(
                "class {r} has {placed} jobs placed but population {}",
                model.populations[r]
            )));
        }
    }
    if g_norm.is_zero() {
        return Err(Error::DegenerateModel);
    }
    let as_i64 = |row: &[u32]| row.iter().map(|&n| i64::from(n)).collect::<Vec<_>>();
    let mut w = delay_weight(&model.think_times, &as_i64(state.delay()));
    for k in 0..queues {
        w *= queue_weight(&model.demands[k], &as_i64(state.queue(k)));
    }
    Ok(w / g_norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_model, NetworkModel};
    use crate::oracles::{enumerate_states, g_convolution, mva};
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

    #[test]
    fn single_job_single_queue() {
        let md = model(&[&[2]], &[0], &[1], &[1]);
        let ix = indices_from_constants(&md, |i| Ok(g_convolution(&md, i))).unwrap();
        assert_eq!(ix.throughput, vec![ratio(1, 2)]);
        assert_eq!(ix.queue_length, vec![vec![int(1)]]);
        assert_eq!(ix.utilization, vec![vec![int(1)]]);
    }

    #[test]
    fn empty_class_has_zero_indices() {
        let md = model(&[&[1, 2], &[3, 1]], &[1, 1], &[1, 1], &[2, 0]);
        let ix = indices_from_constants(&md, |i| Ok(g_convolution(&md, i))).unwrap();
        assert!(ix.throughput[1].is_zero());
        assert!(ix.queue_length.iter().all(|row| row[1].is_zero()));
    }

    #[test]
    fn agrees_with_mva_and_littles_law() {
        let md = model(&[&[1, 2], &[3, 1], &[2, 2]], &[1, 0], &[1, 2, 1], &[2, 3]);
        let ix = indices_from_constants(&md, |i| Ok(g_convolution(&md, i))).unwrap();
        assert_eq!(ix, mva(&md).unwrap());
        for r in 0..2 {
            let mut n = md.think_time(r) * &ix.throughput[r];
            for k in 0..3 {
                n += ExactScalar::from_integer(md.multiplicities[k].into()) * &ix.queue_length[k][r];
            }
            assert_eq!(n, int(i64::from(md.populations[r])));
        }
    }

    #[test]
    fn one_state_network() {
        let md = model(&[&[1]], &[0], &[1], &[1]);
        let g = g_convolution(&md, &md.root_index());
        let s = StateVector { counts: vec![vec![1], vec![0]] };
        assert_eq!(state_probability(&md, &s, &g).unwrap(), int(1));
    }

    #[test]
    fn symmetric_queues() {
        let md = model(&[&[1], &[1]], &[0], &[1, 1], &[1]);
        let g = g_convolution(&md, &md.root_index());
        for s in [vec![vec![1], vec![0], vec![0]], vec![vec![0], vec![1], vec![0]]] {
            assert_eq!(state_probability(&md, &StateVector { counts: s }, &g).unwrap(), ratio(1, 2));
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let md = model(&[&[1, 2], &[3, 1]], &[1, 2], &[1, 1], &[2, 2]);
        let g = g_convolution(&md, &md.root_index());
        let total: ExactScalar =
            enumerate_states(&md).unwrap().iter().map(|s| state_probability(&md, s, &g).unwrap()).sum();
        assert_eq!(total, int(1));
    }

    #[test]
    fn rejected_states() {
        let md = model(&[&[1], &[1]], &[0], &[2, 1], &[1]);
        let s = StateVector { counts: vec![vec![1], vec![0], vec![0]] };
        assert!(matches!(state_probability(&md, &s, &int(1)), Err(Error::ReplicatedQueuesUnsupported)));
        let md = model(&[&[1], &[1]], &[0], &[1, 1], &[1]);
        let s = StateVector { counts: vec![vec![1], vec![1], vec![0]] };
        assert!(matches!(state_probability(&md, &s, &int(1)), Err(Error::InfeasibleState(_))));
        let s = StateVector { counts: vec![vec![1], vec![0]] };
        assert!(matches!(state_probability(&md, &s, &int(1)), Err(Error::InfeasibleState(_))));
    }
}
