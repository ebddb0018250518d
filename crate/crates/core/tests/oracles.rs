//! Frozen reference values, computed by a separate exact enumeration of the
//! product-form states with Python `fractions`.

mod common;

use ::mbmom::{
    g_bruteforce, g_convolution, int, mbmom_solve, mom_solve, mva, ratio, Branching, ExactScalar, MeanIndices,
    ValidatedModel,
};
use common::{model, rational_model};

struct Reference {
    g: ExactScalar,
    x: Vec<ExactScalar>,
    q: Vec<Vec<ExactScalar>>,
}

fn r(n: i64, d: i64) -> ExactScalar {
    ratio(n, d)
}

fn check(md: &ValidatedModel, want: &Reference) {
    let root = md.root_index();
    assert_eq!(g_bruteforce(md, &root).unwrap(), want.g);
    assert_eq!(g_convolution(md, &root), want.g);
    let check_indices = |name: &str, ix: MeanIndices| {
        assert_eq!(ix.throughput, want.x, "{name} throughput");
        assert_eq!(ix.queue_length, want.q, "{name} queue lengths");
    };
    check_indices("mva", mva(md).unwrap());
    let mom = mom_solve(md).unwrap();
    assert_eq!(mom.normalizing_constant(), want.g);
    check_indices("mom", mom.indices().unwrap());
    for b in [Branching::Fixed(1), Branching::Max] {
        let sol = mbmom_solve(md, b).unwrap();
        assert_eq!(sol.normalizing_constant(), want.g, "B={b}");
        check_indices("mbmom", sol.indices().unwrap());
    }
}

#[test]
fn two_queues_two_classes() {
    let md = model(&[&[2, 1], &[1, 3]], &[1, 2], &[1, 1], &[2, 1]);
    check(
        &md,
        &Reference {
            g: int(90),
            x: vec![r(29, 90), r(7, 60)],
            q: vec![vec![r(49, 45), r(1, 4)], vec![r(53, 90), r(31, 60)]],
        },
    );
}

#[test]
fn replicated_queue() {
    let md = model(&[&[1], &[2]], &[1], &[2, 1], &[3]);
    check(
        &md,
        &Reference { g: r(235, 6), x: vec![r(93, 235)], q: vec![vec![r(129, 235)], vec![r(354, 235)]] },
    );
}

#[test]
fn rational_parameters_and_zero_think_time() {
    let md = rational_model(
        vec![vec![r(3, 2), r(1, 3)], vec![int(2), r(5, 4)], vec![r(1, 2), r(7, 3)]],
        vec![r(1, 2), int(0)],
        &[1, 1, 1],
        &[2, 2],
    );
    check(
        &md,
        &Reference {
            g: r(340955, 1152),
            x: vec![r(16788, 68191), r(2412, 9215)],
            q: vec![
                vec![r(176064, 340955), r(49988, 340955)],
                vec![r(365304, 340955), r(54990, 68191)],
                vec![r(5188, 17945), r(18788, 17945)],
            ],
        },
    );
}

#[test]
fn single_queue_closed_form() {
    // One class: G = sum_n D^n Z^(N-n) / (N-n)!, here 4 + 2 + 1/2.
    let md = model(&[&[2]], &[1], &[1], &[2]);
    assert_eq!(g_convolution(&md, &md.root_index()), r(13, 2));
    assert_eq!(mbmom_solve(&md, Branching::Max).unwrap().normalizing_constant(), r(13, 2));
}
