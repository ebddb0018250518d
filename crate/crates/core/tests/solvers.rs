mod common;

use common::{model, rational_model};
use mbmom::{g_bruteforce, g_convolution, mbmom_solve, mom_solve, mva, ratio, Branching, Solution};

fn assert_matches_convolution(sol: &Solution) {
    let md = sol.model();
    for (idx, v) in sol.all_values().iter() {
        assert_eq!(*v, g_convolution(md, &idx), "{idx}");
    }
    if let Some(prev) = sol.previous() {
        for (idx, v) in prev.iter() {
            assert_eq!(*v, g_convolution(md, &idx), "{idx}");
        }
    }
}

fn example_model() -> mbmom::ValidatedModel {
    rational_model(
        vec![vec![ratio(3, 2), ratio(2, 7)], vec![ratio(5, 3), ratio(11, 4)]],
        vec![ratio(1, 3), ratio(9, 5)],
        &[1, 1],
        &[2, 2],
    )
}

#[test]
fn mom_two_queue_two_class() {
    let md = example_model();
    let sol = mom_solve(&md).unwrap();
    assert_eq!(sol.basis().len(), 10);
    assert_matches_convolution(&sol);
    assert!(sol.stats().fallbacks.is_empty(), "{:?}", sol.stats().fallbacks);
    assert_eq!(sol.indices().unwrap(), mva(&md).unwrap());
}

#[test]
fn mbmom_two_queue_two_class() {
    let md = example_model();
    for b in [Branching::Fixed(1), Branching::Max] {
        let sol = mbmom_solve(&md, b).unwrap();
        assert_eq!(sol.basis().len(), 6);
        assert_matches_convolution(&sol);
        assert!(sol.stats().fallbacks.is_empty(), "{b}: {:?}", sol.stats().fallbacks);
        assert_eq!(sol.indices().unwrap(), mva(&md).unwrap());
    }
}

#[test]
fn three_by_three() {
    let md = rational_model(
        vec![
            vec![ratio(1, 2), ratio(3, 7), ratio(5, 4)],
            vec![ratio(2, 3), ratio(1, 5), ratio(7, 9)],
            vec![ratio(4, 11), ratio(6, 5), ratio(1, 8)],
        ],
        vec![ratio(1, 3), ratio(0, 1), ratio(2, 1)],
        &[1, 1, 1],
        &[3, 3, 3],
    );
    let expect = mva(&md).unwrap();
    for sol in [mbmom_solve(&md, Branching::Max).unwrap(), mbmom_solve(&md, Branching::Fixed(1)).unwrap()] {
        assert_matches_convolution(&sol);
        assert!(sol.stats().fallbacks.is_empty(), "{:?}", sol.stats().fallbacks);
        assert_eq!(sol.indices().unwrap(), expect);
    }
}

#[test]
fn single_class_and_empty_population() {
    let md = model(&[&[2], &[3]], &[1], &[1, 1], &[4]);
    assert_matches_convolution(&mom_solve(&md).unwrap());
    assert_matches_convolution(&mbmom_solve(&md, Branching::Max).unwrap());

    let md = model(&[&[2, 1], &[3, 4]], &[1, 2], &[1, 1], &[0, 0]);
    for sol in [mom_solve(&md).unwrap(), mbmom_solve(&md, Branching::Max).unwrap()] {
        assert_eq!(sol.normalizing_constant(), mbmom::int(1));
        assert!(sol.previous().is_none());
        assert_matches_convolution(&sol);
    }
}

#[test]
fn replicated_queues() {
    let md = model(&[&[1, 2], &[3, 1]], &[1, 0], &[2, 1], &[2, 2]);
    let brute = g_bruteforce(&md, &md.root_index()).unwrap();
    for sol in [mom_solve(&md).unwrap(), mbmom_solve(&md, Branching::Max).unwrap(), mbmom_solve(&md, Branching::Fixed(1)).unwrap()] {
        assert_eq!(sol.normalizing_constant(), brute);
        assert_matches_convolution(&sol);
        assert_eq!(sol.indices().unwrap(), mva(&md).unwrap());
    }
}
