mod common;

use common::{q, random_ordinary_case};
use isoslope::phi_module::{
    hodge_polygon_of, invariants, is_ordinary, is_weakly_admissible, newton_polygon_of, FilStep,
    FilteredPhiModule, FrobeniusEigen, GroupAction,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

fn two_dim(fil1: &[i64]) -> FilteredPhiModule {
    FilteredPhiModule::new(
        vec![FrobeniusEigen::new(1, 0), FrobeniusEigen::new(1, 1)],
        vec![
            FilStep {
                jump: 0,
                basis: vec![vec![q(1), q(0)], vec![q(0), q(1)]],
            },
            FilStep {
                jump: 1,
                basis: vec![fil1.iter().map(|&x| q(x)).collect()],
            },
        ],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn invariants_of_ordinary_modules_are_ordinary(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let case = random_ordinary_case(&mut rng);
        prop_assert!(is_ordinary(&case.module));
        let inv = invariants(&case.module, &case.group).unwrap();
        prop_assert_eq!(inv.rank(), case.fixed_rank);
        prop_assert!(is_ordinary(&inv));
        if let Ok(wa) = is_weakly_admissible(&inv) {
            prop_assert!(wa);
        }
        if let Some(tw) = case.group.sign_twisted() {
            if let Ok(other) = invariants(&case.module, &tw) {
                prop_assert_eq!(inv.rank() + other.rank(), case.module.rank());
            }
        }
    }

    #[test]
    fn weak_admissibility_is_permutation_invariant(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let d = random_ordinary_case(&mut rng).module;
        let mut perm: Vec<usize> = (0..d.rank()).collect();
        perm.shuffle(&mut rng);
        let moved = d.permuted(&perm).unwrap();
        prop_assert_eq!(is_weakly_admissible(&moved).ok(), is_weakly_admissible(&d).ok());
        prop_assert_eq!(is_ordinary(&moved), is_ordinary(&d));
    }

    #[test]
    fn endpoints_are_newton_and_hodge_numbers(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let d = random_ordinary_case(&mut rng).module;
        prop_assert_eq!(newton_polygon_of(&d).endpoint().y.clone(), q(d.newton_number()));
        prop_assert_eq!(hodge_polygon_of(&d).endpoint().y.clone(), q(d.hodge_number()));
        if is_weakly_admissible(&d) == Ok(true) {
            prop_assert_eq!(d.newton_number(), d.hodge_number());
        }
        // a random single-line flag on distinct exponents
        let n = rng.gen_range(2..=4);
        let mut exps: Vec<i64> = (0..6).collect();
        exps.shuffle(&mut rng);
        let line: Vec<_> = (0..n).map(|_| q(rng.gen_range(-2..=2))).collect();
        if line.iter().any(|x| *x != q(0)) {
            let identity: Vec<Vec<_>> = (0..n).map(|i| (0..n).map(|j| q((i == j) as i64)).collect()).collect();
            let m = FilteredPhiModule::new(
                exps[..n].iter().map(|&e| FrobeniusEigen::new(1, e)).collect(),
                vec![FilStep { jump: 0, basis: identity }, FilStep { jump: 1, basis: vec![line] }],
            ).unwrap();
            if is_weakly_admissible(&m).unwrap() {
                prop_assert_eq!(m.newton_number(), m.hodge_number());
            }
        }
    }
}

#[test]
fn hand_built_weak_admissibility_examples() {
    assert_eq!(is_weakly_admissible(&two_dim(&[1, 1])), Ok(true));
    assert_eq!(is_weakly_admissible(&two_dim(&[1, 0])), Ok(false));
    assert!(is_ordinary(&two_dim(&[1, 0])));
}

#[test]
fn invariant_examples() {
    let d = two_dim(&[0, 1]);
    assert_eq!(invariants(&d, &GroupAction::trivial(2)).unwrap(), d);
    let h = GroupAction::new(vec![
        vec![vec![q(1), q(0)], vec![q(0), q(1)]],
        vec![vec![q(1), q(0)], vec![q(0), q(-1)]],
    ])
    .unwrap();
    let inv = invariants(&d, &h).unwrap();
    assert_eq!(inv.rank(), 1);
    assert_eq!(inv.exponents(), vec![0]);
    assert!(is_ordinary(&inv));
    let minus = GroupAction::new(vec![
        vec![vec![q(1), q(0)], vec![q(0), q(1)]],
        vec![vec![q(-1), q(0)], vec![q(0), q(-1)]],
    ])
    .unwrap();
    assert_eq!(invariants(&d, &minus).unwrap().rank(), 0);
}
