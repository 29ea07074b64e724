use std::cmp::Ordering;

use ovsa_core::sigmapoly::sp_eval_unchecked;
use ovsa_core::solve::{
    sign_change_bracket, solve_exact, unbounded_image_witness, BracketOutcome, GreedySolver, Step,
};
use ovsa_core::testkit;
use ovsa_core::{HahnModel, HahnVector, Index, Ovsa, Rational, SigmaPoly, SolveOutcome};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn outcomes_keep_exact_bookkeeping(seed in any::<u64>(), cap in 0usize..12) {
        let mut rng = testkit::rng(seed);
        let m = testkit::model(&mut rng);
        let f = testkit::sigma_poly(&mut rng, -1, 2, 4);
        prop_assume!(!f.is_zero());
        let d = testkit::vector(&mut rng, &m, 4, 5);
        let mut s = GreedySolver::new(&m, &f, &d).unwrap();
        for _ in 0..cap {
            if !matches!(s.step(), Step::Eliminated { .. }) {
                break;
            }
            prop_assert_eq!(sp_eval_unchecked(&m, &f, s.partial()).add(s.remainder()), d.clone());
        }
        let out = solve_exact(&f, &d, &m, cap).unwrap();
        prop_assert!(out.verify(&m, &f, &d));
        if let SolveOutcome::Solved { x } = &out {
            prop_assert_eq!(sp_eval_unchecked(&m, &f, x), d.clone());
        }
    }

    #[test]
    fn monotone_singleton_equations_solve_in_one_step(seed in any::<u64>(), c in prop::sample::select(vec![(1i64, 2i64), (1, 1), (2, 1), (3, 1)])) {
        let mut rng = testkit::rng(seed);
        let f = testkit::sigma_poly(&mut rng, -1, 3, 5);
        prop_assume!(!f.is_zero() && f.classify_monotone().unwrap().direction().is_some());
        let m = HahnModel::singleton(Rational::new(c.0, c.1)).unwrap();
        let d = HahnVector::term(Index::Pos(0), testkit::nonzero_rational(&mut rng, 9, 4));
        let out = solve_exact(&f, &d, &m, 1).unwrap();
        prop_assert!(out.is_solved());
    }

    #[test]
    fn brackets_straddle(seed in any::<u64>(), iterations in 0usize..20) {
        let mut rng = testkit::rng(seed);
        let m = testkit::model(&mut rng);
        let f = testkit::sigma_poly(&mut rng, 0, 2, 3);
        prop_assume!(!f.is_zero());
        let (x, y) = (testkit::vector(&mut rng, &m, 3, 4), testkit::vector(&mut rng, &m, 3, 4));
        let (a, b) = match m.cmp(&x, &y) {
            Ordering::Less => (x, y),
            Ordering::Greater => (y, x),
            Ordering::Equal => return Ok(()),
        };
        let d = testkit::vector(&mut rng, &m, 3, 4);
        let g = |v: &HahnVector| m.sign(&sp_eval_unchecked(&m, &f, v).sub(&d));
        match sign_change_bracket(&m, &f, &d, &a, &b, iterations).unwrap() {
            BracketOutcome::ZeroFound { x } => prop_assert_eq!(g(&x), Ordering::Equal),
            BracketOutcome::Bracket { a: lo, b: hi } => {
                prop_assert_eq!(m.cmp(&lo, &hi), Ordering::Less);
                prop_assert!(g(&lo) != Ordering::Equal && g(&hi) != Ordering::Equal && g(&lo) != g(&hi));
            }
            BracketOutcome::NoSignChange => prop_assert_eq!(g(&a), g(&b)),
        }
    }

    #[test]
    fn image_witnesses_exceed_the_bound(seed in any::<u64>()) {
        let mut rng = testkit::rng(seed);
        let m = testkit::model(&mut rng);
        let f = testkit::sigma_poly(&mut rng, -1, 2, 3);
        prop_assume!(!f.is_zero());
        let bound = testkit::vector(&mut rng, &m, 3, 5);
        let w = unbounded_image_witness(&f, &m, &bound).unwrap();
        let fx = sp_eval_unchecked(&w.model, &f, &w.x);
        prop_assert_eq!(w.model.cmp(&fx, &w.bound), Ordering::Greater);
    }
}

#[test]
fn alternating_residual() {
    let m = HahnModel::int_shift();
    let f = SigmaPoly::from_ints(&[1, 1]);
    let d = HahnVector::basis(Index::Int(0));
    match solve_exact(&f, &d, &m, 10).unwrap() {
        SolveOutcome::Residual { remainder, steps, .. } => {
            assert_eq!(steps, 10);
            assert_eq!(remainder, HahnVector::basis(Index::Int(10)));
        }
        other => panic!("{other:?}"),
    }
}
