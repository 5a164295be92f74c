use num_bigint::BigUint;
use proptest::prelude::*;

use gameacp::parser::{parse_term, print_term};
use gameacp::rewrite::{is_basic_term, rewrite_step, subterm_at, Mode, RedexOrder, Rewriter};
use gameacp::sos::bisimilar;
use gameacp::term::{ac_equal, ac_flatten, weight, ActionLabel, ProcessTerm};

fn arb_term() -> impl Strategy<Value = ProcessTerm> {
    let leaf = prop_oneof![
        5 => prop::sample::select(vec!["a", "b", "c"]).prop_map(|n| ProcessTerm::action(ActionLabel::new(n).unwrap())),
        1 => Just(ProcessTerm::Deadlock),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| ProcessTerm::seq(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| ProcessTerm::alt(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| ProcessTerm::opp_alt(l, r)),
            (inner.clone(), inner).prop_map(|(l, r)| ProcessTerm::play(l, r)),
        ]
    })
}

/// The termination measure written out directly.
fn measure(t: &ProcessTerm) -> BigUint {
    match t {
        ProcessTerm::Action(_) | ProcessTerm::Deadlock => BigUint::from(2u32),
        ProcessTerm::Alt(l, r) => measure(l) + measure(r),
        ProcessTerm::Seq(l, r) => {
            let l = measure(l);
            &l * &l * measure(r)
        }
        ProcessTerm::OppAlt(l, r) => measure(l) + measure(r) + 1u32,
        ProcessTerm::Play(l, r) => {
            let p = measure(l) * measure(r);
            &p * &p
        }
    }
}

/// Swaps the operands of every `+`.
fn mirror(t: &ProcessTerm) -> ProcessTerm {
    match t {
        ProcessTerm::Action(_) | ProcessTerm::Deadlock => t.clone(),
        ProcessTerm::Seq(l, r) => ProcessTerm::seq(mirror(l), mirror(r)),
        ProcessTerm::Alt(l, r) => ProcessTerm::alt(mirror(r), mirror(l)),
        ProcessTerm::OppAlt(l, r) => ProcessTerm::opp_alt(mirror(l), mirror(r)),
        ProcessTerm::Play(l, r) => ProcessTerm::play(mirror(l), mirror(r)),
    }
}

fn nf(t: &ProcessTerm) -> ProcessTerm {
    Rewriter::default().normalize(t).unwrap().final_term
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn print_then_parse_is_identity(t in arb_term()) {
        prop_assert_eq!(parse_term(&print_term(&t)).unwrap(), t);
    }

    #[test]
    fn ac_flatten_is_idempotent(t in arb_term()) {
        let once = ac_flatten(&t);
        prop_assert_eq!(ac_flatten(&once), once.clone());
        prop_assert!(ac_equal(&t, &once));
    }

    #[test]
    fn ac_equal_ignores_order_of_summands(t in arb_term()) {
        let u = mirror(&t);
        prop_assert!(ac_equal(&t, &u));
        prop_assert!(ac_equal(&u, &t));
    }

    #[test]
    fn weight_matches_measure_and_ignores_ac(t in arb_term()) {
        prop_assert_eq!(weight(&t).0, measure(&t));
        prop_assert_eq!(weight(&ac_flatten(&t)).0, measure(&t));
    }

    #[test]
    fn every_step_decreases_weight(t in arb_term()) {
        let mut current = t;
        while let Some(step) = rewrite_step(&current, Mode::Full) {
            prop_assert!(measure(&step.after) < measure(&step.before), "{} by {}", print_term(&step.before), step.rule);
            prop_assert!(subterm_at(&step.before, &step.position).is_some());
            current = step.after;
        }
    }

    #[test]
    fn full_normal_forms_are_basic_and_stable(t in arb_term()) {
        let n = nf(&t);
        prop_assert!(is_basic_term(&n));
        prop_assert!(Rewriter::default().normalize(&n).unwrap().steps.is_empty());
    }

    #[test]
    fn innermost_and_outermost_agree(t in arb_term()) {
        let outer = Rewriter::default().with_order(RedexOrder::LeftmostOutermost).normalize(&t).unwrap().final_term;
        prop_assert!(ac_equal(&nf(&t), &outer));
    }

    #[test]
    fn p_view_then_full_equals_full(t in arb_term()) {
        let pv = Rewriter::new(Mode::PView).normalize(&t).unwrap().final_term;
        prop_assert!(ac_equal(&nf(&pv), &nf(&t)));
        prop_assert!(bisimilar(&pv, &t).unwrap().equivalent);
    }

    #[test]
    fn normal_form_is_bisimilar(t in arb_term()) {
        prop_assert!(bisimilar(&t, &nf(&t)).unwrap().equivalent);
    }

    #[test]
    fn play_commutes(t in arb_term(), u in arb_term()) {
        let tu = ProcessTerm::play(t.clone(), u.clone());
        let ut = ProcessTerm::play(u, t);
        prop_assert!(bisimilar(&tu, &ut).unwrap().equivalent);
        prop_assert!(ac_equal(&nf(&tu), &nf(&ut)));
    }

    #[test]
    fn play_associates(t in arb_term(), u in arb_term(), v in arb_term()) {
        let left = ProcessTerm::play(ProcessTerm::play(t.clone(), u.clone()), v.clone());
        let right = ProcessTerm::play(t, ProcessTerm::play(u, v));
        prop_assert!(ac_equal(&nf(&left), &nf(&right)));
    }
}
