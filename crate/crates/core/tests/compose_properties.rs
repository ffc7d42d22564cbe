use beliefcheck::logic::{HistoryEntry, PExpr, Pred, Term};
use beliefcheck::specs::ComposeError;
use beliefcheck::{compose_pvs, Formula, PValueRecord, Rational, TestHistory};
use proptest::prelude::*;

fn hyp(i: usize) -> Formula {
    Formula::cmp(Pred::Gt, Term::mean(Term::name(format!("g{i}"))), Term::int(0))
}

fn q(n: u32) -> Rational {
    Rational::new(n.into(), 1000.into())
}

fn history(order: &[usize], ps: &[u32]) -> TestHistory {
    let mut h = TestHistory::empty();
    for &i in order {
        h.push(HistoryEntry::new(
            "t",
            &hyp(i),
            PValueRecord::exact(PExpr::constant(q(ps[i]))).unwrap(),
        ));
    }
    h
}

fn disj(ids: &[usize]) -> Formula {
    ids.iter().map(|&i| hyp(i)).reduce(Formula::or).unwrap()
}

fn conj(ids: &[usize]) -> Formula {
    ids.iter().map(|&i| hyp(i)).reduce(Formula::and).unwrap()
}

fn bound(r: &PValueRecord) -> Rational {
    r.bound().as_const().cloned().expect("constant bound")
}

/// k tested hypotheses with p-values in (0, 1], plus a shuffled order.
fn scenario() -> impl Strategy<Value = (Vec<u32>, Vec<usize>, Vec<usize>)> {
    (2usize..6).prop_flat_map(|k| {
        let order: Vec<usize> = (0..k).collect();
        (
            prop::collection::vec(1u32..=1000, k),
            Just(order.clone()).prop_shuffle(),
            Just(order).prop_shuffle(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn compose_laws((ps, order, perm) in scenario()) {
        let k = ps.len();
        let ids: Vec<usize> = (0..k).collect();
        let h = history(&ids, &ps);
        let shuffled = history(&order, &ps);
        let one = Rational::from_integer(1.into());

        // single tests keep their own record
        for i in 0..k {
            let r = compose_pvs(&hyp(i), &h).unwrap();
            prop_assert_eq!(r, PValueRecord::exact(PExpr::constant(q(ps[i]))).unwrap());
        }

        let d = compose_pvs(&disj(&ids), &h).unwrap();
        let c = compose_pvs(&conj(&ids), &h).unwrap();

        // permutation of history entries and of disjuncts/conjuncts
        prop_assert_eq!(&compose_pvs(&disj(&ids), &shuffled).unwrap(), &d);
        prop_assert_eq!(&compose_pvs(&disj(&perm), &h).unwrap(), &d);
        prop_assert_eq!(&compose_pvs(&conj(&perm), &shuffled).unwrap(), &c);

        // Bonferroni with cap, conjunction min
        let sum: Rational = ps.iter().map(|&p| q(p)).sum();
        prop_assert!(matches!(d, PValueRecord::AtMost(_)));
        prop_assert_eq!(bound(&d), sum.clone().min(one.clone()));
        let min = ps.iter().map(|&p| q(p)).min().unwrap();
        prop_assert!(matches!(c, PValueRecord::AtMost(_)));
        prop_assert_eq!(bound(&c), min);

        // dominance
        for i in 0..k {
            prop_assert!(bound(&d) >= q(ps[i]));
            prop_assert!(bound(&c) <= q(ps[i]));
        }

        // unrelated entries change nothing
        let mut extended = h.clone();
        extended.push(HistoryEntry::new(
            "t",
            &hyp(k + 7),
            PValueRecord::exact(PExpr::ratio(1, 2)).unwrap(),
        ));
        prop_assert_eq!(&compose_pvs(&disj(&ids), &extended).unwrap(), &d);
        prop_assert_eq!(&compose_pvs(&conj(&ids), &extended).unwrap(), &c);

        // untested hypotheses, alone or inside a composite
        let untested = hyp(k + 1);
        prop_assert_eq!(
            compose_pvs(&untested, &h),
            Err(ComposeError::UnmatchedHypothesis(untested.clone()))
        );
        prop_assert!(compose_pvs(&Formula::or(hyp(0), untested.clone()), &h).is_err());
        prop_assert!(compose_pvs(&Formula::and(untested, hyp(0)), &h).is_err());

        // a hypothesis tested twice gets the sum of both records
        let twice = history(&[0, 0], &ps);
        let r = compose_pvs(&hyp(0), &twice).unwrap();
        prop_assert_eq!(bound(&r), (q(ps[0]) * Rational::from_integer(2.into())).min(one));
    }
}
