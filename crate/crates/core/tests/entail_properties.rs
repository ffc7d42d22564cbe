mod common;

use beliefcheck::entail::{Definitions, Limits};
use beliefcheck::logic::{HistoryEntry, PExpr};
use beliefcheck::{discharge, normalize, DischargeResult, Formula, Goal, PValueRecord, Rational, TestHistory};
use common::*;
use proptest::prelude::*;

fn tested(p: &Rational) -> TestHistory {
    TestHistory::empty().cons(HistoryEntry::new(
        "t",
        &a(),
        PValueRecord::exact(PExpr::constant(p.clone())).unwrap(),
    ))
}

fn statb(r: PValueRecord) -> Goal {
    Goal::Formula(Formula::stat_b(r, a()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn weakening_chain(pn in 0u32..=500, pd in 1u32..=500, qn in 0u32..=500, qd in 1u32..=500) {
        prop_assume!(pn <= pd && qn <= qd);
        let p = Rational::new(pn.into(), pd.into());
        let q = Rational::new(qn.into(), qd.into());
        let h = tested(&p);
        let defs = Definitions::default();
        let limits = Limits::default();
        let at_most = PValueRecord::at_most(PExpr::constant(q.clone())).unwrap();
        let r = discharge(&[], &h, &defs, &statb(at_most), &limits);
        prop_assert_eq!(r.is_proved(), p <= q);
        let exact = PValueRecord::exact(PExpr::constant(q.clone())).unwrap();
        let r = discharge(&[], &h, &defs, &statb(exact), &limits);
        prop_assert_eq!(r.is_proved(), p == q);
    }
}

#[test]
fn monotone_under_consistent_extension() {
    let e = enumerate(2);
    let universe = formula_universe();
    let tables: Vec<Vec<u64>> = universe.iter().map(|f| truth_table(&e, f)).collect();
    let defs = Definitions::default();
    let limits = Limits::default();
    let history = TestHistory::empty();
    let empty_mask = history_mask(&e, 0);
    for (i, f) in universe.iter().enumerate() {
        for (g_i, goal) in universe.iter().enumerate() {
            let goal = Goal::Formula(goal.clone());
            let base = [normalize(f)];
            if !discharge(&base, &history, &defs, &goal, &limits).is_proved() {
                continue;
            }
            for (j, extra) in universe.iter().enumerate() {
                let consistent = empty_mask
                    .iter()
                    .zip(&tables[i])
                    .zip(&tables[j])
                    .any(|((m, x), y)| m & x & y != 0);
                if !consistent {
                    continue;
                }
                let facts = [normalize(f), normalize(extra)];
                assert!(
                    discharge(&facts, &history, &defs, &goal, &limits).is_proved(),
                    "{f} proves goal #{g_i} but {f} + {extra} does not"
                );
            }
        }
    }
}

#[test]
fn traces_are_deterministic() {
    let defs = Definitions::default();
    let limits = Limits::default();
    let history = history_pool().pop().unwrap();
    let universe = formula_universe();
    for f in &universe {
        for g in &universe {
            let facts = [normalize(f)];
            let goal = Goal::Formula(g.clone());
            let r1 = discharge(&facts, &history, &defs, &goal, &limits);
            let r2 = discharge(&facts, &history, &defs, &goal, &limits);
            assert_eq!(r1, r2);
        }
    }
}

#[test]
fn contradictory_facts_prove_anything() {
    let facts = [
        Formula::possible(a()),
        normalize(&Formula::not(Formula::possible(a()))),
    ];
    let r = discharge(
        &facts,
        &TestHistory::empty(),
        &Definitions::default(),
        &Goal::Formula(b()),
        &Limits::default(),
    );
    assert!(matches!(r, DischargeResult::Proved { .. }), "{r:?}");
}
