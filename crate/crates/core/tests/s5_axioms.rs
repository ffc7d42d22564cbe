mod common;

use beliefcheck::entail::{Definitions, Limits};
use beliefcheck::{discharge, normalize, Formula, Goal, TestHistory};
use common::*;

fn implies(a: Formula, b: Formula) -> Formula {
    Formula::or(Formula::not(a), b)
}

fn iff(a: Formula, b: Formula) -> Formula {
    Formula::and(implies(a.clone(), b.clone()), implies(b, a))
}

fn axioms(f: &Formula) -> Vec<(&'static str, Formula)> {
    let k = Formula::know;
    let p = Formula::possible;
    let n = Formula::not;
    vec![
        ("T", implies(k(f.clone()), f.clone())),
        ("4", implies(k(f.clone()), k(k(f.clone())))),
        ("5", implies(n(k(f.clone())), k(n(k(f.clone()))))),
        ("duality", iff(p(f.clone()), n(k(n(f.clone()))))),
    ]
}

#[test]
fn axioms_hold_on_every_model() {
    let e = enumerate(3);
    for f in formula_universe() {
        for (name, ax) in axioms(&f) {
            let t = truth_table(&e, &ax);
            let mut want = vec![u64::MAX; t.len()];
            let tail = e.points.len() % 64;
            if tail != 0 {
                *want.last_mut().unwrap() = (1u64 << tail) - 1;
            }
            assert_eq!(first_gap(&want, &t), None, "axiom {name} fails for {f}");
        }
    }
}

#[test]
fn engine_derives_axiom_sequents() {
    let defs = Definitions::default();
    let limits = Limits::default();
    let k = Formula::know;
    let p = Formula::possible;
    let n = Formula::not;
    for f in formula_universe() {
        let cases = [
            ("T", k(f.clone()), f.clone()),
            ("4", k(f.clone()), k(k(f.clone()))),
            ("5", n(k(f.clone())), k(n(k(f.clone())))),
            ("duality", p(f.clone()), n(k(n(f.clone())))),
            ("duality", n(k(n(f.clone()))), p(f.clone())),
        ];
        for (name, fact, goal) in cases {
            let fact = normalize(&fact);
            let r = discharge(&[fact], &TestHistory::empty(), &defs, &Goal::Formula(goal), &limits);
            assert!(r.is_proved(), "axiom {name} for {f}: {r:?}");
        }
    }
}
