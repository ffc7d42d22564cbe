#![allow(dead_code)]

use beliefcheck::logic::{AtomicFormula, Formula, HistoryEntry, PExpr, PValueRecord, Pred, Term};
use beliefcheck::oracle::{enumerate_models, KripkeModel};
use beliefcheck::TestHistory;

pub fn atoms() -> Vec<AtomicFormula> {
    vec![
        AtomicFormula::new(Pred::Sampled, vec![Term::name("d1"), Term::name("x")]).unwrap(),
        AtomicFormula::new(Pred::Sampled, vec![Term::name("d2"), Term::name("x")]).unwrap(),
    ]
}

pub fn a() -> Formula {
    Formula::Atom(atoms()[0].clone())
}

pub fn b() -> Formula {
    Formula::Atom(atoms()[1].clone())
}

fn exact(n: i64, d: i64) -> PValueRecord {
    PValueRecord::exact(PExpr::ratio(n, d)).unwrap()
}

fn leq(n: i64, d: i64) -> PValueRecord {
    PValueRecord::at_most(PExpr::ratio(n, d)).unwrap()
}

/// Three histories: untested, `a` tested once, and `b` then `a` tested.
pub fn history_pool() -> Vec<TestHistory> {
    let h1 = TestHistory::empty().cons(HistoryEntry::new("t", &a(), exact(1, 20)));
    let h2 = TestHistory::empty()
        .cons(HistoryEntry::new("t", &b(), exact(1, 50)))
        .cons(HistoryEntry::new("t", &a(), exact(3, 100)));
    vec![TestHistory::empty(), h1, h2]
}

/// Formulas over the two atoms with modal depth at most 3.
pub fn formula_universe() -> Vec<Formula> {
    let (a, b) = (a(), b());
    let n = Formula::not;
    let k = Formula::know;
    let p = Formula::possible;
    let sb = |r: PValueRecord, h: Formula| Formula::stat_b(r, h).unwrap();
    vec![
        a.clone(),
        b.clone(),
        n(a.clone()),
        n(b.clone()),
        Formula::and(a.clone(), b.clone()),
        Formula::or(a.clone(), b.clone()),
        Formula::or(n(a.clone()), b.clone()),
        sb(exact(1, 20), a.clone()),
        sb(leq(1, 20), a.clone()),
        sb(leq(1, 100), a.clone()),
        sb(leq(1, 50), b.clone()),
        sb(leq(7, 100), Formula::or(a.clone(), b.clone())),
        sb(leq(1, 50), Formula::and(a.clone(), b.clone())),
        n(sb(leq(1, 20), a.clone())),
        k(a.clone()),
        k(n(a.clone())),
        p(a.clone()),
        p(n(a.clone())),
        k(b.clone()),
        p(b.clone()),
        n(k(a.clone())),
        n(p(b.clone())),
        k(Formula::or(a.clone(), b.clone())),
        p(Formula::and(a.clone(), b.clone())),
        k(sb(leq(1, 20), a.clone())),
        p(sb(leq(7, 100), Formula::or(a.clone(), b.clone()))),
        k(p(a.clone())),
        p(k(a.clone())),
        k(Formula::or(a.clone(), p(b.clone()))),
        p(Formula::and(k(a.clone()), b.clone())),
        k(p(k(a.clone()))),
        p(k(p(b.clone()))),
    ]
}

/// A world of one enumerated model.
pub struct Point {
    pub model: usize,
    pub world: usize,
    pub history: usize,
}

pub struct Enumeration {
    pub models: Vec<KripkeModel>,
    pub points: Vec<Point>,
}

pub fn enumerate(max_worlds: usize) -> Enumeration {
    let atoms = atoms();
    let pool = history_pool();
    let models: Vec<KripkeModel> = enumerate_models(&atoms, max_worlds, &pool)
        .unwrap()
        .collect();
    let mut points = Vec::new();
    for (mi, m) in models.iter().enumerate() {
        for w in 0..m.world_count() {
            let history = pool.iter().position(|h| *h == m.histories[w]).unwrap();
            points.push(Point {
                model: mi,
                world: w,
                history,
            });
        }
    }
    Enumeration { models, points }
}

/// Truth of `f` at every point, packed 64 per word.
pub fn truth_table(e: &Enumeration, f: &Formula) -> Vec<u64> {
    let mut bits = vec![0u64; e.points.len().div_ceil(64)];
    for (i, pt) in e.points.iter().enumerate() {
        if e.models[pt.model].satisfies(pt.world, f).unwrap() {
            bits[i / 64] |= 1 << (i % 64);
        }
    }
    bits
}

pub fn history_mask(e: &Enumeration, h: usize) -> Vec<u64> {
    let mut bits = vec![0u64; e.points.len().div_ceil(64)];
    for (i, pt) in e.points.iter().enumerate() {
        if pt.history == h {
            bits[i / 64] |= 1 << (i % 64);
        }
    }
    bits
}

/// First point in `support` where `goal` is false.
pub fn first_gap(support: &[u64], goal: &[u64]) -> Option<usize> {
    support
        .iter()
        .zip(goal)
        .enumerate()
        .find_map(|(i, (s, g))| {
            let bad = s & !g;
            (bad != 0).then(|| i * 64 + bad.trailing_zeros() as usize)
        })
}
