//! Discharging verification conditions.
//!
//! Goals are decided by a goal-directed search over a saturated fact base.
//! Facts are pushed into negation normal form, conjunctions split and `Know`
//! facts unpacked by axiom T. Then, in a fixed order, the engine tries
//! membership and boolean decomposition, history computations for `StatB`
//! and p-value goals, the S5 rules (`Know` introduction from the stable part
//! of the fact base, `Possible` from a witness, duality), case splits on
//! disjunctive facts, and finally unfolding of predicates that are defined
//! by declarations. An inconsistent fact base proves anything.
//!
//! Every answer carries a trace of rule names and the facts it consumed.

mod smt;

pub use smt::{emit_smtlib, smt_file_name, SmtError};

use std::cell::{Cell, RefCell};
use std::rc::Rc;
use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::Serialize;

use crate::logic::{
    hypothesis_equal, normalize, Formula, HistoryBase, PValueRecord, Pred, TestHistory, Term,
};
use crate::specs::{compose_pvs, supports, ComposeError};
use crate::Rational;

/// Default bound on nested modal reasoning steps.
pub const DEFAULT_DEPTH: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Distribution {
    /// Normal with symbolic mean and standard deviation.
    Normal { mean: String, sd: String },
    Unknown,
}

/// Declarations that give meaning to the defined predicates
/// (`is_normal`, `eq_var`, `pvalue`).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Definitions {
    pub populations: BTreeMap<String, Distribution>,
    pub pvalue_symbols: BTreeSet<String>,
}

/// Equality between the record a program reports and the one composed from
/// the test history for `hypothesis`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PValueGoal {
    pub reported: PValueRecord,
    pub hypothesis: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Goal {
    Formula(Formula),
    PValue(PValueGoal),
}

impl std::fmt::Display for Goal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Goal::Formula(g) => write!(f, "{g}"),
            Goal::PValue(g) => {
                let h = crate::frontend::pretty_print(&g.hypothesis);
                write!(f, "({}) = compose_pvs ({}) !st", g.reported, h)
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub depth: usize,
    pub deadline: Option<Instant>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            depth: DEFAULT_DEPTH,
            deadline: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DischargeResult {
    Proved {
        trace: Vec<String>,
        #[serde(skip)]
        used: Vec<Formula>,
    },
    Failed {
        #[serde(serialize_with = "serialize_formulas")]
        missing: Vec<Formula>,
        reason: Option<String>,
    },
    DepthExceeded,
    TimedOut,
}

fn serialize_formulas<S: serde::Serializer>(fs: &[Formula], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(fs.len()))?;
    for f in fs {
        seq.serialize_element(&f.to_string())?;
    }
    seq.end()
}

impl DischargeResult {
    pub fn is_proved(&self) -> bool {
        matches!(self, DischargeResult::Proved { .. })
    }

    pub fn status_name(&self) -> &'static str {
        match self {
            DischargeResult::Proved { .. } => "proved",
            DischargeResult::Failed { .. } => "failed",
            DischargeResult::DepthExceeded => "depth_exceeded",
            DischargeResult::TimedOut => "timed_out",
        }
    }

    pub fn trace(&self) -> &[String] {
        match self {
            DischargeResult::Proved { trace, .. } => trace,
            _ => &[],
        }
    }

    pub fn missing(&self) -> &[Formula] {
        match self {
            DischargeResult::Failed { missing, .. } => missing,
            _ => &[],
        }
    }
}

/// The atom written `is_empty (!st)`.
pub fn is_empty_atom() -> Formula {
    Formula::atom(Pred::IsEmpty, vec![]).expect("nullary")
}

/// Decides `facts, history |- goal`.
pub fn discharge(
    facts: &[Formula],
    history: &TestHistory,
    defs: &Definitions,
    goal: &Goal,
    limits: &Limits,
) -> DischargeResult {
    Prover::new(facts, history, defs, limits.depth).discharge(goal, limits.deadline)
}

/// A fact base saturated once and queried for several goals, as for the
/// conditions generated at one program point.
pub struct Prover<'a> {
    facts: &'a [Formula],
    history: &'a TestHistory,
    defs: &'a Definitions,
    depth: usize,
    engine: Engine<'a>,
}

impl<'a> Prover<'a> {
    pub fn new(
        facts: &'a [Formula],
        history: &'a TestHistory,
        defs: &'a Definitions,
        depth: usize,
    ) -> Self {
        let limits = Limits { depth, deadline: None };
        Prover {
            facts,
            history,
            defs,
            depth,
            engine: Engine::new(facts, history, defs, &limits),
        }
    }

    pub fn discharge(&self, goal: &Goal, deadline: Option<Instant>) -> DischargeResult {
        self.engine.deadline.set(deadline);
        let limits = Limits {
            depth: self.depth,
            deadline,
        };
        conclude(self.facts, self.history, self.defs, goal, &limits, self.engine.run(goal))
    }
}

fn conclude(
    facts: &[Formula],
    history: &TestHistory,
    defs: &Definitions,
    goal: &Goal,
    limits: &Limits,
    outcome: Result<Proof, Fail>,
) -> DischargeResult {
    match outcome {
        Ok(proof) => DischargeResult::Proved {
            used: proof.resolve_used(facts),
            trace: proof.trace,
        },
        Err(fail) if fail.timeout => DischargeResult::TimedOut,
        Err(fail) => {
            let missing = minimize(facts, history, defs, goal, limits, &fail);
            if fail.depth_hit && missing.is_empty() && fail.reason.is_none() {
                DischargeResult::DepthExceeded
            } else if fail.depth_hit && !fail.missing.is_empty() && missing == fail.missing {
                // the search was cut short; do not present the frontier as a
                // specification error
                DischargeResult::DepthExceeded
            } else {
                DischargeResult::Failed {
                    missing,
                    reason: fail.reason,
                }
            }
        }
    }
}

/// The smallest set of frontier subgoals that, added as facts, lets the goal
/// through. Empty when the goal already holds.
pub fn minimal_missing(
    facts: &[Formula],
    history: &TestHistory,
    defs: &Definitions,
    goal: &Goal,
    limits: &Limits,
) -> Vec<Formula> {
    let engine = Engine::new(facts, history, defs, limits);
    match engine.run(goal) {
        Ok(_) => Vec::new(),
        Err(fail) => minimize(facts, history, defs, goal, limits, &fail),
    }
}

fn minimize(
    facts: &[Formula],
    history: &TestHistory,
    defs: &Definitions,
    goal: &Goal,
    limits: &Limits,
    fail: &Fail,
) -> Vec<Formula> {
    let frontier = fail.missing.clone();
    if fail.untested || frontier.is_empty() {
        return frontier;
    }
    let proves_with = |extra: &[Formula]| {
        let mut all = facts.to_vec();
        all.extend(extra.iter().cloned());
        Engine::new(&all, history, defs, limits).run(goal).is_ok()
    };
    if !proves_with(&frontier) {
        return frontier;
    }
    let mut kept = frontier;
    let mut i = 0;
    while i < kept.len() {
        let mut without = kept.clone();
        without.remove(i);
        if proves_with(&without) {
            kept = without;
        } else {
            i += 1;
        }
    }
    kept
}

#[derive(Clone, Debug, Default)]
struct Proof {
    trace: Vec<String>,
    used: BTreeSet<usize>,
    used_empty_base: bool,
}

impl Proof {
    fn rule(name: impl Into<String>) -> Self {
        Proof {
            trace: vec![name.into()],
            ..Default::default()
        }
    }

    fn with(mut self, other: Proof) -> Self {
        self.trace.extend(other.trace);
        self.used.extend(other.used);
        self.used_empty_base |= other.used_empty_base;
        self
    }

    fn using(mut self, origin: &BTreeSet<usize>) -> Self {
        self.used.extend(origin.iter().copied());
        self
    }

    fn resolve_used(&self, facts: &[Formula]) -> Vec<Formula> {
        let mut out: Vec<Formula> = self.used.iter().map(|&i| facts[i].clone()).collect();
        if self.used_empty_base {
            out.push(is_empty_atom());
        }
        out
    }
}

#[derive(Clone, Debug, Default)]
struct Fail {
    missing: Vec<Formula>,
    reason: Option<String>,
    depth_hit: bool,
    timeout: bool,
    untested: bool,
}

impl Fail {
    fn missing(g: &Formula) -> Self {
        Fail {
            missing: vec![g.clone()],
            ..Default::default()
        }
    }

    fn merge(&mut self, other: Fail) {
        for m in other.missing {
            if !self.missing.contains(&m) {
                self.missing.push(m);
            }
        }
        if self.reason.is_none() {
            self.reason = other.reason;
        }
        self.depth_hit |= other.depth_hit;
        self.timeout |= other.timeout;
        self.untested |= other.untested;
    }

    /// Replaces the frontier by `g` while keeping the resource flags.
    fn collapse(self, g: &Formula) -> Self {
        Fail {
            missing: vec![g.clone()],
            reason: None,
            depth_hit: self.depth_hit,
            timeout: self.timeout,
            untested: false,
        }
    }
}

/// Negation normal form: negations only on atoms and `StatB`.
pub fn nnf(f: &Formula) -> Formula {
    normalize(&nnf_raw(f))
}

fn nnf_raw(f: &Formula) -> Formula {
    match f {
        Formula::Atom(_) => f.clone(),
        Formula::Not(g) => neg(g),
        Formula::Conj(gs) => Formula::Conj(gs.iter().map(nnf_raw).collect()),
        Formula::Disj(gs) => Formula::Disj(gs.iter().map(nnf_raw).collect()),
        Formula::Possible(g) => Formula::possible(nnf_raw(g)),
        Formula::Know(g) => Formula::know(nnf_raw(g)),
        Formula::StatB(r, h) => Formula::StatB(r.clone(), Box::new(normalize(h))),
    }
}

fn neg(f: &Formula) -> Formula {
    match f {
        Formula::Atom(_) => Formula::not(f.clone()),
        Formula::Not(g) => nnf_raw(g),
        Formula::Conj(gs) => Formula::Disj(gs.iter().map(neg).collect()),
        Formula::Disj(gs) => Formula::Conj(gs.iter().map(neg).collect()),
        Formula::Possible(g) => Formula::know(neg(g)),
        Formula::Know(g) => Formula::possible(neg(g)),
        Formula::StatB(r, h) => Formula::not(Formula::StatB(r.clone(), Box::new(normalize(h)))),
    }
}

/// True in every world of an equivalence class as soon as it is true in one.
fn is_stable(f: &Formula) -> bool {
    match f {
        Formula::Know(_) | Formula::Possible(_) => true,
        Formula::Conj(gs) | Formula::Disj(gs) => gs.iter().all(is_stable),
        _ => false,
    }
}

#[derive(Clone, Debug)]
struct Item {
    formula: Formula,
    origin: BTreeSet<usize>,
    how: &'static str,
    seq: usize,
}

struct Engine<'a> {
    items: Vec<Item>,
    index: BTreeMap<Formula, usize>,
    history: Option<&'a TestHistory>,
    defs: &'a Definitions,
    depth: usize,
    deadline: Rc<Cell<Option<Instant>>>,
    /// Contradictions found so far, per search depth.
    explosion: RefCell<BTreeMap<usize, Option<BTreeSet<usize>>>>,
    next_seq: Rc<Cell<usize>>,
    /// Only facts with `seq >= cursor` are split or explored as witnesses.
    cursor: usize,
}

impl<'a> Engine<'a> {
    fn new(
        facts: &[Formula],
        history: &'a TestHistory,
        defs: &'a Definitions,
        limits: &Limits,
    ) -> Self {
        let mut e = Engine::empty(Some(history), defs, limits.depth);
        e.deadline.set(limits.deadline);
        for (i, f) in facts.iter().enumerate() {
            e.add(nnf(f), BTreeSet::from([i]), "member");
        }
        e
    }

    fn empty(history: Option<&'a TestHistory>, defs: &'a Definitions, depth: usize) -> Self {
        Engine {
            items: Vec::new(),
            index: BTreeMap::new(),
            history,
            defs,
            depth,
            deadline: Rc::new(Cell::new(None)),
            explosion: RefCell::new(BTreeMap::new()),
            next_seq: Rc::new(Cell::new(0)),
            cursor: 0,
        }
    }

    fn child(&self, history: Option<&'a TestHistory>, cursor: usize) -> Engine<'a> {
        let mut sub = Engine::empty(history, self.defs, self.depth);
        sub.deadline = self.deadline.clone();
        sub.next_seq = self.next_seq.clone();
        sub.cursor = cursor;
        sub
    }

    fn add(&mut self, f: Formula, origin: BTreeSet<usize>, how: &'static str) {
        if self.index.contains_key(&f) {
            return;
        }
        let seq = self.next_seq.get();
        self.next_seq.set(seq + 1);
        self.insert(f, origin, how, seq);
    }

    fn insert(&mut self, f: Formula, origin: BTreeSet<usize>, how: &'static str, seq: usize) {
        if self.index.contains_key(&f) {
            return;
        }
        self.index.insert(f.clone(), self.items.len());
        self.items.push(Item {
            formula: f.clone(),
            origin: origin.clone(),
            how,
            seq,
        });
        match f {
            Formula::Conj(parts) => {
                for p in parts {
                    self.insert(p, origin.clone(), "split", seq);
                }
            }
            Formula::Know(inner) => self.insert(*inner, origin, "T", seq),
            _ => {}
        }
    }

    fn lookup(&self, f: &Formula) -> Option<&Item> {
        self.index.get(f).map(|&i| &self.items[i])
    }

    /// The part of the fact base that holds in every accessible world.
    fn stable_context(&self, cursor: usize) -> Engine<'a> {
        let mut sub = self.child(None, cursor);
        for it in &self.items {
            if is_stable(&it.formula) {
                sub.insert(it.formula.clone(), it.origin.clone(), it.how, it.seq);
            }
        }
        sub
    }

    /// The fact base plus one case of the disjunction `from`.
    fn extended(&self, f: Formula, from: &Item) -> Engine<'a> {
        let mut sub = self.child(self.history, from.seq + 1);
        for it in &self.items {
            sub.insert(it.formula.clone(), it.origin.clone(), it.how, it.seq);
        }
        sub.add(f, from.origin.clone(), "case");
        sub
    }

    fn witness_world(&self, witness: &Formula, from: &Item) -> Engine<'a> {
        let mut sub = self.stable_context(from.seq + 1);
        let before = sub.items.len();
        let first = sub.next_seq.get();
        sub.add(witness.clone(), from.origin.clone(), "witness");
        // every world of the class shares the stable context, so other
        // witnesses only need revisiting when this one extends it
        if !sub.items[before..].iter().any(|it| is_stable(&it.formula)) {
            sub.cursor = first;
        }
        sub
    }

    fn branchable(&self) -> impl Iterator<Item = &Item> {
        self.items.iter().filter(move |it| it.seq >= self.cursor)
    }

    fn timed_out(&self) -> bool {
        self.deadline.get().is_some_and(|d| Instant::now() >= d)
    }

    fn run(&self, goal: &Goal) -> Result<Proof, Fail> {
        match goal {
            Goal::Formula(g) => self.prove(&normalize(g), self.depth),
            Goal::PValue(pg) => self.prove_pvalue(pg),
        }
    }

    /// Origins of a contradiction in the fact base, if there is one.
    fn explosion(&self, depth: usize) -> Option<BTreeSet<usize>> {
        if let Some(known) = self.explosion.borrow().get(&depth) {
            return known.clone();
        }
        let found = self.find_contradiction(depth);
        // an interrupted search proves nothing about the fact base
        if !self.timed_out() {
            self.explosion.borrow_mut().insert(depth, found.clone());
        }
        found
    }

    fn find_contradiction(&self, depth: usize) -> Option<BTreeSet<usize>> {
        for it in &self.items {
            if let Formula::Not(inner) = &it.formula {
                if let Some(pos) = self.lookup(inner) {
                    let mut u = it.origin.clone();
                    u.extend(pos.origin.iter().copied());
                    return Some(u);
                }
            }
        }
        if depth == 0 {
            return None;
        }
        for it in self.branchable() {
            if self.timed_out() {
                return None;
            }
            if let Formula::Possible(witness) = &it.formula {
                if let Some(mut u) = self.witness_world(witness, it).explosion(depth - 1) {
                    u.extend(it.origin.iter().copied());
                    return Some(u);
                }
            }
        }
        for it in self.branchable() {
            if self.timed_out() {
                return None;
            }
            if let Formula::Disj(cases) = &it.formula {
                let mut all = it.origin.clone();
                let closed = cases.iter().all(|c| {
                    match self.extended(c.clone(), it).explosion(depth - 1) {
                        Some(u) => {
                            all.extend(u);
                            true
                        }
                        None => false,
                    }
                });
                if closed {
                    return Some(all);
                }
            }
        }
        None
    }

    fn prove(&self, g: &Formula, depth: usize) -> Result<Proof, Fail> {
        if self.timed_out() {
            return Err(Fail {
                timeout: true,
                ..Default::default()
            });
        }
        let n = nnf(g);
        if let Some(it) = self.lookup(&n) {
            return Ok(Proof::rule(it.how).using(&it.origin));
        }
        let direct = match g {
            Formula::Conj(parts) => return self.prove_all(parts, depth),
            Formula::Disj(parts) => {
                let mut fail = Fail::default();
                for p in parts {
                    match self.prove(p, depth) {
                        Ok(pr) => return Ok(Proof::rule("disj-intro").with(pr)),
                        Err(f) => fail.merge(f),
                    }
                }
                Err(fail.collapse(g))
            }
            Formula::Not(_) if &n != g => self
                .prove(&n, depth)
                .map(|pr| Proof::rule("duality").with(pr))
                .map_err(|f| f.collapse(g)),
            Formula::Not(_) => Err(Fail::missing(g)),
            Formula::Know(inner) => self.prove_know(g, inner, depth),
            Formula::Possible(inner) => self.prove_possible(g, inner, depth),
            Formula::StatB(record, h) => self.prove_statb(g, record, h),
            Formula::Atom(_) => self.unfold(g),
        };
        match direct {
            Ok(p) => Ok(p),
            Err(fail) => {
                if let Some(u) = self.explosion(depth) {
                    return Ok(Proof::rule("explosion").using(&u));
                }
                match self.by_cases(g, depth) {
                    Some(p) => Ok(p),
                    None => Err(fail),
                }
            }
        }
    }

    fn prove_all(&self, parts: &[Formula], depth: usize) -> Result<Proof, Fail> {
        let mut proof = Proof::rule("split");
        let mut fail: Option<Fail> = None;
        for p in parts {
            match self.prove(p, depth) {
                Ok(pr) => proof = proof.with(pr),
                Err(f) => match &mut fail {
                    Some(acc) => acc.merge(f),
                    None => fail = Some(f),
                },
            }
        }
        match fail {
            None => Ok(proof),
            Some(f) => Err(f),
        }
    }

    fn prove_know(&self, g: &Formula, inner: &Formula, depth: usize) -> Result<Proof, Fail> {
        if depth == 0 {
            return Err(Fail {
                missing: vec![g.clone()],
                depth_hit: true,
                ..Default::default()
            });
        }
        self.stable_context(self.cursor)
            .prove(inner, depth - 1)
            .map(|pr| Proof::rule("K-intro").with(pr))
            .map_err(|f| f.collapse(g))
    }

    fn prove_possible(&self, g: &Formula, inner: &Formula, depth: usize) -> Result<Proof, Fail> {
        if depth == 0 {
            return Err(Fail {
                missing: vec![g.clone()],
                depth_hit: true,
                ..Default::default()
            });
        }
        let mut fail = Fail::default();
        match self.prove(inner, depth - 1) {
            Ok(pr) => return Ok(Proof::rule("T-dual").with(pr)),
            Err(f) => fail.merge(f),
        }
        for it in &self.items {
            if let Formula::Possible(witness) = &it.formula {
                match self.witness_world(witness, it).prove(inner, depth - 1) {
                    Ok(pr) => return Ok(Proof::rule("P-mono").using(&it.origin).with(pr)),
                    Err(f) => fail.merge(f),
                }
            }
        }
        Err(fail.collapse(g))
    }

    fn by_cases(&self, g: &Formula, depth: usize) -> Option<Proof> {
        if depth == 0 {
            return None;
        }
        for it in self.branchable() {
            if self.timed_out() {
                return None;
            }
            if let Formula::Disj(cases) = &it.formula {
                let mut proof = Proof::rule("cases").using(&it.origin);
                let all = cases.iter().all(|c| {
                    match self.extended(c.clone(), it).prove(g, depth - 1) {
                        Ok(pr) => {
                            proof = std::mem::take(&mut proof).with(pr);
                            true
                        }
                        Err(_) => false,
                    }
                });
                if all {
                    return Some(proof);
                }
            }
        }
        None
    }

    fn prove_statb(&self, g: &Formula, claimed: &PValueRecord, h: &Formula) -> Result<Proof, Fail> {
        for it in &self.items {
            if let Formula::StatB(r, h2) = &it.formula {
                if hypothesis_equal(h, h2) && supports(r, claimed) {
                    let mut p = Proof::rule(it.how).using(&it.origin);
                    if r != claimed {
                        p.trace.push(format!("weaken({} ≤ {})", r.bound(), claimed.bound()));
                    }
                    return Ok(p);
                }
            }
        }
        let Some(history) = self.history else {
            return Err(Fail::missing(g));
        };
        match compose_pvs(h, history) {
            Ok(derived) => {
                if supports(&derived, claimed) {
                    let mut p = Proof {
                        trace: composition_trace(h, history),
                        ..Default::default()
                    };
                    if &derived != claimed {
                        p.trace
                            .push(format!("weaken({} ≤ {})", derived.bound(), claimed.bound()));
                    }
                    Ok(p)
                } else {
                    Err(Fail {
                        missing: vec![g.clone()],
                        reason: Some(format!(
                            "the test history gives {derived}, which does not justify {claimed}"
                        )),
                        ..Default::default()
                    })
                }
            }
            Err(ComposeError::UnmatchedHypothesis(sub)) => Err(Fail {
                reason: Some(format!(
                    "no test in the history has hypothesis {}",
                    crate::frontend::pretty_print(&sub)
                )),
                missing: vec![sub],
                untested: true,
                ..Default::default()
            }),
        }
    }

    fn prove_pvalue(&self, goal: &PValueGoal) -> Result<Proof, Fail> {
        let Some(history) = self.history else {
            return Err(Fail::default());
        };
        if history.base != HistoryBase::Empty {
            return Err(Fail {
                missing: vec![is_empty_atom()],
                reason: Some(
                    "compose_pvs needs the whole test history; the precondition does not say it starts empty"
                        .into(),
                ),
                ..Default::default()
            });
        }
        match compose_pvs(&goal.hypothesis, history) {
            Ok(derived) => {
                if derived.equivalent(&goal.reported) {
                    let mut p = Proof::rule("history-rooted");
                    p.used_empty_base = true;
                    p.trace.extend(composition_trace(&goal.hypothesis, history));
                    p.trace.push("record-eq".into());
                    Ok(p)
                } else {
                    Err(Fail {
                        reason: Some(format!(
                            "program reports {} but compose_pvs gives {}",
                            goal.reported, derived
                        )),
                        ..Default::default()
                    })
                }
            }
            Err(ComposeError::UnmatchedHypothesis(sub)) => Err(Fail {
                reason: Some(format!(
                    "no test in the history has hypothesis {}",
                    crate::frontend::pretty_print(&sub)
                )),
                missing: vec![sub],
                untested: true,
                ..Default::default()
            }),
        }
    }

    /// Defined predicates, decided from declarations.
    fn unfold(&self, g: &Formula) -> Result<Proof, Fail> {
        let Formula::Atom(a) = g else {
            return Err(Fail::missing(g));
        };
        let normal = |t: &Term| match t {
            Term::Name(n) => match self.defs.populations.get(&**n) {
                Some(Distribution::Normal { sd, .. }) => Some(sd.clone()),
                _ => None,
            },
            _ => None,
        };
        let ok = match (a.pred, a.args.as_slice()) {
            (Pred::IsNormal, [p]) => normal(p).is_some(),
            (Pred::EqVar, [p1, p2]) => {
                p1 == p2 || matches!((normal(p1), normal(p2)), (Some(s1), Some(s2)) if s1 == s2)
            }
            (Pred::PValue, [Term::Name(s)]) => self.defs.pvalue_symbols.contains(&**s),
            (Pred::PValue, [Term::Const(c)]) => {
                *c >= Rational::from_integer(0.into()) && *c <= Rational::from_integer(1.into())
            }
            (pred, [Term::Const(x), Term::Const(y)]) if pred.is_comparison() => match pred {
                Pred::Lt => x < y,
                Pred::Gt => x > y,
                Pred::Leq => x <= y,
                Pred::Geq => x >= y,
                Pred::Eq => x == y,
                Pred::Neq => x != y,
                _ => false,
            },
            _ => false,
        };
        if ok {
            Ok(Proof::rule(format!("unfold({})", a.pred.symbol())))
        } else {
            Err(Fail::missing(g))
        }
    }
}

fn composition_trace(h: &Formula, history: &TestHistory) -> Vec<String> {
    let h = normalize(h);
    let matching: Vec<_> = history
        .iter()
        .filter(|e| hypothesis_equal(&e.hypothesis, &h))
        .collect();
    match (matching.len(), &h) {
        (1, _) => vec![format!("history-lookup({})", matching[0].test_name)],
        (k, _) if k > 1 => vec![format!("bonferroni({k} tests)")],
        (_, Formula::Disj(parts)) => {
            let mut t: Vec<String> = parts
                .iter()
                .flat_map(|p| composition_trace(p, history))
                .collect();
            t.push(format!("compose-disj({})", parts.len()));
            t
        }
        (_, Formula::Conj(parts)) => {
            let mut t: Vec<String> = parts
                .iter()
                .flat_map(|p| composition_trace(p, history))
                .collect();
            t.push(format!("compose-conj({})", parts.len()));
            t
        }
        _ => vec![],
    }
}
