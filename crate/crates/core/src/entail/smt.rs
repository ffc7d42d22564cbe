//! SMT-LIB2 rendering of verification conditions, for cross-checking with an
//! external solver.
//!
//! Atoms become boolean constants and p-value symbols become reals in
//! `[0, 1]`. Each modal subformula gets its own boolean, tied to its body by
//! axiom T (`Know g => g`, `g => Possible g`). A `StatB` formula is a
//! boolean implied by the record the history composes for its hypothesis
//! and by weaker-or-equal beliefs about the same hypothesis, both stated as
//! linear arithmetic. p-value goals are compared the same way.
//! The goal is asserted negated, so `unsat` means proved.

use std::collections::BTreeMap;
use std::fmt::Write;

use num_traits::Signed;
use thiserror::Error;

use super::{Distribution, Goal};
use crate::logic::{
    normalize, AtomicFormula, Formula, HistoryBase, PExpr, PValueRecord, Pred,
    Term,
};
use crate::specs::{compose_pvs, supports};
use crate::vcgen::VerifCondition;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmtError {
    #[error("cannot encode {0}")]
    UnsupportedConstruct(String),
}

/// File name for a condition: `vc_<function>_<index>.smt2`.
pub fn smt_file_name(vc: &VerifCondition) -> String {
    format!("vc_{}_{}.smt2", vc.function, vc.index)
}

pub fn emit_smtlib(vc: &VerifCondition) -> Result<String, SmtError> {
    let goal_formula = match &vc.goal {
        Goal::Formula(g) => Some(g),
        Goal::PValue(pg) => Some(&pg.hypothesis),
    };
    for f in vc.facts.iter().chain(goal_formula) {
        if !f.respects_statb_invariant() {
            return Err(SmtError::UnsupportedConstruct(format!(
                "a modality under StatB in {}",
                crate::frontend::pretty_print(f)
            )));
        }
    }
    let mut enc = Encoder::new(vc);
    let mut facts = Vec::with_capacity(vc.facts.len());
    for f in vc.facts.iter() {
        facts.push(enc.formula(&normalize(f))?);
    }
    let goal = match &vc.goal {
        Goal::Formula(g) => enc.formula(&normalize(g))?,
        Goal::PValue(pg) => enc.pvalue_goal(&pg.reported, &pg.hypothesis)?,
    };

    let mut out = String::new();
    let _ = writeln!(out, "; {} ({})", vc.id(), vc.label);
    let _ = writeln!(out, "(set-logic QF_LRA)");
    for (name, comment) in &enc.bools {
        let _ = writeln!(out, "(declare-const {name} Bool) ; {comment}");
    }
    for s in &enc.reals {
        let _ = writeln!(out, "(declare-const {s} Real)");
        let _ = writeln!(out, "(assert (and (<= 0.0 {s}) (<= {s} 1.0)))");
    }
    for a in &enc.axioms {
        let _ = writeln!(out, "(assert {a})");
    }
    for f in &facts {
        let _ = writeln!(out, "(assert {f})");
    }
    let _ = writeln!(out, "(assert (not {goal}))");
    let _ = writeln!(out, "(check-sat)");
    Ok(out)
}

struct Encoder<'a> {
    vc: &'a VerifCondition,
    /// Boolean constant per atom or modal subformula, with a readable note.
    names: BTreeMap<Formula, String>,
    bools: Vec<(String, String)>,
    reals: std::collections::BTreeSet<String>,
    axioms: Vec<String>,
}

impl<'a> Encoder<'a> {
    fn new(vc: &'a VerifCondition) -> Self {
        Encoder {
            vc,
            names: BTreeMap::new(),
            bools: Vec::new(),
            reals: Default::default(),
            axioms: Vec::new(),
        }
    }

    fn constant(&mut self, f: &Formula, prefix: &str) -> (String, bool) {
        if let Some(n) = self.names.get(f) {
            return (n.clone(), false);
        }
        let n = format!("{prefix}{}", self.bools.len());
        self.names.insert(f.clone(), n.clone());
        self.bools.push((n.clone(), f.to_string().replace('\n', " ")));
        (n, true)
    }

    fn formula(&mut self, f: &Formula) -> Result<String, SmtError> {
        Ok(match f {
            Formula::Atom(a) => self.atom(f, a)?,
            Formula::Not(g) => format!("(not {})", self.formula(g)?),
            Formula::Conj(gs) => self.nary("and", gs, "true")?,
            Formula::Disj(gs) => self.nary("or", gs, "false")?,
            Formula::Know(g) => {
                let (n, new) = self.constant(f, "k");
                if new {
                    let body = self.formula(g)?;
                    self.axioms.push(format!("(=> {n} {body})"));
                }
                n
            }
            Formula::Possible(g) => {
                let (n, new) = self.constant(f, "m");
                if new {
                    let body = self.formula(g)?;
                    self.axioms.push(format!("(=> {body} {n})"));
                }
                n
            }
            Formula::StatB(r, h) => {
                if !h.is_modality_free() {
                    return Err(SmtError::UnsupportedConstruct(format!(
                        "a modality under StatB in {f}"
                    )));
                }
                let earlier = self.statb_facts(h);
                let (n, new) = self.constant(f, "b");
                if new {
                    if let Some(derived) = self.history_record(h) {
                        let s = self.supports_arith(&derived, r)?;
                        self.axioms.push(format!("(=> {s} {n})"));
                    }
                    for (other, rec) in earlier {
                        let fwd = self.supports_arith(&rec, r)?;
                        self.axioms.push(format!("(=> (and {other} {fwd}) {n})"));
                        let back = self.supports_arith(r, &rec)?;
                        self.axioms.push(format!("(=> (and {n} {back}) {other})"));
                    }
                }
                n
            }
        })
    }

    fn nary(&mut self, op: &str, gs: &[Formula], unit: &str) -> Result<String, SmtError> {
        if gs.is_empty() {
            return Ok(unit.into());
        }
        let parts = gs
            .iter()
            .map(|g| self.formula(g))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(format!("({op} {})", parts.join(" ")))
    }

    fn atom(&mut self, f: &Formula, a: &AtomicFormula) -> Result<String, SmtError> {
        for t in &a.args {
            if contains_param(t) {
                return Err(SmtError::UnsupportedConstruct(format!("placeholder in {f}")));
            }
        }
        if let (true, [Term::Const(x), Term::Const(y)]) = (a.pred.is_comparison(), a.args.as_slice())
        {
            let op = match a.pred {
                Pred::Lt => "<",
                Pred::Gt => ">",
                Pred::Leq => "<=",
                Pred::Geq => ">=",
                _ => "=",
            };
            let cmp = format!("({op} {} {})", real(x), real(y));
            return Ok(if a.pred == Pred::Neq {
                format!("(not {cmp})")
            } else {
                cmp
            });
        }
        if a.pred == Pred::IsEmpty {
            return Ok(if self.vc.history.base == HistoryBase::Empty && self.vc.history.is_empty() {
                "true".into()
            } else if self.vc.history.is_empty() {
                let (n, _) = self.constant(f, "a");
                n
            } else {
                "false".into()
            });
        }
        let (n, new) = self.constant(f, "a");
        if new && self.defined(a) {
            self.axioms.push(n.clone());
        }
        Ok(n)
    }

    /// Whether the declarations make `a` true.
    fn defined(&self, a: &AtomicFormula) -> bool {
        let sd = |t: &Term| match t {
            Term::Name(n) => match self.vc.defs.populations.get(&**n) {
                Some(Distribution::Normal { sd, .. }) => Some(sd.clone()),
                _ => None,
            },
            _ => None,
        };
        match (a.pred, a.args.as_slice()) {
            (Pred::IsNormal, [p]) => sd(p).is_some(),
            (Pred::EqVar, [p1, p2]) => {
                p1 == p2 || matches!((sd(p1), sd(p2)), (Some(x), Some(y)) if x == y)
            }
            (Pred::PValue, [Term::Name(s)]) => self.vc.defs.pvalue_symbols.contains(&**s),
            (Pred::PValue, [Term::Const(c)]) => {
                !c.is_negative() && *c <= Rational::from_integer(1.into())
            }
            _ => false,
        }
    }

    fn statb_facts(&self, h: &Formula) -> Vec<(String, PValueRecord)> {
        self.names
            .iter()
            .filter_map(|(f, n)| match f {
                Formula::StatB(r, h2) if crate::logic::hypothesis_equal(h, h2) => {
                    Some((n.clone(), r.clone()))
                }
                _ => None,
            })
            .collect()
    }

    fn history_record(&self, h: &Formula) -> Option<PValueRecord> {
        compose_pvs(h, &self.vc.history).ok()
    }

    fn pexpr(&mut self, e: &PExpr) -> String {
        match e {
            PExpr::Const(q) => real(q),
            PExpr::Sym(s) => {
                let n = format!("p_{s}");
                self.reals.insert(n.clone());
                n
            }
            PExpr::Sum(items) => {
                let parts: Vec<String> = items.iter().map(|i| self.pexpr(i)).collect();
                format!("(+ {})", parts.join(" "))
            }
            PExpr::Min(items) => {
                let mut parts: Vec<String> = items.iter().map(|i| self.pexpr(i)).collect();
                let mut acc = parts.pop().unwrap_or_else(|| "1.0".into());
                while let Some(x) = parts.pop() {
                    acc = format!("(ite (<= {x} {acc}) {x} {acc})");
                }
                acc
            }
        }
    }

    /// Arithmetic form of `supports(derived, claimed)`.
    fn supports_arith(
        &mut self,
        derived: &PValueRecord,
        claimed: &PValueRecord,
    ) -> Result<String, SmtError> {
        if supports(derived, claimed) {
            return Ok("true".into());
        }
        let d = self.pexpr(derived.bound());
        let c = self.pexpr(claimed.bound());
        Ok(match (derived, claimed) {
            (PValueRecord::Exact(_), PValueRecord::Exact(_)) => format!("(= {d} {c})"),
            (_, PValueRecord::AtMost(_)) => format!("(or (<= {d} {c}) (>= {c} 1.0))"),
            (PValueRecord::AtMost(_), PValueRecord::Exact(_)) => "false".into(),
        })
    }

    fn pvalue_goal(&mut self, reported: &PValueRecord, h: &Formula) -> Result<String, SmtError> {
        if self.vc.history.base != HistoryBase::Empty {
            return Ok("false".into());
        }
        let Some(derived) = self.history_record(h) else {
            return Ok("false".into());
        };
        if derived.equivalent(reported) {
            return Ok("true".into());
        }
        let d = self.pexpr(derived.bound());
        let r = self.pexpr(reported.bound());
        Ok(match (&derived, reported) {
            (PValueRecord::Exact(_), PValueRecord::Exact(_)) => format!("(= {d} {r})"),
            (PValueRecord::AtMost(_), PValueRecord::AtMost(_)) => {
                format!("(= (ite (<= {d} 1.0) {d} 1.0) (ite (<= {r} 1.0) {r} 1.0))")
            }
            _ => "false".into(),
        })
    }
}

fn contains_param(t: &Term) -> bool {
    match t {
        Term::Param(_) => true,
        Term::Mean(inner) => contains_param(inner),
        _ => false,
    }
}

fn real(q: &Rational) -> String {
    let body = if q.is_integer() {
        format!("{}.0", q.numer().abs())
    } else {
        format!("(/ {}.0 {}.0)", q.numer().abs(), q.denom())
    };
    if q.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}
