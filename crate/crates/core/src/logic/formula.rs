use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::Rational;

use super::pvalue::PValueRecord;
use super::LogicError;

/// Terms appearing as predicate arguments.
///
/// Names stay unresolved here: whether `t_n` is a population or a dataset is
/// the binder's business, the logic only needs them to compare equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(Rational),
    Name(Arc<str>),
    Mean(Box<Term>),
    /// Template placeholder, removed by [`substitute`].
    Param(Arc<str>),
}

impl Term {
    pub fn name(n: impl AsRef<str>) -> Self {
        Term::Name(Arc::from(n.as_ref()))
    }

    pub fn mean(of: Term) -> Self {
        Term::Mean(Box::new(of))
    }

    pub fn param(n: impl AsRef<str>) -> Self {
        Term::Param(Arc::from(n.as_ref()))
    }

    pub fn int(v: i64) -> Self {
        Term::Const(Rational::from_integer(v.into()))
    }
}

/// What kind of value a predicate slot accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SlotKind {
    Dataset,
    Population,
    Real,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pred {
    Sampled,
    IsEmpty,
    NonPaired,
    Paired,
    IsNormal,
    EqVar,
    PValue,
    Lt,
    Gt,
    Neq,
    Eq,
    Leq,
    Geq,
}

impl Pred {
    pub const ALL: [Pred; 13] = [
        Pred::Sampled,
        Pred::IsEmpty,
        Pred::NonPaired,
        Pred::Paired,
        Pred::IsNormal,
        Pred::EqVar,
        Pred::PValue,
        Pred::Lt,
        Pred::Gt,
        Pred::Neq,
        Pred::Eq,
        Pred::Leq,
        Pred::Geq,
    ];

    pub fn signature(self) -> &'static [SlotKind] {
        use SlotKind::*;
        match self {
            Pred::Sampled => &[Dataset, Population],
            Pred::IsEmpty => &[],
            Pred::NonPaired | Pred::Paired => &[Dataset, Dataset],
            Pred::IsNormal => &[Population],
            Pred::EqVar => &[Population, Population],
            Pred::PValue => &[Real],
            Pred::Lt | Pred::Gt | Pred::Neq | Pred::Eq | Pred::Leq | Pred::Geq => &[Real, Real],
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            Pred::Lt | Pred::Gt | Pred::Neq | Pred::Eq | Pred::Leq | Pred::Geq
        )
    }

    /// Surface spelling: identifier for applicative predicates, infix
    /// operator for comparisons.
    pub fn symbol(self) -> &'static str {
        match self {
            Pred::Sampled => "sampled",
            Pred::IsEmpty => "is_empty",
            Pred::NonPaired => "non_paired",
            Pred::Paired => "paired",
            Pred::IsNormal => "is_normal",
            Pred::EqVar => "eq_var",
            Pred::PValue => "pvalue",
            Pred::Lt => "<'",
            Pred::Gt => ">'",
            Pred::Neq => "$!=",
            Pred::Eq => "$=",
            Pred::Leq => "<='",
            Pred::Geq => ">='",
        }
    }

    pub fn from_ident(s: &str) -> Option<Pred> {
        Pred::ALL
            .into_iter()
            .find(|p| !p.is_comparison() && p.symbol() == s)
    }

    /// The comparison holding exactly when this one fails.
    pub fn complement(self) -> Option<Pred> {
        Some(match self {
            Pred::Lt => Pred::Geq,
            Pred::Geq => Pred::Lt,
            Pred::Gt => Pred::Leq,
            Pred::Leq => Pred::Gt,
            Pred::Eq => Pred::Neq,
            Pred::Neq => Pred::Eq,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomicFormula {
    pub pred: Pred,
    pub args: Vec<Term>,
}

impl AtomicFormula {
    pub fn new(pred: Pred, args: Vec<Term>) -> Result<Self, LogicError> {
        let sig = pred.signature();
        if sig.len() != args.len() {
            return Err(LogicError::Arity {
                pred: pred.symbol().to_string(),
                expected: sig.len(),
                found: args.len(),
            });
        }
        for (slot, arg) in sig.iter().zip(&args) {
            let ok = match (slot, arg) {
                (_, Term::Name(_)) | (_, Term::Param(_)) => true,
                (SlotKind::Real, Term::Const(_) | Term::Mean(_)) => true,
                _ => false,
            };
            if !ok {
                return Err(LogicError::ArgumentKind {
                    pred: pred.symbol().to_string(),
                    slot: *slot,
                });
            }
        }
        Ok(AtomicFormula { pred, args })
    }

    pub fn cmp(pred: Pred, lhs: Term, rhs: Term) -> Self {
        debug_assert!(pred.is_comparison());
        AtomicFormula {
            pred,
            args: vec![lhs, rhs],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(AtomicFormula),
    Not(Box<Formula>),
    Conj(Vec<Formula>),
    Disj(Vec<Formula>),
    Possible(Box<Formula>),
    Know(Box<Formula>),
    StatB(PValueRecord, Box<Formula>),
}

impl Formula {
    pub fn atom(pred: Pred, args: Vec<Term>) -> Result<Self, LogicError> {
        AtomicFormula::new(pred, args).map(Formula::Atom)
    }

    pub fn cmp(pred: Pred, lhs: Term, rhs: Term) -> Self {
        Formula::Atom(AtomicFormula::cmp(pred, lhs, rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::Conj(vec![a, b])
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Disj(vec![a, b])
    }

    pub fn possible(f: Formula) -> Self {
        Formula::Possible(Box::new(f))
    }

    pub fn know(f: Formula) -> Self {
        Formula::Know(Box::new(f))
    }

    /// Statistical belief in `h`. The hypothesis must not contain modalities.
    pub fn stat_b(record: PValueRecord, h: Formula) -> Result<Self, LogicError> {
        if !h.is_modality_free() {
            return Err(LogicError::ModalHypothesis);
        }
        Ok(Formula::StatB(record, Box::new(h)))
    }

    pub fn is_modality_free(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(f) => f.is_modality_free(),
            Formula::Conj(fs) | Formula::Disj(fs) => fs.iter().all(Formula::is_modality_free),
            Formula::Possible(_) | Formula::Know(_) | Formula::StatB(..) => false,
        }
    }

    /// Holds when every StatB payload is modality-free, recursively.
    pub fn respects_statb_invariant(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(f) | Formula::Possible(f) | Formula::Know(f) => {
                f.respects_statb_invariant()
            }
            Formula::Conj(fs) | Formula::Disj(fs) => {
                fs.iter().all(Formula::respects_statb_invariant)
            }
            Formula::StatB(_, h) => h.is_modality_free(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Not(f) | Formula::Possible(f) | Formula::Know(f) | Formula::StatB(_, f) => {
                1 + f.depth()
            }
            Formula::Conj(fs) | Formula::Disj(fs) => {
                1 + fs.iter().map(Formula::depth).max().unwrap_or(0)
            }
        }
    }

    pub fn atoms(&self) -> Vec<&AtomicFormula> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a AtomicFormula>) {
        match self {
            Formula::Atom(a) => out.push(a),
            Formula::Not(f) | Formula::Possible(f) | Formula::Know(f) | Formula::StatB(_, f) => {
                f.collect_atoms(out)
            }
            Formula::Conj(fs) | Formula::Disj(fs) => {
                for f in fs {
                    f.collect_atoms(out)
                }
            }
        }
    }

    /// Conjuncts of a top-level conjunction (the formula itself otherwise).
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::Conj(fs) => fs.iter().flat_map(Formula::conjuncts).collect(),
            other => vec![other],
        }
    }

    pub fn mentions_statb(&self) -> bool {
        match self {
            Formula::Atom(_) => false,
            Formula::StatB(..) => true,
            Formula::Not(f) | Formula::Possible(f) | Formula::Know(f) => f.mentions_statb(),
            Formula::Conj(fs) | Formula::Disj(fs) => fs.iter().any(Formula::mentions_statb),
        }
    }

    pub fn map_terms(&self, f: &mut dyn FnMut(&Term) -> Term) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Atom(AtomicFormula {
                pred: a.pred,
                args: a.args.iter().map(&mut *f).collect(),
            }),
            Formula::Not(g) => Formula::not(g.map_terms(f)),
            Formula::Conj(gs) => Formula::Conj(gs.iter().map(|g| g.map_terms(f)).collect()),
            Formula::Disj(gs) => Formula::Disj(gs.iter().map(|g| g.map_terms(f)).collect()),
            Formula::Possible(g) => Formula::possible(g.map_terms(f)),
            Formula::Know(g) => Formula::know(g.map_terms(f)),
            Formula::StatB(r, g) => Formula::StatB(r.clone(), Box::new(g.map_terms(f))),
        }
    }

    pub fn map_records(&self, f: &dyn Fn(&PValueRecord) -> PValueRecord) -> Formula {
        match self {
            Formula::Atom(_) => self.clone(),
            Formula::Not(g) => Formula::not(g.map_records(f)),
            Formula::Conj(gs) => Formula::Conj(gs.iter().map(|g| g.map_records(f)).collect()),
            Formula::Disj(gs) => Formula::Disj(gs.iter().map(|g| g.map_records(f)).collect()),
            Formula::Possible(g) => Formula::possible(g.map_records(f)),
            Formula::Know(g) => Formula::know(g.map_records(f)),
            Formula::StatB(r, g) => Formula::StatB(f(r), Box::new(g.map_records(f))),
        }
    }
}

/// Canonical form: double negations removed, conjunctions and disjunctions
/// flattened into sorted duplicate-free lists, p-value payloads canonical.
/// `Possible` is kept as a primitive.
pub fn normalize(f: &Formula) -> Formula {
    let out = match f {
        Formula::Atom(_) => f.clone(),
        Formula::Not(inner) => match normalize(inner) {
            Formula::Not(x) => *x,
            other => Formula::not(other),
        },
        Formula::Conj(fs) => flatten(fs, true),
        Formula::Disj(fs) => flatten(fs, false),
        Formula::Possible(g) => Formula::possible(normalize(g)),
        Formula::Know(g) => Formula::know(normalize(g)),
        Formula::StatB(r, g) => Formula::StatB(r.canonical(), Box::new(normalize(g))),
    };
    debug_assert!(out.respects_statb_invariant());
    out
}

fn flatten(fs: &[Formula], conj: bool) -> Formula {
    let mut items = Vec::new();
    for g in fs {
        match normalize(g) {
            Formula::Conj(inner) if conj => items.extend(inner),
            Formula::Disj(inner) if !conj => items.extend(inner),
            other => items.push(other),
        }
    }
    items.sort();
    items.dedup();
    if items.len() == 1 {
        return items.pop().unwrap();
    }
    if conj {
        Formula::Conj(items)
    } else {
        Formula::Disj(items)
    }
}

/// Equality of hypotheses modulo normalization.
pub fn hypothesis_equal(f: &Formula, g: &Formula) -> bool {
    normalize(f) == normalize(g)
}

/// A value a template placeholder can be bound to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Binding {
    Population(String),
    Dataset(String),
    Real(Rational),
}

impl Binding {
    fn fits(&self, slot: Option<SlotKind>) -> bool {
        match (slot, self) {
            // mean(?) takes either a population or a dataset
            (None, Binding::Population(_) | Binding::Dataset(_)) => true,
            (Some(SlotKind::Population), Binding::Population(_)) => true,
            (Some(SlotKind::Dataset), Binding::Dataset(_)) => true,
            (Some(SlotKind::Real), Binding::Real(_)) => true,
            _ => false,
        }
    }

    fn to_term(&self) -> Term {
        match self {
            Binding::Population(n) | Binding::Dataset(n) => Term::name(n),
            Binding::Real(q) => Term::Const(q.clone()),
        }
    }
}

/// Replaces every placeholder in `f` according to `binding`.
pub fn substitute(f: &Formula, binding: &BTreeMap<String, Binding>) -> Result<Formula, LogicError> {
    Ok(match f {
        Formula::Atom(a) => {
            let sig = a.pred.signature();
            let mut args = Vec::with_capacity(a.args.len());
            for (i, arg) in a.args.iter().enumerate() {
                args.push(subst_term(arg, sig.get(i).copied(), binding)?);
            }
            Formula::Atom(AtomicFormula::new(a.pred, args)?)
        }
        Formula::Not(g) => Formula::not(substitute(g, binding)?),
        Formula::Conj(gs) => Formula::Conj(
            gs.iter()
                .map(|g| substitute(g, binding))
                .collect::<Result<_, _>>()?,
        ),
        Formula::Disj(gs) => Formula::Disj(
            gs.iter()
                .map(|g| substitute(g, binding))
                .collect::<Result<_, _>>()?,
        ),
        Formula::Possible(g) => Formula::possible(substitute(g, binding)?),
        Formula::Know(g) => Formula::know(substitute(g, binding)?),
        Formula::StatB(r, g) => Formula::StatB(r.clone(), Box::new(substitute(g, binding)?)),
    })
}

fn subst_term(
    t: &Term,
    slot: Option<SlotKind>,
    binding: &BTreeMap<String, Binding>,
) -> Result<Term, LogicError> {
    Ok(match t {
        Term::Param(name) => {
            let b = binding
                .get(&**name)
                .ok_or_else(|| LogicError::UnboundPlaceholder(name.to_string()))?;
            if !b.fits(slot) {
                return Err(LogicError::KindMismatch(name.to_string()));
            }
            b.to_term()
        }
        Term::Mean(inner) => Term::mean(subst_term(inner, None, binding)?),
        other => other.clone(),
    })
}

pub fn substitute_term(t: &Term, binding: &BTreeMap<String, Binding>) -> Result<Term, LogicError> {
    subst_term(t, Some(SlotKind::Real), binding)
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::frontend::pretty_print(self))
    }
}
