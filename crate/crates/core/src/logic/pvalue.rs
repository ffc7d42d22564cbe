//! Symbolic p-value expressions and the records that carry them.
//!
//! A p-value in the logic layer is either an exact rational, an opaque
//! symbol produced by a test command (always in `[0, 1]`), or a sum / minimum
//! of those. Everything is kept in canonical form so record equality is
//! structural.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::Rational;

use super::LogicError;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PExpr {
    Const(Rational),
    Sym(String),
    Sum(Vec<PExpr>),
    Min(Vec<PExpr>),
}

impl PExpr {
    pub fn constant(q: Rational) -> Self {
        PExpr::Const(q)
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        PExpr::Const(Rational::new(num.into(), den.into()))
    }

    pub fn sym(name: impl Into<String>) -> Self {
        PExpr::Sym(name.into())
    }

    /// Canonical sum: nested sums flattened, constants folded into one
    /// trailing term, remaining terms sorted.
    pub fn sum<I: IntoIterator<Item = PExpr>>(items: I) -> Self {
        let mut acc = Rational::zero();
        let mut terms = Vec::new();
        for item in items {
            match item.canonical() {
                PExpr::Const(c) => acc += c,
                PExpr::Sum(inner) => {
                    for t in inner {
                        match t {
                            PExpr::Const(c) => acc += c,
                            other => terms.push(other),
                        }
                    }
                }
                other => terms.push(other),
            }
        }
        terms.sort();
        if !acc.is_zero() || terms.is_empty() {
            terms.push(PExpr::Const(acc));
        }
        if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            PExpr::Sum(terms)
        }
    }

    /// Canonical minimum. Elements dominated by another element are dropped,
    /// so `min(p, p + q)` collapses to `p` and `min(1, p)` to `p`.
    pub fn min<I: IntoIterator<Item = PExpr>>(items: I) -> Self {
        let mut flat: Vec<PExpr> = Vec::new();
        let mut least: Option<Rational> = None;
        for item in items {
            match item.canonical() {
                PExpr::Const(c) => {
                    least = Some(match least {
                        Some(l) if l <= c => l,
                        _ => c,
                    })
                }
                PExpr::Min(inner) => {
                    for t in inner {
                        match t {
                            PExpr::Const(c) => {
                                least = Some(match least {
                                    Some(l) if l <= c => l,
                                    _ => c,
                                })
                            }
                            other => flat.push(other),
                        }
                    }
                }
                other => flat.push(other),
            }
        }
        if let Some(c) = least {
            flat.push(PExpr::Const(c));
        }
        flat.sort();
        flat.dedup();
        // drop anything some other element provably undercuts
        let mut kept: Vec<PExpr> = Vec::new();
        for (i, e) in flat.iter().enumerate() {
            let dominated = flat.iter().enumerate().any(|(j, f)| {
                j != i && f.provably_le(e) && !(e.provably_le(f) && j > i)
            });
            if !dominated {
                kept.push(e.clone());
            }
        }
        match kept.len() {
            0 => PExpr::Const(Rational::one()),
            1 => kept.pop().unwrap(),
            _ => PExpr::Min(kept),
        }
    }

    pub fn canonical(&self) -> PExpr {
        match self {
            PExpr::Const(_) | PExpr::Sym(_) => self.clone(),
            PExpr::Sum(items) => PExpr::sum(items.iter().cloned()),
            PExpr::Min(items) => PExpr::min(items.iter().cloned()),
        }
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            PExpr::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Largest value the expression can take given every symbol lies in `[0, 1]`.
    pub fn upper_bound(&self) -> Rational {
        match self {
            PExpr::Const(c) => c.clone(),
            PExpr::Sym(_) => Rational::one(),
            PExpr::Sum(items) => items.iter().map(PExpr::upper_bound).sum(),
            PExpr::Min(items) => items
                .iter()
                .map(PExpr::upper_bound)
                .min()
                .unwrap_or_else(Rational::one),
        }
    }

    pub fn lower_bound(&self) -> Rational {
        match self {
            PExpr::Const(c) => c.clone(),
            PExpr::Sym(_) => Rational::zero(),
            PExpr::Sum(items) => items.iter().map(PExpr::lower_bound).sum(),
            PExpr::Min(items) => items
                .iter()
                .map(PExpr::lower_bound)
                .min()
                .unwrap_or_else(Rational::one),
        }
    }

    /// Sound, incomplete check of `self <= other` for all symbol assignments
    /// in `[0, 1]`.
    pub fn provably_le(&self, other: &PExpr) -> bool {
        if self == other {
            return true;
        }
        if let (PExpr::Const(a), PExpr::Const(b)) = (self, other) {
            return a <= b;
        }
        if self.upper_bound() <= other.lower_bound() {
            return true;
        }
        if let PExpr::Min(items) = self {
            if items.iter().any(|i| i.provably_le(other)) {
                return true;
            }
        }
        if let PExpr::Min(items) = other {
            if items.iter().all(|i| self.provably_le(i)) {
                return true;
            }
        }
        if let PExpr::Sum(terms) = other {
            // every term is non-negative, so dropping terms only shrinks the sum
            if let PExpr::Sum(mine) = self {
                if sum_included(mine, terms) {
                    return true;
                }
            }
            if terms.iter().any(|t| self.provably_le(t)) {
                return true;
            }
        }
        false
    }

    /// Canonical `min(1, self)`.
    pub fn capped(&self) -> PExpr {
        let c = self.canonical();
        if c.upper_bound() <= Rational::one() {
            c
        } else if c.lower_bound() >= Rational::one() {
            PExpr::Const(Rational::one())
        } else {
            PExpr::min([PExpr::Const(Rational::one()), c])
        }
    }

    pub fn symbols(&self, out: &mut Vec<String>) {
        match self {
            PExpr::Const(_) => {}
            PExpr::Sym(s) => {
                if !out.contains(s) {
                    out.push(s.clone())
                }
            }
            PExpr::Sum(items) | PExpr::Min(items) => {
                for i in items {
                    i.symbols(out);
                }
            }
        }
    }

    /// Replaces symbols via `f`; symbols mapped to `None` are kept.
    pub fn rename(&self, f: &dyn Fn(&str) -> Option<PExpr>) -> PExpr {
        match self {
            PExpr::Const(_) => self.clone(),
            PExpr::Sym(s) => f(s).unwrap_or_else(|| self.clone()),
            PExpr::Sum(items) => PExpr::sum(items.iter().map(|i| i.rename(f))),
            PExpr::Min(items) => PExpr::min(items.iter().map(|i| i.rename(f))),
        }
    }

    /// Numeric evaluation with a symbol table.
    pub fn eval(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Option<f64> {
        Some(match self {
            PExpr::Const(c) => c.to_f64()?,
            PExpr::Sym(s) => lookup(s)?,
            PExpr::Sum(items) => {
                let mut acc = 0.0;
                for i in items {
                    acc += i.eval(lookup)?;
                }
                acc
            }
            PExpr::Min(items) => {
                let mut acc = f64::INFINITY;
                for i in items {
                    acc = acc.min(i.eval(lookup)?);
                }
                acc
            }
        })
    }

    fn is_atomic(&self) -> bool {
        matches!(self, PExpr::Const(_) | PExpr::Sym(_))
    }
}

fn sum_included(small: &[PExpr], big: &[PExpr]) -> bool {
    let mut rest: Vec<&PExpr> = big.iter().filter(|t| t.as_const().is_none()).collect();
    let mut small_const = Rational::zero();
    for t in small {
        if let PExpr::Const(c) = t {
            small_const += c.clone();
            continue;
        }
        match rest.iter().position(|r| *r == t) {
            Some(i) => {
                rest.remove(i);
            }
            None => return false,
        }
    }
    let big_const: Rational = big.iter().filter_map(|t| t.as_const().cloned()).sum();
    let leftover: Rational = rest.iter().map(|r| r.lower_bound()).sum();
    small_const <= big_const + leftover
}

/// Renders a rational as a decimal literal when it terminates, `n/d` otherwise.
pub fn format_rational(q: &Rational) -> String {
    let den = q.denom().clone();
    let mut d = den.clone();
    let two = num_bigint::BigInt::from(2);
    let five = num_bigint::BigInt::from(5);
    let mut digits = 0usize;
    let mut twos = 0usize;
    let mut fives = 0usize;
    while d.is_even() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return format!("{}/{}", q.numer(), q.denom());
    }
    digits += twos.max(fives);
    if digits == 0 {
        return q.numer().to_string();
    }
    let scale = num_bigint::BigInt::from(10).pow(digits as u32);
    let scaled = (q * Rational::from_integer(scale)).to_integer();
    let neg = scaled.is_negative();
    let s = scaled.abs().to_string();
    let s = format!("{:0>width$}", s, width = digits + 1);
    let (int, frac) = s.split_at(s.len() - digits);
    format!("{}{}.{}", if neg { "-" } else { "" }, int, frac)
}

impl fmt::Display for PExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PExpr::Const(c) => f.write_str(&format_rational(c)),
            PExpr::Sym(s) => f.write_str(s),
            PExpr::Sum(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" +. ")?;
                    }
                    if item.is_atomic() {
                        write!(f, "{item}")?;
                    } else {
                        write!(f, "({item})")?;
                    }
                }
                Ok(())
            }
            PExpr::Min(items) => write_min(f, items),
        }
    }
}

fn write_min(f: &mut fmt::Formatter<'_>, items: &[PExpr]) -> fmt::Result {
    let wrap = |e: &PExpr| {
        if e.is_atomic() {
            e.to_string()
        } else {
            format!("({e})")
        }
    };
    match items {
        [] => f.write_str("1"),
        [one] => write!(f, "{one}"),
        [first, rest @ ..] => {
            if rest.len() == 1 {
                write!(f, "min {} {}", wrap(first), wrap(&rest[0]))
            } else {
                write!(f, "min {} (", wrap(first))?;
                write_min(f, rest)?;
                f.write_str(")")
            }
        }
    }
}

/// The p-value attached to a test result or claimed by a belief.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PValueRecord {
    /// The p-value is exactly this expression.
    Exact(PExpr),
    /// The p-value is at most this expression.
    AtMost(PExpr),
}

impl PValueRecord {
    pub fn exact(p: PExpr) -> Result<Self, LogicError> {
        check_range(&p)?;
        Ok(PValueRecord::Exact(p.canonical()))
    }

    pub fn at_most(p: PExpr) -> Result<Self, LogicError> {
        check_range(&p)?;
        Ok(PValueRecord::AtMost(p.canonical()))
    }

    pub fn bound(&self) -> &PExpr {
        match self {
            PValueRecord::Exact(p) | PValueRecord::AtMost(p) => p,
        }
    }

    pub fn canonical(&self) -> PValueRecord {
        match self {
            PValueRecord::Exact(p) => PValueRecord::Exact(p.canonical()),
            PValueRecord::AtMost(p) => PValueRecord::AtMost(p.canonical()),
        }
    }

    /// Record equality up to the vacuous part of upper bounds: `Leq x` and
    /// `Leq y` coincide when `min(1, x) = min(1, y)`.
    pub fn equivalent(&self, other: &PValueRecord) -> bool {
        match (self, other) {
            (PValueRecord::Exact(a), PValueRecord::Exact(b)) => a.canonical() == b.canonical(),
            (PValueRecord::AtMost(a), PValueRecord::AtMost(b)) => a.capped() == b.capped(),
            _ => false,
        }
    }

    pub fn rename(&self, f: &dyn Fn(&str) -> Option<PExpr>) -> PValueRecord {
        match self {
            PValueRecord::Exact(p) => PValueRecord::Exact(p.rename(f)),
            PValueRecord::AtMost(p) => PValueRecord::AtMost(p.rename(f)),
        }
    }
}

fn check_range(p: &PExpr) -> Result<(), LogicError> {
    if let PExpr::Const(c) = p {
        if c.is_negative() || *c > Rational::one() {
            return Err(LogicError::PValueOutOfRange(format_rational(c)));
        }
    }
    Ok(())
}

impl fmt::Display for PValueRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (tag, p) = match self {
            PValueRecord::Exact(p) => ("Eq", p),
            PValueRecord::AtMost(p) => ("Leq", p),
        };
        if p.is_atomic() {
            write!(f, "{tag} {p}")
        } else {
            write!(f, "{tag} ({p})")
        }
    }
}

impl Serialize for PValueRecord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: &str) -> PExpr {
        PExpr::sym(n)
    }

    #[test]
    fn sum_folds_constants_and_sorts() {
        let s = PExpr::sum([p("p2"), PExpr::ratio(1, 100), p("p1"), PExpr::ratio(2, 100)]);
        assert_eq!(s, PExpr::Sum(vec![p("p1"), p("p2"), PExpr::ratio(3, 100)]));
        assert_eq!(PExpr::sum([PExpr::ratio(3, 100), PExpr::ratio(1, 100)]), PExpr::ratio(1, 25));
    }

    #[test]
    fn min_prunes_dominated() {
        assert_eq!(PExpr::min([PExpr::ratio(1, 1), p("p")]), p("p"));
        assert_eq!(PExpr::min([p("a"), PExpr::sum([p("a"), p("b")])]), p("a"));
        assert_eq!(PExpr::min([p("b"), p("a"), p("a")]), PExpr::Min(vec![p("a"), p("b")]));
    }

    #[test]
    fn le_reasoning() {
        let s = PExpr::sum([p("p1"), p("p2")]);
        let m = PExpr::min([p("p1"), p("p2")]);
        assert!(m.provably_le(&s));
        assert!(!s.provably_le(&m));
        assert!(p("p1").provably_le(&s));
        assert!(PExpr::ratio(3, 100).provably_le(&PExpr::ratio(1, 20)));
        assert!(!PExpr::ratio(6, 100).provably_le(&PExpr::ratio(1, 20)));
        assert!(p("p").provably_le(&PExpr::ratio(1, 1)));
    }

    #[test]
    fn capping() {
        assert_eq!(p("p").capped(), p("p"));
        assert_eq!(PExpr::sum([p("a"), PExpr::ratio(1, 1)]).capped(), PExpr::ratio(1, 1));
        let s = PExpr::sum([p("a"), p("b")]);
        assert!(PValueRecord::AtMost(s.clone()).equivalent(&PValueRecord::AtMost(s.capped())));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(format_rational(&Rational::new(1.into(), 20.into())), "0.05");
        assert_eq!(format_rational(&Rational::new(1.into(), 3.into())), "1/3");
        assert_eq!(format_rational(&Rational::new(7.into(), 1.into())), "7");
        assert_eq!(format_rational(&Rational::new(3.into(), 100.into())), "0.03");
        assert_eq!(format_rational(&Rational::new(5.into(), 4.into())), "1.25");
    }

    #[test]
    fn record_range_checked() {
        assert!(PValueRecord::exact(PExpr::ratio(3, 2)).is_err());
        assert!(PValueRecord::at_most(PExpr::ratio(-1, 2)).is_err());
        assert!(PValueRecord::exact(PExpr::ratio(1, 2)).is_ok());
        assert_eq!(
            PValueRecord::at_most(PExpr::ratio(1, 20)).unwrap().to_string(),
            "Leq 0.05"
        );
    }
}
