//! p-value composition over a test history.
//!
//! A hypothesis tested once keeps that test's record. Tested several times,
//! or asked about as a disjunction of tested parts, the record becomes the
//! Bonferroni sum `Leq (p1 + ... + pk)`; a conjunction gets `Leq (min ...)`.

use thiserror::Error;

use crate::logic::{hypothesis_equal, normalize, Formula, PExpr, PValueRecord, TestHistory};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComposeError {
    /// The formula (or one of its parts) was never the hypothesis of a test.
    #[error("hypothesis `{0}` was never tested")]
    UnmatchedHypothesis(Formula),
}

pub fn compose_pvs(h: &Formula, st: &TestHistory) -> Result<PValueRecord, ComposeError> {
    compose_normalized(&normalize(h), st)
}

fn compose_normalized(h: &Formula, st: &TestHistory) -> Result<PValueRecord, ComposeError> {
    let matches: Vec<&PValueRecord> = st
        .iter()
        .filter(|e| hypothesis_equal(&e.hypothesis, h))
        .map(|e| &e.pvalue)
        .collect();
    match matches.len() {
        1 => return Ok(matches[0].clone()),
        0 => {}
        _ => {
            return Ok(PValueRecord::AtMost(bonferroni(
                matches.iter().map(|r| r.bound().clone()),
            )))
        }
    }
    match h {
        Formula::Disj(parts) => {
            let mut bounds = Vec::with_capacity(parts.len());
            for part in parts {
                bounds.push(compose_normalized(part, st)?.bound().clone());
            }
            Ok(PValueRecord::AtMost(bonferroni(bounds)))
        }
        Formula::Conj(parts) => {
            let mut bounds = Vec::with_capacity(parts.len());
            for part in parts {
                bounds.push(compose_normalized(part, st)?.bound().clone());
            }
            Ok(PValueRecord::AtMost(PExpr::min(bounds)))
        }
        other => Err(ComposeError::UnmatchedHypothesis(other.clone())),
    }
}

/// Sum of bounds, capped at 1 when the cap can be decided.
pub fn bonferroni<I: IntoIterator<Item = PExpr>>(bounds: I) -> PExpr {
    let s = PExpr::sum(bounds);
    let one = Rational::from_integer(1.into());
    match &s {
        PExpr::Const(c) if *c > one => PExpr::Const(one),
        _ if s.lower_bound() >= one => PExpr::Const(one),
        _ => s,
    }
}

/// Whether a record derived from the history justifies the claimed one.
pub fn supports(derived: &PValueRecord, claimed: &PValueRecord) -> bool {
    match (derived, claimed) {
        (PValueRecord::Exact(a), PValueRecord::Exact(b)) => a.canonical() == b.canonical(),
        (PValueRecord::Exact(a) | PValueRecord::AtMost(a), PValueRecord::AtMost(b)) => {
            a.provably_le(b) || b.lower_bound() >= Rational::from_integer(1.into())
        }
        (PValueRecord::AtMost(_), PValueRecord::Exact(_)) => false,
    }
}
