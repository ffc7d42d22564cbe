//! Terms, formulas, p-value records and test histories.

mod formula;
mod history;
mod pvalue;

pub use formula::{
    hypothesis_equal, normalize, substitute, substitute_term, AtomicFormula, Binding, Formula,
    Pred, SlotKind, Term,
};
pub use history::{HistoryBase, HistoryEntry, TestHistory};
pub use pvalue::{format_rational, PExpr, PValueRecord};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("placeholder `{0}` has no binding")]
    UnboundPlaceholder(String),
    #[error("placeholder `{0}` is bound to a value of the wrong kind")]
    KindMismatch(String),
    #[error("`{pred}` expects {expected} argument(s), found {found}")]
    Arity {
        pred: String,
        expected: usize,
        found: usize,
    },
    #[error("`{pred}` cannot take that argument in a {slot:?} position")]
    ArgumentKind { pred: String, slot: SlotKind },
    #[error("p-value {0} lies outside [0, 1]")]
    PValueOutOfRange(String),
    #[error("statistical belief about a formula containing a modality")]
    ModalHypothesis,
}

pub(crate) fn serialize_display<T: std::fmt::Display, S: serde::Serializer>(
    v: &T,
    s: S,
) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}
