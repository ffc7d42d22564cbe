//! Static checking of hypothesis-testing programs annotated with belief
//! Hoare logic.
//!
//! A program in the small `.swl` language calls testing commands such as
//! `exec_ttest_1samp` and carries `requires`/`ensures` annotations. The
//! checker executes it symbolically, collects one verification condition per
//! command requirement and per postcondition, and discharges each with a
//! small epistemic entailment engine. p-values are symbolic and exact; only
//! [`numstat`] touches floating point.

pub mod driver;
pub mod entail;
pub mod frontend;
pub mod logic;
pub mod numstat;
pub mod oracle;
pub mod specs;
pub mod vcgen;

/// Exact rational used throughout the logic layer.
pub type Rational = num_rational::BigRational;

pub use driver::{verify_source, FunctionReport, Options, Report, VcReport};
pub use entail::{discharge, minimal_missing, DischargeResult, Goal};
pub use frontend::{check_source, parse, pretty_print, Diagnostic};
pub use logic::{normalize, Formula, PValueRecord, TestHistory};
pub use specs::{builtin_specs, compose_pvs};
pub use vcgen::{verify_function, VerifCondition};
