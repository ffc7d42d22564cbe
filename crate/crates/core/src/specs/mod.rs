//! Pre/postcondition templates for the hypothesis-testing commands.
//!
//! Each command checks a list of labeled requirements, asserts an alternative
//! hypothesis, and records one history entry per comparison it performs.

mod compose;

pub use compose::{bonferroni, compose_pvs, supports, ComposeError};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::frontend::pretty_print;
use crate::logic::{
    substitute, Binding, Formula, HistoryEntry, LogicError, PExpr,
    PValueRecord, Pred, Term,
};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Alternative {
    Two,
    Up,
    Low,
}

impl Alternative {
    pub const ALL: [Alternative; 3] = [Alternative::Two, Alternative::Up, Alternative::Low];

    pub fn from_ident(s: &str) -> Option<Self> {
        match s {
            "Two" => Some(Alternative::Two),
            "Up" => Some(Alternative::Up),
            "Low" => Some(Alternative::Low),
            _ => None,
        }
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Alternative::Two => "Two",
            Alternative::Up => "Up",
            Alternative::Low => "Low",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum MultipleComparisonMethod {
    TukeyHsd,
    Dunnett,
    Williams,
    SteelDwass,
    Steel,
}

impl MultipleComparisonMethod {
    pub const ALL: [MultipleComparisonMethod; 5] = [
        MultipleComparisonMethod::TukeyHsd,
        MultipleComparisonMethod::Dunnett,
        MultipleComparisonMethod::Williams,
        MultipleComparisonMethod::SteelDwass,
        MultipleComparisonMethod::Steel,
    ];

    /// Compares every group against a control rather than all pairs.
    pub fn uses_control(self) -> bool {
        matches!(
            self,
            MultipleComparisonMethod::Dunnett
                | MultipleComparisonMethod::Williams
                | MultipleComparisonMethod::Steel
        )
    }

    /// Rank-based methods drop the normality assumptions.
    pub fn is_parametric(self) -> bool {
        !matches!(
            self,
            MultipleComparisonMethod::SteelDwass | MultipleComparisonMethod::Steel
        )
    }

    pub fn test_name(self) -> &'static str {
        match self {
            MultipleComparisonMethod::TukeyHsd => "tukey_hsd",
            MultipleComparisonMethod::Dunnett => "dunnett",
            MultipleComparisonMethod::Williams => "williams",
            MultipleComparisonMethod::SteelDwass => "steel_dwass",
            MultipleComparisonMethod::Steel => "steel",
        }
    }

    pub fn command(self) -> String {
        format!("exec_{}", self.test_name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    Population,
    Dataset,
    Real,
    DatasetPair,
    Alternative,
    Groups,
    ControlIndex,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RequirementTemplate {
    pub label: &'static str,
    #[serde(serialize_with = "crate::logic::serialize_display")]
    pub formula: Formula,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Family {
    OneSample,
    TwoSample { paired: bool },
    Multiple(MultipleComparisonMethod),
}

/// Template for one hypothesis-testing command.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommandSpec {
    pub name: String,
    pub test_name: String,
    pub family: Family,
    pub params: Vec<ParamSpec>,
    /// Requirements independent of the alternative. For multiple-comparison
    /// commands these are per-pair templates over `P1 Y1 P2 Y2`.
    pub requires: Vec<RequirementTemplate>,
    /// Per-group requirements over `P Y` (multiple-comparison commands only).
    pub group_requires: Vec<RequirementTemplate>,
    /// The two quantities the alternative compares.
    #[serde(skip)]
    pub compared: (Term, Term),
}

/// A requirement after substitution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Requirement {
    pub label: String,
    pub formula: Formula,
}

/// One pairwise test performed by a command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonInstance {
    /// Indices into the group list, `(0, 1)` for two-sample tests.
    pub pair: (usize, usize),
    pub binding: BTreeMap<String, Binding>,
    pub hypothesis: Formula,
    pub entry: HistoryEntry,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instantiation {
    pub requires: Vec<Requirement>,
    pub comparisons: Vec<ComparisonInstance>,
}

impl Instantiation {
    /// Hypothesis of the (first) comparison.
    pub fn hypothesis(&self) -> &Formula {
        &self.comparisons[0].hypothesis
    }
}

/// A group of a multiple-comparison command.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Group {
    pub population: String,
    pub dataset: String,
}

impl Group {
    pub fn new(population: impl Into<String>, dataset: impl Into<String>) -> Self {
        Group {
            population: population.into(),
            dataset: dataset.into(),
        }
    }
}

/// An actual argument to a command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Arg {
    Population(String),
    Dataset(String),
    Real(Rational),
    Pair(String, String),
    Alternative(Alternative),
    Groups(Vec<Group>),
    Index(usize),
}

impl Arg {
    pub fn kind(&self) -> ParamKind {
        match self {
            Arg::Population(_) => ParamKind::Population,
            Arg::Dataset(_) => ParamKind::Dataset,
            Arg::Real(_) => ParamKind::Real,
            Arg::Pair(..) => ParamKind::DatasetPair,
            Arg::Alternative(_) => ParamKind::Alternative,
            Arg::Groups(_) => ParamKind::Groups,
            Arg::Index(_) => ParamKind::ControlIndex,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("`{command}` takes {expected} argument(s), got {found}")]
    ArityMismatch {
        command: String,
        expected: usize,
        found: usize,
    },
    #[error("argument {index} of `{command}` should be a {expected:?}, got a {found:?}")]
    KindMismatch {
        command: String,
        index: usize,
        expected: ParamKind,
        found: ParamKind,
    },
    #[error("{method:?} compares against a control group, but none was given")]
    MissingControl { method: MultipleComparisonMethod },
    #[error("control index {index} is out of range for {groups} groups")]
    BadControl { index: usize, groups: usize },
    #[error("multiple comparison needs at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

fn atom(pred: Pred, args: Vec<Term>) -> Formula {
    Formula::atom(pred, args).expect("builtin template is well-formed")
}

fn p(n: &str) -> Term {
    Term::param(n)
}

fn req(label: &'static str, formula: Formula) -> RequirementTemplate {
    RequirementTemplate { label, formula }
}

fn one_sample() -> CommandSpec {
    CommandSpec {
        name: "exec_ttest_1samp".into(),
        test_name: "ttest_1samp".into(),
        family: Family::OneSample,
        params: vec![
            ParamSpec { name: "P", kind: ParamKind::Population },
            ParamSpec { name: "MU", kind: ParamKind::Real },
            ParamSpec { name: "Y", kind: ParamKind::Dataset },
            ParamSpec { name: "ALT", kind: ParamKind::Alternative },
        ],
        requires: vec![
            req("sampling", atom(Pred::Sampled, vec![p("Y"), p("P")])),
            req("normality", atom(Pred::IsNormal, vec![p("P")])),
        ],
        group_requires: vec![],
        compared: (Term::mean(p("P")), p("MU")),
    }
}

fn two_sample(name: &str, test_name: &str, paired: bool) -> CommandSpec {
    let mut requires = vec![
        req("sampling", atom(Pred::Sampled, vec![p("Y1"), p("P1")])),
        req("sampling", atom(Pred::Sampled, vec![p("Y2"), p("P2")])),
        req("normality", atom(Pred::IsNormal, vec![p("P1")])),
        req("normality", atom(Pred::IsNormal, vec![p("P2")])),
    ];
    if paired {
        requires.push(req("paired samples", atom(Pred::Paired, vec![p("Y1"), p("Y2")])));
    } else {
        requires.push(req(
            "independent samples",
            atom(Pred::NonPaired, vec![p("Y1"), p("Y2")]),
        ));
        requires.push(req("equal variances", atom(Pred::EqVar, vec![p("P1"), p("P2")])));
    }
    CommandSpec {
        name: name.into(),
        test_name: test_name.into(),
        family: Family::TwoSample { paired },
        params: vec![
            ParamSpec { name: "P1", kind: ParamKind::Population },
            ParamSpec { name: "P2", kind: ParamKind::Population },
            ParamSpec { name: "Y", kind: ParamKind::DatasetPair },
            ParamSpec { name: "ALT", kind: ParamKind::Alternative },
        ],
        requires,
        group_requires: vec![],
        compared: (Term::mean(p("P1")), Term::mean(p("P2"))),
    }
}

fn multiple(method: MultipleComparisonMethod) -> CommandSpec {
    let mut params = vec![ParamSpec { name: "GROUPS", kind: ParamKind::Groups }];
    if method.uses_control() {
        params.push(ParamSpec { name: "CONTROL", kind: ParamKind::ControlIndex });
    }
    params.push(ParamSpec { name: "ALT", kind: ParamKind::Alternative });

    let mut group_requires = vec![req("sampling", atom(Pred::Sampled, vec![p("Y"), p("P")]))];
    let mut requires = vec![req(
        "independent samples",
        atom(Pred::NonPaired, vec![p("Y1"), p("Y2")]),
    )];
    if method.is_parametric() {
        group_requires.push(req("normality", atom(Pred::IsNormal, vec![p("P")])));
        requires.push(req("equal variances", atom(Pred::EqVar, vec![p("P1"), p("P2")])));
    }
    CommandSpec {
        name: method.command(),
        test_name: method.test_name().into(),
        family: Family::Multiple(method),
        params,
        requires,
        group_requires,
        compared: (Term::mean(p("P1")), Term::mean(p("P2"))),
    }
}

/// Every command known to the checker, keyed by command name.
pub fn builtin_specs() -> &'static BTreeMap<String, CommandSpec> {
    static SPECS: OnceLock<BTreeMap<String, CommandSpec>> = OnceLock::new();
    SPECS.get_or_init(|| {
        let mut all = vec![
            one_sample(),
            two_sample("exec_ttest_ind_eq", "ttest_ind_eq", false),
            two_sample("exec_ttest_paired", "ttest_paired", true),
        ];
        all.extend(MultipleComparisonMethod::ALL.into_iter().map(multiple));
        all.into_iter().map(|s| (s.name.clone(), s)).collect()
    })
}

impl CommandSpec {
    /// The alternative hypothesis template for `alt`.
    pub fn hypothesis_template(&self, alt: Alternative) -> Formula {
        tail_hypothesis(alt, self.compared.0.clone(), self.compared.1.clone())
    }

    /// Prior-belief requirements on the tails selected by `alt`.
    pub fn tail_requirements(&self, alt: Alternative) -> Vec<RequirementTemplate> {
        let (l, r) = self.compared.clone();
        match alt {
            Alternative::Two => vec![
                req(
                    "prior belief: lower tail possible",
                    Formula::possible(Formula::cmp(Pred::Lt, l.clone(), r.clone())),
                ),
                req(
                    "prior belief: upper tail possible",
                    Formula::possible(Formula::cmp(Pred::Gt, l, r)),
                ),
            ],
            Alternative::Up => vec![
                req(
                    "prior belief: upper tail possible",
                    Formula::possible(Formula::cmp(Pred::Gt, l.clone(), r.clone())),
                ),
                req(
                    "prior belief: lower tail ruled out",
                    Formula::not(Formula::possible(Formula::cmp(Pred::Leq, l, r))),
                ),
            ],
            Alternative::Low => vec![
                req(
                    "prior belief: lower tail possible",
                    Formula::possible(Formula::cmp(Pred::Lt, l.clone(), r.clone())),
                ),
                req(
                    "prior belief: upper tail ruled out",
                    Formula::not(Formula::possible(Formula::cmp(Pred::Geq, l, r))),
                ),
            ],
        }
    }

    fn check_args(&self, args: &[Arg]) -> Result<(), SpecError> {
        if args.len() != self.params.len() {
            return Err(SpecError::ArityMismatch {
                command: self.name.clone(),
                expected: self.params.len(),
                found: args.len(),
            });
        }
        for (i, (param, arg)) in self.params.iter().zip(args).enumerate() {
            if param.kind != arg.kind() {
                return Err(SpecError::KindMismatch {
                    command: self.name.clone(),
                    index: i,
                    expected: param.kind,
                    found: arg.kind(),
                });
            }
        }
        Ok(())
    }

    /// Substitutes `args` into every template. `fresh` names the symbolic
    /// p-value of the i-th comparison.
    pub fn instantiate(
        &self,
        args: &[Arg],
        fresh: &mut dyn FnMut(usize) -> String,
    ) -> Result<Instantiation, SpecError> {
        self.check_args(args)?;
        let alt = args
            .iter()
            .find_map(|a| match a {
                Arg::Alternative(k) => Some(*k),
                _ => None,
            })
            .expect("checked");
        let tails = self.tail_requirements(alt);

        let mut requires = Vec::new();
        let mut comparisons = Vec::new();
        let mut add_pair = |binding: BTreeMap<String, Binding>,
                            pair: (usize, usize),
                            requires: &mut Vec<Requirement>,
                            comparisons: &mut Vec<ComparisonInstance>|
         -> Result<(), SpecError> {
            for t in self.requires.iter().chain(&tails) {
                requires.push(Requirement {
                    label: t.label.to_string(),
                    formula: substitute(&t.formula, &binding)?,
                });
            }
            let hypothesis = substitute(&self.hypothesis_template(alt), &binding)?;
            let sym = fresh(comparisons.len());
            let entry = HistoryEntry::new(
                self.test_name.clone(),
                &hypothesis,
                PValueRecord::Exact(PExpr::Sym(sym)),
            );
            comparisons.push(ComparisonInstance {
                pair,
                binding,
                hypothesis,
                entry,
            });
            Ok(())
        };

        match self.family {
            Family::OneSample => {
                let mut b = BTreeMap::new();
                if let (Arg::Population(pop), Arg::Real(mu), Arg::Dataset(y)) =
                    (&args[0], &args[1], &args[2])
                {
                    b.insert("P".into(), Binding::Population(pop.clone()));
                    b.insert("MU".into(), Binding::Real(mu.clone()));
                    b.insert("Y".into(), Binding::Dataset(y.clone()));
                }
                add_pair(b, (0, 0), &mut requires, &mut comparisons)?;
            }
            Family::TwoSample { .. } => {
                let mut b = BTreeMap::new();
                if let (Arg::Population(p1), Arg::Population(p2), Arg::Pair(y1, y2)) =
                    (&args[0], &args[1], &args[2])
                {
                    b.insert("P1".into(), Binding::Population(p1.clone()));
                    b.insert("P2".into(), Binding::Population(p2.clone()));
                    b.insert("Y1".into(), Binding::Dataset(y1.clone()));
                    b.insert("Y2".into(), Binding::Dataset(y2.clone()));
                }
                add_pair(b, (0, 1), &mut requires, &mut comparisons)?;
            }
            Family::Multiple(method) => {
                let groups = match &args[0] {
                    Arg::Groups(g) => g,
                    _ => unreachable!("checked"),
                };
                let control = match args.get(1) {
                    Some(Arg::Index(i)) if method.uses_control() => Some(*i),
                    _ => None,
                };
                for g in groups {
                    let mut b = BTreeMap::new();
                    b.insert("P".into(), Binding::Population(g.population.clone()));
                    b.insert("Y".into(), Binding::Dataset(g.dataset.clone()));
                    for t in &self.group_requires {
                        requires.push(Requirement {
                            label: t.label.to_string(),
                            formula: substitute(&t.formula, &b)?,
                        });
                    }
                }
                for pair in expand_comparisons(method, groups, control)? {
                    add_pair(pair.binding, pair.pair, &mut requires, &mut comparisons)?;
                }
            }
        }
        Ok(Instantiation {
            requires,
            comparisons,
        })
    }
}

/// The comparison `lhs op rhs` for the tail an alternative selects.
pub fn tail_hypothesis(alt: Alternative, lhs: Term, rhs: Term) -> Formula {
    let pred = match alt {
        Alternative::Two => Pred::Neq,
        Alternative::Up => Pred::Gt,
        Alternative::Low => Pred::Lt,
    };
    Formula::cmp(pred, lhs, rhs)
}

/// A pair of groups compared by a multiple-comparison method.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonPair {
    pub pair: (usize, usize),
    pub binding: BTreeMap<String, Binding>,
}

/// Lists the pairs a method compares: all unordered pairs for Tukey and
/// Steel-Dwass, control against every other group for the rest.
pub fn expand_comparisons(
    method: MultipleComparisonMethod,
    groups: &[Group],
    control: Option<usize>,
) -> Result<Vec<ComparisonPair>, SpecError> {
    let k = groups.len();
    if k < 2 {
        return Err(SpecError::TooFewGroups(k));
    }
    let pairs: Vec<(usize, usize)> = if method.uses_control() {
        let c = control.ok_or(SpecError::MissingControl { method })?;
        if c >= k {
            return Err(SpecError::BadControl { index: c, groups: k });
        }
        (0..k).filter(|&j| j != c).map(|j| (j, c)).collect()
    } else {
        (0..k)
            .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
            .collect()
    };
    Ok(pairs
        .into_iter()
        .map(|(i, j)| {
            let mut b = BTreeMap::new();
            b.insert("P1".into(), Binding::Population(groups[i].population.clone()));
            b.insert("Y1".into(), Binding::Dataset(groups[i].dataset.clone()));
            b.insert("P2".into(), Binding::Population(groups[j].population.clone()));
            b.insert("Y2".into(), Binding::Dataset(groups[j].dataset.clone()));
            ComparisonPair { pair: (i, j), binding: b }
        })
        .collect())
}

/// JSON-friendly rendering of a spec with every template in surface syntax.
#[derive(Serialize)]
pub struct SpecDoc {
    pub name: String,
    pub test_name: String,
    pub params: Vec<ParamSpec>,
    pub requires: Vec<RequirementTemplate>,
    pub group_requires: Vec<RequirementTemplate>,
    pub tail_requires: BTreeMap<String, Vec<RequirementTemplate>>,
    pub hypothesis: BTreeMap<String, String>,
    pub history_update: String,
}

pub const SPEC_DOC_SCHEMA: &str = "beliefcheck.specs/1";

pub fn spec_docs() -> serde_json::Value {
    let docs: Vec<SpecDoc> = builtin_specs()
        .values()
        .map(|s| SpecDoc {
            name: s.name.clone(),
            test_name: s.test_name.clone(),
            params: s.params.clone(),
            requires: s.requires.clone(),
            group_requires: s.group_requires.clone(),
            tail_requires: Alternative::ALL
                .iter()
                .map(|a| (a.to_string(), s.tail_requirements(*a)))
                .collect(),
            hypothesis: Alternative::ALL
                .iter()
                .map(|a| (a.to_string(), pretty_print(&s.hypothesis_template(*a))))
                .collect(),
            history_update: format!("Cons (\"{}\", h, Eq result) !(old st)", s.test_name),
        })
        .collect();
    serde_json::json!({ "schema": SPEC_DOC_SCHEMA, "commands": docs })
}
