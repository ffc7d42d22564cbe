//! Surface syntax, as written, with spans. Names are not resolved yet.

use super::diagnostics::Span;
use crate::logic::Pred;
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Program {
    pub decls: Vec<Decl>,
    pub functions: Vec<Function>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Population { name: Ident, dist: DistDecl },
    Dataset {
        name: Ident,
        source: Option<Ident>,
        size: Option<(u64, Span)>,
    },
    Hyp { name: Ident, formula: SFormula },
    Group { name: Ident, members: Vec<(Ident, Ident)> },
}

impl Decl {
    pub fn name(&self) -> &Ident {
        match self {
            Decl::Population { name, .. }
            | Decl::Dataset { name, .. }
            | Decl::Hyp { name, .. }
            | Decl::Group { name, .. } => name,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DistDecl {
    Normal { mean: Ident, sd: Ident },
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Function {
    pub name: Ident,
    pub params: Vec<Ident>,
    pub lets: Vec<LetStmt>,
    pub result: Expr,
    pub annotation: Option<Annotation>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LetStmt {
    pub pattern: Pattern,
    pub value: Expr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    Var(Ident),
    Tuple(Vec<Ident>, Span),
}

impl Pattern {
    pub fn names(&self) -> Vec<&Ident> {
        match self {
            Pattern::Var(i) => vec![i],
            Pattern::Tuple(is, _) => is.iter().collect(),
        }
    }

    pub fn span(&self) -> Span {
        match self {
            Pattern::Var(i) => i.span,
            Pattern::Tuple(_, s) => *s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annotation {
    pub header: Option<Header>,
    pub requires: Vec<SFormula>,
    pub ensures: Vec<SFormula>,
    pub span: Span,
}

/// `(p1, p2, p) = ex_hack trial1 trial2`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Header {
    pub pattern: Pattern,
    pub function: Ident,
    pub args: Vec<Ident>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Var(String),
    Num(Rational),
    Tuple(Vec<Expr>),
    List(Vec<Expr>),
    App { func: Ident, args: Vec<Expr> },
    Add(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HistRef {
    /// `!st`
    Current,
    /// `old st`
    Old,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SFormula {
    pub kind: SFormulaKind,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FoldKind {
    /// Conjunction over all pairs.
    AllPairs,
    /// Disjunction over all pairs.
    AnyPair,
    /// Conjunction over each group against the control.
    EachVsControl,
    /// Disjunction over each group against the control.
    AnyVsControl,
}

impl FoldKind {
    pub fn keyword(self) -> &'static str {
        match self {
            FoldKind::AllPairs => "for_all_pairs",
            FoldKind::AnyPair => "exists_pair",
            FoldKind::EachVsControl => "for_each_vs_control",
            FoldKind::AnyVsControl => "exists_vs_control",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        [
            FoldKind::AllPairs,
            FoldKind::AnyPair,
            FoldKind::EachVsControl,
            FoldKind::AnyVsControl,
        ]
        .into_iter()
        .find(|k| k.keyword() == s)
    }

    pub fn uses_control(self) -> bool {
        matches!(self, FoldKind::EachVsControl | FoldKind::AnyVsControl)
    }

    pub fn is_conjunctive(self) -> bool {
        matches!(self, FoldKind::AllPairs | FoldKind::EachVsControl)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SFormulaKind {
    Atom {
        pred: Pred,
        args: Vec<STerm>,
    },
    /// `is_empty` applied to a history reference.
    IsEmpty(HistRef),
    Cmp {
        op: Pred,
        lhs: STerm,
        rhs: STerm,
    },
    Not(Box<SFormula>),
    And(Box<SFormula>, Box<SFormula>),
    Or(Box<SFormula>, Box<SFormula>),
    Possible(Box<SFormula>),
    Know(Box<SFormula>),
    StatB {
        record: SRecord,
        hyp: Box<SFormula>,
    },
    HypRef(Ident),
    /// `Leq p = compose_pvs h !st`
    PvEq {
        record: SRecord,
        hyp: Box<SFormula>,
        hist: HistRef,
    },
    /// `World (old st) interp |= f`; the `!st` form is dropped by the parser.
    AtOld(Box<SFormula>),
    Fold {
        kind: FoldKind,
        groups: GroupsRef,
        control: Option<(u64, Span)>,
        body: Box<SFormula>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupsRef {
    Named(Ident),
    Inline(Vec<(Ident, Ident)>, Span),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum STerm {
    Num(Rational, Span),
    Name(Ident),
    Param(Ident),
    Mean(Box<STerm>, Span),
}

impl STerm {
    pub fn span(&self) -> Span {
        match self {
            STerm::Num(_, s) | STerm::Mean(_, s) => *s,
            STerm::Name(i) | STerm::Param(i) => i.span,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecordKind {
    Eq,
    Leq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SRecord {
    pub kind: RecordKind,
    pub expr: SPExpr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SPExpr {
    Num(Rational, Span),
    Var(Ident),
    Sum(Vec<SPExpr>),
    Min(Vec<SPExpr>),
}
