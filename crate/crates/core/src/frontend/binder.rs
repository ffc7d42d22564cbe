//! Name resolution and kind checking. Produces logic-level formulas and
//! command calls bound to their specs.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, ToPrimitive};

use super::ast::*;
use super::diagnostics::{Code, Diagnostic, Span};
use crate::entail::Distribution;
use crate::logic::{
    format_rational, substitute, AtomicFormula, Formula, LogicError, PExpr, PValueRecord, Pred,
    SlotKind, Term,
};
use crate::specs::{
    builtin_specs, expand_comparisons, Alternative, Arg, CommandSpec, Group,
    MultipleComparisonMethod, ParamKind,
};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetInfo {
    pub source: Option<String>,
    pub size: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckedProgram {
    pub populations: BTreeMap<String, Distribution>,
    pub datasets: BTreeMap<String, DatasetInfo>,
    pub groups: BTreeMap<String, Vec<Group>>,
    pub hyps: BTreeMap<String, Formula>,
    pub functions: Vec<CheckedFunction>,
    pub warnings: Vec<Diagnostic>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckedFunction {
    pub name: String,
    pub span: Span,
    pub params: Vec<String>,
    pub lets: Vec<CLet>,
    pub result: CExpr,
    /// Names the annotation gives to the returned value.
    pub result_names: Vec<String>,
    pub annotated: bool,
    pub requires: Vec<Clause>,
    pub ensures: Vec<EnsuresClause>,
}

/// One conjunct of a requires clause.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub formula: Formula,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EnsuresItem {
    Formula { formula: Formula, old: bool },
    /// `record = compose_pvs hypothesis st`; record symbols name program
    /// variables.
    PValue {
        record: PValueRecord,
        hypothesis: Formula,
        old: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnsuresClause {
    pub item: EnsuresItem,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CLet {
    pub names: Vec<String>,
    pub tuple: bool,
    pub value: CExpr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CExpr {
    Var(String, Span),
    Num(Rational, Span),
    Tuple(Vec<CExpr>, Span),
    Command {
        spec: String,
        args: Vec<Arg>,
        span: Span,
    },
    Add(Box<CExpr>, Box<CExpr>, Span),
    Min(Vec<CExpr>, Span),
}

impl CExpr {
    pub fn span(&self) -> Span {
        match self {
            CExpr::Var(_, s)
            | CExpr::Num(_, s)
            | CExpr::Tuple(_, s)
            | CExpr::Command { span: s, .. }
            | CExpr::Add(_, _, s)
            | CExpr::Min(_, s) => *s,
        }
    }
}

pub fn bind_and_check(prog: &Program) -> Result<CheckedProgram, Vec<Diagnostic>> {
    let mut b = Binder {
        out: CheckedProgram::default(),
        errors: Vec::new(),
    };
    b.declarations(&prog.decls);
    for f in &prog.functions {
        if let Some(cf) = b.function(f) {
            b.out.functions.push(cf);
        }
    }
    if b.errors.is_empty() {
        Ok(b.out)
    } else {
        Err(b.errors)
    }
}

/// Lowers a formula with no declarations in scope: every name is taken at
/// the kind its position demands. Hypothesis names are rejected.
pub fn lower_unchecked(f: &SFormula) -> Result<Formula, Diagnostic> {
    let b = Binder {
        out: CheckedProgram::default(),
        errors: Vec::new(),
    };
    let scope = Scope {
        params: BTreeSet::new(),
        pvars: None,
        placeholders: true,
        checked: false,
    };
    b.formula(f, &scope)
}

struct Scope {
    params: BTreeSet<String>,
    /// Program variables visible to p-value expressions (ensures only).
    pvars: Option<BTreeSet<String>>,
    placeholders: bool,
    checked: bool,
}

struct Binder {
    out: CheckedProgram,
    errors: Vec<Diagnostic>,
}

fn err(code: Code, span: Span, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error(code, span, msg)
}

impl Binder {
    fn declarations(&mut self, decls: &[Decl]) {
        let mut seen: BTreeMap<&str, Span> = BTreeMap::new();
        for d in decls {
            let name = d.name();
            if let Some(prev) = seen.insert(&name.name, name.span) {
                let (line_hint, _) = (prev.start, prev.end);
                let _ = line_hint;
                self.errors.push(err(
                    Code::DuplicateDeclaration,
                    name.span,
                    format!("`{}` is declared more than once", name.name),
                ));
                continue;
            }
            match d {
                Decl::Population { name, dist } => {
                    let dist = match dist {
                        DistDecl::Normal { mean, sd } => Distribution::Normal {
                            mean: mean.name.clone(),
                            sd: sd.name.clone(),
                        },
                        DistDecl::Unknown => Distribution::Unknown,
                    };
                    self.out.populations.insert(name.name.clone(), dist);
                }
                Decl::Dataset { name, source, size } => {
                    if let Some(src) = source {
                        if !self.out.populations.contains_key(&src.name) {
                            self.errors.push(err(
                                Code::UndeclaredPopulation,
                                src.span,
                                format!(
                                    "dataset `{}` is drawn from `{}`, which is not a declared population",
                                    name.name, src.name
                                ),
                            ));
                        }
                    }
                    if let Some((n, span)) = size {
                        if *n < 2 {
                            self.errors.push(err(
                                Code::KindMismatch,
                                *span,
                                "a dataset needs at least 2 observations",
                            ));
                        }
                    }
                    self.out.datasets.insert(
                        name.name.clone(),
                        DatasetInfo {
                            source: source.as_ref().map(|s| s.name.clone()),
                            size: size.map(|(n, _)| n),
                        },
                    );
                }
                Decl::Hyp { name, formula } => {
                    let scope = Scope {
                        params: BTreeSet::new(),
                        pvars: None,
                        placeholders: false,
                        checked: true,
                    };
                    match self.formula(formula, &scope) {
                        Ok(f) => {
                            self.out.hyps.insert(name.name.clone(), f);
                        }
                        Err(e) => self.errors.push(e),
                    }
                }
                Decl::Group { name, members } => match self.group_members(members, &BTreeSet::new())
                {
                    Ok(g) => {
                        self.out.groups.insert(name.name.clone(), g);
                    }
                    Err(e) => self.errors.push(e),
                },
            }
        }
    }

    fn group_members(
        &self,
        members: &[(Ident, Ident)],
        params: &BTreeSet<String>,
    ) -> Result<Vec<Group>, Diagnostic> {
        let mut out = Vec::new();
        for (pop, data) in members {
            self.expect_population(pop)?;
            self.expect_dataset(data, params)?;
            out.push(Group::new(pop.name.clone(), data.name.clone()));
        }
        Ok(out)
    }

    fn expect_population(&self, id: &Ident) -> Result<(), Diagnostic> {
        if self.out.populations.contains_key(&id.name) {
            Ok(())
        } else if self.out.datasets.contains_key(&id.name) {
            Err(err(
                Code::KindMismatch,
                id.span,
                format!("`{}` is a dataset, expected a population", id.name),
            ))
        } else {
            Err(err(
                Code::UndeclaredPopulation,
                id.span,
                format!("population `{}` is not declared", id.name),
            ))
        }
    }

    fn expect_dataset(&self, id: &Ident, params: &BTreeSet<String>) -> Result<(), Diagnostic> {
        if self.out.datasets.contains_key(&id.name) || params.contains(&id.name) {
            Ok(())
        } else if self.out.populations.contains_key(&id.name) {
            Err(err(
                Code::KindMismatch,
                id.span,
                format!("`{}` is a population, expected a dataset", id.name),
            ))
        } else {
            Err(err(
                Code::UnresolvedIdentifier,
                id.span,
                format!("unknown dataset `{}`", id.name),
            ))
        }
    }

    // ---- formulas ----

    fn formula(&self, f: &SFormula, scope: &Scope) -> Result<Formula, Diagnostic> {
        Ok(match &f.kind {
            SFormulaKind::Atom { pred, args } => {
                let sig = pred.signature();
                let mut terms = Vec::with_capacity(args.len());
                for (slot, a) in sig.iter().zip(args) {
                    terms.push(self.term(a, Some(*slot), scope)?);
                }
                Formula::Atom(AtomicFormula::new(*pred, terms).map_err(|e| logic_err(e, f.span))?)
            }
            SFormulaKind::IsEmpty(_) => Formula::atom(Pred::IsEmpty, vec![]).expect("nullary"),
            SFormulaKind::Cmp { op, lhs, rhs } => Formula::cmp(
                *op,
                self.term(lhs, Some(SlotKind::Real), scope)?,
                self.term(rhs, Some(SlotKind::Real), scope)?,
            ),
            SFormulaKind::Not(g) => Formula::not(self.formula(g, scope)?),
            SFormulaKind::And(a, b) => {
                Formula::and(self.formula(a, scope)?, self.formula(b, scope)?)
            }
            SFormulaKind::Or(a, b) => Formula::or(self.formula(a, scope)?, self.formula(b, scope)?),
            SFormulaKind::Possible(g) => Formula::possible(self.formula(g, scope)?),
            SFormulaKind::Know(g) => Formula::know(self.formula(g, scope)?),
            SFormulaKind::StatB { record, hyp } => {
                let r = self.record(record, scope)?;
                let h = self.formula(hyp, scope)?;
                Formula::stat_b(r, h).map_err(|e| logic_err(e, hyp.span))?
            }
            SFormulaKind::HypRef(id) => match self.out.hyps.get(&id.name) {
                Some(h) => h.clone(),
                None => {
                    return Err(err(
                        Code::UnresolvedIdentifier,
                        id.span,
                        format!("unknown hypothesis `{}`", id.name),
                    ))
                }
            },
            SFormulaKind::PvEq { .. } => {
                return Err(err(
                    Code::Unsupported,
                    f.span,
                    "`compose_pvs` equations may only appear as a top-level ensures conjunct",
                ))
            }
            SFormulaKind::AtOld(_) => {
                return Err(err(
                    Code::Unsupported,
                    f.span,
                    "`World (old st) interp |=` may only prefix a top-level ensures conjunct",
                ))
            }
            SFormulaKind::Fold {
                kind,
                groups,
                control,
                body,
            } => self.fold(*kind, groups, *control, body, scope, f.span)?,
        })
    }

    fn fold(
        &self,
        kind: FoldKind,
        groups: &GroupsRef,
        control: Option<(u64, Span)>,
        body: &SFormula,
        scope: &Scope,
        span: Span,
    ) -> Result<Formula, Diagnostic> {
        let members = match groups {
            GroupsRef::Named(id) => match self.out.groups.get(&id.name) {
                Some(g) => g.clone(),
                None if !scope.checked => {
                    return Err(err(
                        Code::Unsupported,
                        id.span,
                        "folds need group declarations in scope",
                    ))
                }
                None => {
                    return Err(err(
                        Code::UnresolvedIdentifier,
                        id.span,
                        format!("unknown group `{}`", id.name),
                    ))
                }
            },
            GroupsRef::Inline(ms, _) => self.group_members(ms, &scope.params)?,
        };
        let inner_scope = Scope {
            params: scope.params.clone(),
            pvars: scope.pvars.clone(),
            placeholders: true,
            checked: scope.checked,
        };
        let template = self.formula(body, &inner_scope)?;
        let method = if kind.uses_control() {
            MultipleComparisonMethod::Dunnett
        } else {
            MultipleComparisonMethod::TukeyHsd
        };
        let pairs = expand_comparisons(
            method,
            &members,
            control.map(|(c, _)| c as usize),
        )
        .map_err(|e| err(Code::KindMismatch, span, e.to_string()))?;
        let mut parts = Vec::with_capacity(pairs.len());
        for pair in pairs {
            parts.push(substitute(&template, &pair.binding).map_err(|e| logic_err(e, body.span))?);
        }
        Ok(if kind.is_conjunctive() {
            Formula::Conj(parts)
        } else {
            Formula::Disj(parts)
        })
    }

    fn term(&self, t: &STerm, slot: Option<SlotKind>, scope: &Scope) -> Result<Term, Diagnostic> {
        match t {
            STerm::Num(q, span) => match slot {
                Some(SlotKind::Real) => Ok(Term::Const(q.clone())),
                _ => Err(err(
                    Code::KindMismatch,
                    *span,
                    format!("a number cannot stand for a {}", slot_name(slot)),
                )),
            },
            STerm::Param(id) => {
                if scope.placeholders {
                    Ok(Term::Param(id.name.as_str().into()))
                } else {
                    Err(err(
                        Code::UnresolvedIdentifier,
                        id.span,
                        format!("placeholder `?{}` outside a fold", id.name),
                    ))
                }
            }
            STerm::Mean(inner, span) => {
                if slot != Some(SlotKind::Real) {
                    return Err(err(
                        Code::KindMismatch,
                        *span,
                        format!("`mean` is a real, expected a {}", slot_name(slot)),
                    ));
                }
                let inner = match &**inner {
                    STerm::Name(id) => {
                        if scope.checked
                            && !self.out.populations.contains_key(&id.name)
                            && !self.out.datasets.contains_key(&id.name)
                            && !scope.params.contains(&id.name)
                        {
                            return Err(err(
                                Code::UnresolvedIdentifier,
                                id.span,
                                format!("unknown population or dataset `{}`", id.name),
                            ));
                        }
                        Term::Name(id.name.as_str().into())
                    }
                    STerm::Param(_) => self.term(inner, None, scope)?,
                    other => {
                        return Err(err(
                            Code::KindMismatch,
                            other.span(),
                            "`mean` takes a population or a dataset",
                        ))
                    }
                };
                Ok(Term::mean(inner))
            }
            STerm::Name(id) => {
                if scope.checked {
                    match slot {
                        Some(SlotKind::Population) => self.expect_population(id)?,
                        Some(SlotKind::Dataset) => self.expect_dataset(id, &scope.params)?,
                        _ => {
                            let is_pvar = scope
                                .pvars
                                .as_ref()
                                .is_some_and(|vs| vs.contains(&id.name));
                            if !is_pvar {
                                return Err(err(
                                    Code::UnresolvedIdentifier,
                                    id.span,
                                    format!("`{}` is not a real-valued variable in scope", id.name),
                                ));
                            }
                        }
                    }
                }
                Ok(Term::Name(id.name.as_str().into()))
            }
        }
    }

    fn record(&self, r: &SRecord, scope: &Scope) -> Result<PValueRecord, Diagnostic> {
        let e = self.pexpr(&r.expr, scope)?;
        let rec = match r.kind {
            RecordKind::Eq => PValueRecord::exact(e),
            RecordKind::Leq => PValueRecord::at_most(e),
        };
        rec.map_err(|e| err(Code::InvalidPValue, r.span, e.to_string()))
    }

    fn pexpr(&self, e: &SPExpr, scope: &Scope) -> Result<PExpr, Diagnostic> {
        Ok(match e {
            SPExpr::Num(q, span) => {
                if q.is_negative() || *q > Rational::one() {
                    return Err(err(
                        Code::InvalidPValue,
                        *span,
                        format!("p-value {} lies outside [0, 1]", format_rational(q)),
                    ));
                }
                PExpr::Const(q.clone())
            }
            SPExpr::Var(id) => {
                if scope.checked && !scope.pvars.as_ref().is_some_and(|v| v.contains(&id.name)) {
                    return Err(err(
                        Code::UnresolvedIdentifier,
                        id.span,
                        format!("`{}` is not a p-value variable in scope", id.name),
                    ));
                }
                PExpr::Sym(id.name.clone())
            }
            SPExpr::Sum(items) => PExpr::sum(
                items
                    .iter()
                    .map(|i| self.pexpr(i, scope))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            SPExpr::Min(items) => PExpr::min(
                items
                    .iter()
                    .map(|i| self.pexpr(i, scope))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        })
    }

    // ---- functions ----

    fn function(&mut self, f: &Function) -> Option<CheckedFunction> {
        let errors_before = self.errors.len();
        let params: BTreeSet<String> = f.params.iter().map(|p| p.name.clone()).collect();
        let mut vars: BTreeSet<String> = BTreeSet::new();
        let mut lets = Vec::new();
        for l in &f.lets {
            match self.expr(&l.value, &params, &vars) {
                Ok(value) => {
                    let names: Vec<String> =
                        l.pattern.names().iter().map(|i| i.name.clone()).collect();
                    vars.extend(names.iter().cloned());
                    lets.push(CLet {
                        names,
                        tuple: matches!(l.pattern, Pattern::Tuple(..)),
                        value,
                        span: l.span,
                    });
                }
                Err(e) => self.errors.push(e),
            }
        }
        let result = match self.expr(&f.result, &params, &vars) {
            Ok(r) => Some(r),
            Err(e) => {
                self.errors.push(e);
                None
            }
        };

        let header = f.annotation.as_ref().and_then(|a| a.header.as_ref());
        let result_names: Vec<String> = match header {
            Some(h) => h.pattern.names().iter().map(|i| i.name.clone()).collect(),
            None if f.params.is_empty() => vec![f.name.name.clone()],
            None => vec!["result".to_string()],
        };
        if let Some(h) = header {
            if h.function.name != f.name.name {
                self.out.warnings.push(Diagnostic::warning(
                    Code::UnresolvedIdentifier,
                    h.function.span,
                    format!(
                        "annotation names `{}` but annotates `{}`",
                        h.function.name, f.name.name
                    ),
                ));
            }
        }

        let mut requires = Vec::new();
        let mut ensures = Vec::new();
        if let Some(ann) = &f.annotation {
            let req_scope = Scope {
                params: params.clone(),
                pvars: None,
                placeholders: false,
                checked: true,
            };
            for clause in &ann.requires {
                for part in split_and(clause) {
                    match self.formula(part, &req_scope) {
                        Ok(formula) => requires.push(Clause {
                            formula,
                            span: part.span,
                        }),
                        Err(e) => self.errors.push(e),
                    }
                }
            }
            let mut pvars = vars.clone();
            pvars.extend(result_names.iter().cloned());
            let ens_scope = Scope {
                params: params.clone(),
                pvars: Some(pvars),
                placeholders: false,
                checked: true,
            };
            for clause in &ann.ensures {
                for part in split_and(clause) {
                    match self.ensures_item(part, &ens_scope) {
                        Ok(item) => ensures.push(EnsuresClause {
                            item,
                            span: part.span,
                        }),
                        Err(e) => self.errors.push(e),
                    }
                }
            }
        }
        if self.errors.len() > errors_before {
            return None;
        }
        Some(CheckedFunction {
            name: f.name.name.clone(),
            span: f.span,
            params: f.params.iter().map(|p| p.name.clone()).collect(),
            lets,
            result: result?,
            result_names,
            annotated: f.annotation.is_some(),
            requires,
            ensures,
        })
    }

    fn ensures_item(&self, f: &SFormula, scope: &Scope) -> Result<EnsuresItem, Diagnostic> {
        let (f, old) = match &f.kind {
            SFormulaKind::AtOld(inner) => (&**inner, true),
            _ => (f, false),
        };
        match &f.kind {
            SFormulaKind::PvEq { record, hyp, hist } => Ok(EnsuresItem::PValue {
                record: self.record(record, scope)?,
                hypothesis: {
                    let h = self.formula(hyp, scope)?;
                    if !h.is_modality_free() {
                        return Err(err(
                            Code::ModalHypothesis,
                            hyp.span,
                            "a tested hypothesis cannot contain modalities",
                        ));
                    }
                    h
                },
                old: old || *hist == HistRef::Old,
            }),
            _ => Ok(EnsuresItem::Formula {
                formula: self.formula(f, scope)?,
                old,
            }),
        }
    }

    fn expr(
        &self,
        e: &Expr,
        params: &BTreeSet<String>,
        vars: &BTreeSet<String>,
    ) -> Result<CExpr, Diagnostic> {
        Ok(match &e.kind {
            ExprKind::Var(name) => {
                if vars.contains(name) || params.contains(name) {
                    CExpr::Var(name.clone(), e.span)
                } else if builtin_specs().contains_key(name) {
                    return Err(err(
                        Code::KindMismatch,
                        e.span,
                        format!("command `{name}` needs arguments"),
                    ));
                } else {
                    return Err(err(
                        Code::UnresolvedIdentifier,
                        e.span,
                        format!("unknown variable `{name}`"),
                    ));
                }
            }
            ExprKind::Num(q) => CExpr::Num(q.clone(), e.span),
            ExprKind::Tuple(items) => CExpr::Tuple(
                items
                    .iter()
                    .map(|i| self.expr(i, params, vars))
                    .collect::<Result<_, _>>()?,
                e.span,
            ),
            ExprKind::List(_) => {
                return Err(err(
                    Code::Unsupported,
                    e.span,
                    "lists may only appear as command arguments",
                ))
            }
            ExprKind::Add(a, b) => CExpr::Add(
                Box::new(self.expr(a, params, vars)?),
                Box::new(self.expr(b, params, vars)?),
                e.span,
            ),
            ExprKind::App { func, args } if func.name == "min" => {
                if args.len() != 2 {
                    return Err(err(
                        Code::KindMismatch,
                        e.span,
                        format!("`min` takes 2 arguments, got {}", args.len()),
                    ));
                }
                CExpr::Min(
                    args.iter()
                        .map(|a| self.expr(a, params, vars))
                        .collect::<Result<_, _>>()?,
                    e.span,
                )
            }
            ExprKind::App { func, args } => match builtin_specs().get(&func.name) {
                Some(spec) => CExpr::Command {
                    spec: spec.name.clone(),
                    args: self.command_args(spec, func, args, params, e.span)?,
                    span: e.span,
                },
                None => {
                    return Err(err(
                        Code::UnknownCommand,
                        func.span,
                        format!("unknown command `{}`", func.name),
                    ))
                }
            },
        })
    }

    fn command_args(
        &self,
        spec: &CommandSpec,
        func: &Ident,
        args: &[Expr],
        params: &BTreeSet<String>,
        span: Span,
    ) -> Result<Vec<Arg>, Diagnostic> {
        if args.len() != spec.params.len() {
            return Err(err(
                Code::KindMismatch,
                span,
                format!(
                    "`{}` takes {} arguments, got {}",
                    func.name,
                    spec.params.len(),
                    args.len()
                ),
            ));
        }
        let mut out = Vec::with_capacity(args.len());
        for (i, (param, a)) in spec.params.iter().zip(args).enumerate() {
            let mismatch = || {
                err(
                    Code::KindMismatch,
                    a.span,
                    format!(
                        "argument {} of `{}` should be {}, found {}",
                        i + 1,
                        func.name,
                        kind_name(param.kind),
                        self.describe_expr(a, params)
                    ),
                )
            };
            let ident = |a: &Expr| match &a.kind {
                ExprKind::Var(n) => Some(Ident {
                    name: n.clone(),
                    span: a.span,
                }),
                _ => None,
            };
            let arg = match param.kind {
                ParamKind::Population => {
                    let id = ident(a).ok_or_else(mismatch)?;
                    if self.out.datasets.contains_key(&id.name) || params.contains(&id.name) {
                        return Err(mismatch());
                    }
                    self.expect_population(&id)?;
                    Arg::Population(id.name)
                }
                ParamKind::Dataset => {
                    let id = ident(a).ok_or_else(mismatch)?;
                    if self.out.populations.contains_key(&id.name) {
                        return Err(mismatch());
                    }
                    self.expect_dataset(&id, params)?;
                    Arg::Dataset(id.name)
                }
                ParamKind::Real => match &a.kind {
                    ExprKind::Num(q) => Arg::Real(q.clone()),
                    _ => return Err(mismatch()),
                },
                ParamKind::DatasetPair => match &a.kind {
                    ExprKind::Tuple(items) if items.len() == 2 => {
                        let y1 = ident(&items[0]).ok_or_else(mismatch)?;
                        let y2 = ident(&items[1]).ok_or_else(mismatch)?;
                        self.expect_dataset(&y1, params)?;
                        self.expect_dataset(&y2, params)?;
                        Arg::Pair(y1.name, y2.name)
                    }
                    _ => return Err(mismatch()),
                },
                ParamKind::Alternative => {
                    match ident(a).and_then(|id| Alternative::from_ident(&id.name)) {
                        Some(alt) => Arg::Alternative(alt),
                        None => return Err(mismatch()),
                    }
                }
                ParamKind::Groups => match &a.kind {
                    ExprKind::Var(n) => match self.out.groups.get(n) {
                        Some(g) => Arg::Groups(g.clone()),
                        None => return Err(mismatch()),
                    },
                    ExprKind::List(items) => {
                        let mut members = Vec::new();
                        for it in items {
                            match &it.kind {
                                ExprKind::Tuple(pd) if pd.len() == 2 => {
                                    let p = ident(&pd[0]).ok_or_else(mismatch)?;
                                    let d = ident(&pd[1]).ok_or_else(mismatch)?;
                                    members.push((p, d));
                                }
                                _ => return Err(mismatch()),
                            }
                        }
                        Arg::Groups(self.group_members(&members, params)?)
                    }
                    _ => return Err(mismatch()),
                },
                ParamKind::ControlIndex => match &a.kind {
                    ExprKind::Num(q) if q.is_integer() && !q.is_negative() => {
                        Arg::Index(q.to_integer().to_usize().unwrap_or(usize::MAX))
                    }
                    _ => return Err(mismatch()),
                },
            };
            out.push(arg);
        }
        Ok(out)
    }

    fn describe_expr(&self, e: &Expr, params: &BTreeSet<String>) -> String {
        match &e.kind {
            ExprKind::Num(_) => "a real literal".into(),
            ExprKind::Var(n) if self.out.populations.contains_key(n) => {
                format!("population `{n}`")
            }
            ExprKind::Var(n) if self.out.datasets.contains_key(n) || params.contains(n) => {
                format!("dataset `{n}`")
            }
            ExprKind::Var(n) if self.out.groups.contains_key(n) => format!("group `{n}`"),
            ExprKind::Var(n) => format!("`{n}`"),
            ExprKind::Tuple(_) => "a tuple".into(),
            ExprKind::List(_) => "a list".into(),
            ExprKind::App { .. } | ExprKind::Add(..) => "an expression".into(),
        }
    }
}

fn split_and(f: &SFormula) -> Vec<&SFormula> {
    match &f.kind {
        SFormulaKind::And(a, b) => {
            let mut v = split_and(a);
            v.extend(split_and(b));
            v
        }
        _ => vec![f],
    }
}

fn slot_name(slot: Option<SlotKind>) -> &'static str {
    match slot {
        Some(SlotKind::Dataset) => "dataset",
        Some(SlotKind::Population) => "population",
        Some(SlotKind::Real) => "real",
        None => "population or dataset",
    }
}

fn kind_name(k: ParamKind) -> &'static str {
    match k {
        ParamKind::Population => "a population",
        ParamKind::Dataset => "a dataset",
        ParamKind::Real => "a real literal",
        ParamKind::DatasetPair => "a pair of datasets",
        ParamKind::Alternative => "one of Two, Up, Low",
        ParamKind::Groups => "a group list",
        ParamKind::ControlIndex => "a control group index",
    }
}

fn logic_err(e: LogicError, span: Span) -> Diagnostic {
    let code = match e {
        LogicError::ModalHypothesis => Code::ModalHypothesis,
        LogicError::PValueOutOfRange(_) => Code::InvalidPValue,
        LogicError::UnboundPlaceholder(_) => Code::UnresolvedIdentifier,
        _ => Code::KindMismatch,
    };
    err(code, span, e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    fn check(src: &str) -> Result<CheckedProgram, Vec<Diagnostic>> {
        bind_and_check(&parse(src).unwrap())
    }

    const DECLS: &str = "population ppl_new = NormalD mu_new sigma\n\
                         population ppl_drug1 = NormalD mu1 sigma\n\
                         dataset d_new from ppl_new\n\
                         dataset d_drug1 from ppl_drug1\n\
                         hyp h_new_drug1 = mean ppl_new >' mean ppl_drug1\n";

    #[test]
    fn hypothesis_abbreviation_expanded() {
        let src = format!(
            "{DECLS}let f = exec_ttest_ind_eq ppl_new ppl_drug1 (d_new, d_drug1) Up\n\
             (*@ requires Possible h_new_drug1 *)"
        );
        let prog = check(&src).unwrap();
        let expected = Formula::possible(Formula::cmp(
            Pred::Gt,
            Term::mean(Term::name("ppl_new")),
            Term::mean(Term::name("ppl_drug1")),
        ));
        assert_eq!(prog.functions[0].requires[0].formula, expected);
        assert!(matches!(
            &prog.functions[0].result,
            CExpr::Command { spec, .. } if spec == "exec_ttest_ind_eq"
        ));
    }

    #[test]
    fn undeclared_population() {
        let errs = check("dataset d from nowhere\n").unwrap_err();
        assert_eq!(errs[0].code, Code::UndeclaredPopulation);
    }

    #[test]
    fn real_where_dataset_expected() {
        let errs = check(
            "population t_n = NormalD mu sigma\nlet p = exec_ttest_1samp t_n 1.0 1.0 Two\n",
        )
        .unwrap_err();
        assert_eq!(errs[0].code, Code::KindMismatch);
        assert!(errs[0].message.contains("argument 3"), "{}", errs[0].message);
    }

    #[test]
    fn unknown_command() {
        let errs = check("let p = exec_magic 1.0\n").unwrap_err();
        assert_eq!(errs[0].code, Code::UnknownCommand);
    }

    #[test]
    fn world_prefix_sugar_is_transparent() {
        let base = "population t_n = NormalD mu sigma\ndataset d from t_n\n";
        let a = check(&format!("{base}let p = exec_ttest_1samp t_n 1.0 d Two (*@ requires sampled d t_n *)"))
            .unwrap();
        let b = check(&format!(
            "{base}let p = exec_ttest_1samp t_n 1.0 d Two (*@ requires (World (!st) interp) |= sampled d t_n *)"
        ))
        .unwrap();
        assert_eq!(a.functions[0].requires[0].formula, b.functions[0].requires[0].formula);
    }

    #[test]
    fn folds_expand_over_groups() {
        let src = "population a = NormalD m1 s\npopulation b = NormalD m2 s\npopulation c = NormalD m3 s\n\
                   dataset ya from a\ndataset yb from b\ndataset yc from c\n\
                   group g = [(a, ya); (b, yb); (c, yc)]\n\
                   let f = exec_tukey_hsd g Two\n\
                   (*@ requires for_all_pairs g (Possible (mean ?P1 <' mean ?P2)) *)";
        let prog = check(src).unwrap();
        match &prog.functions[0].requires[0].formula {
            Formula::Conj(parts) => assert_eq!(parts.len(), 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pvalue_vars_only_in_ensures() {
        let src = "population t_n = NormalD mu sigma\ndataset d from t_n\nhyp h = mean t_n $!= 1\n\
                   let p = exec_ttest_1samp t_n 1.0 d Two (*@ requires StatB (Leq p) h *)";
        let errs = check(src).unwrap_err();
        assert_eq!(errs[0].code, Code::UnresolvedIdentifier);
    }
}
