//! Forward symbolic execution of annotated functions.
//!
//! The state carries the fact base, the symbolic test history and an
//! environment of program variables. Each command call yields one condition
//! per instantiated requirement and pushes its comparisons onto the history;
//! function exit yields one condition per `ensures` conjunct.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::entail::{discharge, Definitions, Goal, Limits, PValueGoal};
use crate::entail::{is_empty_atom, DischargeResult};
use crate::frontend::{CExpr, CheckedFunction, CheckedProgram, EnsuresItem, Span};
use crate::logic::{normalize, Formula, HistoryBase, PExpr, PValueRecord, TestHistory};
use crate::specs::{builtin_specs, Arg, CommandSpec, SpecError};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VcgenError {
    #[error("unknown command `{0}`")]
    UnknownCommand(String),
    #[error("function `{0}` has no requires/ensures annotation")]
    UnannotatedFunction(String),
    #[error("unsupported statement: {0}")]
    UnsupportedStatement(String),
    #[error("`{0}` is not a p-value expression")]
    NonPValueExpression(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

/// A value a program variable may hold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymValue {
    PValue(PExpr),
    Real(Rational),
    Dataset(String),
    Tuple(Vec<SymValue>),
}

#[derive(Clone, Debug, Default)]
pub struct SymbolicState {
    pub history: TestHistory,
    pub facts: Vec<Formula>,
    pub env: BTreeMap<String, SymValue>,
    used_symbols: BTreeSet<String>,
}

impl SymbolicState {
    fn fresh(&mut self, hint: &str) -> String {
        let mut name = hint.to_string();
        let mut k = 1;
        while self.used_symbols.contains(&name) {
            k += 1;
            name = format!("{hint}_{k}");
        }
        self.used_symbols.insert(name.clone());
        name
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VcKind {
    /// A requirement of the command call at `command`.
    Requires { command: String },
    Ensures,
}

#[derive(Clone, Debug)]
pub struct VerifCondition {
    /// Position within its function.
    pub index: usize,
    pub function: String,
    pub kind: VcKind,
    pub label: String,
    pub facts: Arc<Vec<Formula>>,
    pub history: Arc<TestHistory>,
    pub defs: Arc<Definitions>,
    pub goal: Goal,
    pub span: Span,
}

impl VerifCondition {
    /// `function/index`, the handle `explain` accepts.
    pub fn id(&self) -> String {
        format!("{}/{}", self.function, self.index)
    }

    pub fn discharge(&self, limits: &Limits) -> DischargeResult {
        discharge(&self.facts, &self.history, &self.defs, &self.goal, limits)
    }
}

/// Evaluates a p-value expression built from variables, `+.`, `min` and
/// constants.
pub fn pvalue_expr_eval(env: &BTreeMap<String, SymValue>, e: &CExpr) -> Result<PExpr, VcgenError> {
    match e {
        CExpr::Var(v, _) => match env.get(v) {
            Some(SymValue::PValue(p)) => Ok(p.clone()),
            _ => Err(VcgenError::NonPValueExpression(v.clone())),
        },
        CExpr::Num(q, _) => Ok(PExpr::Const(q.clone())),
        CExpr::Add(a, b, _) => Ok(PExpr::sum([pvalue_expr_eval(env, a)?, pvalue_expr_eval(env, b)?])),
        CExpr::Min(items, _) => Ok(PExpr::min(
            items
                .iter()
                .map(|i| pvalue_expr_eval(env, i))
                .collect::<Result<Vec<_>, _>>()?,
        )),
        CExpr::Tuple(..) => Err(VcgenError::NonPValueExpression("a tuple".into())),
        CExpr::Command { spec, .. } => Err(VcgenError::NonPValueExpression(spec.clone())),
    }
}

/// Runs one command call: emits its requirement conditions against the
/// current state, then extends the history. Returns the p-values of the
/// comparisons it performed, newest last.
pub fn step_command(
    state: &mut SymbolicState,
    spec: &CommandSpec,
    args: &[Arg],
    hint: &str,
    span: Span,
    ctx: &mut Emitter,
) -> Result<Vec<PExpr>, VcgenError> {
    let mut names = Vec::new();
    let inst = {
        let count = comparison_count(spec, args);
        spec.instantiate(args, &mut |i| {
            let h = if count == 1 {
                hint.to_string()
            } else {
                format!("{hint}_{}", i + 1)
            };
            let n = state.fresh(&h);
            names.push(n.clone());
            n
        })?
    };
    for r in &inst.requires {
        ctx.emit(
            state,
            VcKind::Requires {
                command: spec.name.clone(),
            },
            r.label.clone(),
            Goal::Formula(normalize(&r.formula)),
            span,
        );
    }
    for c in &inst.comparisons {
        state.history.push(c.entry.clone());
    }
    // Beliefs obtained before this call describe an older history.
    state.facts.retain(|f| !f.mentions_statb());
    Ok(names.into_iter().map(PExpr::Sym).collect())
}

fn comparison_count(spec: &CommandSpec, args: &[Arg]) -> usize {
    match spec.family {
        crate::specs::Family::Multiple(method) => {
            let k = match args.first() {
                Some(Arg::Groups(g)) => g.len(),
                _ => 0,
            };
            if method.uses_control() {
                k.saturating_sub(1)
            } else {
                k * k.saturating_sub(1) / 2
            }
        }
        _ => 1,
    }
}

type Context = (Arc<Vec<Formula>>, Arc<TestHistory>, Arc<Definitions>);

/// Collects conditions for one function.
pub struct Emitter {
    function: String,
    defs: Definitions,
    out: Vec<VerifCondition>,
    /// Context of the last emitted condition, shared while the state is unchanged.
    last: Option<Context>,
}

impl Emitter {
    fn emit(&mut self, state: &SymbolicState, kind: VcKind, label: String, goal: Goal, span: Span) {
        let mut symbols = self.defs.pvalue_symbols.clone();
        for e in state.history.iter() {
            let mut syms = Vec::new();
            e.pvalue.bound().symbols(&mut syms);
            symbols.extend(syms);
        }
        for (v, val) in &state.env {
            if matches!(val, SymValue::PValue(_)) {
                symbols.insert(v.clone());
            }
        }
        let context = match &self.last {
            Some((f, h, d)) if d.pvalue_symbols == symbols && **f == state.facts && **h == state.history => {
                (f.clone(), h.clone(), d.clone())
            }
            _ => (
                Arc::new(state.facts.clone()),
                Arc::new(state.history.clone()),
                Arc::new(Definitions {
                    populations: self.defs.populations.clone(),
                    pvalue_symbols: symbols,
                }),
            ),
        };
        self.last = Some(context.clone());
        let (facts, history, defs) = context;
        self.out.push(VerifCondition {
            index: self.out.len(),
            function: self.function.clone(),
            kind,
            label,
            facts,
            history,
            defs,
            goal,
            span,
        });
    }
}

/// All verification conditions of `f`, in program order.
pub fn generate_vcs(
    prog: &CheckedProgram,
    f: &CheckedFunction,
) -> Result<Vec<VerifCondition>, VcgenError> {
    if !f.annotated {
        return Err(VcgenError::UnannotatedFunction(f.name.clone()));
    }
    let mut state = SymbolicState::default();
    let empty = is_empty_atom();
    let mut rooted = false;
    for c in &f.requires {
        if c.formula == empty {
            rooted = true;
        } else {
            state.facts.push(normalize(&c.formula));
        }
    }
    state.history.base = if rooted {
        HistoryBase::Empty
    } else {
        HistoryBase::Opaque
    };
    for p in &f.params {
        state.env.insert(p.clone(), SymValue::Dataset(p.clone()));
    }
    let entry = state.clone();

    let mut ctx = Emitter {
        function: f.name.clone(),
        defs: Definitions {
            populations: prog.populations.clone(),
            pvalue_symbols: BTreeSet::new(),
        },
        out: Vec::new(),
        last: None,
    };

    for l in &f.lets {
        let hint = l.names.first().cloned().unwrap_or_else(|| "p".into());
        let v = eval(&mut state, &l.value, &hint, &mut ctx)?;
        bind(&mut state.env, &l.names, l.tuple, v, l.span)?;
    }
    let hint = if f.result_names.len() == 1 {
        f.result_names[0].clone()
    } else {
        "result".into()
    };
    let result = eval(&mut state, &f.result, &hint, &mut ctx)?;
    bind(
        &mut state.env,
        &f.result_names,
        f.result_names.len() > 1,
        result,
        f.result.span(),
    )?;

    for (i, e) in f.ensures.iter().enumerate() {
        let label = format!("postcondition {}", i + 1);
        match &e.item {
            EnsuresItem::Formula { formula, old } => {
                let formula = rename_records(formula, &state.env)?;
                let at = if *old { &entry } else { &state };
                ctx.emit(at, VcKind::Ensures, label, Goal::Formula(normalize(&formula)), e.span);
            }
            EnsuresItem::PValue {
                record,
                hypothesis,
                old,
            } => {
                let reported = rename_record(record, &state.env)?;
                let goal = Goal::PValue(PValueGoal {
                    reported,
                    hypothesis: normalize(hypothesis),
                });
                let at = if *old { &entry } else { &state };
                ctx.emit(at, VcKind::Ensures, label, goal, e.span);
            }
        }
    }
    Ok(ctx.out)
}

/// Generates and discharges every condition of `f` sequentially.
pub fn verify_function(
    prog: &CheckedProgram,
    f: &CheckedFunction,
    limits: &Limits,
) -> Result<Vec<(VerifCondition, DischargeResult)>, VcgenError> {
    Ok(generate_vcs(prog, f)?
        .into_iter()
        .map(|vc| {
            let r = vc.discharge(limits);
            (vc, r)
        })
        .collect())
}

fn eval(
    state: &mut SymbolicState,
    e: &CExpr,
    hint: &str,
    ctx: &mut Emitter,
) -> Result<SymValue, VcgenError> {
    Ok(match e {
        CExpr::Var(v, _) => state
            .env
            .get(v)
            .cloned()
            .ok_or_else(|| VcgenError::UnsupportedStatement(format!("`{v}` is unbound")))?,
        CExpr::Num(q, _) => SymValue::Real(q.clone()),
        CExpr::Tuple(items, _) => {
            let mut out = Vec::with_capacity(items.len());
            for (i, it) in items.iter().enumerate() {
                out.push(eval(state, it, &format!("{hint}_{}", i + 1), ctx)?);
            }
            SymValue::Tuple(out)
        }
        CExpr::Command { spec, args, span } => {
            let spec = builtin_specs()
                .get(spec)
                .ok_or_else(|| VcgenError::UnknownCommand(spec.clone()))?;
            let ps = step_command(state, spec, args, hint, *span, ctx)?;
            if ps.len() == 1 {
                SymValue::PValue(ps.into_iter().next().expect("one"))
            } else {
                SymValue::Tuple(ps.into_iter().map(SymValue::PValue).collect())
            }
        }
        CExpr::Add(a, b, _) => {
            let a = expect_p(eval(state, a, hint, ctx)?)?;
            let b = expect_p(eval(state, b, hint, ctx)?)?;
            SymValue::PValue(PExpr::sum([a, b]))
        }
        CExpr::Min(items, _) => {
            let mut ps = Vec::with_capacity(items.len());
            for it in items {
                ps.push(expect_p(eval(state, it, hint, ctx)?)?);
            }
            SymValue::PValue(PExpr::min(ps))
        }
    })
}

fn expect_p(v: SymValue) -> Result<PExpr, VcgenError> {
    match v {
        SymValue::PValue(p) => Ok(p),
        SymValue::Real(q) => Ok(PExpr::Const(q)),
        SymValue::Dataset(d) => Err(VcgenError::NonPValueExpression(d)),
        SymValue::Tuple(_) => Err(VcgenError::NonPValueExpression("a tuple".into())),
    }
}

fn bind(
    env: &mut BTreeMap<String, SymValue>,
    names: &[String],
    tuple: bool,
    v: SymValue,
    _span: Span,
) -> Result<(), VcgenError> {
    if !tuple {
        if let Some(n) = names.first() {
            env.insert(n.clone(), v);
        }
        return Ok(());
    }
    match v {
        SymValue::Tuple(items) if items.len() == names.len() => {
            for (n, it) in names.iter().zip(items) {
                env.insert(n.clone(), it);
            }
            Ok(())
        }
        SymValue::Tuple(items) => Err(VcgenError::UnsupportedStatement(format!(
            "pattern binds {} names but the value has {} components",
            names.len(),
            items.len()
        ))),
        _ => Err(VcgenError::UnsupportedStatement(format!(
            "pattern binds {} names but the value is not a tuple",
            names.len()
        ))),
    }
}

fn lookup_sym(env: &BTreeMap<String, SymValue>) -> impl Fn(&str) -> Option<PExpr> + '_ {
    |s: &str| match env.get(s) {
        Some(SymValue::PValue(p)) => Some(p.clone()),
        _ => None,
    }
}

fn check_record_vars(r: &PValueRecord, env: &BTreeMap<String, SymValue>) -> Result<(), VcgenError> {
    let mut syms = Vec::new();
    r.bound().symbols(&mut syms);
    for s in syms {
        if !matches!(env.get(&s), Some(SymValue::PValue(_))) {
            return Err(VcgenError::NonPValueExpression(s));
        }
    }
    Ok(())
}

fn rename_record(r: &PValueRecord, env: &BTreeMap<String, SymValue>) -> Result<PValueRecord, VcgenError> {
    check_record_vars(r, env)?;
    Ok(r.rename(&lookup_sym(env)).canonical())
}

fn rename_records(f: &Formula, env: &BTreeMap<String, SymValue>) -> Result<Formula, VcgenError> {
    let mut bad = None;
    scan_records(f, &mut |r| {
        if bad.is_none() {
            bad = check_record_vars(r, env).err();
        }
    });
    if let Some(e) = bad {
        return Err(e);
    }
    let look = lookup_sym(env);
    Ok(f.map_records(&|r| r.rename(&look).canonical()))
}

fn scan_records(f: &Formula, visit: &mut dyn FnMut(&PValueRecord)) {
    match f {
        Formula::Atom(_) => {}
        Formula::Not(g) | Formula::Possible(g) | Formula::Know(g) => scan_records(g, visit),
        Formula::Conj(gs) | Formula::Disj(gs) => gs.iter().for_each(|g| scan_records(g, visit)),
        Formula::StatB(r, g) => {
            visit(r);
            scan_records(g, visit);
        }
    }
}
