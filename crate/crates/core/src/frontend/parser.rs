use num_traits::Signed;
use super::ast::*;
use super::diagnostics::{Code, Diagnostic, Span};
use super::lexer::{lex, Tok, Token};
use crate::logic::Pred;

const KEYWORDS: &[&str] = &[
    "let", "in", "population", "dataset", "hyp", "group", "requires", "ensures", "Not",
    "Possible", "Know", "StatB", "Conj", "Disj", "World", "interp", "Leq", "Eq", "compose_pvs",
    "mean", "const_term", "is_empty", "old", "min",
];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s) || Pred::from_ident(s).is_some() || FoldKind::from_keyword(s).is_some()
}

pub fn parse(src: &str) -> Result<Program, Diagnostic> {
    let toks = lex(src)?;
    let mut p = Parser { toks: &toks, pos: 0 };
    p.program()
}

/// Parses a single formula (the text of a requires clause, say).
pub fn parse_formula(src: &str) -> Result<SFormula, Diagnostic> {
    let toks = lex(src)?;
    let mut p = Parser { toks: &toks, pos: 0 };
    let f = p.formula()?;
    p.expect(Tok::Eof)?;
    Ok(f)
}

type PResult<T> = Result<T, Diagnostic>;

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> &'a Token {
        let t = &self.toks[self.pos];
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn at_ident(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if *self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_ident(&mut self, kw: &str) -> bool {
        if self.at_ident(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &[&str]) -> Diagnostic {
        let found = self.peek().describe();
        let msg = match expected {
            [] => format!("unexpected {found}"),
            [one] => format!("expected {one}, found {found}"),
            many => format!(
                "expected one of {}, found {found}",
                many.join(", ")
            ),
        };
        Diagnostic::error(Code::Syntax, self.span(), msg)
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            let want = match &tok {
                Tok::Eof => "end of input".to_string(),
                t => format!("`{}`", t.spelling()),
            };
            Err(self.error(&[&want]))
        }
    }

    fn expect_ident(&mut self, kw: &str) -> PResult<Span> {
        if self.at_ident(kw) {
            Ok(self.bump().span)
        } else {
            Err(self.error(&[&format!("`{kw}`")]))
        }
    }

    fn name(&mut self) -> PResult<Ident> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let name = s.clone();
                let t = self.bump();
                Ok(Ident { name, span: t.span })
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn at_name(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if !is_keyword(s))
    }

    // ---- top level ----

    fn program(&mut self) -> PResult<Program> {
        let mut prog = Program::default();
        loop {
            match self.peek() {
                Tok::Eof => return Ok(prog),
                Tok::Ident(s) => match s.as_str() {
                    "population" => prog.decls.push(self.population()?),
                    "dataset" => prog.decls.push(self.dataset()?),
                    "hyp" => prog.decls.push(self.hyp()?),
                    "group" => prog.decls.push(self.group()?),
                    "let" => prog.functions.push(self.function()?),
                    _ => {
                        return Err(self.error(&[
                            "`population`",
                            "`dataset`",
                            "`hyp`",
                            "`group`",
                            "`let`",
                        ]))
                    }
                },
                _ => {
                    return Err(self.error(&[
                        "`population`",
                        "`dataset`",
                        "`hyp`",
                        "`group`",
                        "`let`",
                    ]))
                }
            }
        }
    }

    fn population(&mut self) -> PResult<Decl> {
        self.bump();
        let name = self.name()?;
        self.expect(Tok::Assign)?;
        let dist = if self.eat_ident("NormalD") {
            let mean = self.name()?;
            let sd = self.name()?;
            DistDecl::Normal { mean, sd }
        } else if self.eat_ident("UnknownD") {
            DistDecl::Unknown
        } else {
            return Err(self.error(&["`NormalD`", "`UnknownD`"]));
        };
        Ok(Decl::Population { name, dist })
    }

    fn dataset(&mut self) -> PResult<Decl> {
        self.bump();
        let name = self.name()?;
        let source = if self.eat_ident("from") {
            Some(self.name()?)
        } else {
            None
        };
        let size = if self.eat_ident("size") {
            let span = self.span();
            match self.peek().clone() {
                Tok::Number(q) if q.is_integer() => {
                    self.bump();
                    let n = q.to_integer().try_into().unwrap_or(u64::MAX);
                    Some((n, span))
                }
                _ => return Err(self.error(&["integer size"])),
            }
        } else {
            None
        };
        Ok(Decl::Dataset { name, source, size })
    }

    fn hyp(&mut self) -> PResult<Decl> {
        self.bump();
        let name = self.name()?;
        self.expect(Tok::Assign)?;
        let formula = self.formula()?;
        Ok(Decl::Hyp { name, formula })
    }

    fn group(&mut self) -> PResult<Decl> {
        self.bump();
        let name = self.name()?;
        self.expect(Tok::Assign)?;
        let (members, _) = self.group_list()?;
        Ok(Decl::Group { name, members })
    }

    /// `[(pop, data); (pop, data); ...]`
    fn group_list(&mut self) -> PResult<(Vec<(Ident, Ident)>, Span)> {
        let start = self.expect(Tok::LBracket)?;
        let mut members = Vec::new();
        if !self.eat(Tok::RBracket) {
            loop {
                self.expect(Tok::LParen)?;
                let pop = self.name()?;
                self.expect(Tok::Comma)?;
                let data = self.name()?;
                self.expect(Tok::RParen)?;
                members.push((pop, data));
                if self.eat(Tok::Semi) {
                    continue;
                }
                self.expect(Tok::RBracket)?;
                break;
            }
        }
        Ok((members, start.to(self.prev_span())))
    }

    fn function(&mut self) -> PResult<Function> {
        let start = self.expect_ident("let")?;
        self.eat_ident("function");
        let name = self.name()?;
        let mut params = Vec::new();
        while self.at_name() {
            params.push(self.name()?);
        }
        self.expect(Tok::Assign)?;
        let mut lets = Vec::new();
        while self.at_ident("let") {
            let ls = self.span();
            self.bump();
            let pattern = self.pattern()?;
            self.expect(Tok::Assign)?;
            let value = self.expr()?;
            self.expect_ident("in")?;
            lets.push(LetStmt {
                pattern,
                value,
                span: ls.to(self.prev_span()),
            });
        }
        let result = self.expr()?;
        let annotation = if *self.peek() == Tok::AnnotOpen {
            Some(self.annotation()?)
        } else {
            None
        };
        Ok(Function {
            name,
            params,
            lets,
            result,
            annotation,
            span: start.to(self.prev_span()),
        })
    }

    fn pattern(&mut self) -> PResult<Pattern> {
        if *self.peek() == Tok::LParen {
            let start = self.bump().span;
            let mut names = vec![self.name()?];
            while self.eat(Tok::Comma) {
                names.push(self.name()?);
            }
            let end = self.expect(Tok::RParen)?;
            Ok(Pattern::Tuple(names, start.to(end)))
        } else {
            Ok(Pattern::Var(self.name()?))
        }
    }

    fn annotation(&mut self) -> PResult<Annotation> {
        let start = self.expect(Tok::AnnotOpen)?;
        let header = if self.at_ident("requires") || self.at_ident("ensures") {
            None
        } else {
            let pattern = self.pattern()?;
            self.expect(Tok::Assign)?;
            let function = self.name()?;
            let mut args = Vec::new();
            while self.at_name() {
                args.push(self.name()?);
            }
            Some(Header {
                pattern,
                function,
                args,
            })
        };
        let mut requires = Vec::new();
        let mut ensures = Vec::new();
        loop {
            if self.eat_ident("requires") {
                requires.push(self.formula()?);
            } else if self.eat_ident("ensures") {
                ensures.push(self.formula()?);
            } else if *self.peek() == Tok::AnnotClose {
                break;
            } else {
                return Err(self.error(&["`requires`", "`ensures`", "`*)`"]));
            }
        }
        let end = self.expect(Tok::AnnotClose)?;
        Ok(Annotation {
            header,
            requires,
            ensures,
            span: start.to(end),
        })
    }

    // ---- program expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.app()?;
        while self.eat(Tok::PlusDot) {
            let rhs = self.app()?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr {
                kind: ExprKind::Add(Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !matches!(
                s.as_str(),
                "let" | "in" | "population" | "dataset" | "hyp" | "group"
            ),
            Tok::Number(_) | Tok::Minus | Tok::LParen | Tok::LBracket => true,
            _ => false,
        }
    }

    fn app(&mut self) -> PResult<Expr> {
        let is_head = matches!(self.peek(), Tok::Ident(_)) && self.starts_atom();
        let head = self.atom()?;
        match (&head.kind, is_head) {
            (ExprKind::Var(name), true) if self.starts_atom() => {
                let func = Ident {
                    name: name.clone(),
                    span: head.span,
                };
                let mut args = Vec::new();
                while self.starts_atom() {
                    args.push(self.atom()?);
                }
                let span = head.span.to(self.prev_span());
                Ok(Expr {
                    kind: ExprKind::App { func, args },
                    span,
                })
            }
            _ => Ok(head),
        }
    }

    fn atom(&mut self) -> PResult<Expr> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Ident(s) if self.starts_atom() => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Var(s),
                    span: start,
                })
            }
            Tok::Number(q) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Num(q),
                    span: start,
                })
            }
            Tok::Minus => {
                self.bump();
                match self.peek().clone() {
                    Tok::Number(q) => {
                        let end = self.bump().span;
                        Ok(Expr {
                            kind: ExprKind::Num(-q),
                            span: start.to(end),
                        })
                    }
                    _ => Err(self.error(&["number"])),
                }
            }
            Tok::LParen => {
                self.bump();
                let first = self.expr()?;
                if self.eat(Tok::Comma) {
                    let mut items = vec![first];
                    loop {
                        items.push(self.expr()?);
                        if !self.eat(Tok::Comma) {
                            break;
                        }
                    }
                    let end = self.expect(Tok::RParen)?;
                    Ok(Expr {
                        kind: ExprKind::Tuple(items),
                        span: start.to(end),
                    })
                } else {
                    let end = self.expect(Tok::RParen)?;
                    Ok(Expr {
                        span: start.to(end),
                        ..first
                    })
                }
            }
            Tok::LBracket => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat(Tok::RBracket) {
                    loop {
                        items.push(self.expr()?);
                        if !self.eat(Tok::Semi) {
                            break;
                        }
                    }
                    self.expect(Tok::RBracket)?;
                }
                Ok(Expr {
                    kind: ExprKind::List(items),
                    span: start.to(self.prev_span()),
                })
            }
            _ => Err(self.error(&["expression"])),
        }
    }

    // ---- formulas ----

    fn formula(&mut self) -> PResult<SFormula> {
        let mut lhs = self.conj()?;
        while self.eat(Tok::Or) {
            let rhs = self.conj()?;
            let span = lhs.span.to(rhs.span);
            lhs = SFormula {
                kind: SFormulaKind::Or(Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> PResult<SFormula> {
        let mut lhs = self.unary()?;
        while self.eat(Tok::And) {
            let rhs = self.unary()?;
            let span = lhs.span.to(rhs.span);
            lhs = SFormula {
                kind: SFormulaKind::And(Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn finish(&self, start: Span, kind: SFormulaKind) -> SFormula {
        SFormula {
            kind,
            span: start.to(self.prev_span()),
        }
    }

    fn unary(&mut self) -> PResult<SFormula> {
        let start = self.span();
        let tok = self.peek().clone();
        match &tok {
            Tok::Ident(kw) => match kw.as_str() {
                "Not" => {
                    self.bump();
                    let f = self.unary()?;
                    Ok(self.finish(start, SFormulaKind::Not(Box::new(f))))
                }
                "Possible" | "Know" => {
                    self.bump();
                    let f = Box::new(self.primary_formula()?);
                    let kind = if kw == "Possible" {
                        SFormulaKind::Possible(f)
                    } else {
                        SFormulaKind::Know(f)
                    };
                    Ok(self.finish(start, kind))
                }
                "StatB" => {
                    self.bump();
                    let record = self.statb_record()?;
                    let hyp = Box::new(self.primary_formula()?);
                    Ok(self.finish(start, SFormulaKind::StatB { record, hyp }))
                }
                "Conj" | "Disj" => {
                    self.bump();
                    let a = Box::new(self.primary_formula()?);
                    let b = Box::new(self.primary_formula()?);
                    let kind = if kw == "Conj" {
                        SFormulaKind::And(a, b)
                    } else {
                        SFormulaKind::Or(a, b)
                    };
                    Ok(self.finish(start, kind))
                }
                "World" => {
                    let hist = self.world()?;
                    self.satisfaction(start, hist)
                }
                "Leq" | "Eq" => {
                    let record = self.record()?;
                    self.pv_eq(start, record)
                }
                "is_empty" => {
                    self.bump();
                    let hist = self.hist()?;
                    Ok(self.finish(start, SFormulaKind::IsEmpty(hist)))
                }
                other => {
                    if let Some(kind) = FoldKind::from_keyword(other) {
                        return self.fold(start, kind);
                    }
                    if let Some(pred) = Pred::from_ident(other) {
                        if pred != Pred::IsEmpty {
                            return self.pred_atom(start, pred);
                        }
                    }
                    self.comparison_or_primary()
                }
            },
            Tok::LParen => match self.peek_at(1) {
                Tok::Ident(s) if s == "World" => {
                    self.bump();
                    let hist = self.world()?;
                    self.expect(Tok::RParen)?;
                    self.satisfaction(start, hist)
                }
                Tok::Ident(s) if s == "Leq" || s == "Eq" => {
                    let save = self.pos;
                    self.bump();
                    let record = self.record()?;
                    if self.eat(Tok::RParen) && *self.peek() == Tok::Assign {
                        return self.pv_eq(start, record);
                    }
                    // `(Leq p = compose_pvs h !st /\ ...)`
                    self.pos = save;
                    self.comparison_or_primary()
                }
                _ => self.comparison_or_primary(),
            },
            _ => self.comparison_or_primary(),
        }
    }

    /// `World hist interp`, after which `|=` follows.
    fn world(&mut self) -> PResult<HistRef> {
        self.expect_ident("World")?;
        let hist = self.hist()?;
        self.expect_ident("interp")?;
        Ok(hist)
    }

    fn satisfaction(&mut self, start: Span, hist: HistRef) -> PResult<SFormula> {
        self.expect(Tok::Models)?;
        let f = self.unary()?;
        Ok(match hist {
            HistRef::Current => SFormula {
                kind: f.kind,
                span: start.to(self.prev_span()),
            },
            HistRef::Old => self.finish(start, SFormulaKind::AtOld(Box::new(f))),
        })
    }

    /// `!st`, `(!st)`, `old st`, `(old st)`, `!(old st)`.
    fn hist(&mut self) -> PResult<HistRef> {
        let paren = self.eat(Tok::LParen);
        let h = if self.eat(Tok::Bang) {
            if self.at_ident("st") {
                self.bump();
                HistRef::Current
            } else {
                let inner = self.hist()?;
                if inner != HistRef::Old {
                    return Err(self.error(&["`st`"]));
                }
                inner
            }
        } else if self.eat_ident("old") {
            self.expect_ident("st")?;
            HistRef::Old
        } else {
            return Err(self.error(&["`!st`", "`old st`"]));
        };
        if paren {
            self.expect(Tok::RParen)?;
        }
        Ok(h)
    }

    fn pv_eq(&mut self, start: Span, record: SRecord) -> PResult<SFormula> {
        self.expect(Tok::Assign)?;
        self.expect_ident("compose_pvs")?;
        let hyp = Box::new(self.primary_formula()?);
        let hist = self.hist()?;
        Ok(self.finish(start, SFormulaKind::PvEq { record, hyp, hist }))
    }

    fn fold(&mut self, start: Span, kind: FoldKind) -> PResult<SFormula> {
        self.bump();
        let groups = if *self.peek() == Tok::LBracket {
            let (members, span) = self.group_list()?;
            GroupsRef::Inline(members, span)
        } else {
            GroupsRef::Named(self.name()?)
        };
        let control = if kind.uses_control() {
            let span = self.span();
            match self.peek().clone() {
                Tok::Number(q) if q.is_integer() && !q.is_negative() => {
                    self.bump();
                    Some((q.to_integer().try_into().unwrap_or(u64::MAX), span))
                }
                _ => return Err(self.error(&["control group index"])),
            }
        } else {
            None
        };
        let body = Box::new(self.primary_formula()?);
        Ok(self.finish(
            start,
            SFormulaKind::Fold {
                kind,
                groups,
                control,
                body,
            },
        ))
    }

    fn pred_atom(&mut self, start: Span, pred: Pred) -> PResult<SFormula> {
        self.bump();
        let mut args = Vec::new();
        for _ in pred.signature() {
            args.push(self.term_primary()?);
        }
        Ok(self.finish(start, SFormulaKind::Atom { pred, args }))
    }

    fn cmp_op(&self) -> Option<Pred> {
        Some(match self.peek() {
            Tok::Lt => Pred::Lt,
            Tok::Gt => Pred::Gt,
            Tok::Leq => Pred::Leq,
            Tok::Geq => Pred::Geq,
            Tok::Neq => Pred::Neq,
            Tok::EqOp => Pred::Eq,
            _ => return None,
        })
    }

    fn comparison_or_primary(&mut self) -> PResult<SFormula> {
        let start = self.span();
        let save = self.pos;
        if let Ok(lhs) = self.term() {
            if let Some(op) = self.cmp_op() {
                self.bump();
                let rhs = self.term()?;
                return Ok(self.finish(start, SFormulaKind::Cmp { op, lhs, rhs }));
            }
        }
        self.pos = save;
        self.primary_formula()
    }

    fn primary_formula(&mut self) -> PResult<SFormula> {
        let start = self.span();
        match self.peek() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(SFormula {
                    kind: f.kind,
                    span: start.to(self.prev_span()),
                })
            }
            Tok::Ident(s) if !is_keyword(s) => {
                let name = self.name()?;
                Ok(SFormula {
                    span: name.span,
                    kind: SFormulaKind::HypRef(name),
                })
            }
            _ => Err(self.error(&["formula"])),
        }
    }

    fn term(&mut self) -> PResult<STerm> {
        let start = self.span();
        if self.eat_ident("mean") {
            let inner = self.term_primary()?;
            return Ok(STerm::Mean(Box::new(inner), start.to(self.prev_span())));
        }
        if self.eat_ident("const_term") {
            return self.term_primary();
        }
        self.term_primary()
    }

    fn term_primary(&mut self) -> PResult<STerm> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Number(q) => {
                self.bump();
                Ok(STerm::Num(q, start))
            }
            Tok::Minus => {
                self.bump();
                match self.peek().clone() {
                    Tok::Number(q) => {
                        let end = self.bump().span;
                        Ok(STerm::Num(-q, start.to(end)))
                    }
                    _ => Err(self.error(&["number"])),
                }
            }
            Tok::Param(p) => {
                self.bump();
                Ok(STerm::Param(Ident {
                    name: p,
                    span: start,
                }))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(s) if !is_keyword(&s) => Ok(STerm::Name(self.name()?)),
            _ => Err(self.error(&["term"])),
        }
    }

    // ---- p-value records ----

    fn record(&mut self) -> PResult<SRecord> {
        let start = self.span();
        let kind = if self.eat_ident("Leq") {
            RecordKind::Leq
        } else if self.eat_ident("Eq") {
            RecordKind::Eq
        } else {
            return Err(self.error(&["`Leq`", "`Eq`"]));
        };
        let expr = self.pexpr_primary()?;
        Ok(SRecord {
            kind,
            expr,
            span: start.to(self.prev_span()),
        })
    }

    /// The record argument of `StatB`: `(Leq e)`, `Leq e`, or a bare
    /// expression meaning `Eq e`.
    fn statb_record(&mut self) -> PResult<SRecord> {
        match (self.peek(), self.peek_at(1)) {
            (Tok::LParen, Tok::Ident(s)) if s == "Leq" || s == "Eq" => {
                self.bump();
                let r = self.record()?;
                self.expect(Tok::RParen)?;
                Ok(r)
            }
            (Tok::Ident(s), _) if s == "Leq" || s == "Eq" => self.record(),
            _ => {
                let start = self.span();
                let expr = self.pexpr_primary()?;
                Ok(SRecord {
                    kind: RecordKind::Eq,
                    expr,
                    span: start.to(self.prev_span()),
                })
            }
        }
    }

    fn pexpr(&mut self) -> PResult<SPExpr> {
        let first = self.pexpr_app()?;
        if *self.peek() != Tok::PlusDot {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat(Tok::PlusDot) {
            items.push(self.pexpr_app()?);
        }
        Ok(SPExpr::Sum(items))
    }

    fn pexpr_app(&mut self) -> PResult<SPExpr> {
        if self.eat_ident("min") {
            let a = self.pexpr_primary()?;
            let b = self.pexpr_primary()?;
            return Ok(SPExpr::Min(vec![a, b]));
        }
        self.pexpr_primary()
    }

    fn pexpr_primary(&mut self) -> PResult<SPExpr> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Number(q) => {
                self.bump();
                Ok(SPExpr::Num(q, start))
            }
            Tok::LParen => {
                self.bump();
                let e = self.pexpr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) if !is_keyword(&s) => Ok(SPExpr::Var(self.name()?)),
            _ => Err(self.error(&["p-value expression"])),
        }
    }
}
