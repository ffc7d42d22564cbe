//! Whole-program verification: frontend, condition generation, parallel
//! discharge and report assembly.

use std::fmt::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::entail::{DischargeResult, Prover, DEFAULT_DEPTH};
use crate::frontend::{check_source, CheckedProgram, Diagnostic, Span};
use crate::vcgen::{generate_vcs, VcKind, VerifCondition};

pub const REPORT_SCHEMA: &str = "beliefcheck.report/1";

#[derive(Clone, Debug)]
pub struct Options {
    pub depth: usize,
    /// Worker threads; `None` uses rayon's default.
    pub jobs: Option<usize>,
    /// Per-condition budget.
    pub timeout: Option<Duration>,
    /// Record wall time per condition (makes reports nondeterministic).
    pub timings: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            depth: DEFAULT_DEPTH,
            jobs: None,
            timeout: Some(Duration::from_secs(10)),
            timings: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct VcReport {
    pub id: String,
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    pub location: Location,
    pub goal: String,
    pub status: &'static str,
    pub missing: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub trace: Vec<String>,
    pub trace_len: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct FunctionReport {
    pub name: String,
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub conditions: Vec<VcReport>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Report {
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub file: String,
    pub input_digest: String,
    pub verdict: &'static str,
    pub functions: Vec<FunctionReport>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }
}

/// Everything a verification run produced.
pub struct Verification {
    pub program: CheckedProgram,
    pub vcs: Vec<VerifCondition>,
    pub results: Vec<DischargeResult>,
    pub report: Report,
}

impl Verification {
    pub fn find(&self, id: &str) -> Option<(&VerifCondition, &DischargeResult)> {
        self.vcs
            .iter()
            .zip(&self.results)
            .find(|(vc, _)| vc.id() == id)
    }
}

pub fn digest(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Parses, checks and verifies `src`. Frontend errors come back as
/// diagnostics.
pub fn verify_source(file: &str, src: &str, opts: &Options) -> Result<Verification, Vec<Diagnostic>> {
    let program = check_source(src)?;
    Ok(verify_checked(file, src, program, opts))
}

pub fn verify_checked(file: &str, src: &str, program: CheckedProgram, opts: &Options) -> Verification {
    let mut vcs = Vec::new();
    let mut errors = Vec::new();
    for f in &program.functions {
        match generate_vcs(&program, f) {
            Ok(v) => {
                vcs.extend(v);
                errors.push(None);
            }
            Err(e) => errors.push(Some(e.to_string())),
        }
    }

    // conditions emitted at the same program point share one fact base
    let mut groups: Vec<&[VerifCondition]> = Vec::new();
    let mut rest = &vcs[..];
    while let Some(first) = rest.first() {
        let n = rest
            .iter()
            .take_while(|vc| {
                vc.function == first.function
                    && Arc::ptr_eq(&vc.facts, &first.facts)
                    && Arc::ptr_eq(&vc.history, &first.history)
                    && Arc::ptr_eq(&vc.defs, &first.defs)
            })
            .count();
        let (group, tail) = rest.split_at(n);
        groups.push(group);
        rest = tail;
    }
    let run = |group: &&[VerifCondition]| {
        let first = &group[0];
        let prover = Prover::new(&first.facts, &first.history, &first.defs, opts.depth);
        group
            .iter()
            .map(|vc| {
                let start = Instant::now();
                let r = prover.discharge(&vc.goal, opts.timeout.map(|t| start + t));
                (r, start.elapsed())
            })
            .collect::<Vec<_>>()
    };
    let outcomes: Vec<Vec<(DischargeResult, Duration)>> = match opts.jobs {
        Some(1) => groups.iter().map(run).collect(),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| groups.par_iter().map(run).collect()),
            Err(_) => groups.iter().map(run).collect(),
        },
        None => groups.par_iter().map(run).collect(),
    };
    let outcomes = outcomes.into_iter().flatten();
    let (results, times): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();

    let mut functions = Vec::new();
    for (f, error) in program.functions.iter().zip(errors) {
        let conditions: Vec<VcReport> = vcs
            .iter()
            .zip(&results)
            .zip(&times)
            .filter(|((vc, _), _)| vc.function == f.name)
            .map(|((vc, r), t)| vc_report(vc, r, *t, src, opts.timings))
            .collect();
        let ok = error.is_none() && conditions.iter().all(|c| c.status == "proved");
        functions.push(FunctionReport {
            name: f.name.clone(),
            verdict: if ok { "pass" } else { "fail" },
            error,
            conditions,
        });
    }
    let verdict = if functions.iter().all(|f| f.verdict == "pass") {
        "pass"
    } else {
        "fail"
    };
    let report = Report {
        schema: REPORT_SCHEMA,
        tool_version: env!("CARGO_PKG_VERSION"),
        file: file.to_string(),
        input_digest: digest(src.as_bytes()),
        verdict,
        functions,
        warnings: program
            .warnings
            .iter()
            .map(|d| d.headline(file, src))
            .collect(),
    };
    Verification {
        program,
        vcs,
        results,
        report,
    }
}

fn location(span: Span, src: &str) -> Location {
    let (line, column) = span.line_col(src);
    Location { line, column }
}

fn vc_report(
    vc: &VerifCondition,
    r: &DischargeResult,
    t: Duration,
    src: &str,
    timings: bool,
) -> VcReport {
    let (reason, missing) = match r {
        DischargeResult::Failed { missing, reason } => {
            (reason.clone(), missing.iter().map(|f| f.to_string()).collect())
        }
        DischargeResult::DepthExceeded => (
            Some("depth limit reached before a proof was found".into()),
            vec![],
        ),
        DischargeResult::TimedOut => (Some("time budget exhausted".into()), vec![]),
        DischargeResult::Proved { .. } => (None, vec![]),
    };
    VcReport {
        id: vc.id(),
        label: vc.label.clone(),
        command: match &vc.kind {
            VcKind::Requires { command } => Some(command.clone()),
            VcKind::Ensures => None,
        },
        location: location(vc.span, src),
        goal: vc.goal.to_string(),
        status: r.status_name(),
        missing,
        reason,
        trace: r.trace().to_vec(),
        trace_len: r.trace().len(),
        wall_ms: timings.then_some(t.as_secs_f64() * 1e3),
    }
}

/// Human-readable report.
pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    for w in &report.warnings {
        let _ = writeln!(out, "{w}");
    }
    let total: usize = report.functions.iter().map(|f| f.conditions.len()).sum();
    let proved: usize = report
        .functions
        .iter()
        .flat_map(|f| &f.conditions)
        .filter(|c| c.status == "proved")
        .count();
    for f in &report.functions {
        let _ = writeln!(out, "function {}: {}", f.name, f.verdict);
        if let Some(e) = &f.error {
            let _ = writeln!(out, "  error: {e}");
        }
        for c in &f.conditions {
            let tag = match c.status {
                "proved" => "ok",
                "failed" => "FAIL",
                "depth_exceeded" => "DEPTH",
                _ => "TIMEOUT",
            };
            let cmd = c
                .command
                .as_ref()
                .map(|c| format!(" [{c}]"))
                .unwrap_or_default();
            let _ = write!(
                out,
                "  {tag:<7} {} {}{} at {}:{}",
                c.id, c.label, cmd, c.location.line, c.location.column
            );
            if let Some(ms) = c.wall_ms {
                let _ = write!(out, " ({ms:.2} ms)");
            }
            out.push('\n');
            if c.status != "proved" {
                let _ = writeln!(out, "          goal: {}", c.goal);
                if let Some(r) = &c.reason {
                    let _ = writeln!(out, "          {r}");
                }
                for m in &c.missing {
                    let _ = writeln!(out, "          missing: {m}");
                }
            }
        }
    }
    let _ = writeln!(
        out,
        "{}: {} ({proved}/{total} conditions proved)",
        report.file,
        if report.passed() { "verified" } else { "FAILED" }
    );
    out
}

/// Full account of one condition: hypotheses, history, goal, outcome and
/// the source it came from.
pub fn render_explain(file: &str, src: &str, vc: &VerifCondition, r: &DischargeResult) -> String {
    let mut out = String::new();
    let loc = location(vc.span, src);
    let _ = writeln!(out, "{} {}", vc.id(), vc.label);
    if let VcKind::Requires { command } = &vc.kind {
        let _ = writeln!(out, "  required by {command}");
    }
    let _ = writeln!(out, "  at {file}:{}:{}", loc.line, loc.column);
    let line = src.lines().nth(loc.line - 1).unwrap_or("");
    let _ = writeln!(out, "    {line}");
    let width = vc.span.end.saturating_sub(vc.span.start).max(1);
    let width = width.min(line.len().saturating_sub(loc.column - 1).max(1));
    let _ = writeln!(out, "    {}{}", " ".repeat(loc.column - 1), "^".repeat(width));
    let _ = writeln!(out, "hypotheses:");
    if vc.facts.is_empty() {
        let _ = writeln!(out, "  (none)");
    }
    for f in vc.facts.iter() {
        let _ = writeln!(out, "  {f}");
    }
    let _ = writeln!(
        out,
        "history ({}, {} entries, newest first):",
        match vc.history.base {
            crate::logic::HistoryBase::Empty => "starts empty",
            crate::logic::HistoryBase::Opaque => "unknown prefix",
        },
        vc.history.len()
    );
    for e in vc.history.iter() {
        let _ = writeln!(out, "  {} {} ({})", e.test_name, e.pvalue, e.hypothesis);
    }
    let _ = writeln!(out, "goal:\n  {}", vc.goal);
    let _ = writeln!(out, "status: {}", r.status_name());
    match r {
        DischargeResult::Proved { trace, .. } => {
            let _ = writeln!(out, "trace: [{}]", trace.join(", "));
        }
        DischargeResult::Failed { missing, reason } => {
            if let Some(reason) = reason {
                let _ = writeln!(out, "reason: {reason}");
            }
            if !missing.is_empty() {
                let _ = writeln!(out, "missing:");
                for m in missing {
                    let _ = writeln!(out, "  {m}");
                }
            }
        }
        _ => {}
    }
    out
}
