use std::collections::BTreeMap;
use std::fmt;

use num_traits::ToPrimitive;
use serde::Serialize;

use super::{t_pvalue, t_statistic, t_statistic_paired, t_statistic_pooled, NumError};
use crate::frontend::{CExpr, CheckedFunction, CheckedProgram};
use crate::specs::{builtin_specs, expand_comparisons, Alternative, Arg, Family};

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct DemoLine {
    pub function: String,
    pub variable: String,
    pub command: String,
    pub datasets: Vec<String>,
    pub statistic: f64,
    pub df: u64,
    pub pvalue: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct DemoResult {
    pub function: String,
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct DemoReport {
    pub lines: Vec<DemoLine>,
    pub results: Vec<DemoResult>,
}

impl fmt::Display for DemoReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(
                f,
                "{}: {} = {} {}  t = {:.6}  df = {}  p = {:.6e}",
                l.function,
                l.variable,
                l.command,
                l.datasets.join(" "),
                l.statistic,
                l.df,
                l.pvalue
            )?;
        }
        for r in &self.results {
            let vals: Vec<String> = r
                .names
                .iter()
                .zip(&r.values)
                .map(|(n, v)| format!("{n} = {v:.6e}"))
                .collect();
            writeln!(f, "{} returns {}", r.function, vals.join(", "))?;
        }
        Ok(())
    }
}

/// Reads one column per dataset; the header names the datasets. Columns may
/// have different lengths, shorter ones padded with empty cells.
pub fn load_csv(text: &str) -> Result<BTreeMap<String, Vec<f64>>, NumError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| NumError::Data(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| NumError::Data(e.to_string()))?;
        for (i, cell) in rec.iter().enumerate().take(headers.len()) {
            if cell.is_empty() {
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| {
                NumError::Data(format!("row {}, column `{}`: `{cell}` is not a number", row + 2, headers[i]))
            })?;
            cols[i].push(v);
        }
    }
    Ok(headers.into_iter().zip(cols).collect())
}

#[derive(Clone, Debug)]
enum Value {
    P(f64),
    Real(f64),
    Dataset,
    Tuple(Vec<Value>),
}

/// Runs every annotated function on the bound data. Dataset parameters are
/// looked up by their own name.
pub fn run_demo(
    prog: &CheckedProgram,
    data: &BTreeMap<String, Vec<f64>>,
) -> Result<DemoReport, NumError> {
    let mut report = DemoReport::default();
    for f in prog.functions.iter().filter(|f| f.annotated) {
        run_function(f, data, &mut report)?;
    }
    Ok(report)
}

fn run_function(
    f: &CheckedFunction,
    data: &BTreeMap<String, Vec<f64>>,
    report: &mut DemoReport,
) -> Result<(), NumError> {
    let mut env: BTreeMap<String, Value> = f
        .params
        .iter()
        .map(|p| (p.clone(), Value::Dataset))
        .collect();
    for l in &f.lets {
        let v = eval(&f.name, &l.names.join(","), &l.value, &env, data, report)?;
        match (l.tuple, v) {
            (true, Value::Tuple(items)) => {
                for (n, it) in l.names.iter().zip(items) {
                    env.insert(n.clone(), it);
                }
            }
            (_, v) => {
                env.insert(l.names[0].clone(), v);
            }
        }
    }
    let v = eval(&f.name, &f.result_names.join(","), &f.result, &env, data, report)?;
    let values = flatten(&v);
    report.results.push(DemoResult {
        function: f.name.clone(),
        names: f.result_names.clone(),
        values,
    });
    Ok(())
}

fn flatten(v: &Value) -> Vec<f64> {
    match v {
        Value::P(p) | Value::Real(p) => vec![*p],
        Value::Dataset => vec![],
        Value::Tuple(items) => items.iter().flat_map(flatten).collect(),
    }
}

fn scalar(v: Value) -> f64 {
    match v {
        Value::P(p) | Value::Real(p) => p,
        _ => f64::NAN,
    }
}

fn eval(
    function: &str,
    var: &str,
    e: &CExpr,
    env: &BTreeMap<String, Value>,
    data: &BTreeMap<String, Vec<f64>>,
    report: &mut DemoReport,
) -> Result<Value, NumError> {
    Ok(match e {
        CExpr::Var(v, _) => env.get(v).cloned().unwrap_or(Value::Dataset),
        CExpr::Num(q, _) => Value::Real(q.to_f64().unwrap_or(f64::NAN)),
        CExpr::Tuple(items, _) => Value::Tuple(
            items
                .iter()
                .map(|i| eval(function, var, i, env, data, report))
                .collect::<Result<_, _>>()?,
        ),
        CExpr::Add(a, b, _) => Value::P(
            scalar(eval(function, var, a, env, data, report)?)
                + scalar(eval(function, var, b, env, data, report)?),
        ),
        CExpr::Min(items, _) => {
            let mut m = f64::INFINITY;
            for i in items {
                m = m.min(scalar(eval(function, var, i, env, data, report)?));
            }
            Value::P(m)
        }
        CExpr::Command { spec, args, .. } => {
            let ps = run_command(function, var, spec, args, data, report)?;
            if ps.len() == 1 {
                Value::P(ps[0])
            } else {
                Value::Tuple(ps.into_iter().map(Value::P).collect())
            }
        }
    })
}

fn column<'a>(data: &'a BTreeMap<String, Vec<f64>>, name: &str) -> Result<&'a [f64], NumError> {
    data.get(name)
        .map(Vec::as_slice)
        .ok_or_else(|| NumError::UnboundDataset(name.to_string()))
}

fn run_command(
    function: &str,
    var: &str,
    name: &str,
    args: &[Arg],
    data: &BTreeMap<String, Vec<f64>>,
    report: &mut DemoReport,
) -> Result<Vec<f64>, NumError> {
    let spec = &builtin_specs()[name];
    let alt = args
        .iter()
        .find_map(|a| match a {
            Arg::Alternative(k) => Some(*k),
            _ => None,
        })
        .unwrap_or(Alternative::Two);
    let mut push = |datasets: Vec<String>, t: f64, df: u64| -> Result<f64, NumError> {
        let p = t_pvalue(t, df, alt)?;
        report.lines.push(DemoLine {
            function: function.to_string(),
            variable: var.to_string(),
            command: name.to_string(),
            datasets,
            statistic: t,
            df,
            pvalue: p,
        });
        Ok(p)
    };
    match (spec.family, args) {
        (Family::OneSample, [_, Arg::Real(mu), Arg::Dataset(y), _]) => {
            let ys = column(data, y)?;
            let t = t_statistic(ys, mu.to_f64().unwrap_or(f64::NAN))?;
            Ok(vec![push(vec![y.clone()], t, ys.len() as u64 - 1)?])
        }
        (Family::TwoSample { paired }, [_, _, Arg::Pair(y1, y2), _]) => {
            let (a, b) = (column(data, y1)?, column(data, y2)?);
            let (t, df) = if paired {
                t_statistic_paired(a, b)?
            } else {
                t_statistic_pooled(a, b)?
            };
            Ok(vec![push(vec![y1.clone(), y2.clone()], t, df)?])
        }
        (Family::Multiple(method), _) => {
            if !method.is_parametric() {
                return Err(NumError::NotImplemented(spec.test_name.clone()));
            }
            let groups = match &args[0] {
                Arg::Groups(g) => g.clone(),
                _ => unreachable!("checked by the binder"),
            };
            let control = args.iter().find_map(|a| match a {
                Arg::Index(i) => Some(*i),
                _ => None,
            });
            let pairs = expand_comparisons(method, &groups, control)
                .map_err(|e| NumError::Data(e.to_string()))?;
            let mut out = Vec::with_capacity(pairs.len());
            for cp in pairs {
                let (g1, g2) = (&groups[cp.pair.0], &groups[cp.pair.1]);
                let (t, df) =
                    t_statistic_pooled(column(data, &g1.dataset)?, column(data, &g2.dataset)?)?;
                out.push(push(vec![g1.dataset.clone(), g2.dataset.clone()], t, df)?);
            }
            Ok(out)
        }
        _ => unreachable!("arguments are kind-checked by the binder"),
    }
}
