use crate::logic::{format_rational, AtomicFormula, Formula, Pred, Term};

/// Renders a formula in the annotation syntax. The output parses back to
/// the normalized formula.
pub fn pretty_print(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out);
    out
}

pub fn pretty_term(t: &Term) -> String {
    match t {
        Term::Const(q) => format!("const_term {}", format_rational(q)),
        Term::Name(n) => n.to_string(),
        Term::Param(p) => format!("?{p}"),
        Term::Mean(inner) => match **inner {
            Term::Name(_) | Term::Param(_) => format!("mean {}", pretty_term(inner)),
            _ => format!("mean ({})", pretty_term(inner)),
        },
    }
}

fn term_arg(t: &Term) -> String {
    match t {
        Term::Name(_) | Term::Param(_) => pretty_term(t),
        Term::Const(q) => format_rational(q),
        _ => format!("({})", pretty_term(t)),
    }
}

fn write_atom(a: &AtomicFormula, out: &mut String) {
    if a.pred == Pred::IsEmpty {
        out.push_str("is_empty (!st)");
    } else if a.pred.is_comparison() {
        out.push_str(&pretty_term(&a.args[0]));
        out.push(' ');
        out.push_str(a.pred.symbol());
        out.push(' ');
        out.push_str(&pretty_term(&a.args[1]));
    } else {
        out.push_str(a.pred.symbol());
        for arg in &a.args {
            out.push(' ');
            out.push_str(&term_arg(arg));
        }
    }
}

fn write_formula(f: &Formula, out: &mut String) {
    match f {
        Formula::Atom(a) => write_atom(a, out),
        Formula::Not(g) => {
            out.push_str("Not ");
            write_operand(g, out);
        }
        Formula::Conj(gs) | Formula::Disj(gs) => {
            let sep = if matches!(f, Formula::Conj(_)) {
                " /\\ "
            } else {
                " \\/ "
            };
            for (i, g) in gs.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                if matches!(g, Formula::Conj(_) | Formula::Disj(_)) {
                    out.push('(');
                    write_formula(g, out);
                    out.push(')');
                } else {
                    write_formula(g, out);
                }
            }
        }
        Formula::Possible(g) => {
            out.push_str("Possible ");
            write_operand(g, out);
        }
        Formula::Know(g) => {
            out.push_str("Know ");
            write_operand(g, out);
        }
        Formula::StatB(r, g) => {
            out.push_str(&format!("StatB ({r}) "));
            write_operand(g, out);
        }
    }
}

/// Operands of the prefix operators are always parenthesized.
fn write_operand(g: &Formula, out: &mut String) {
    out.push('(');
    write_formula(g, out);
    out.push(')');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{PExpr, PValueRecord};

    #[test]
    fn sampled_surface_form() {
        let f = Formula::atom(Pred::Sampled, vec![Term::name("d"), Term::name("t_n")]).unwrap();
        assert_eq!(pretty_print(&f), "sampled d t_n");
    }

    #[test]
    fn statb_surface_form() {
        let h = Formula::cmp(Pred::Neq, Term::mean(Term::name("t_n")), Term::int(1));
        let f = Formula::stat_b(PValueRecord::at_most(PExpr::ratio(1, 20)).unwrap(), h).unwrap();
        assert_eq!(
            pretty_print(&f),
            "StatB (Leq 0.05) (mean t_n $!= const_term 1)"
        );
    }

    #[test]
    fn nested_connectives_parenthesized() {
        let a = Formula::atom(Pred::IsNormal, vec![Term::name("a")]).unwrap();
        let b = Formula::atom(Pred::IsNormal, vec![Term::name("b")]).unwrap();
        let f = Formula::Conj(vec![a.clone(), Formula::Disj(vec![a, Formula::not(b)])]);
        assert_eq!(
            pretty_print(&f),
            "is_normal a /\\ (is_normal a \\/ Not (is_normal b))"
        );
    }
}
