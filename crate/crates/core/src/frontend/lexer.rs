use num_bigint::BigInt;
use num_traits::Zero;

use super::diagnostics::{Code, Diagnostic, Span};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(Rational),
    /// `?NAME`, a fold placeholder.
    Param(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Bang,
    Minus,
    Assign,
    Models,
    And,
    Or,
    PlusDot,
    Lt,
    Gt,
    Leq,
    Geq,
    Neq,
    EqOp,
    AnnotOpen,
    AnnotClose,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(_) => "number".into(),
            Tok::Param(p) => format!("`?{p}`"),
            Tok::Eof => "end of file".into(),
            other => format!("`{}`", other.spelling()),
        }
    }

    pub fn spelling(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Bang => "!",
            Tok::Minus => "-",
            Tok::Assign => "=",
            Tok::Models => "|=",
            Tok::And => "/\\",
            Tok::Or => "\\/",
            Tok::PlusDot => "+.",
            Tok::Lt => "<'",
            Tok::Gt => ">'",
            Tok::Leq => "<='",
            Tok::Geq => ">='",
            Tok::Neq => "$!=",
            Tok::EqOp => "$=",
            Tok::AnnotOpen => "(*@",
            Tok::AnnotClose => "*)",
            Tok::Ident(_) | Tok::Number(_) | Tok::Param(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

const PUNCT: &[(&str, Tok)] = &[
    ("(*@", Tok::AnnotOpen),
    ("*)", Tok::AnnotClose),
    ("<='", Tok::Leq),
    (">='", Tok::Geq),
    ("$!=", Tok::Neq),
    ("$=", Tok::EqOp),
    ("<'", Tok::Lt),
    (">'", Tok::Gt),
    ("/\\", Tok::And),
    ("\\/", Tok::Or),
    ("&&", Tok::And),
    ("||", Tok::Or),
    ("|=", Tok::Models),
    ("+.", Tok::PlusDot),
    ("(", Tok::LParen),
    (")", Tok::RParen),
    ("[", Tok::LBracket),
    ("]", Tok::RBracket),
    (",", Tok::Comma),
    (";", Tok::Semi),
    ("!", Tok::Bang),
    ("-", Tok::Minus),
    ("=", Tok::Assign),
];

pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("(*") && !src[i..].starts_with("(*@") {
            i = skip_comment(src, i)?;
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                span: Span::new(start, i),
            });
            continue;
        }
        if c == b'?' {
            let start = i;
            i += 1;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            if i == start + 1 {
                return Err(Diagnostic::error(
                    Code::Syntax,
                    Span::new(start, i),
                    "expected a placeholder name after `?`",
                ));
            }
            out.push(Token {
                tok: Tok::Param(src[start + 1..i].to_string()),
                span: Span::new(start, i),
            });
            continue;
        }
        if c.is_ascii_digit() {
            let (q, end) = lex_number(src, i);
            out.push(Token {
                tok: Tok::Number(q),
                span: Span::new(i, end),
            });
            i = end;
            continue;
        }
        match PUNCT.iter().find(|(s, _)| src[i..].starts_with(s)) {
            Some((s, tok)) => {
                out.push(Token {
                    tok: tok.clone(),
                    span: Span::new(i, i + s.len()),
                });
                i += s.len();
            }
            None => {
                let ch = src[i..].chars().next().unwrap();
                return Err(Diagnostic::error(
                    Code::Syntax,
                    Span::new(i, i + ch.len_utf8()),
                    format!("unexpected character `{ch}`"),
                ));
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(src.len(), src.len()),
    });
    Ok(out)
}

fn skip_comment(src: &str, start: usize) -> Result<usize, Diagnostic> {
    let mut depth = 0usize;
    let mut i = start;
    while i < src.len() {
        if src[i..].starts_with("(*") {
            depth += 1;
            i += 2;
        } else if src[i..].starts_with("*)") {
            depth -= 1;
            i += 2;
            if depth == 0 {
                return Ok(i);
            }
        } else {
            i += src[i..].chars().next().map_or(1, char::len_utf8);
        }
    }
    Err(Diagnostic::error(
        Code::Syntax,
        Span::new(start, start + 2),
        "unterminated comment",
    ))
}

/// Decimal (`0.05`) or fractional (`1/3`) literal, read exactly.
fn lex_number(src: &str, start: usize) -> (Rational, usize) {
    let bytes = src.as_bytes();
    let digits = |mut i: usize| {
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        i
    };
    let int_end = digits(start);
    let mut value = Rational::from_integer(src[start..int_end].parse::<BigInt>().unwrap());
    let mut end = int_end;
    if end + 1 < bytes.len() && bytes[end] == b'.' && bytes[end + 1].is_ascii_digit() {
        let frac_end = digits(end + 1);
        let frac = &src[end + 1..frac_end];
        let num: BigInt = frac.parse().unwrap();
        let den = num_traits::pow(BigInt::from(10), frac.len());
        value += Rational::new(num, den);
        end = frac_end;
    } else if end < bytes.len() && bytes[end] == b'.' {
        // `1.` as in OCaml float literals
        end += 1;
    }
    if end + 1 < bytes.len() && bytes[end] == b'/' && bytes[end + 1].is_ascii_digit() {
        let den_end = digits(end + 1);
        let den: BigInt = src[end + 1..den_end].parse().unwrap();
        if !den.is_zero() {
            value /= Rational::from_integer(den);
            end = den_end;
        }
    }
    (value, end)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(
            toks("0.05"),
            vec![Tok::Number(Rational::new(1.into(), 20.into())), Tok::Eof]
        );
        assert_eq!(
            toks("1/3"),
            vec![Tok::Number(Rational::new(1.into(), 3.into())), Tok::Eof]
        );
    }

    #[test]
    fn operators() {
        assert_eq!(
            toks("a /\\ b <' c $!= (*@ *)"),
            vec![
                Tok::Ident("a".into()),
                Tok::And,
                Tok::Ident("b".into()),
                Tok::Lt,
                Tok::Ident("c".into()),
                Tok::Neq,
                Tok::AnnotOpen,
                Tok::AnnotClose,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_skipped() {
        assert_eq!(toks("a (* note (* nested *) *) b").len(), 3);
    }

    #[test]
    fn bad_character() {
        let err = lex("a # b").unwrap_err();
        assert_eq!(err.span, Span::new(2, 3));
    }
}
