//! A small decidable predicate language over finite sequences.
//!
//! ```text
//! expr  := and ("or" and)*
//! and   := atom ("and" atom)*
//! atom  := "not" atom | "(" expr ")" | term cmp term
//! term  := "len" | "sum" | "maxEntry" | "entry(" INT ")" | INT
//! cmp   := "<" | "<=" | "≤" | ">" | ">=" | "≥" | "=" | "!=" | "≠"
//! ```
//!
//! `entry(i)` reads 0 past the end of the sequence, as on `a * 0^ω`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    fn apply(self, x: u128, y: u128) -> bool {
        match self {
            CmpOp::Lt => x < y,
            CmpOp::Le => x <= y,
            CmpOp::Gt => x > y,
            CmpOp::Ge => x >= y,
            CmpOp::Eq => x == y,
            CmpOp::Ne => x != y,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Term {
    Len,
    Sum,
    MaxEntry,
    Entry(u64),
    Lit(u64),
}

impl Term {
    fn eval(self, a: &[u64]) -> u128 {
        match self {
            Term::Len => a.len() as u128,
            Term::Sum => a.iter().map(|&x| x as u128).sum(),
            Term::MaxEntry => a.iter().copied().max().unwrap_or(0) as u128,
            Term::Entry(i) => usize::try_from(i)
                .ok()
                .and_then(|i| a.get(i))
                .copied()
                .unwrap_or(0) as u128,
            Term::Lit(n) => n as u128,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Len => f.write_str("len"),
            Term::Sum => f.write_str("sum"),
            Term::MaxEntry => f.write_str("maxEntry"),
            Term::Entry(i) => write!(f, "entry({i})"),
            Term::Lit(n) => write!(f, "{n}"),
        }
    }
}

/// `And` and `Or` hold at least two operands, none of the same connective
/// unless it was parenthesized in the source.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Expr {
    Cmp(CmpOp, Term, Term),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
}

impl Expr {
    pub fn eval(&self, a: &[u64]) -> bool {
        match self {
            Expr::Cmp(op, x, y) => op.apply(x.eval(a), y.eval(a)),
            Expr::Not(e) => !e.eval(a),
            Expr::And(es) => es.iter().all(|e| e.eval(a)),
            Expr::Or(es) => es.iter().any(|e| e.eval(a)),
        }
    }

    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::And(_) | Expr::Or(_) => write!(f, "({self})"),
            _ => write!(f, "{self}"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let joined = |f: &mut fmt::Formatter<'_>, es: &[Expr], word: &str| {
            for (i, e) in es.iter().enumerate() {
                if i > 0 {
                    write!(f, " {word} ")?;
                }
                e.fmt_operand(f)?;
            }
            Ok(())
        };
        match self {
            Expr::Cmp(op, x, y) => write!(f, "{x} {} {y}", op.symbol()),
            Expr::Not(e) => {
                f.write_str("not ")?;
                e.fmt_operand(f)
            }
            Expr::And(es) => joined(f, es, "and"),
            Expr::Or(es) => joined(f, es, "or"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    Op(CmpOp),
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Op(op) => write!(f, "`{}`", op.symbol()),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 1);
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        let tok = if c.is_whitespace() {
            bump(&mut chars);
            continue;
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                s.push(d);
                bump(&mut chars);
            }
            Tok::Int(s.parse().map_err(|_| Error::Parse {
                line: l,
                column: col,
                message: format!("integer `{s}` is too large"),
            })?)
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if !(d.is_ascii_alphanumeric() || d == '_') {
                    break;
                }
                s.push(d);
                bump(&mut chars);
            }
            Tok::Ident(s)
        } else {
            bump(&mut chars);
            let next_is_eq = chars.peek() == Some(&'=');
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '≤' => Tok::Op(CmpOp::Le),
                '≥' => Tok::Op(CmpOp::Ge),
                '≠' => Tok::Op(CmpOp::Ne),
                '=' => {
                    if next_is_eq {
                        bump(&mut chars);
                    }
                    Tok::Op(CmpOp::Eq)
                }
                '<' | '>' | '!' if next_is_eq => {
                    bump(&mut chars);
                    Tok::Op(match c {
                        '<' => CmpOp::Le,
                        '>' => CmpOp::Ge,
                        _ => CmpOp::Ne,
                    })
                }
                '<' => Tok::Op(CmpOp::Lt),
                '>' => Tok::Op(CmpOp::Gt),
                _ => {
                    return Err(Error::Parse {
                        line: l,
                        column: col,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            }
        };
        out.push(Spanned {
            tok,
            line: l,
            column: col,
        });
    }
    out.push(Spanned {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, at: &Spanned, message: String) -> Error {
        Error::Parse {
            line: at.line,
            column: at.column,
            message,
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == w)
    }

    fn chain(&mut self, word: &str, sub: fn(&mut Self) -> Result<Expr>) -> Result<Expr> {
        let mut es = vec![sub(self)?];
        while self.is_word(word) {
            self.next();
            es.push(sub(self)?);
        }
        Ok(if es.len() == 1 {
            es.pop().expect("one operand")
        } else if word == "or" {
            Expr::Or(es)
        } else {
            Expr::And(es)
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        self.chain("or", |p| p.chain("and", Self::atom))
    }

    fn atom(&mut self) -> Result<Expr> {
        if self.is_word("not") {
            self.next();
            return Ok(Expr::Not(Box::new(self.atom()?)));
        }
        if self.peek().tok == Tok::LParen {
            self.next();
            let e = self.expr()?;
            let close = self.next();
            if close.tok != Tok::RParen {
                return Err(self.error(&close, format!("expected `)`, found {}", close.tok)));
            }
            return Ok(e);
        }
        let x = self.term()?;
        let op = self.next();
        let Tok::Op(op_kind) = op.tok else {
            return Err(self.error(&op, format!("expected a comparison, found {}", op.tok)));
        };
        let y = self.term()?;
        Ok(Expr::Cmp(op_kind, x, y))
    }

    fn term(&mut self) -> Result<Term> {
        let t = self.next();
        match &t.tok {
            Tok::Int(n) => Ok(Term::Lit(*n)),
            Tok::Ident(s) => match s.as_str() {
                "len" => Ok(Term::Len),
                "sum" => Ok(Term::Sum),
                "maxEntry" => Ok(Term::MaxEntry),
                "entry" => {
                    let open = self.next();
                    if open.tok != Tok::LParen {
                        return Err(self.error(
                            &open,
                            format!("expected `(` after `entry`, found {}", open.tok),
                        ));
                    }
                    let i = self.next();
                    let Tok::Int(i) = i.tok else {
                        return Err(self.error(&i, format!("expected an index, found {}", i.tok)));
                    };
                    let close = self.next();
                    if close.tok != Tok::RParen {
                        return Err(
                            self.error(&close, format!("expected `)`, found {}", close.tok))
                        );
                    }
                    Ok(Term::Entry(i))
                }
                "and" | "or" | "not" => {
                    Err(self.error(&t, format!("expected a term, found `{s}`")))
                }
                _ => Err(self.error(&t, format!("unknown identifier `{s}`"))),
            },
            other => Err(self.error(&t, format!("expected a term, found {other}"))),
        }
    }
}

pub fn parse_predicate(src: &str) -> Result<Expr> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let e = p.expr()?;
    let end = p.next();
    if end.tok != Tok::End {
        return Err(p.error(&end, format!("unexpected {} after the expression", end.tok)));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        assert_eq!(
            parse_predicate("len >= 3").unwrap(),
            Expr::Cmp(CmpOp::Ge, Term::Len, Term::Lit(3))
        );
        assert_eq!(
            parse_predicate("sum >= 2 and entry(0) = 1").unwrap(),
            Expr::And(vec![
                Expr::Cmp(CmpOp::Ge, Term::Sum, Term::Lit(2)),
                Expr::Cmp(CmpOp::Eq, Term::Entry(0), Term::Lit(1)),
            ])
        );
        assert_eq!(
            parse_predicate("not len ≤ 1 or maxEntry ≠ 0").unwrap(),
            Expr::Or(vec![
                Expr::Not(Box::new(Expr::Cmp(CmpOp::Le, Term::Len, Term::Lit(1)))),
                Expr::Cmp(CmpOp::Ne, Term::MaxEntry, Term::Lit(0)),
            ])
        );
    }

    #[test]
    fn errors_carry_positions() {
        match parse_predicate("len >") {
            Err(Error::Parse {
                line: 1, column: 6, ..
            }) => {}
            other => panic!("{other:?}"),
        }
        match parse_predicate("len >= 1 and\n  size < 2") {
            Err(Error::Parse {
                line: 2,
                column: 3,
                message,
            }) => assert!(message.contains("size")),
            other => panic!("{other:?}"),
        }
        assert!(parse_predicate("(len > 1").is_err());
        assert!(parse_predicate("len > 1 len").is_err());
        assert!(parse_predicate("len # 1").is_err());
    }

    #[test]
    fn semantics() {
        let ev = |s: &str, a: &[u64]| parse_predicate(s).unwrap().eval(a);
        assert!(ev("len >= 2", &[1, 1]));
        assert!(ev("entry(3) = 0", &[1]));
        assert!(ev("sum >= 2", &[1, 0, 1]));
        assert!(!ev("maxEntry > 0", &[]));
        assert!(ev("entry(18446744073709551615) = 0", &[5]));
    }
}
