//! Concrete syntax.
//!
//! ```text
//! proc   ::= par
//! par    ::= sum ("|" sum)*
//! sum    ::= seq ("+" seq)*
//! seq    ::= "0" | prefix "." seq | "new" name "." seq | "!" seq | "(" proc ")"
//! prefix ::= ("[" name "=" name "]")* basic
//! basic  ::= name "!" name | name "?" "(" name ")" | "tau"
//! name   ::= [a-z][a-zA-Z0-9_]*
//! ```
//!
//! Prefixes bind tighter than `+`, which binds tighter than `|`. `new z.` and
//! `!` scope over the following `seq` only. `#` starts a comment that runs to
//! the end of the line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::error::Result;
use crate::syntax::{Name, Prefix, Process};

/// Byte range in the input text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {}..{}: expected {}, found {found}", span.start, span.end, expected.join(" or "))]
pub struct SyntaxError {
    pub span: SourceSpan,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Zero,
    New,
    Tau,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Eq,
    Bang,
    Question,
    Dot,
    Plus,
    Bar,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("name `{s}`"),
            Tok::Zero => "`0`".into(),
            Tok::New => "`new`".into(),
            Tok::Tau => "`tau`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Question => "`?`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> std::result::Result<Vec<(Tok, SourceSpan)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = match c {
            b'0' => Tok::Zero,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            b'=' => Tok::Eq,
            b'!' => Tok::Bang,
            b'?' => Tok::Question,
            b'.' => Tok::Dot,
            b'+' => Tok::Plus,
            b'|' => Tok::Bar,
            b'a'..=b'z' => {
                let mut j = i + 1;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                let word = &text[i..j];
                i = j;
                let tok = match word {
                    "new" => Tok::New,
                    "tau" => Tok::Tau,
                    w => Tok::Ident(w.to_string()),
                };
                out.push((tok, SourceSpan { start, end: j }));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(SyntaxError {
                    span: SourceSpan {
                        start,
                        end: start + ch.len_utf8(),
                    },
                    expected: vec!["a token".into()],
                    found: format!("`{ch}`"),
                });
            }
        };
        i += 1;
        out.push((tok, SourceSpan { start, end: i }));
    }
    out.push((
        Tok::Eof,
        SourceSpan {
            start: text.len(),
            end: text.len(),
        },
    ));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
}

type PResult<T> = std::result::Result<T, SyntaxError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> SyntaxError {
        let (tok, span) = &self.toks[self.pos];
        SyntaxError {
            span: *span,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: tok.describe(),
        }
    }

    fn expect(&mut self, want: Tok, label: &str) -> PResult<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[label]))
        }
    }

    fn name(&mut self) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(Name::user(&s))
            }
            _ => Err(self.error(&["name"])),
        }
    }

    fn proc(&mut self) -> PResult<Process> {
        let mut p = self.sum()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let r = self.sum()?;
            p = Process::par(p, r);
        }
        Ok(p)
    }

    fn sum(&mut self) -> PResult<Process> {
        let mut p = self.seq()?;
        while *self.peek() == Tok::Plus {
            self.bump();
            let r = self.seq()?;
            p = Process::sum(p, r);
        }
        Ok(p)
    }

    fn seq(&mut self) -> PResult<Process> {
        match self.peek().clone() {
            Tok::Zero => {
                self.bump();
                Ok(Process::Nil)
            }
            Tok::New => {
                self.bump();
                let z = self.name()?;
                self.expect(Tok::Dot, "`.`")?;
                let body = self.seq()?;
                Ok(Process::restrict(z, body))
            }
            Tok::Bang => {
                self.bump();
                Ok(Process::repl(self.seq()?))
            }
            Tok::LParen => {
                self.bump();
                let p = self.proc()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(p)
            }
            Tok::LBracket | Tok::Tau | Tok::Ident(_) => {
                let pre = self.prefix()?;
                self.expect(Tok::Dot, "`.`")?;
                let cont = self.seq()?;
                Ok(Process::prefixed(pre, cont))
            }
            _ => Err(self.error(&["`0`", "prefix", "`new`", "`!`", "`(`"])),
        }
    }

    fn prefix(&mut self) -> PResult<Prefix> {
        if *self.peek() == Tok::LBracket {
            self.bump();
            let lhs = self.name()?;
            self.expect(Tok::Eq, "`=`")?;
            let rhs = self.name()?;
            self.expect(Tok::RBracket, "`]`")?;
            let inner = self.prefix()?;
            return Ok(Prefix::Match {
                lhs,
                rhs,
                inner: Box::new(inner),
            });
        }
        if *self.peek() == Tok::Tau {
            self.bump();
            return Ok(Prefix::Tau);
        }
        let chan = self.name()?;
        match self.peek() {
            Tok::Bang => {
                self.bump();
                let datum = self.name()?;
                Ok(Prefix::Output { chan, datum })
            }
            Tok::Question => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let binder = self.name()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Prefix::Input { chan, binder })
            }
            _ => Err(self.error(&["`!`", "`?`"])),
        }
    }
}

/// Parses a process without validating it.
pub fn parse_unchecked(text: &str) -> std::result::Result<Process, SyntaxError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let proc = p.proc()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(&["`|`", "`+`", "end of input"]));
    }
    Ok(proc)
}

/// Parses and validates a process.
pub fn parse(text: &str) -> Result<Process> {
    let p = parse_unchecked(text)?;
    p.validate()?;
    Ok(p)
}

/// Renders a process. Binders are printed from the α-canonical form, so
/// α-equivalent terms print identically.
pub fn pretty(p: &Process) -> String {
    let canon = p.alpha_canonical();
    let free_text: BTreeSet<String> = canon.free_names().iter().map(|n| n.to_string()).collect();
    let mut names = BTreeMap::new();
    for n in canon.bound_names() {
        if let Name::Bound(i) = n {
            let mut text = format!("v{i}");
            while free_text.contains(&text) {
                text.push('_');
            }
            names.insert(n, text);
        }
    }
    let mut out = String::new();
    Printer {
        names: &names,
        out: &mut out,
    }
    .par(&canon);
    out
}

struct Printer<'a> {
    names: &'a BTreeMap<Name, String>,
    out: &'a mut String,
}

impl Printer<'_> {
    fn name(&mut self, n: &Name) {
        match self.names.get(n) {
            Some(s) => self.out.push_str(s),
            None => self.out.push_str(&n.to_string()),
        }
    }

    fn par(&mut self, p: &Process) {
        match p {
            Process::Par(l, r) => {
                self.par(l);
                self.out.push_str(" | ");
                if matches!(**r, Process::Par(..)) {
                    self.paren(r);
                } else {
                    self.sum(r);
                }
            }
            other => self.sum(other),
        }
    }

    fn sum(&mut self, p: &Process) {
        match p {
            Process::Sum(l, r) => {
                self.sum(l);
                self.out.push_str(" + ");
                if matches!(**r, Process::Sum(..)) {
                    self.paren(r);
                } else {
                    self.seq(r);
                }
            }
            other => self.seq(other),
        }
    }

    fn paren(&mut self, p: &Process) {
        self.out.push('(');
        self.par(p);
        self.out.push(')');
    }

    fn seq(&mut self, p: &Process) {
        match p {
            Process::Nil => self.out.push('0'),
            Process::Prefixed(pre, cont) => {
                self.prefix(pre);
                self.out.push('.');
                self.seq(cont);
            }
            Process::Restrict(z, body) => {
                self.out.push_str("new ");
                self.name(z);
                self.out.push('.');
                self.seq(body);
            }
            Process::Repl(body) => {
                self.out.push('!');
                self.seq(body);
            }
            Process::Sum(..) | Process::Par(..) => self.paren(p),
        }
    }

    fn prefix(&mut self, pre: &Prefix) {
        match pre {
            Prefix::Output { chan, datum } => {
                self.name(chan);
                self.out.push('!');
                self.name(datum);
            }
            Prefix::Input { chan, binder } => {
                self.name(chan);
                self.out.push_str("?(");
                self.name(binder);
                self.out.push(')');
            }
            Prefix::Tau => self.out.push_str("tau"),
            Prefix::Match { lhs, rhs, inner } => {
                self.out.push('[');
                self.name(lhs);
                self.out.push('=');
                self.name(rhs);
                self.out.push(']');
                self.prefix(inner);
            }
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn parses_nil() {
        assert_eq!(parse("0").unwrap(), Process::Nil);
    }

    #[test]
    fn parses_norm_example() {
        let q = parse("new z.(a!z.0) | a?(x).x!a.0").unwrap();
        let expected = Process::par(
            Process::restrict("z", Process::output("a", "z", Process::Nil)),
            Process::input("a", "x", Process::output("x", "a", Process::Nil)),
        );
        assert_eq!(q, expected);
    }

    #[test]
    fn parses_tau_chain() {
        assert_eq!(
            parse("tau.x!y.0").unwrap(),
            Process::tau(Process::output("x", "y", Process::Nil))
        );
    }

    #[test]
    fn precedence() {
        let p = parse("a!b.0 + c!d.0 | e!f.0").unwrap();
        assert!(matches!(p, Process::Par(ref l, _) if matches!(**l, Process::Sum(..))));
        let q = parse("new z.a!z.0 | z!a.0").unwrap();
        assert!(matches!(q, Process::Par(ref l, _) if matches!(**l, Process::Restrict(..))));
        let r = parse("!a!b.0").unwrap();
        assert_eq!(r, Process::repl(Process::output("a", "b", Process::Nil)));
    }

    #[test]
    fn matches_and_comments() {
        let p = parse("# guard\n[x=y][a=a]tau.0 # trailing").unwrap();
        let inner = Prefix::guarded("a", "a", Prefix::Tau);
        assert_eq!(
            p,
            Process::prefixed(Prefix::guarded("x", "y", inner), Process::Nil)
        );
    }

    #[test]
    fn syntax_errors_carry_span() {
        let err = parse_unchecked("a!b").unwrap_err();
        assert_eq!(err.span, SourceSpan { start: 3, end: 3 });
        assert_eq!(err.expected, vec!["`.`".to_string()]);
        let err = parse_unchecked("a?(x.0").unwrap_err();
        assert_eq!(err.span.start, 4);
        assert!(parse_unchecked("A!b.0").is_err());
    }

    #[test]
    fn malformed_sum_is_rejected() {
        assert!(matches!(
            parse("a!b.0 + new z.z!a.0"),
            Err(Error::MalformedSum { .. })
        ));
        assert!(matches!(
            parse("(a!b.0 | c!d.0) + 0"),
            Err(Error::MalformedSum { .. })
        ));
    }

    #[test]
    fn pretty_forms() {
        assert_eq!(pretty(&Process::Nil), "0");
        let p = parse("a?(x).(x!b.0 + tau.c!b.0)").unwrap();
        assert_eq!(pretty(&p), "a?(v0).(v0!b.0 + tau.c!b.0)");
        assert!(parse(&pretty(&p)).unwrap().alpha_eq(&p));
        let nested = Process::par(Process::Nil, Process::par(Process::Nil, Process::Nil));
        assert_eq!(pretty(&nested), "0 | (0 | 0)");
    }

    #[test]
    fn pretty_avoids_free_names() {
        let p = parse("new z.v0!z.0").unwrap();
        assert_eq!(pretty(&p), "new v0_.v0!v0_.0");
        assert!(parse(&pretty(&p)).unwrap().alpha_eq(&p));
    }
}
