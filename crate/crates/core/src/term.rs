//! Ground terms of the fact format and a small positioned tokenizer/parser.

use std::fmt;

use crate::error::ParseError;

/// A ground term. The derived ordering puts `#inf` first and `#sup` last,
/// integers before symbols, which gives a stable order for serialization.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Inf,
    Int(i64),
    Sym(String),
    Func(String, Vec<Term>),
    Tuple(Vec<Term>),
    Sup,
}

impl Term {
    pub fn sym(s: &str) -> Term {
        Term::Sym(s.to_string())
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Term::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Term::Inf | Term::Sup)
    }

    /// Parses a single term, e.g. `r(1,3)` or `(4,3)`.
    pub fn parse(text: &str) -> Result<Term, ParseError> {
        let mut p = Parser::new(text);
        p.skip_ws();
        let t = p.term()?;
        p.skip_ws();
        if !p.at_end() {
            return Err(p.error("trailing input after term"));
        }
        Ok(t)
    }
}

impl From<i64> for Term {
    fn from(i: i64) -> Self {
        Term::Int(i)
    }
}

impl From<&str> for Term {
    fn from(s: &str) -> Self {
        Term::parse(s).unwrap_or_else(|_| Term::Sym(s.to_string()))
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Inf => f.write_str("#inf"),
            Term::Sup => f.write_str("#sup"),
            Term::Int(i) => write!(f, "{i}"),
            Term::Sym(s) => f.write_str(s),
            Term::Func(name, args) => {
                write!(f, "{name}(")?;
                write_args(f, args)?;
                f.write_str(")")
            }
            Term::Tuple(args) => {
                f.write_str("(")?;
                write_args(f, args)?;
                if args.len() == 1 {
                    f.write_str(",")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A parsed fact `pred(args).` with the position where it starts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fact {
    pub pred: String,
    pub args: Vec<Term>,
    pub line: usize,
    pub col: usize,
}

pub(crate) struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    pub(crate) fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            col: self.col,
            message: msg.into(),
        }
    }

    /// Skips whitespace and `%` comments.
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_ascii_whitespace() {
                self.bump();
            } else if c == b'%' {
                while let Some(c) = self.peek() {
                    if c == b'\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected '{}'", c as char)))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_lowercase() || c == b'_' => {}
            _ => return Err(self.error("expected identifier")),
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' {
                self.bump();
            } else {
                break;
            }
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn args(&mut self) -> Result<Vec<Term>, ParseError> {
        // opening paren already consumed
        let mut args = Vec::new();
        self.skip_ws();
        if self.peek() == Some(b')') {
            self.bump();
            return Ok(args);
        }
        loop {
            self.skip_ws();
            args.push(self.term()?);
            self.skip_ws();
            match self.bump() {
                Some(b',') => continue,
                Some(b')') => return Ok(args),
                _ => return Err(self.error("expected ',' or ')'")),
            }
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'#') => {
                self.bump();
                let name = self.ident()?;
                match name.as_str() {
                    "inf" => Ok(Term::Inf),
                    "sup" => Ok(Term::Sup),
                    _ => Err(self.error(format!("unknown constant #{name}"))),
                }
            }
            Some(b'(') => {
                self.bump();
                Ok(Term::Tuple(self.args()?))
            }
            Some(c) if c.is_ascii_digit() || c == b'-' => {
                let start = self.pos;
                self.bump();
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.bump();
                }
                let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                s.parse::<i64>()
                    .map(Term::Int)
                    .map_err(|_| self.error(format!("invalid integer '{s}'")))
            }
            Some(_) => {
                let name = self.ident()?;
                if self.peek() == Some(b'(') {
                    self.bump();
                    Ok(Term::Func(name, self.args()?))
                } else {
                    Ok(Term::Sym(name))
                }
            }
            None => Err(self.error("unexpected end of input")),
        }
    }

    /// Parses the whole document as a sequence of facts.
    pub(crate) fn facts(mut self) -> Result<Vec<Fact>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            if self.at_end() {
                return Ok(out);
            }
            let (line, col) = (self.line, self.col);
            let pred = self.ident()?;
            let args = if self.peek() == Some(b'(') {
                self.bump();
                self.args()?
            } else {
                Vec::new()
            };
            self.expect(b'.')?;
            out.push(Fact {
                pred,
                args,
                line,
                col,
            });
        }
    }
}

/// Parses a fact document into raw facts.
pub fn parse_facts(text: &str) -> Result<Vec<Fact>, ParseError> {
    Parser::new(text).facts()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_compound_terms() {
        let facts = parse_facts("ra(t1,r(1,3),0,(1,3)). % comment\nb(sw1,60).").unwrap();
        assert_eq!(facts.len(), 2);
        assert_eq!(
            facts[0].args[1],
            Term::Func("r".into(), vec![Term::Int(1), Term::Int(3)])
        );
        assert_eq!(
            facts[0].args[3],
            Term::Tuple(vec![Term::Int(1), Term::Int(3)])
        );
        assert_eq!(facts[1].line, 2);
    }

    #[test]
    fn infinity_tokens() {
        let facts = parse_facts("x(#inf,#sup,-5).").unwrap();
        assert_eq!(facts[0].args, vec![Term::Inf, Term::Sup, Term::Int(-5)]);
        assert!(Term::Inf < Term::Int(i64::MIN));
        assert!(Term::Sym("z".into()) < Term::Sup);
    }

    #[test]
    fn reports_position() {
        let err = parse_facts("tl(t1).\n  edge(t1,1 3).").unwrap_err();
        match err {
            ParseError::Syntax { line, col, .. } => {
                assert_eq!(line, 2);
                assert!(col > 10);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_facts("tl(t1)").is_err());
    }

    #[test]
    fn display_round_trip() {
        for s in ["r(1,3)", "(4,3)", "#inf", "-7", "sw1", "f(g(a),(1,2))"] {
            assert_eq!(Term::parse(s).unwrap().to_string(), s);
        }
    }
}
