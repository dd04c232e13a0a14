//! Text syntax for predicate expressions, STL formulas, and constraint specs.
//!
//! Predicate expressions use the usual arithmetic precedence plus `abs`,
//! `norm2(..)`, `min`, `max`, and 1-based component references `x[i]`.
//!
//! Formulas:
//!
//! ```text
//! TRUE | pred{e} | pred{e >= c} | !f | f & f | f "|" f
//!      | f U[a,b] f | f S[a,b] f | F[a,b] f | G[a,b] f | P[a,b] f | H[a,b] f
//! ```
//!
//! `&` binds tighter than `|`; `U`/`S` are non-associative (parenthesize
//! chains). Interval bounds are real time units, converted to steps with
//! round-half-away-from-zero on `bound / dt`.
//!
//! Constraint specs are line-oriented: repeated `on [Ta,Tb]: expr` lines
//! (integer step bounds) and an optional `default: value` line. `#` starts a
//! comment in every syntax.

use crate::constraint::{ConstraintPiece, ConstraintSpec};
use crate::expr::PredicateExpr;
use crate::formula::{Interval, StlFormula};
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    Ge,
    Le,
}

#[derive(Debug, Clone)]
struct Lexed {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let c = *self.src.get(self.pos)?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn tokens(mut self) -> Result<(Vec<Lexed>, usize, usize), Error> {
        let mut out = Vec::new();
        loop {
            while let Some(c) = self.peek() {
                if c == b'#' {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                } else if c.is_ascii_whitespace() {
                    self.bump();
                } else {
                    break;
                }
            }
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else { break };
            let tok = if c.is_ascii_digit() || c == b'.' {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.bump();
                }
                if self.peek() == Some(b'.') {
                    self.bump();
                    while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        self.bump();
                    }
                }
                if self.peek() == Some(b'e') || self.peek() == Some(b'E') {
                    self.bump();
                    if self.peek() == Some(b'+') || self.peek() == Some(b'-') {
                        self.bump();
                    }
                    while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        self.bump();
                    }
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let v: f64 = text
                    .parse()
                    .map_err(|_| Error::parse(line, col, format!("bad number '{text}'")))?;
                Tok::Num(v)
            } else if c.is_ascii_alphabetic() || c == b'_' {
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
                {
                    self.bump();
                }
                Tok::Ident(std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string())
            } else if c == b'>' || c == b'<' {
                self.bump();
                if self.peek() != Some(b'=') {
                    return Err(Error::parse(line, col, "expected '>=' or '<='"));
                }
                self.bump();
                if c == b'>' {
                    Tok::Ge
                } else {
                    Tok::Le
                }
            } else {
                self.bump();
                Tok::Sym(c as char)
            };
            out.push(Lexed { tok, line, col });
        }
        Ok((out, self.line, self.col))
    }
}

struct Parser {
    toks: Vec<Lexed>,
    idx: usize,
    end_line: usize,
    end_col: usize,
    /// Seconds per step for formula interval conversion.
    dt: f64,
}

impl Parser {
    fn new(src: &str, dt: f64) -> Result<Self, Error> {
        let (toks, end_line, end_col) = Lexer::new(src).tokens()?;
        Ok(Parser {
            toks,
            idx: 0,
            end_line,
            end_col,
            dt,
        })
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.idx) {
            Some(l) => (l.line, l.col),
            None => (self.end_line, self.end_col),
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        let (line, col) = self.here();
        Error::parse(line, col, message)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|l| &l.tok)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|l| l.tok.clone());
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), Error> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{c}'")))
        }
    }

    fn at_end(&self) -> bool {
        self.idx >= self.toks.len()
    }

    fn expect_end(&self) -> Result<(), Error> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }

    fn number(&mut self) -> Result<f64, Error> {
        let neg = self.eat_sym('-');
        match self.next() {
            Some(Tok::Num(v)) => Ok(if neg { -v } else { v }),
            _ => {
                self.idx = self.idx.saturating_sub(1);
                Err(self.err("expected a number"))
            }
        }
    }

    // ---- predicate expressions ----

    fn p_expr(&mut self) -> Result<PredicateExpr, Error> {
        let mut lhs = self.p_term()?;
        loop {
            if self.eat_sym('+') {
                lhs = PredicateExpr::Add(Box::new(lhs), Box::new(self.p_term()?));
            } else if self.eat_sym('-') {
                lhs = PredicateExpr::Sub(Box::new(lhs), Box::new(self.p_term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn p_term(&mut self) -> Result<PredicateExpr, Error> {
        let mut lhs = self.p_factor()?;
        loop {
            if self.eat_sym('*') {
                lhs = PredicateExpr::Mul(Box::new(lhs), Box::new(self.p_factor()?));
            } else if self.eat_sym('/') {
                lhs = PredicateExpr::Div(Box::new(lhs), Box::new(self.p_factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn p_factor(&mut self) -> Result<PredicateExpr, Error> {
        if self.eat_sym('-') {
            // a sign on a bare numeric literal folds into the constant;
            // "-(c)" stays an explicit negation
            if let Some(Tok::Num(v)) = self.peek() {
                let v = *v;
                self.idx += 1;
                return Ok(PredicateExpr::Const(-v));
            }
            return Ok(PredicateExpr::Neg(Box::new(self.p_factor()?)));
        }
        if self.eat_sym('(') {
            let e = self.p_expr()?;
            self.expect_sym(')')?;
            return Ok(e);
        }
        match self.next() {
            Some(Tok::Num(v)) => Ok(PredicateExpr::Const(v)),
            Some(Tok::Ident(name)) => match name.as_str() {
                "x" => {
                    self.expect_sym('[')?;
                    let idx = self.number()?;
                    if idx.fract() != 0.0 || idx < 1.0 {
                        return Err(self.err(format!(
                            "component index must be a positive integer, got {idx}"
                        )));
                    }
                    self.expect_sym(']')?;
                    Ok(PredicateExpr::Component(idx as usize - 1))
                }
                "abs" => {
                    self.expect_sym('(')?;
                    let e = self.p_expr()?;
                    self.expect_sym(')')?;
                    Ok(PredicateExpr::Abs(Box::new(e)))
                }
                "norm2" => {
                    self.expect_sym('(')?;
                    let mut args = vec![self.p_expr()?];
                    while self.eat_sym(',') {
                        args.push(self.p_expr()?);
                    }
                    self.expect_sym(')')?;
                    Ok(PredicateExpr::Norm2(args))
                }
                "min" | "max" => {
                    self.expect_sym('(')?;
                    let a = self.p_expr()?;
                    self.expect_sym(',')?;
                    let b = self.p_expr()?;
                    self.expect_sym(')')?;
                    Ok(if name == "min" {
                        PredicateExpr::Min(Box::new(a), Box::new(b))
                    } else {
                        PredicateExpr::Max(Box::new(a), Box::new(b))
                    })
                }
                _ => {
                    self.idx -= 1;
                    Err(self.err(format!("unknown identifier '{name}'")))
                }
            },
            _ => {
                self.idx = self.idx.saturating_sub(1);
                Err(self.err("expected an expression"))
            }
        }
    }

    // ---- formulas ----

    fn interval(&mut self) -> Result<Interval, Error> {
        let (line, col) = self.here();
        self.expect_sym('[')?;
        let lo = self.number()?;
        self.expect_sym(',')?;
        let hi = self.number()?;
        self.expect_sym(']')?;
        Interval::from_units(lo, hi, self.dt).map_err(|e| match e {
            Error::Validation(m) => Error::parse(line, col, m),
            other => other,
        })
    }

    fn f_or(&mut self) -> Result<StlFormula, Error> {
        let mut lhs = self.f_and()?;
        while self.eat_sym('|') {
            lhs = StlFormula::Or(Box::new(lhs), Box::new(self.f_and()?));
        }
        Ok(lhs)
    }

    fn f_and(&mut self) -> Result<StlFormula, Error> {
        let mut lhs = self.f_until()?;
        while self.eat_sym('&') {
            lhs = StlFormula::And(Box::new(lhs), Box::new(self.f_until()?));
        }
        Ok(lhs)
    }

    fn f_until(&mut self) -> Result<StlFormula, Error> {
        let lhs = self.f_unary()?;
        let future = match self.peek() {
            Some(Tok::Ident(s)) if s == "U" => true,
            Some(Tok::Ident(s)) if s == "S" => false,
            _ => return Ok(lhs),
        };
        self.idx += 1;
        let i = self.interval()?;
        let rhs = self.f_unary()?;
        // non-associative: a second U/S here would be ambiguous
        if let Some(Tok::Ident(s)) = self.peek() {
            if s == "U" || s == "S" {
                return Err(self.err("until chains need parentheses"));
            }
        }
        Ok(if future {
            StlFormula::UntilF(i, Box::new(lhs), Box::new(rhs))
        } else {
            StlFormula::UntilP(i, Box::new(lhs), Box::new(rhs))
        })
    }

    fn f_unary(&mut self) -> Result<StlFormula, Error> {
        if self.eat_sym('!') {
            return Ok(StlFormula::Not(Box::new(self.f_unary()?)));
        }
        if self.eat_sym('(') {
            let f = self.f_or()?;
            self.expect_sym(')')?;
            return Ok(f);
        }
        match self.next() {
            Some(Tok::Ident(name)) => match name.as_str() {
                "TRUE" => Ok(StlFormula::True),
                "pred" => {
                    self.expect_sym('{')?;
                    let lhs = self.p_expr()?;
                    let expr = match self.peek() {
                        Some(Tok::Ge) => {
                            self.idx += 1;
                            let rhs = self.p_expr()?;
                            PredicateExpr::Sub(Box::new(lhs), Box::new(rhs))
                        }
                        Some(Tok::Le) => {
                            self.idx += 1;
                            let rhs = self.p_expr()?;
                            PredicateExpr::Sub(Box::new(rhs), Box::new(lhs))
                        }
                        _ => lhs,
                    };
                    self.expect_sym('}')?;
                    Ok(StlFormula::Pred(expr))
                }
                "F" => {
                    let i = self.interval()?;
                    Ok(StlFormula::EvF(i, Box::new(self.f_unary()?)))
                }
                "G" => {
                    let i = self.interval()?;
                    Ok(StlFormula::AlwF(i, Box::new(self.f_unary()?)))
                }
                "P" => {
                    let i = self.interval()?;
                    Ok(StlFormula::EvP(i, Box::new(self.f_unary()?)))
                }
                "H" => {
                    let i = self.interval()?;
                    Ok(StlFormula::AlwP(i, Box::new(self.f_unary()?)))
                }
                _ => {
                    self.idx -= 1;
                    Err(self.err(format!("unknown identifier '{name}'")))
                }
            },
            _ => {
                self.idx = self.idx.saturating_sub(1);
                Err(self.err("expected a formula"))
            }
        }
    }
}

/// Parses a predicate expression.
pub fn parse_predicate(text: &str) -> Result<PredicateExpr, Error> {
    let mut p = Parser::new(text, 1.0)?;
    let e = p.p_expr()?;
    p.expect_end()?;
    Ok(e)
}

/// Parses an STL formula, converting interval bounds from time units to
/// steps with `dt` seconds per step.
pub fn parse_formula(text: &str, dt: f64) -> Result<StlFormula, Error> {
    if !(dt > 0.0) {
        return Err(Error::Validation(format!("dt must be positive, got {dt}")));
    }
    let mut p = Parser::new(text, dt)?;
    let f = p.f_or()?;
    p.expect_end()?;
    Ok(f)
}

/// Parses a constraint spec file: `on [Ta,Tb]: expr` lines (step bounds) and
/// an optional `default: value` line.
pub fn parse_constraint(text: &str) -> Result<ConstraintSpec, Error> {
    let mut pieces = Vec::new();
    let mut default = 1.0;
    let mut saw_default = false;
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let trimmed = line.trim_start();
        let indent = line.len() - trimmed.len();
        let col_of = |offset_in_trimmed: usize| indent + offset_in_trimmed + 1;
        if let Some(rest) = trimmed.strip_prefix("on") {
            let colon = rest
                .find(':')
                .ok_or_else(|| Error::parse(line_no, col_of(2), "expected ':' after interval"))?;
            let (head, body) = rest.split_at(colon);
            let head = head.trim();
            let inner = head
                .strip_prefix('[')
                .and_then(|h| h.strip_suffix(']'))
                .ok_or_else(|| Error::parse(line_no, col_of(3), "expected '[Ta,Tb]'"))?;
            let mut parts = inner.splitn(2, ',');
            let lo: i64 = parts
                .next()
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|_| Error::parse(line_no, col_of(4), "bad interval start"))?;
            let hi: i64 = parts
                .next()
                .ok_or_else(|| Error::parse(line_no, col_of(4), "expected ',' in interval"))?
                .trim()
                .parse()
                .map_err(|_| Error::parse(line_no, col_of(4), "bad interval end"))?;
            if lo > hi {
                return Err(Error::parse(
                    line_no,
                    col_of(3),
                    format!("reversed interval [{lo},{hi}]"),
                ));
            }
            let expr = parse_predicate(&body[1..]).map_err(|e| match e {
                Error::Parse { column, message, .. } => {
                    Error::parse(line_no, col_of(colon + 1 + column), message)
                }
                other => other,
            })?;
            pieces.push(ConstraintPiece { lo, hi, expr });
        } else if let Some(rest) = trimmed.strip_prefix("default") {
            let rest = rest.trim_start();
            let rest = rest
                .strip_prefix(':')
                .ok_or_else(|| Error::parse(line_no, col_of(7), "expected ':' after 'default'"))?;
            default = rest
                .trim()
                .parse()
                .map_err(|_| Error::parse(line_no, col_of(8), "bad default value"))?;
            saw_default = true;
        } else {
            return Err(Error::parse(
                line_no,
                col_of(0),
                "expected 'on [Ta,Tb]: expr' or 'default: value'",
            ));
        }
    }
    let _ = saw_default;
    ConstraintSpec::new(pieces, default)
}

/// Canonical text for a constraint spec; parses back to an equal value.
pub fn print_constraint(c: &ConstraintSpec) -> String {
    let mut out = String::new();
    for p in c.pieces() {
        out.push_str(&format!("on [{},{}]: {}\n", p.lo, p.hi, p.expr));
    }
    out.push_str(&format!("default: {}\n", c.default_value()));
    out
}
