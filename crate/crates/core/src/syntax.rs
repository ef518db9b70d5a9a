//! Tokenizer and expression parser shared by polynomial, formula and
//! rational-expression input.

use num_bigint::BigInt;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at position {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(pos: usize, message: impl Into<String>) -> Self {
        ParseError { pos, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    EqEq,
    NotEq,
    Le,
    Lt,
    Ge,
    Gt,
    AndAnd,
    OrOr,
    Bang,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Int(i) => return write!(f, "{i}"),
            Tok::Ident(s) => return write!(f, "{s}"),
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Caret => "^",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::EqEq => "==",
            Tok::NotEq => "!=",
            Tok::Le => "<=",
            Tok::Lt => "<",
            Tok::Ge => ">=",
            Tok::Gt => ">",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Bang => "!",
        };
        f.write_str(s)
    }
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let v: BigInt = src[start..i].parse().expect("digits");
            out.push((Tok::Int(v), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
            continue;
        }
        let next = bytes.get(i + 1).map(|&b| b as char);
        let (tok, len) = match (c, next) {
            ('=', Some('=')) => (Tok::EqEq, 2),
            ('!', Some('=')) => (Tok::NotEq, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('&', Some('&')) => (Tok::AndAnd, 2),
            ('|', Some('|')) => (Tok::OrOr, 2),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('!', _) => (Tok::Bang, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) | ('\u{2212}', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            ('^', _) => (Tok::Caret, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            _ => {
                // a lone non-ASCII minus sign is common in pasted formulas
                if src[i..].starts_with('\u{2212}') {
                    out.push((Tok::Minus, start));
                    i += '\u{2212}'.len_utf8();
                    continue;
                }
                return Err(ParseError::new(start, format!("unexpected character '{c}'")));
            }
        };
        out.push((tok, start));
        i += len;
    }
    Ok(out)
}

/// Untyped expression tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Expr {
    Int(BigInt),
    Var(String, usize),
    Infinity(usize),
    Call(String, Box<Expr>, usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>, usize),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub(crate) fn contains_call(&self, name: &str) -> bool {
        match self {
            Expr::Call(n, inner, _) => n == name || inner.contains_call(name),
            Expr::Neg(a) | Expr::Pow(a, _) => a.contains_call(name),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b, _) => {
                a.contains_call(name) || b.contains_call(name)
            }
            _ => false,
        }
    }

    pub(crate) fn contains_infinity(&self) -> bool {
        match self {
            Expr::Infinity(_) => true,
            Expr::Neg(a) | Expr::Pow(a, _) => a.contains_infinity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b, _) => {
                a.contains_infinity() || b.contains_infinity()
            }
            _ => false,
        }
    }
}

pub(crate) const FUNCTIONS: [&str; 3] = ["ord", "ac", "res"];

pub(crate) struct Parser {
    toks: Vec<(Tok, usize)>,
    pub(crate) pos: usize,
    end: usize,
}

impl Parser {
    pub(crate) fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: tokenize(src)?, pos: 0, end: src.len() })
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    pub(crate) fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    pub(crate) fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected '{tok}'")))
        }
    }

    pub(crate) fn unexpected(&self, what: &str) -> ParseError {
        match self.peek() {
            Some(t) => ParseError::new(self.offset(), format!("{what}, found '{t}'")),
            None => ParseError::new(self.offset(), format!("{what}, found end of input")),
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub(crate) fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.unexpected("expected end of input"))
        }
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(&Tok::Minus) {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(&Tok::Star) {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.peek() == Some(&Tok::LParen) {
                // juxtaposition as in `2(1 - x)`
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
            } else if self.peek() == Some(&Tok::Slash) {
                let at = self.offset();
                self.bump();
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?), at);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Minus) {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(&Tok::Plus) {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.eat(&Tok::Caret) {
            let at = self.offset();
            match self.bump() {
                Some(Tok::Int(e)) => {
                    let e: u32 = e.try_into().map_err(|_| ParseError::new(at, "exponent too large"))?;
                    Ok(Expr::Pow(Box::new(base), e))
                }
                _ => Err(ParseError::new(at, "expected a nonnegative integer exponent")),
            }
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Int(v)) => Ok(Expr::Int(v)),
            Some(Tok::Ident(name)) => {
                if name == "INFINITY" {
                    return Ok(Expr::Infinity(at));
                }
                if FUNCTIONS.contains(&name.as_str()) && self.peek() == Some(&Tok::LParen) {
                    self.bump();
                    let inner = self.expr()?;
                    self.expect(&Tok::RParen)?;
                    return Ok(Expr::Call(name, Box::new(inner), at));
                }
                Ok(Expr::Var(name, at))
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(inner)
            }
            Some(t) => Err(ParseError::new(at, format!("unexpected '{t}'"))),
            None => Err(ParseError::new(at, "unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizes_operators() {
        let toks: Vec<Tok> = tokenize("a>=1&&!(b!=2)||c<3").unwrap().into_iter().map(|t| t.0).collect();
        assert_eq!(toks.len(), 14);
        assert_eq!(toks[1], Tok::Ge);
        assert_eq!(toks[3], Tok::AndAnd);
    }

    #[test]
    fn rejects_stray_characters() {
        let err = tokenize("x + $").unwrap_err();
        assert_eq!(err.pos, 4);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let mut p = Parser::new("-x^2").unwrap();
        let e = p.expr().unwrap();
        assert!(matches!(e, Expr::Neg(inner) if matches!(*inner, Expr::Pow(_, 2))));
    }

    #[test]
    fn juxtaposed_parenthesis_multiplies() {
        let mut p = Parser::new("2(1 - q)^2").unwrap();
        let e = p.expr().unwrap();
        assert!(matches!(e, Expr::Mul(a, b) if *a == Expr::Int(2.into()) && matches!(*b, Expr::Pow(_, 2))));
    }
}
