//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! sum     := product (("+" | "-") product)*
//! product := unary (("*" | "/") unary)*
//! unary   := ("-" | "+") unary | power
//! power   := primary ("^" unary)?
//! primary := number | "(" sum ")" | func "(" sum ")" | name "'"* "(" "t" ")" | name
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use thiserror::Error;

use super::{Expr, Func, Symbol};
use crate::jet::JetContext;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("undeclared symbol `{name}` at column {column}")]
    Undeclared { name: String, column: usize },
    #[error("division by zero at column {column}")]
    DivisionByZero { column: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Prime,
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, col) = lx.next()?;
            let end = tok == Tok::End;
            out.push((tok, col));
            if end {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let col = start + 1;
        let Some(&b) = bytes.get(self.pos) else {
            return Ok((Tok::End, col));
        };
        let c = b as char;
        if c.is_ascii_digit() || c == '.' {
            while self.pos < bytes.len() && (bytes[self.pos] as char).is_ascii_digit() {
                self.pos += 1;
            }
            let int_part = &self.src[start..self.pos];
            let mut frac_part = "";
            if self.pos < bytes.len() && bytes[self.pos] == b'.' {
                self.pos += 1;
                let fs = self.pos;
                while self.pos < bytes.len() && (bytes[self.pos] as char).is_ascii_digit() {
                    self.pos += 1;
                }
                frac_part = &self.src[fs..self.pos];
            }
            if int_part.is_empty() && frac_part.is_empty() {
                return Err(ParseError::Syntax {
                    column: col,
                    message: "malformed number".into(),
                });
            }
            let digits = format!("{int_part}{frac_part}");
            let numer: BigInt = digits.parse().expect("ascii digits");
            let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
            return Ok((Tok::Num(BigRational::new(numer, denom)), col));
        }
        if c.is_ascii_alphabetic() {
            while self.pos < bytes.len() && (bytes[self.pos] as char).is_ascii_alphanumeric() {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), col));
        }
        self.pos += c.len_utf8();
        let tok = match c {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '\'' => Tok::Prime,
            _ => {
                return Err(ParseError::Syntax {
                    column: col,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        Ok((tok, col))
    }
}

struct Parser<'c> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    ctx: &'c JetContext,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn col(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            Tok::Num(q) => format!("number `{q}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Prime => "`'`".to_string(),
            Tok::Op(c) => format!("`{c}`"),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
        };
        ParseError::Syntax {
            column: self.col(),
            message: format!("expected {what}, found {found}"),
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.product()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    acc = acc + self.product()?;
                }
                Tok::Op('-') => {
                    self.bump();
                    acc = acc - self.product()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    acc = acc * self.unary()?;
                }
                Tok::Op('/') => {
                    let col = self.col();
                    self.bump();
                    let d = self.unary()?;
                    if d.is_zero() {
                        return Err(ParseError::DivisionByZero { column: col });
                    }
                    acc = acc / d;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(-self.unary()?)
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Op('^') {
            let col = self.col();
            self.bump();
            let exponent = self.unary()?;
            if base.is_zero() {
                let positive = exponent.as_rational().is_some_and(|q| q.is_positive());
                if !positive {
                    return Err(ParseError::DivisionByZero { column: col });
                }
            }
            return Ok(base.pow(&exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let col = self.col();
        match self.bump() {
            Tok::Num(q) => Ok(Expr::rational(q)),
            Tok::LParen => {
                let e = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(name, col),
            _ => {
                self.at -= 1;
                Err(self.unexpected("an operand"))
            }
        }
    }

    fn identifier(&mut self, name: String, col: usize) -> Result<Expr, ParseError> {
        if let Some(f) = Func::from_name(&name) {
            if *self.peek() == Tok::LParen {
                self.bump();
                let arg = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                return Ok(Expr::func(f, arg));
            }
        }
        if self.ctx.has_function(&name) {
            let mut order = 0;
            while *self.peek() == Tok::Prime {
                self.bump();
                order += 1;
            }
            self.expect(Tok::LParen, "`(` after function name")?;
            match self.bump() {
                Tok::Ident(a) if a == "t" => {}
                _ => {
                    self.at -= 1;
                    return Err(self.unexpected("`t` as the function argument"));
                }
            }
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Expr::apply(&name, order));
        }
        match self.ctx.resolve(&name) {
            Some(sym) => Ok(Expr::symbol(sym)),
            None => Err(ParseError::Undeclared { name, column: col }),
        }
    }
}

/// Parses `text` against the symbols declared in `ctx`, returning the
/// canonical expression.
pub fn parse(text: &str, ctx: &JetContext) -> Result<Expr, ParseError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser { toks, at: 0, ctx };
    let e = p.sum()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}

/// Name-to-symbol resolution for the fixed coordinate families.
pub(crate) fn coordinate_symbol(name: &str, nonlocal: bool) -> Option<Symbol> {
    if name == "t" {
        return Some(Symbol::t());
    }
    let family = |prefix: char| -> Option<u32> {
        let rest = name.strip_prefix(prefix)?;
        if rest.is_empty() {
            return Some(0);
        }
        if rest.starts_with('0') || !rest.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        rest.parse().ok()
    };
    if let Some(n) = family('v') {
        return Some(Symbol::jet(n));
    }
    if nonlocal {
        if let Some(n) = family('w') {
            return Some(Symbol::nonlocal(n));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Node;

    fn ctx() -> JetContext {
        JetContext::new(2)
            .with_nonlocal()
            .with_parameter("p")
            .with_function("g")
    }

    #[test]
    fn quotient_of_power_by_jet() {
        let e = parse("v1^2/v", &ctx()).unwrap();
        match e.node() {
            Node::Div(n, d) => {
                assert_eq!(n, &Expr::jet(1).powi(2));
                assert_eq!(d, &Expr::jet(0));
            }
            other => panic!("expected quotient, got {other:?}"),
        }
        let e = parse("t/v^2", &ctx()).unwrap();
        assert!(matches!(e.node(), Node::Div(..)));
        assert_eq!(e, Expr::t() / Expr::jet(0).powi(2));
    }

    #[test]
    fn uninterpreted_derivative_times_symbolic_power() {
        let e = parse("g'(t)*v^(p+1)", &ctx()).unwrap();
        let p = Expr::parameter("p");
        let expected = Expr::apply("g", 1) * Expr::jet(0).pow(&(p + 1));
        assert_eq!(e, expected);
        assert_eq!(e.to_string(), "v*v^p*g'(t)");
    }

    #[test]
    fn decimals_become_exact_rationals() {
        assert_eq!(
            parse("0.25*t", &ctx()).unwrap(),
            Expr::frac(1, 4) * Expr::t()
        );
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse("v + q", &ctx()),
            Err(ParseError::Undeclared {
                name: "q".into(),
                column: 5
            })
        );
        assert!(matches!(
            parse("v + * t", &ctx()),
            Err(ParseError::Syntax { column: 5, .. })
        ));
        assert!(matches!(
            parse("1/(v - v)", &ctx()),
            Err(ParseError::DivisionByZero { .. })
        ));
        assert!(matches!(
            parse("g(v)", &ctx()),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse("(v", &ctx()),
            Err(ParseError::Syntax { .. })
        ));
    }

    #[test]
    fn nonlocal_coordinates_need_a_covering_context() {
        assert!(parse("w1", &JetContext::new(2)).is_err());
        assert_eq!(parse("w1", &ctx()).unwrap(), Expr::nonlocal(1));
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(parse("-v^2", &ctx()).unwrap(), -Expr::jet(0).powi(2));
        assert_eq!(parse("v^-1", &ctx()).unwrap(), Expr::one() / Expr::jet(0));
    }
}
