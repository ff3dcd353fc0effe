//! Printing in the input grammar, with minimal parentheses.

use std::fmt::{self, Write};

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::{Expr, Node};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Sum,
    Product,
    Unary,
    Power,
    Atom,
}

fn prec(e: &Expr) -> Prec {
    match e.node() {
        Node::Num(q) if q.is_negative() => Prec::Unary,
        Node::Num(q) if !q.is_integer() => Prec::Product,
        Node::Num(_) | Node::Sym(_) | Node::Func(..) | Node::Apply(_) => Prec::Atom,
        Node::Pow(..) => Prec::Power,
        Node::Mul(xs) => match xs.first().map(|x| x.node()) {
            Some(Node::Num(q)) if q.is_negative() => Prec::Unary,
            _ => Prec::Product,
        },
        Node::Div(n, _) if is_negated(n) => Prec::Unary,
        Node::Div(..) => Prec::Product,
        Node::Add(_) => Prec::Sum,
    }
}

fn is_negated(e: &Expr) -> bool {
    match e.node() {
        Node::Num(q) => q.is_negative(),
        Node::Mul(xs) => {
            matches!(xs.first().map(|x| x.node()), Some(Node::Num(q)) if q.is_negative())
        }
        Node::Div(n, _) => is_negated(n),
        _ => false,
    }
}

/// The expression with a leading negative sign removed, when it has one.
fn strip_sign(e: &Expr) -> Option<Expr> {
    match e.node() {
        Node::Num(q) if q.is_negative() => Some(Expr::from_node(Node::Num(-q))),
        Node::Mul(xs) => match xs.first().map(|x| x.node()) {
            Some(Node::Num(q)) if q.is_negative() => {
                let abs: BigRational = -q;
                let mut rest: Vec<Expr> = Vec::with_capacity(xs.len());
                if !abs.is_one() {
                    rest.push(Expr::from_node(Node::Num(abs)));
                }
                rest.extend(xs[1..].iter().cloned());
                Some(match rest.len() {
                    0 => Expr::from_node(Node::Num(BigRational::one())),
                    1 => rest.pop().expect("one factor"),
                    _ => Expr::from_node(Node::Mul(rest)),
                })
            }
            _ => None,
        },
        Node::Div(n, d) => strip_sign(n).map(|n| Expr::from_node(Node::Div(n, d.clone()))),
        _ => None,
    }
}

fn write_wrapped(out: &mut String, e: &Expr, min: Prec) {
    if prec(e) < min {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match e.node() {
        Node::Num(q) => {
            let _ = write!(out, "{q}");
        }
        Node::Sym(s) => out.push_str(s.name()),
        Node::Apply(a) => {
            out.push_str(&a.name);
            for _ in 0..a.order {
                out.push('\'');
            }
            out.push_str("(t)");
        }
        Node::Func(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write_expr(out, a);
            out.push(')');
        }
        Node::Pow(b, x) => {
            write_wrapped(out, b, Prec::Atom);
            out.push('^');
            write_wrapped(out, x, Prec::Atom);
        }
        Node::Mul(xs) => {
            if let Some(abs) = strip_sign(e) {
                out.push('-');
                write_wrapped(out, &abs, Prec::Product);
                return;
            }
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push('*');
                }
                write_wrapped(out, x, Prec::Unary);
            }
        }
        Node::Div(n, d) => {
            if let Some(abs) = strip_sign(e) {
                out.push('-');
                write_wrapped(out, &abs, Prec::Product);
                return;
            }
            write_wrapped(out, n, Prec::Product);
            out.push('/');
            write_wrapped(out, d, Prec::Power);
        }
        Node::Add(xs) => {
            for (i, x) in xs.iter().enumerate() {
                if i == 0 {
                    write_wrapped(out, x, Prec::Sum);
                    continue;
                }
                match strip_sign(x) {
                    Some(abs) => {
                        out.push_str(" - ");
                        write_wrapped(out, &abs, Prec::Product);
                    }
                    None => {
                        out.push_str(" + ");
                        write_wrapped(out, x, Prec::Product);
                    }
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self);
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Symbol;

    #[test]
    fn prints_canonical_quotients_and_signs() {
        let v = Expr::jet(0);
        let v1 = Expr::jet(1);
        let t = Expr::t();
        assert_eq!((v1.powi(2) / &v).to_string(), "v1^2/v");
        assert_eq!((&t / v.powi(2)).to_string(), "t/v^2");
        let e = -(&t / (v.powi(2) * 2));
        assert_eq!(e.to_string(), "-t/(2*v^2)");
        let s = Expr::symbol(Symbol::parameter("p"));
        assert_eq!((&v - &s).to_string(), "v - p");
    }
}
