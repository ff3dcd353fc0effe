use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::expr::{Expr, FnApp, Func, Node, Symbol};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("no value bound for `{0}`")]
    Unbound(String),
    #[error("{func} is undefined at {arg}")]
    Domain { func: &'static str, arg: f64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite intermediate value")]
    NonFinite,
}

/// Coordinates of a sample point, plus values for uninterpreted
/// applications `g^(n)(t)` at that point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Point {
    pub values: BTreeMap<Symbol, f64>,
    pub functions: BTreeMap<FnApp, f64>,
}

impl Point {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, s: Symbol, x: f64) -> Self {
        self.values.insert(s, x);
        self
    }

    pub fn set(&mut self, s: Symbol, x: f64) {
        self.values.insert(s, x);
    }

    pub fn get(&self, s: &Symbol) -> Option<f64> {
        self.values.get(s).copied()
    }
}

/// IEEE double evaluation of `e` at `point`.
pub fn eval(e: &Expr, point: &Point) -> Result<f64, EvalError> {
    let x = eval_node(e, point)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(EvalError::NonFinite)
    }
}

fn finite(x: f64) -> Result<f64, EvalError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(EvalError::NonFinite)
    }
}

fn eval_node(e: &Expr, p: &Point) -> Result<f64, EvalError> {
    match e.node() {
        Node::Num(q) => Ok(q.to_f64().unwrap_or(f64::NAN)),
        Node::Sym(s) => p
            .get(s)
            .ok_or_else(|| EvalError::Unbound(s.name().to_string())),
        Node::Apply(a) => p
            .functions
            .get(a)
            .copied()
            .ok_or_else(|| EvalError::Unbound(format!("{}", Expr::apply(&a.name, a.order)))),
        Node::Add(xs) => xs.iter().try_fold(0.0, |acc, x| Ok(acc + eval_node(x, p)?)),
        Node::Mul(xs) => xs.iter().try_fold(1.0, |acc, x| Ok(acc * eval_node(x, p)?)),
        Node::Div(n, d) => {
            let d = eval_node(d, p)?;
            if d == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            finite(eval_node(n, p)? / d)
        }
        Node::Pow(b, x) => {
            let base = eval_node(b, p)?;
            if let Some(n) = x.as_integer() {
                if base == 0.0 && n < 0 {
                    return Err(EvalError::DivisionByZero);
                }
                return finite(base.powi(n as i32));
            }
            let ex = eval_node(x, p)?;
            if base < 0.0 && ex.fract() != 0.0 {
                return Err(EvalError::Domain {
                    func: "pow",
                    arg: base,
                });
            }
            if base == 0.0 && ex < 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            finite(base.powf(ex))
        }
        Node::Func(f, a) => {
            let x = eval_node(a, p)?;
            let y = match f {
                Func::Exp => x.exp(),
                Func::Ln => {
                    if x <= 0.0 {
                        return Err(EvalError::Domain { func: "ln", arg: x });
                    }
                    x.ln()
                }
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => {
                    if x.cos().abs() < 1e-12 {
                        return Err(EvalError::Domain {
                            func: "tan",
                            arg: x,
                        });
                    }
                    x.tan()
                }
            };
            finite(y)
        }
    }
}

/// Magnitude scale for relative residuals: the sum of the absolute values
/// of the top-level summands, or `None` when one fails to evaluate.
pub fn summand_scale(e: &Expr, point: &Point) -> Option<f64> {
    e.summands()
        .iter()
        .map(|s| eval(s, point).map(f64::abs))
        .sum::<Result<f64, _>>()
        .ok()
}
