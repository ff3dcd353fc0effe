//! Immutable symbolic expressions over jet coordinates.
//!
//! An [`Expr`] is a shared tree of [`Node`]s. Trees built through the
//! arithmetic operators, [`Expr::simplify`], the parser, or any calculus
//! routine are *canonical*: they are rendered from an exact rational normal
//! form in which transcendental and uninterpreted applications are atoms.
//! Two canonical trees are equal iff their normal forms are equal, so
//! structural equality is a sound zero test for the rational part.
//!
//! Raw (non-canonical) trees can be assembled with [`Expr::from_node`]; they
//! are only normalised when [`Expr::simplify`] is called.

mod calculus;
mod display;
mod equality;
pub(crate) mod mpoly;
pub(crate) mod parse;
pub(crate) mod poly;
pub(crate) mod rational;

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

pub use calculus::Bindings;
pub use equality::{equals, equals_with, EqualityError, EqualityOptions, Equivalence};
pub use parse::{parse, ParseError};

use rational::RatFun;

/// What a symbol stands for.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    /// The independent variable `t`.
    Independent,
    /// `v_n`, the n-th derivative of the dependent variable.
    Jet(u32),
    /// `w_n`, the n-th derivative of the nonlocal (covering) variable.
    Nonlocal(u32),
    /// A free parameter such as `p`, or an auxiliary coordinate such as `x`.
    Parameter,
    /// An integration constant such as `c1`.
    Constant,
}

impl SymbolKind {
    fn rank(&self) -> u8 {
        match self {
            SymbolKind::Independent => 0,
            SymbolKind::Jet(_) => 1,
            SymbolKind::Nonlocal(_) => 2,
            SymbolKind::Parameter => 3,
            SymbolKind::Constant => 4,
        }
    }

    fn order(&self) -> u32 {
        match self {
            SymbolKind::Jet(n) | SymbolKind::Nonlocal(n) => *n,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Symbol {
    name: Arc<str>,
    kind: SymbolKind,
}

impl Symbol {
    pub fn new(name: &str, kind: SymbolKind) -> Self {
        Symbol {
            name: Arc::from(name),
            kind,
        }
    }

    pub fn t() -> Self {
        Symbol::new("t", SymbolKind::Independent)
    }

    /// `v` for order 0, `v1`, `v2`, ... otherwise.
    pub fn jet(order: u32) -> Self {
        let name = if order == 0 {
            "v".to_string()
        } else {
            format!("v{order}")
        };
        Symbol::new(&name, SymbolKind::Jet(order))
    }

    /// `w` for order 0, `w1`, `w2`, ... otherwise.
    pub fn nonlocal(order: u32) -> Self {
        let name = if order == 0 {
            "w".to_string()
        } else {
            format!("w{order}")
        };
        Symbol::new(&name, SymbolKind::Nonlocal(order))
    }

    pub fn parameter(name: &str) -> Self {
        Symbol::new(name, SymbolKind::Parameter)
    }

    pub fn constant(name: &str) -> Self {
        Symbol::new(name, SymbolKind::Constant)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &SymbolKind {
        &self.kind
    }

    pub fn is_independent(&self) -> bool {
        self.kind == SymbolKind::Independent
    }

    pub fn jet_order(&self) -> Option<u32> {
        match self.kind {
            SymbolKind::Jet(n) => Some(n),
            _ => None,
        }
    }

    pub fn nonlocal_order(&self) -> Option<u32> {
        match self.kind {
            SymbolKind::Nonlocal(n) => Some(n),
            _ => None,
        }
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.kind
            .rank()
            .cmp(&other.kind.rank())
            .then_with(|| self.name.cmp(&other.name))
            .then_with(|| self.kind.order().cmp(&other.kind.order()))
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Elementary functions understood by the simplifier and the evaluator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Tan,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            _ => return None,
        })
    }
}

/// An uninterpreted function of `t` differentiated `order` times: `g(t)`,
/// `g'(t)`, `g''(t)`, ...
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FnApp {
    pub name: Arc<str>,
    pub order: u32,
}

impl FnApp {
    pub fn new(name: &str, order: u32) -> Self {
        FnApp {
            name: Arc::from(name),
            order,
        }
    }

    pub fn derivative(&self) -> Self {
        FnApp {
            name: self.name.clone(),
            order: self.order + 1,
        }
    }
}

/// One node of an expression tree. Variant order is the canonical node
/// order: constants, symbols, powers, products, sums, then kernels.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Num(BigRational),
    Sym(Symbol),
    Pow(Expr, Expr),
    Mul(Vec<Expr>),
    Add(Vec<Expr>),
    Div(Expr, Expr),
    Func(Func, Expr),
    Apply(FnApp),
}

struct Inner {
    node: Node,
    canon: OnceLock<Arc<RatFun>>,
}

/// Shared, immutable expression handle.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

impl Expr {
    /// Wraps a raw node without normalising it.
    pub fn from_node(node: Node) -> Self {
        Expr(Arc::new(Inner {
            node,
            canon: OnceLock::new(),
        }))
    }

    pub(crate) fn with_canon(node: Node, canon: Arc<RatFun>) -> Self {
        let cell = OnceLock::new();
        let _ = cell.set(canon);
        Expr(Arc::new(Inner { node, canon: cell }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn zero() -> Self {
        Expr::integer(0)
    }

    pub fn one() -> Self {
        Expr::integer(1)
    }

    pub fn integer(n: i64) -> Self {
        Expr::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Expr::rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn rational(q: BigRational) -> Self {
        RatFun::constant(q).into_expr()
    }

    pub fn symbol(s: Symbol) -> Self {
        RatFun::symbol(s).into_expr()
    }

    pub fn t() -> Self {
        Expr::symbol(Symbol::t())
    }

    pub fn jet(order: u32) -> Self {
        Expr::symbol(Symbol::jet(order))
    }

    pub fn nonlocal(order: u32) -> Self {
        Expr::symbol(Symbol::nonlocal(order))
    }

    pub fn parameter(name: &str) -> Self {
        Expr::symbol(Symbol::parameter(name))
    }

    pub fn apply(name: &str, order: u32) -> Self {
        RatFun::apply(FnApp::new(name, order)).into_expr()
    }

    pub fn func(f: Func, arg: Expr) -> Self {
        RatFun::func(f, &arg).into_expr()
    }

    pub fn exp(&self) -> Self {
        Expr::func(Func::Exp, self.clone())
    }

    pub fn ln(&self) -> Self {
        Expr::func(Func::Ln, self.clone())
    }

    pub fn sin(&self) -> Self {
        Expr::func(Func::Sin, self.clone())
    }

    pub fn cos(&self) -> Self {
        Expr::func(Func::Cos, self.clone())
    }

    pub fn tan(&self) -> Self {
        Expr::func(Func::Tan, self.clone())
    }

    pub fn powi(&self, n: i64) -> Self {
        self.canon().powi(n).into_expr()
    }

    pub fn pow(&self, exponent: &Expr) -> Self {
        RatFun::power(self, exponent).into_expr()
    }

    /// Canonical form. Idempotent.
    pub fn simplify(&self) -> Self {
        self.canon().as_ref().clone().into_expr()
    }

    pub(crate) fn canon(&self) -> Arc<RatFun> {
        self.0
            .canon
            .get_or_init(|| Arc::new(rational::canonicalize(&self.0.node)))
            .clone()
    }

    pub fn is_zero(&self) -> bool {
        self.canon().is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.canon().is_one()
    }

    /// The value when the expression is a rational constant.
    pub fn as_rational(&self) -> Option<BigRational> {
        self.canon().as_constant()
    }

    pub fn as_integer(&self) -> Option<i64> {
        self.as_rational()
            .filter(|q| q.is_integer())
            .and_then(|q| q.to_integer().to_i64())
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self.node() {
            Node::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_negative_constant(&self) -> bool {
        matches!(self.node(), Node::Num(q) if q.is_negative())
    }

    /// Symbols occurring anywhere in the tree, kernel arguments included.
    pub fn free_symbols(&self) -> std::collections::BTreeSet<Symbol> {
        let mut out = std::collections::BTreeSet::new();
        self.walk(&mut |n| {
            if let Node::Sym(s) = n {
                out.insert(s.clone());
            }
        });
        out
    }

    /// Uninterpreted applications occurring anywhere in the tree.
    pub fn applications(&self) -> std::collections::BTreeSet<FnApp> {
        let mut out = std::collections::BTreeSet::new();
        self.walk(&mut |n| {
            if let Node::Apply(a) = n {
                out.insert(a.clone());
            }
        });
        out
    }

    /// Whether `s` occurs, counting `g(t)` as depending on `t`.
    pub fn depends_on(&self, s: &Symbol) -> bool {
        let mut found = false;
        self.walk(&mut |n| match n {
            Node::Sym(x) if x == s => found = true,
            Node::Apply(_) if s.is_independent() => found = true,
            _ => {}
        });
        found
    }

    /// Highest `v_n` order present, if any jet occurs.
    pub fn max_jet_order(&self) -> Option<u32> {
        self.free_symbols()
            .iter()
            .filter_map(Symbol::jet_order)
            .max()
    }

    pub fn max_nonlocal_order(&self) -> Option<u32> {
        self.free_symbols()
            .iter()
            .filter_map(Symbol::nonlocal_order)
            .max()
    }

    fn walk(&self, visit: &mut impl FnMut(&Node)) {
        visit(self.node());
        match self.node() {
            Node::Num(_) | Node::Sym(_) | Node::Apply(_) => {}
            Node::Pow(a, b) | Node::Div(a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
            Node::Mul(xs) | Node::Add(xs) => xs.iter().for_each(|x| x.walk(visit)),
            Node::Func(_, a) => a.walk(visit),
        }
    }

    /// Canonical numerator, with every negative power moved down.
    pub fn numerator(&self) -> Expr {
        self.canon().split_fraction().0.into_expr()
    }

    /// Canonical denominator (1 when the expression is a polynomial).
    pub fn denominator(&self) -> Expr {
        self.canon().split_fraction().1.into_expr()
    }

    /// Top-level summands of the canonical form; a quotient contributes the
    /// summands of its numerator, each divided by the denominator.
    pub fn summands(&self) -> Vec<Expr> {
        match self.node() {
            Node::Add(xs) => xs.clone(),
            Node::Div(n, d) => match n.node() {
                Node::Add(xs) => xs
                    .iter()
                    .map(|x| Expr::from_node(Node::Div(x.clone(), d.clone())))
                    .collect(),
                _ => vec![self.clone()],
            },
            _ => vec![self.clone()],
        }
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.node == other.0.node
    }
}

impl Eq for Expr {}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.0.node.cmp(&other.0.node)
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.node.hash(state)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::integer(n)
    }
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Self {
        Expr::symbol(s)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(&RatFun, &RatFun) -> RatFun = $body;
                f(&self.canon(), &rhs.canon()).into_expr()
            }
        }
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                (&self).$method(rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                self.$method(&rhs)
            }
        }
        impl $tr<i64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: i64) -> Expr {
                self.$method(&Expr::integer(rhs))
            }
        }
        impl $tr<i64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: i64) -> Expr {
                (&self).$method(&Expr::integer(rhs))
            }
        }
    };
}

binop!(Add, add, |a, b| a.add(b));
binop!(Sub, sub, |a, b| a.sub(b));
binop!(Mul, mul, |a, b| a.mul(b));
binop!(Div, div, |a, b| a.div(b));

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.canon().neg().into_expr()
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        let mut acc = RatFun::zero();
        for e in iter {
            acc = acc.add(&e.canon());
        }
        acc.into_expr()
    }
}

impl std::iter::Product for Expr {
    fn product<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        let mut acc = RatFun::one();
        for e in iter {
            acc = acc.mul(&e.canon());
        }
        acc.into_expr()
    }
}
