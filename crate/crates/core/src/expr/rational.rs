//! Rational normal form: `num / den` where `num` is a Laurent polynomial in
//! atoms and `den` is either 1 or a monic polynomial with no monomial factor
//! and no common factor with `num`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::mpoly::{self, MPoly};
use super::poly::{fractional_power, mergeable_base, split_exponent, Atom, Mono, Poly};
use super::{Expr, FnApp, Func, Node, Symbol};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct RatFun {
    pub(crate) num: Poly,
    pub(crate) den: Poly,
}

impl RatFun {
    pub(crate) fn zero() -> Self {
        RatFun {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub(crate) fn one() -> Self {
        RatFun::constant(BigRational::one())
    }

    pub(crate) fn constant(q: BigRational) -> Self {
        RatFun {
            num: Poly::constant(q),
            den: Poly::one(),
        }
    }

    pub(crate) fn from_poly(p: Poly) -> Self {
        RatFun {
            num: p,
            den: Poly::one(),
        }
    }

    pub(crate) fn from_atom(a: Atom) -> Self {
        RatFun::from_poly(Poly::monomial(BigRational::one(), Mono::atom(a, 1)))
    }

    pub(crate) fn symbol(s: Symbol) -> Self {
        RatFun::from_atom(Atom::Sym(s))
    }

    pub(crate) fn apply(a: FnApp) -> Self {
        RatFun::from_atom(Atom::Apply(a))
    }

    /// `f(arg)` with the trivial values at zero and one folded.
    pub(crate) fn func(f: Func, arg: &Expr) -> Self {
        let arg_c = arg.canon();
        if let Some(q) = arg_c.as_constant() {
            match f {
                Func::Exp | Func::Cos if q.is_zero() => return RatFun::one(),
                Func::Sin | Func::Tan if q.is_zero() => return RatFun::zero(),
                Func::Ln if q.is_one() => return RatFun::zero(),
                _ => {}
            }
        }
        RatFun::from_atom(Atom::Func(f, arg_c.as_ref().clone().into_expr()))
    }

    /// `base^exponent`. Integer exponents expand; other exponents create a
    /// power atom after moving the integer part of the exponent out.
    pub(crate) fn power(base: &Expr, exponent: &Expr) -> Self {
        let b = base.canon();
        let e = exponent.canon();
        if e.is_zero() || b.is_one() {
            return RatFun::one();
        }
        if let Some(q) = e.as_constant() {
            if q.is_integer() {
                let n = i64::try_from(q.to_integer()).expect("exponent fits in i64");
                return b.powi(n);
            }
        }
        if b.is_zero() {
            if e.as_constant().is_some_and(|q| q.is_positive()) {
                return RatFun::zero();
            }
            return RatFun::from_atom(Atom::Pow(Expr::zero(), e.as_ref().clone().into_expr()));
        }
        let (int, frac) = split_exponent(&e);
        let int_part = i64::try_from(int).expect("exponent fits in i64");
        let base_expr = b.as_ref().clone().into_expr();
        let (atom, k) = fractional_power(base_expr, frac);
        b.powi(int_part)
            .mul(&RatFun::from_atom(atom).powi(k as i64))
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub(crate) fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub(crate) fn as_constant(&self) -> Option<BigRational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub(crate) fn add(&self, other: &RatFun) -> RatFun {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            let num = self.num.add(&other.num);
            if self.den.is_one() {
                return RatFun::from_poly(num);
            }
            return normalize(num, self.den.clone());
        }
        if self.den.is_one() || other.den.is_one() {
            let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
            return normalize(num, self.den.mul(&other.den));
        }
        // Only the common part of the denominators can cancel.
        match common_factor(&self.den, &other.den) {
            None => {
                let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
                finish(num, self.den.mul(&other.den))
            }
            Some((g, d1, d2)) => {
                let num = self.num.mul(&d2).add(&other.num.mul(&d1));
                let r = normalize(num, g);
                if r.is_zero() {
                    return r;
                }
                finish(r.num, r.den.mul(&d1).mul(&d2))
            }
        }
    }

    pub(crate) fn neg(&self) -> RatFun {
        RatFun {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub(crate) fn sub(&self, other: &RatFun) -> RatFun {
        self.add(&other.neg())
    }

    pub(crate) fn scale(&self, q: &BigRational) -> RatFun {
        if q.is_zero() {
            return RatFun::zero();
        }
        RatFun {
            num: self.num.scale(q),
            den: self.den.clone(),
        }
    }

    pub(crate) fn mul(&self, other: &RatFun) -> RatFun {
        if self.is_zero() || other.is_zero() {
            return RatFun::zero();
        }
        let num = self.num.mul(&other.num);
        if self.den.is_one() && other.den.is_one() {
            return RatFun::from_poly(num);
        }
        normalize(num, self.den.mul(&other.den))
    }

    pub(crate) fn inv(&self) -> RatFun {
        assert!(!self.is_zero(), "division by zero");
        normalize(self.den.clone(), self.num.clone())
    }

    pub(crate) fn div(&self, other: &RatFun) -> RatFun {
        self.mul(&other.inv())
    }

    pub(crate) fn powi(&self, n: i64) -> RatFun {
        if n == 0 {
            return RatFun::one();
        }
        if n < 0 {
            return self.inv().powi(-n);
        }
        let n = u32::try_from(n).expect("exponent fits in u32");
        if self.den.is_one() {
            return RatFun::from_poly(self.num.pow(n));
        }
        normalize(self.num.pow(n), self.den.pow(n))
    }

    /// Numerator and denominator as plain polynomials (negative powers of
    /// the numerator moved into the denominator).
    pub(crate) fn split_fraction(&self) -> (RatFun, RatFun) {
        let clear = negative_part(&self.num);
        let num = self.num.mul_mono(&BigRational::one(), &clear);
        let den = self.den.mul_mono(&BigRational::one(), &clear);
        (RatFun::from_poly(num), RatFun::from_poly(den))
    }

    pub(crate) fn into_expr(self) -> Expr {
        let node = render(&self);
        Expr::with_canon(node, Arc::new(self))
    }
}

/// Smallest monomial that clears every negative exponent of `p`.
fn negative_part(p: &Poly) -> Mono {
    let mut worst: BTreeMap<Atom, i32> = BTreeMap::new();
    for m in p.0.keys() {
        for (a, e) in &m.0 {
            if *e < 0 {
                let slot = worst.entry(a.clone()).or_insert(0);
                *slot = (*slot).max(-e);
            }
        }
    }
    Mono(worst.into_iter().collect())
}

fn normalize(num: Poly, den: Poly) -> RatFun {
    assert!(!den.is_zero(), "division by zero");
    if num.is_zero() {
        return RatFun::zero();
    }
    if let Some((m, c)) = den.as_monomial() {
        let inv_c = c.recip();
        let num = num.mul_mono(&inv_c, &m.inverse());
        return RatFun::from_poly(num);
    }
    // Move the monomial content of the denominator into the numerator.
    let content = den.monomial_content();
    let (num, den) = if content.is_one() {
        (num, den)
    } else {
        let inv = content.inverse();
        let one = BigRational::one();
        (num.mul_mono(&one, &inv), den.mul_mono(&one, &inv))
    };
    // Work with a plain polynomial numerator for the gcd.
    let clear = negative_part(&num);
    let one = BigRational::one();
    let num_poly = num.mul_mono(&one, &clear);
    let (num_poly, den) = match common_factor(&num_poly, &den) {
        Some((_, a, b)) => (a, b),
        None => (num_poly, den),
    };
    if let Some((m, c)) = den.as_monomial() {
        let (k, shift) = m.inverse().mul(&clear.inverse());
        let num = num_poly.mul_mono(&(c.recip() * k), &shift);
        return RatFun::from_poly(num);
    }
    let lc = den
        .leading_coefficient()
        .cloned()
        .expect("nonzero denominator");
    let inv_lc = lc.recip();
    let num = num_poly.mul_mono(&inv_lc, &clear.inverse());
    let den = den.scale(&inv_lc);
    RatFun { num, den }
}

/// Canonical form of `num / den` when the two are already coprime.
fn finish(num: Poly, den: Poly) -> RatFun {
    if num.is_zero() {
        return RatFun::zero();
    }
    let lc = den
        .leading_coefficient()
        .cloned()
        .expect("nonzero denominator");
    if lc.is_one() {
        return RatFun { num, den };
    }
    let inv_lc = lc.recip();
    RatFun {
        num: num.scale(&inv_lc),
        den: den.scale(&inv_lc),
    }
}

/// Nontrivial gcd `g` of two polynomials with the cofactors `a/g` and `b/g`.
fn common_factor(a: &Poly, b: &Poly) -> Option<(Poly, Poly, Poly)> {
    if a.has_negative_exponents() || b.has_negative_exponents() {
        return None;
    }
    let mut atoms = a.atoms();
    atoms.extend(b.atoms());
    let index: Vec<Atom> = atoms.into_iter().collect();
    let pa = to_mpoly(a, &index);
    let pb = to_mpoly(b, &index);
    let g = mpoly::gcd(&pa, &pb);
    if g.terms().all(|(e, _)| e.iter().all(|x| *x == 0)) {
        return None;
    }
    let qa = pa.div_exact(&g).expect("gcd divides the first argument");
    let qb = pb.div_exact(&g).expect("gcd divides the second argument");
    Some((
        from_mpoly(&g, &index),
        from_mpoly(&qa, &index),
        from_mpoly(&qb, &index),
    ))
}

fn to_mpoly(p: &Poly, index: &[Atom]) -> MPoly {
    let mut out = MPoly::zero(index.len());
    for (m, c) in &p.0 {
        let mut exps = vec![0u32; index.len()];
        for (a, e) in &m.0 {
            let i = index.binary_search(a).expect("atom indexed");
            exps[i] = u32::try_from(*e).expect("nonnegative exponent");
        }
        out.add_term(exps, c.clone());
    }
    out
}

fn from_mpoly(p: &MPoly, index: &[Atom]) -> Poly {
    let mut out = Poly::zero();
    for (exps, c) in p.terms() {
        let entries: Vec<(Atom, i32)> = exps
            .iter()
            .enumerate()
            .filter(|(_, e)| **e > 0)
            .map(|(i, e)| (index[i].clone(), *e as i32))
            .collect();
        let (k, m) = Mono::one().mul(&Mono(entries));
        out.add_term(m, c * k);
    }
    out
}

/// Canonical form of an arbitrary tree.
pub(crate) fn canonicalize(node: &Node) -> RatFun {
    match node {
        Node::Num(q) => RatFun::constant(q.clone()),
        Node::Sym(s) => RatFun::symbol(s.clone()),
        Node::Apply(a) => RatFun::apply(a.clone()),
        Node::Add(xs) => {
            let mut acc = RatFun::zero();
            for x in xs {
                acc = acc.add(&x.canon());
            }
            acc
        }
        Node::Mul(xs) => {
            let mut acc = RatFun::one();
            for x in xs {
                acc = acc.mul(&x.canon());
            }
            acc
        }
        Node::Div(a, b) => a.canon().div(&b.canon()),
        Node::Pow(b, e) => RatFun::power(b, e),
        Node::Func(f, a) => RatFun::func(*f, a),
    }
}

fn num_expr(q: BigRational) -> Expr {
    Expr::with_canon(Node::Num(q.clone()), Arc::new(RatFun::constant(q)))
}

fn factor_expr(a: &Atom, e: i32) -> Expr {
    if let (Atom::Pow(b, x), true) = (a, e != 1) {
        let combined = match x.node() {
            Node::Num(q) => mergeable_base(b) || BigInt::from(e.abs()) < *q.denom(),
            _ => mergeable_base(b),
        };
        if combined {
            let total = x.canon().scale(&BigRational::from_integer(BigInt::from(e)));
            return Expr::from_node(Node::Pow(b.clone(), total.into_expr()));
        }
    }
    let base = a.to_expr();
    if e == 1 {
        base
    } else {
        Expr::from_node(Node::Pow(
            base,
            num_expr(BigRational::from_integer(BigInt::from(e))),
        ))
    }
}

fn product(mut factors: Vec<Expr>) -> Expr {
    match factors.len() {
        0 => num_expr(BigRational::one()),
        1 => factors.pop().expect("one factor"),
        _ => {
            factors.sort();
            Expr::from_node(Node::Mul(factors))
        }
    }
}

fn term_expr(m: &Mono, c: &BigRational) -> Expr {
    let (pos, neg) = m.split_signs();
    let numer = c.numer().clone();
    let denom = c.denom().clone();
    let mut top: Vec<Expr> = pos.0.iter().map(|(a, e)| factor_expr(a, *e)).collect();
    if !numer.is_one() || top.is_empty() {
        top.push(num_expr(BigRational::from_integer(numer)));
    }
    let mut bottom: Vec<Expr> = neg.0.iter().map(|(a, e)| factor_expr(a, *e)).collect();
    if !denom.is_one() {
        bottom.push(num_expr(BigRational::from_integer(denom)));
    }
    let top = product(top);
    if bottom.is_empty() {
        top
    } else {
        Expr::from_node(Node::Div(top, product(bottom)))
    }
}

fn poly_expr(p: &Poly) -> Expr {
    if p.is_zero() {
        return num_expr(BigRational::zero());
    }
    let mut terms: Vec<Expr> = p.0.iter().map(|(m, c)| term_expr(m, c)).collect();
    if terms.len() == 1 {
        return terms.pop().expect("one term");
    }
    terms.sort();
    Expr::from_node(Node::Add(terms))
}

/// Canonical tree for a normal form. Laurent forms render as sums of
/// monomial quotients; a genuine denominator renders as a single quotient.
pub(crate) fn render(r: &RatFun) -> Node {
    if r.den.is_one() {
        return poly_expr(&r.num).node().clone();
    }
    let clear = negative_part(&r.num);
    let one = BigRational::one();
    let top = poly_expr(&r.num.mul_mono(&one, &clear));
    let mut bottom: Vec<Expr> = clear.0.iter().map(|(a, e)| factor_expr(a, *e)).collect();
    bottom.push(poly_expr(&r.den));
    Node::Div(top, product(bottom))
}
