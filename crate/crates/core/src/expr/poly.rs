//! Laurent polynomials over symbolic atoms with exact rational coefficients.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use super::rational::RatFun;
use super::{Expr, FnApp, Func, Node, Symbol};

/// An indivisible factor of the rational normal form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Atom {
    Sym(Symbol),
    Func(Func, Expr),
    /// `base^exponent` with a non-integer or symbolic exponent.
    Pow(Expr, Expr),
    Apply(FnApp),
}

impl Atom {
    pub(crate) fn to_expr(&self) -> Expr {
        let node = match self {
            Atom::Sym(s) => Node::Sym(s.clone()),
            Atom::Func(f, a) => Node::Func(*f, a.clone()),
            Atom::Pow(b, e) => Node::Pow(b.clone(), e.clone()),
            Atom::Apply(a) => Node::Apply(a.clone()),
        };
        Expr::from_node(node)
    }

    /// Atom view of a node, when the node is atomic.
    pub(crate) fn of_node(node: &Node) -> Option<Atom> {
        match node {
            Node::Sym(s) => Some(Atom::Sym(s.clone())),
            Node::Func(f, a) => Some(Atom::Func(*f, a.clone())),
            Node::Apply(a) => Some(Atom::Apply(a.clone())),
            _ => None,
        }
    }
}

/// Sorted product of atoms with nonzero integer exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Mono(pub(crate) Vec<(Atom, i32)>);

impl Mono {
    pub(crate) fn one() -> Self {
        Mono(Vec::new())
    }

    pub(crate) fn atom(a: Atom, e: i32) -> Self {
        Mono(vec![(a, e)])
    }

    pub(crate) fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn exponent(&self, a: &Atom) -> i32 {
        self.0
            .binary_search_by(|(x, _)| x.cmp(a))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub(crate) fn inverse(&self) -> Mono {
        Mono(self.0.iter().map(|(a, e)| (a.clone(), -e)).collect())
    }

    /// Product, with powers of a common atomic or numeric base merged.
    pub(crate) fn mul(&self, other: &Mono) -> (BigRational, Mono) {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, ea) = &self.0[i];
            let (b, eb) = &other.0[j];
            match a.cmp(b) {
                std::cmp::Ordering::Less => {
                    out.push((a.clone(), *ea));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((b.clone(), *eb));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    if ea + eb != 0 {
                        out.push((a.clone(), ea + eb));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        normalize_powers(out)
    }

    pub(crate) fn pow(&self, n: i32) -> (BigRational, Mono) {
        if n == 0 {
            return (BigRational::one(), Mono::one());
        }
        normalize_powers(self.0.iter().map(|(a, e)| (a.clone(), e * n)).collect())
    }

    /// Componentwise minimum exponent (absent atoms count as 0).
    pub(crate) fn gcd(&self, other: &Mono) -> Mono {
        let mut atoms: BTreeMap<&Atom, i32> = BTreeMap::new();
        for (a, _) in self.0.iter().chain(other.0.iter()) {
            atoms.insert(a, 0);
        }
        let v = atoms
            .into_keys()
            .filter_map(|a| {
                let m = self.exponent(a).min(other.exponent(a));
                (m != 0).then(|| (a.clone(), m))
            })
            .collect();
        Mono(v)
    }

    /// Part with positive exponents and the inverse of the negative part.
    pub(crate) fn split_signs(&self) -> (Mono, Mono) {
        let pos = self.0.iter().filter(|(_, e)| *e > 0).cloned().collect();
        let neg = self
            .0
            .iter()
            .filter(|(_, e)| *e < 0)
            .map(|(a, e)| (a.clone(), -e))
            .collect();
        (Mono(pos), Mono(neg))
    }

    pub(crate) fn has_negative(&self) -> bool {
        self.0.iter().any(|(_, e)| *e < 0)
    }
}

pub(crate) fn mergeable_base(base: &Expr) -> bool {
    matches!(
        base.node(),
        Node::Num(_) | Node::Sym(_) | Node::Func(..) | Node::Apply(_)
    )
}

/// Sorts, combines duplicate atoms, and merges `b^e1 * b^e2 -> b^(e1+e2)`
/// for atomic or numeric bases, moving integer parts of the merged exponent
/// onto the base itself (or into the coefficient for numeric bases).
fn normalize_powers(mut entries: Vec<(Atom, i32)>) -> (BigRational, Mono) {
    let mut coeff = BigRational::one();
    let needs_merge = {
        let mut bases: Vec<&Expr> = Vec::new();
        let mut need = false;
        for (a, e) in &entries {
            if let Atom::Pow(b, x) = a {
                if mergeable_base(b) {
                    if *e != 1 || bases.contains(&b) || !is_normalized(b, x) {
                        need = true;
                    }
                    bases.push(b);
                }
            }
        }
        need
    };
    if needs_merge {
        let mut totals: BTreeMap<Expr, RatFun> = BTreeMap::new();
        let mut rest = Vec::with_capacity(entries.len());
        for (a, e) in entries.drain(..) {
            match a {
                Atom::Pow(b, x) if mergeable_base(&b) => {
                    let add = x.canon().scale(&BigRational::from_integer(BigInt::from(e)));
                    let slot = totals.entry(b).or_insert_with(RatFun::zero);
                    *slot = slot.add(&add);
                }
                other => rest.push((other, e)),
            }
        }
        for (base, total) in totals {
            let (int, frac) = split_exponent(&total);
            if let Node::Num(q) = base.node() {
                if !int.is_zero() {
                    coeff *= rational_pow(q, &int);
                }
            } else if !int.is_zero() {
                let atom = Atom::of_node(base.node()).expect("mergeable base is atomic");
                let n: i32 = i32::try_from(int).expect("exponent fits in i32");
                rest.push((atom, n));
            }
            if !frac.is_zero() {
                rest.push(fractional_power(base, frac));
            }
        }
        entries = rest;
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: Vec<(Atom, i32)> = Vec::with_capacity(entries.len());
    for (a, e) in entries {
        match out.last_mut() {
            Some((last, le)) if *last == a => *le += e,
            _ => out.push((a, e)),
        }
    }
    out.retain(|(_, e)| *e != 0);
    (coeff, Mono(out))
}

/// `base^frac`, with `frac` free of an integer part when numeric. The
/// exponent is written `k * x` with `k` the signed gcd of the coefficient
/// numerators, giving the atom `base^x` to the power `k`: powers that differ
/// by an integer factor (`v^(1/3)`, `v^(2/3)`; `v^p`, `v^(-2*p)`) share one
/// variable.
pub(crate) fn fractional_power(base: Expr, frac: RatFun) -> (Atom, i32) {
    if !frac.den.is_one() {
        return (Atom::Pow(base, frac.into_expr()), 1);
    }
    let g = frac
        .num
        .0
        .values()
        .fold(BigInt::zero(), |g, c| g.gcd(c.numer()));
    let negative = frac
        .num
        .leading_coefficient()
        .is_some_and(|c| c.numer() < &BigInt::zero());
    let k = if negative { -g } else { g };
    match i32::try_from(k.clone()) {
        Ok(ki) if ki != 0 => {
            let x = frac.scale(&BigRational::from_integer(k).recip());
            (Atom::Pow(base, x.into_expr()), ki)
        }
        _ => (Atom::Pow(base, frac.into_expr()), 1),
    }
}

fn is_normalized(base: &Expr, x: &Expr) -> bool {
    let (atom, k) = fractional_power(base.clone(), x.canon().as_ref().clone());
    k == 1 && matches!(&atom, Atom::Pow(_, y) if y == x)
}

/// Splits `n + rest` with `n` the floor of the constant term, when the
/// exponent is a polynomial.
pub(crate) fn split_exponent(e: &RatFun) -> (BigInt, RatFun) {
    if !e.den.is_one() {
        return (BigInt::zero(), e.clone());
    }
    match e.num.0.get(&Mono::one()) {
        Some(c) => {
            let n = c.numer().div_floor(c.denom());
            let rest = e.sub(&RatFun::constant(BigRational::from_integer(n.clone())));
            (n, rest)
        }
        None => (BigInt::zero(), e.clone()),
    }
}

pub(crate) fn rational_pow(q: &BigRational, n: &BigInt) -> BigRational {
    let e: i32 = i32::try_from(n.clone()).expect("exponent fits in i32");
    if e >= 0 {
        Pow::pow(q.clone(), e as u32)
    } else {
        Pow::pow(q.recip(), (-e) as u32)
    }
}

/// Sum of coefficient-monomial terms, zero terms omitted.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Poly(pub(crate) BTreeMap<Mono, BigRational>);

impl Poly {
    pub(crate) fn zero() -> Self {
        Poly(BTreeMap::new())
    }

    pub(crate) fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub(crate) fn constant(q: BigRational) -> Self {
        let mut p = Poly::zero();
        p.add_term(Mono::one(), q);
        p
    }

    pub(crate) fn monomial(c: BigRational, m: Mono) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub(crate) fn add_term(&mut self, m: Mono, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.0.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn is_one(&self) -> bool {
        self.0.len() == 1 && self.0.get(&Mono::one()).is_some_and(One::is_one)
    }

    pub(crate) fn as_constant(&self) -> Option<BigRational> {
        match self.0.len() {
            0 => Some(BigRational::zero()),
            1 => self.0.get(&Mono::one()).cloned(),
            _ => None,
        }
    }

    pub(crate) fn as_monomial(&self) -> Option<(&Mono, &BigRational)> {
        if self.0.len() == 1 {
            self.0.iter().next()
        } else {
            None
        }
    }

    pub(crate) fn add(&self, other: &Poly) -> Poly {
        let (mut big, small) = if self.0.len() >= other.0.len() {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        for (m, c) in &small.0 {
            big.add_term(m.clone(), c.clone());
        }
        big
    }

    pub(crate) fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }

    pub(crate) fn scale(&self, q: &BigRational) -> Poly {
        if q.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, c)| (m.clone(), c * q)).collect())
    }

    pub(crate) fn mul_mono(&self, c: &BigRational, m: &Mono) -> Poly {
        let mut out = Poly::zero();
        for (mm, cc) in &self.0 {
            let (k, prod) = mm.mul(m);
            out.add_term(prod, cc * c * k);
        }
        out
    }

    pub(crate) fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                let (k, m) = m1.mul(m2);
                out.add_term(m, c1 * c2 * k);
            }
        }
        out
    }

    pub(crate) fn pow(&self, n: u32) -> Poly {
        if let Some((m, c)) = self.as_monomial() {
            let (k, mm) = m.pow(n as i32);
            return Poly::monomial(Pow::pow(c.clone(), n) * k, mm);
        }
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Greatest monomial dividing every term (exponents may be negative).
    pub(crate) fn monomial_content(&self) -> Mono {
        let mut it = self.0.keys();
        let Some(first) = it.next() else {
            return Mono::one();
        };
        it.fold(first.clone(), |g, m| g.gcd(m))
    }

    pub(crate) fn has_negative_exponents(&self) -> bool {
        self.0.keys().any(Mono::has_negative)
    }

    /// Coefficient of the greatest monomial.
    pub(crate) fn leading_coefficient(&self) -> Option<&BigRational> {
        self.0.values().next_back()
    }

    pub(crate) fn atoms(&self) -> std::collections::BTreeSet<Atom> {
        self.0
            .keys()
            .flat_map(|m| m.0.iter().map(|(a, _)| a.clone()))
            .collect()
    }
}
