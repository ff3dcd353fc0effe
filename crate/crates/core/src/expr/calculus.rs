//! Partial differentiation and simultaneous substitution.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::poly::{Atom, Mono, Poly};
use super::rational::RatFun;
use super::{Expr, Func, Symbol};

/// Symbol-to-expression map for [`Expr::substitute`].
pub type Bindings = BTreeMap<Symbol, Expr>;

impl Expr {
    /// Partial derivative with every other symbol held fixed. Uninterpreted
    /// applications `g^(n)(t)` differentiate to `g^(n+1)(t)` in `t`.
    pub fn diff(&self, s: &Symbol) -> Expr {
        diff_ratfun(&self.canon(), s).into_expr()
    }

    /// `n`-fold partial derivative.
    pub fn diff_n(&self, s: &Symbol, n: u32) -> Expr {
        (0..n).fold(self.clone(), |e, _| e.diff(s))
    }

    /// Simultaneous substitution followed by canonicalisation.
    pub fn substitute(&self, bindings: &Bindings) -> Expr {
        if bindings.is_empty() {
            return self.simplify();
        }
        let mut cache = BTreeMap::new();
        subst_ratfun(&self.canon(), bindings, &mut cache).into_expr()
    }

    pub fn substitute_one(&self, s: &Symbol, value: &Expr) -> Expr {
        let mut b = Bindings::new();
        b.insert(s.clone(), value.clone());
        self.substitute(&b)
    }

    /// Replaces every `name^(n)(t)` by the `n`-th `t`-derivative of
    /// `instantiation`.
    pub fn instantiate_function(&self, name: &str, instantiation: &Expr) -> Expr {
        let t = Symbol::t();
        let mut cache = BTreeMap::new();
        instantiate(&self.canon(), name, instantiation, &t, &mut cache).into_expr()
    }

    /// Coefficients of `self` as a polynomial in `s`, lowest degree first.
    /// `None` when `s` occurs in a denominator, a kernel, or with a negative
    /// power.
    pub fn coefficients_in(&self, s: &Symbol) -> Option<Vec<Expr>> {
        let r = self.canon();
        let atom = Atom::Sym(s.clone());
        if r.den.atoms().iter().any(|a| atom_mentions(a, s)) {
            return None;
        }
        let mut by_degree: BTreeMap<i32, Poly> = BTreeMap::new();
        for (m, c) in &r.num.0 {
            let e = m.exponent(&atom);
            if e < 0 {
                return None;
            }
            let rest: Vec<(Atom, i32)> = m.0.iter().filter(|(a, _)| *a != atom).cloned().collect();
            if rest.iter().any(|(a, _)| atom_mentions(a, s)) {
                return None;
            }
            by_degree
                .entry(e)
                .or_insert_with(Poly::zero)
                .add_term(Mono(rest), c.clone());
        }
        let top = by_degree.keys().next_back().copied().unwrap_or(0);
        let den = RatFun::from_poly(r.den.clone());
        Some(
            (0..=top)
                .map(|d| {
                    let p = by_degree.remove(&d).unwrap_or_else(Poly::zero);
                    RatFun::from_poly(p).div(&den).into_expr()
                })
                .collect(),
        )
    }

    /// Groups the terms of the canonical numerator by their product of
    /// atoms mentioning `s`. Returns `(key, coefficient)` pairs such that the
    /// numerator equals `Σ key * coefficient`; coefficients are free of `s`.
    pub fn collect_in(&self, s: &Symbol) -> Vec<(Expr, Expr)> {
        let (num, _) = self.canon().split_fraction();
        let mut groups: BTreeMap<Mono, Poly> = BTreeMap::new();
        for (m, c) in &num.num.0 {
            let (key, rest): (Vec<_>, Vec<_>) =
                m.0.iter().cloned().partition(|(a, _)| atom_mentions(a, s));
            groups
                .entry(Mono(key))
                .or_insert_with(Poly::zero)
                .add_term(Mono(rest), c.clone());
        }
        groups
            .into_iter()
            .map(|(k, p)| {
                let key = RatFun::from_poly(Poly::monomial(BigRational::from_integer(1.into()), k));
                (key.into_expr(), RatFun::from_poly(p).into_expr())
            })
            .collect()
    }

    /// Terms `(monomial, coefficient)` when the canonical form is a Laurent
    /// polynomial in its atoms, `None` when it has a genuine denominator.
    pub fn laurent_terms(&self) -> Option<Vec<(Expr, BigRational)>> {
        let r = self.canon();
        if !r.den.is_one() {
            return None;
        }
        Some(
            r.num
                .0
                .iter()
                .map(|(m, c)| {
                    let mono = RatFun::from_poly(Poly::monomial(
                        BigRational::from_integer(1.into()),
                        m.clone(),
                    ));
                    (mono.into_expr(), c.clone())
                })
                .collect(),
        )
    }

    /// Solves `self = 0` for `s` when `self` is affine in `s` with a
    /// nonzero coefficient.
    pub fn isolate(&self, s: &Symbol) -> Option<Expr> {
        let slope = self.diff(s);
        if slope.is_zero() || !slope.diff(s).is_zero() {
            return None;
        }
        let offset = self.substitute_one(s, &Expr::zero());
        if offset.depends_on(s) {
            return None;
        }
        Some(-(offset / slope))
    }
}

fn atom_mentions(a: &Atom, s: &Symbol) -> bool {
    match a {
        Atom::Sym(x) => x == s,
        Atom::Func(_, arg) => arg.depends_on(s),
        Atom::Pow(b, e) => b.depends_on(s) || e.depends_on(s),
        Atom::Apply(_) => s.is_independent(),
    }
}

fn atom_derivative(a: &Atom, s: &Symbol) -> RatFun {
    match a {
        Atom::Sym(x) => {
            if x == s {
                RatFun::one()
            } else {
                RatFun::zero()
            }
        }
        Atom::Apply(app) => {
            if s.is_independent() {
                RatFun::apply(app.derivative())
            } else {
                RatFun::zero()
            }
        }
        Atom::Func(f, arg) => {
            let d = diff_ratfun(&arg.canon(), s);
            if d.is_zero() {
                return d;
            }
            let outer = match f {
                Func::Exp => RatFun::func(Func::Exp, arg),
                Func::Ln => arg.canon().inv(),
                Func::Sin => RatFun::func(Func::Cos, arg),
                Func::Cos => RatFun::func(Func::Sin, arg).neg(),
                Func::Tan => {
                    let tan = RatFun::func(Func::Tan, arg);
                    RatFun::one().add(&tan.mul(&tan))
                }
            };
            outer.mul(&d)
        }
        Atom::Pow(base, exponent) => {
            let db = diff_ratfun(&base.canon(), s);
            let de = diff_ratfun(&exponent.canon(), s);
            if db.is_zero() && de.is_zero() {
                return RatFun::zero();
            }
            let this = RatFun::from_atom(a.clone());
            let mut inner = RatFun::zero();
            if !de.is_zero() {
                inner = inner.add(&de.mul(&RatFun::func(Func::Ln, base)));
            }
            if !db.is_zero() {
                inner = inner.add(&exponent.canon().mul(&db).div(&base.canon()));
            }
            this.mul(&inner)
        }
    }
}

fn diff_poly(p: &Poly, s: &Symbol, cache: &mut BTreeMap<Atom, RatFun>) -> RatFun {
    let mut acc = RatFun::zero();
    for (m, c) in &p.0 {
        for (i, (a, e)) in m.0.iter().enumerate() {
            let da = cache
                .entry(a.clone())
                .or_insert_with(|| atom_derivative(a, s))
                .clone();
            if da.is_zero() {
                continue;
            }
            let mut rest = m.0.clone();
            if *e == 1 {
                rest.remove(i);
            } else {
                rest[i].1 -= 1;
            }
            let coeff = c * BigRational::from_integer(BigInt::from(*e));
            let (k, rest) = Mono::one().mul(&Mono(rest));
            let term = RatFun::from_poly(Poly::monomial(coeff * k, rest));
            acc = acc.add(&term.mul(&da));
        }
    }
    acc
}

pub(crate) fn diff_ratfun(r: &RatFun, s: &Symbol) -> RatFun {
    let mut cache = BTreeMap::new();
    let dn = diff_poly(&r.num, s, &mut cache);
    if r.den.is_one() {
        return dn;
    }
    let den = RatFun::from_poly(r.den.clone());
    let num = RatFun::from_poly(r.num.clone());
    let dd = diff_poly(&r.den, s, &mut cache);
    dn.mul(&den).sub(&num.mul(&dd)).div(&den.mul(&den))
}

fn eval_poly(p: &Poly, atom_value: &mut impl FnMut(&Atom) -> RatFun) -> RatFun {
    let mut acc = RatFun::zero();
    for (m, c) in &p.0 {
        let mut term = RatFun::constant(c.clone());
        for (a, e) in &m.0 {
            term = term.mul(&atom_value(a).powi(*e as i64));
        }
        acc = acc.add(&term);
    }
    acc
}

fn map_ratfun(r: &RatFun, atom_value: &mut impl FnMut(&Atom) -> RatFun) -> RatFun {
    let num = eval_poly(&r.num, atom_value);
    if r.den.is_one() {
        return num;
    }
    num.div(&eval_poly(&r.den, atom_value))
}

fn subst_ratfun(r: &RatFun, b: &Bindings, cache: &mut BTreeMap<Atom, RatFun>) -> RatFun {
    map_ratfun(r, &mut |a| {
        if let Some(v) = cache.get(a) {
            return v.clone();
        }
        let v = subst_atom(a, b);
        cache.insert(a.clone(), v.clone());
        v
    })
}

fn subst_atom(a: &Atom, b: &Bindings) -> RatFun {
    match a {
        Atom::Sym(s) => match b.get(s) {
            Some(v) => v.canon().as_ref().clone(),
            None => RatFun::from_atom(a.clone()),
        },
        Atom::Apply(_) => RatFun::from_atom(a.clone()),
        Atom::Func(f, arg) => {
            let new_arg = arg.substitute(b);
            RatFun::func(*f, &new_arg)
        }
        Atom::Pow(base, e) => RatFun::power(&base.substitute(b), &e.substitute(b)),
    }
}

fn instantiate(
    r: &RatFun,
    name: &str,
    inst: &Expr,
    t: &Symbol,
    cache: &mut BTreeMap<Atom, RatFun>,
) -> RatFun {
    map_ratfun(r, &mut |a| {
        if let Some(v) = cache.get(a) {
            return v.clone();
        }
        let v = match a {
            Atom::Apply(app) if &*app.name == name => {
                inst.diff_n(t, app.order).canon().as_ref().clone()
            }
            Atom::Sym(_) | Atom::Apply(_) => RatFun::from_atom(a.clone()),
            Atom::Func(f, arg) => RatFun::func(*f, &arg.instantiate_function(name, inst)),
            Atom::Pow(base, e) => RatFun::power(
                &base.instantiate_function(name, inst),
                &e.instantiate_function(name, inst),
            ),
        };
        cache.insert(a.clone(), v.clone());
        v
    })
}
