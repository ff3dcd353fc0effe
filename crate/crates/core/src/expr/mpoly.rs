//! Dense-exponent multivariate polynomials over Q, used only for gcd
//! computations. Variables are plain indices; no power merging happens here.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct MPoly {
    nvars: usize,
    /// Lexicographic order on exponent vectors; variable 0 most significant.
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl MPoly {
    pub(crate) fn zero(nvars: usize) -> Self {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub(crate) fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = MPoly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub(crate) fn add_term(&mut self, exps: Vec<u32>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
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

    pub(crate) fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|x| *x == 0))
    }

    fn leading(&self) -> Option<(&Vec<u32>, &BigRational)> {
        self.terms.iter().next_back()
    }

    fn degree(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    fn sub(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }

    pub(crate) fn mul(&self, other: &MPoly) -> MPoly {
        let mut out = MPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    fn mul_term(&self, exps: &[u32], c: &BigRational) -> MPoly {
        let mut out = MPoly::zero(self.nvars);
        for (e, cc) in &self.terms {
            let ne: Vec<u32> = e.iter().zip(exps).map(|(a, b)| a + b).collect();
            out.add_term(ne, cc * c);
        }
        out
    }

    fn scale(&self, c: &BigRational) -> MPoly {
        self.mul_term(&vec![0; self.nvars], c)
    }

    /// Scales so the lexicographically leading coefficient is 1.
    pub(crate) fn monic(&self) -> MPoly {
        match self.leading() {
            Some((_, c)) => {
                let inv = c.recip();
                self.scale(&inv)
            }
            None => self.clone(),
        }
    }

    /// Coefficient of `x_var^d`, as a polynomial in the remaining variables.
    fn coeff_in(&self, var: usize, d: u32) -> MPoly {
        let mut out = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] == d {
                let mut ne = e.clone();
                ne[var] = 0;
                out.add_term(ne, c.clone());
            }
        }
        out
    }

    /// Exact quotient, or `None` when `divisor` does not divide `self`.
    pub(crate) fn div_exact(&self, divisor: &MPoly) -> Option<MPoly> {
        let (lb_exp, lb_c) = divisor.leading()?;
        let lb_exp = lb_exp.clone();
        let lb_c = lb_c.clone();
        let mut q = MPoly::zero(self.nvars);
        let mut r = self.clone();
        while let Some((le, lc)) = r.leading() {
            if le.iter().zip(&lb_exp).any(|(a, b)| a < b) {
                return None;
            }
            let te: Vec<u32> = le.iter().zip(&lb_exp).map(|(a, b)| a - b).collect();
            let tc = lc / &lb_c;
            r = r.sub(&divisor.mul_term(&te, &tc));
            q.add_term(te, tc);
        }
        Some(q)
    }

    /// Pseudo-remainder of `self` by `b` in the variable `var`.
    fn prem(&self, b: &MPoly, var: usize) -> MPoly {
        let db = b.degree(var);
        let lcb = b.coeff_in(var, db);
        let mut r = self.clone();
        loop {
            if r.is_zero() {
                return r;
            }
            let dr = r.degree(var);
            if dr < db {
                return r;
            }
            let lcr = r.coeff_in(var, dr);
            let mut shift = vec![0; self.nvars];
            shift[var] = dr - db;
            let t = lcr.mul_term(&shift, &BigRational::one()).mul(b);
            r = lcb.mul(&r).sub(&t);
        }
    }

    /// Content with respect to `var`: gcd of the coefficients in `var`.
    fn content(&self, var: usize) -> MPoly {
        let mut g = MPoly::zero(self.nvars);
        for d in 0..=self.degree(var) {
            let c = self.coeff_in(var, d);
            if c.is_zero() {
                continue;
            }
            g = gcd(&g, &c);
            if g.is_constant() {
                break;
            }
        }
        g
    }

    fn primitive_part(&self, var: usize) -> MPoly {
        let c = self.content(var);
        self.div_exact(&c).expect("content divides")
    }
}

/// Monic gcd of a single term and a polynomial.
fn gcd_with_term(exps: &[u32], p: &MPoly) -> MPoly {
    let mut low = exps.to_vec();
    for e in p.terms.keys() {
        for (l, x) in low.iter_mut().zip(e) {
            *l = (*l).min(*x);
        }
    }
    let mut out = MPoly::zero(p.nvars);
    out.add_term(low, BigRational::one());
    out
}

/// Integer content and primitive part of a polynomial over Q.
fn integer_split(p: &MPoly) -> (BigRational, MPoly) {
    let den = p
        .terms
        .values()
        .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let nums: Vec<BigInt> = p.terms.values().map(|c| (c * &den).to_integer()).collect();
    let content = nums.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    let mut out = MPoly::zero(p.nvars);
    for (e, c) in p.terms.keys().zip(nums) {
        out.add_term(e.clone(), BigRational::from_integer(c / &content));
    }
    (BigRational::new(content, den), out)
}

fn max_norm(p: &MPoly) -> BigInt {
    p.terms
        .values()
        .map(|c| c.numer().abs())
        .max()
        .unwrap_or_default()
}

/// `p` at `x_var = xi`.
fn eval_at(p: &MPoly, var: usize, xi: &BigInt) -> MPoly {
    let mut out = MPoly::zero(p.nvars);
    for (e, c) in &p.terms {
        let mut ne = e.clone();
        ne[var] = 0;
        out.add_term(
            ne,
            c * BigRational::from_integer(num_traits::pow(xi.clone(), e[var] as usize)),
        );
    }
    out
}

/// Representative of `c mod m` in `(-m/2, m/2]`.
fn symmetric_mod(c: &BigInt, m: &BigInt) -> BigInt {
    let r = c.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

/// Recovers a polynomial in `x_var` from its image at `xi` by balanced
/// `xi`-adic expansion of every coefficient.
fn interpolate(h: &MPoly, var: usize, xi: &BigInt) -> MPoly {
    let mut out = MPoly::zero(h.nvars);
    let mut rest = h.clone();
    let mut power = 0u32;
    while !rest.is_zero() {
        let mut next = MPoly::zero(h.nvars);
        for (e, c) in &rest.terms {
            let c = c.to_integer();
            let digit = symmetric_mod(&c, xi);
            let mut ne = e.clone();
            ne[var] = power;
            out.add_term(ne, BigRational::from_integer(digit.clone()));
            next.add_term(e.clone(), BigRational::from_integer((c - digit) / xi));
        }
        rest = next;
        power += 1;
    }
    out
}

/// Gcd over Z, content included, by evaluation at a large integer and
/// interpolation; `None` when the heuristic gives up.
fn heu_gcd_int(a: &MPoly, b: &MPoly) -> Option<MPoly> {
    let n = a.nvars;
    let (ca, pa) = integer_split(a);
    let (cb, pb) = integer_split(b);
    let content = BigRational::from_integer(ca.to_integer().gcd(&cb.to_integer()));
    let Some(var) = (0..n).find(|&v| pa.degree(v) > 0 || pb.degree(v) > 0) else {
        return Some(MPoly::constant(n, content));
    };
    let total_degree = |p: &MPoly| {
        p.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    };
    let spread = total_degree(&pa).max(total_degree(&pb)).max(1) as u64;
    let mut xi: BigInt = max_norm(&pa).min(max_norm(&pb)) * 2 + 29;
    for _ in 0..6 {
        if xi.bits() * spread > 40_000 {
            return None;
        }
        let ea = eval_at(&pa, var, &xi);
        let eb = eval_at(&pb, var, &xi);
        if ea.is_zero() || eb.is_zero() {
            return None;
        }
        if let Some(h) = heu_gcd_int(&ea, &eb) {
            let (_, g) = integer_split(&interpolate(&h, var, &xi));
            if !g.is_zero() && pa.div_exact(&g).is_some() && pb.div_exact(&g).is_some() {
                return Some(g.scale(&content));
            }
        }
        xi = xi * 73794 / 27011;
    }
    None
}

fn heuristic_gcd(a: &MPoly, b: &MPoly) -> Option<MPoly> {
    heu_gcd_int(&integer_split(a).1, &integer_split(b).1)
}

/// Monic greatest common divisor.
pub(crate) fn gcd(a: &MPoly, b: &MPoly) -> MPoly {
    let n = a.nvars;
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return MPoly::constant(n, BigRational::one());
    }
    if a.terms.len() == 1 {
        return gcd_with_term(a.terms.keys().next().expect("one term"), b);
    }
    if b.terms.len() == 1 {
        return gcd_with_term(b.terms.keys().next().expect("one term"), a);
    }
    let (small, large) = if a.terms.len() <= b.terms.len() {
        (a, b)
    } else {
        (b, a)
    };
    if large.div_exact(small).is_some() {
        return small.monic();
    }
    // A variable missing from one side can only enter through the content.
    for v in 0..n {
        match (a.degree(v) > 0, b.degree(v) > 0) {
            (true, false) => return gcd(&a.content(v), b),
            (false, true) => return gcd(a, &b.content(v)),
            _ => {}
        }
    }
    if let Some(g) = heuristic_gcd(a, b) {
        return g.monic();
    }
    let var = (0..n)
        .filter(|&v| a.degree(v) > 0)
        .min_by_key(|&v| a.degree(v).max(b.degree(v)))
        .expect("non-constant polynomial has a variable");
    let ca = a.content(var);
    let cb = b.content(var);
    let c = gcd(&ca, &cb);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let (mut x, mut y) = if pa.degree(var) >= pb.degree(var) {
        (pa, pb)
    } else {
        (pb, pa)
    };
    let g = loop {
        let r = x.prem(&y, var);
        if r.is_zero() {
            break y.primitive_part(var);
        }
        let r = r.primitive_part(var);
        if r.degree(var) == 0 {
            break MPoly::constant(n, BigRational::one());
        }
        x = y;
        y = r;
    };
    c.mul(&g).monic()
}
