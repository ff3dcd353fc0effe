//! Differential invariants of `X^{[λ,k]}` and reduction of order.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::expr::{equals, Bindings, EqualityError, Equivalence, Expr, Symbol};
use crate::field::{lambda_prolong, LambdaPair, VectorField};
use crate::jet::{restricted_total_derivative, total_derivative, OdeProblem};

const TOL: f64 = 1e-9;

/// The reduced independent variable.
pub fn x_symbol() -> Symbol {
    Symbol::parameter("x")
}

/// The symbol standing for `ζ_i` in a reduced equation.
pub fn zeta_symbol(i: u32) -> Symbol {
    Symbol::parameter(&format!("zeta{i}"))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("`{0}` is reserved for the reduced equation")]
    Clash(String),
    #[error("D(x) vanishes on the equation")]
    StationaryX,
    #[error("zeta{order} is not affine in v{}: {expr}", order + 1)]
    NotAffine { order: u32, expr: Expr },
    #[error("x = {0} cannot be inverted for t or v")]
    NotInvertible(Expr),
    #[error("the reduced equation depends on {variable}: {expr}")]
    Dependence { variable: Symbol, expr: Expr },
    #[error("the reduced equation does not involve zeta{0}")]
    Degenerate(u32),
    #[error(transparent)]
    Sampling(#[from] EqualityError),
}

/// `V(I) = 0`, symbolically or on samples.
pub fn verify_invariant(v: &VectorField, invariant: &Expr) -> Result<bool, EqualityError> {
    Ok(equals(&v.apply(invariant), &Expr::zero(), TOL)?.holds())
}

/// `t^a v^b v_1^c` for `|a|, |b|, |c| <= bound`, the constant excluded,
/// in increasing `|a| + |b| + |c|` and then canonical order.
fn ansatz_monomials(bound: u32) -> Vec<Expr> {
    let b = bound as i64;
    let mut out = Vec::new();
    for a in -b..=b {
        for bb in -b..=b {
            for c in -b..=b {
                if (a, bb, c) == (0, 0, 0) {
                    continue;
                }
                let m = Expr::t().powi(a) * Expr::jet(0).powi(bb) * Expr::jet(1).powi(c);
                out.push(((a.abs() + bb.abs() + c.abs()) as u32, m));
            }
        }
    }
    out.sort();
    out.into_iter().map(|(_, m)| m).collect()
}

/// Right nullspace of a sparse rational matrix given as rows of
/// `column -> entry`. Each basis vector has one free column set to 1.
fn nullspace(rows: Vec<BTreeMap<usize, BigRational>>, ncols: usize) -> Vec<Vec<BigRational>> {
    let mut pivots: Vec<(usize, BTreeMap<usize, BigRational>)> = Vec::new();
    for mut row in rows {
        for (pc, prow) in &pivots {
            if let Some(f) = row.get(pc).cloned() {
                for (c, x) in prow {
                    let e = row.entry(*c).or_insert_with(BigRational::zero);
                    *e -= &f * x;
                    if e.is_zero() {
                        row.remove(c);
                    }
                }
            }
        }
        let Some((&pc, lead)) = row.iter().next_back() else {
            continue;
        };
        let lead = lead.clone();
        for x in row.values_mut() {
            *x /= &lead;
        }
        for (_, prow) in pivots.iter_mut() {
            if let Some(f) = prow.get(&pc).cloned() {
                for (c, x) in &row {
                    let e = prow.entry(*c).or_insert_with(BigRational::zero);
                    *e -= &f * x;
                    if e.is_zero() {
                        prow.remove(c);
                    }
                }
            }
        }
        pivots.push((pc, row));
    }
    let pivot_cols: BTreeMap<usize, &BTreeMap<usize, BigRational>> =
        pivots.iter().map(|(c, r)| (*c, r)).collect();
    (0..ncols)
        .filter(|c| !pivot_cols.contains_key(c))
        .map(|free| {
            let mut v = vec![BigRational::zero(); ncols];
            v[free] = BigRational::one();
            for (pc, row) in &pivot_cols {
                if let Some(x) = row.get(&free) {
                    v[*pc] = -x.clone();
                }
            }
            v
        })
        .collect()
}

/// Bounded search for first-order invariants of `X^{[λ,1]}` among Laurent
/// polynomials in `(t, v, v_1)`. Returns a basis of the non-constant
/// solutions; empty when none exists or `X^{[λ,1]}` of a monomial is not a
/// Laurent polynomial after clearing denominators.
pub fn find_invariant_ansatz(lp: &LambdaPair, degree_bound: u32) -> Vec<Expr> {
    let u = lambda_prolong(lp, 1);
    let monomials = ansatz_monomials(degree_bound.max(1));
    let images: Vec<Expr> = monomials.iter().map(|m| u.apply(m)).collect();
    let mut dens: Vec<Expr> = Vec::new();
    for img in &images {
        let d = img.denominator();
        if !d.is_one() && !dens.contains(&d) {
            dens.push(d);
        }
    }
    let common: Expr = dens.into_iter().product();
    let mut row_of: BTreeMap<Expr, usize> = BTreeMap::new();
    let mut rows: Vec<BTreeMap<usize, BigRational>> = Vec::new();
    for (col, img) in images.iter().enumerate() {
        let Some(terms) = (img * &common).laurent_terms() else {
            return Vec::new();
        };
        for (mono, c) in terms {
            let next = row_of.len();
            let r = *row_of.entry(mono).or_insert(next);
            if r == rows.len() {
                rows.push(BTreeMap::new());
            }
            rows[r].insert(col, c);
        }
    }
    let mut basis: Vec<(usize, Expr)> = nullspace(rows, monomials.len())
        .into_iter()
        .map(|v| {
            let top = v
                .iter()
                .rposition(|x| !x.is_zero())
                .expect("basis vector is nonzero");
            let lead = v[top].clone();
            let e: Expr = v
                .iter()
                .zip(&monomials)
                .filter(|(c, _)| !c.is_zero())
                .map(|(c, m)| Expr::rational(c / &lead) * m)
                .sum();
            (top, e)
        })
        .collect();
    basis.sort();
    basis.into_iter().map(|(_, e)| e).collect()
}

/// `ζ_i = D̄₀(ζ_{i-1}) / D̄₀(x)` for `i = 1, ..., k-1`.
pub fn derived_invariants(
    ode: &OdeProblem,
    x: &Expr,
    zeta0: &Expr,
    k: u32,
) -> Result<Vec<Expr>, ReductionError> {
    let dx = restricted_total_derivative(x, ode, None);
    if dx.is_zero() {
        return Err(ReductionError::StationaryX);
    }
    let mut out: Vec<Expr> = Vec::new();
    let mut prev = zeta0.clone();
    for _ in 1..k {
        prev = restricted_total_derivative(&prev, ode, None) / &dx;
        out.push(prev.clone());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantChain {
    pub x: Expr,
    /// `ζ_0, ..., ζ_{k-1}`, restricted to the equation.
    pub zeta: Vec<Expr>,
    /// `Δ_red = zeta_{k-1} - G(x, zeta_0, ..., zeta_{k-2})`.
    pub reduced: Option<Expr>,
    /// Independence of the eliminated variable was settled by sampling.
    pub numeric_confirmed: bool,
}

/// Solves `chain[i] = zeta_i` for `v_{i+1}`, `i = 0, 1, ...`, in turn.
/// Each value is written in `t`, `v` and the `zeta_i`.
pub fn eliminate(chain: &[Expr]) -> Result<Bindings, ReductionError> {
    let mut solved = Bindings::new();
    for (i, z) in chain.iter().enumerate() {
        let i = i as u32;
        let target = Symbol::jet(i + 1);
        let relation = z.substitute(&solved) - Expr::symbol(zeta_symbol(i));
        let value = relation
            .isolate(&target)
            .ok_or_else(|| ReductionError::NotAffine {
                order: i,
                expr: z.clone(),
            })?;
        for v in solved.values_mut() {
            *v = v.substitute_one(&target, &value);
        }
        solved.insert(target, value);
    }
    Ok(solved)
}

/// Rewrites the equation in the invariants `x`, `ζ_0` and their derived
/// chain by triangular elimination of `v_1, ..., v_k`.
pub fn reduce(ode: &OdeProblem, x: &Expr, zeta0: &Expr) -> Result<InvariantChain, ReductionError> {
    let k = ode.order();
    let ctx = ode.ctx();
    let x_sym = x_symbol();
    let fresh: Vec<Symbol> = (0..k).map(zeta_symbol).collect();
    for s in std::iter::once(&x_sym).chain(&fresh) {
        if ctx
            .parameters()
            .iter()
            .chain(ctx.constants())
            .any(|p| p == s.name())
        {
            return Err(ReductionError::Clash(s.name().to_string()));
        }
    }

    let dx = total_derivative(x);
    if restricted_total_derivative(x, ode, None).is_zero() {
        return Err(ReductionError::StationaryX);
    }
    let mut chain = vec![zeta0.clone()];
    for _ in 1..k {
        let prev = chain.last().expect("nonempty");
        chain.push(total_derivative(prev) / &dx);
    }

    let solved = eliminate(&chain)?;

    let top = Expr::symbol(fresh[k as usize - 1].clone());
    let normal = (Expr::jet(k) - ode.rhs()).substitute(&solved);
    let slope = normal.diff(&fresh[k as usize - 1]);
    if slope.is_zero() {
        return Err(ReductionError::Degenerate(k - 1));
    }
    let g = &top - normal / slope;

    let t = Symbol::t();
    let v = Symbol::jet(0);
    let xe = Expr::symbol(x_sym.clone());
    let (g, eliminated) = if *x == Expr::t() {
        (g.substitute_one(&t, &xe), v.clone())
    } else if !x.depends_on(&v) {
        let tv = (x - &xe)
            .isolate(&t)
            .ok_or_else(|| ReductionError::NotInvertible(x.clone()))?;
        (g.substitute_one(&t, &tv), v.clone())
    } else {
        let vv = (x - &xe)
            .isolate(&v)
            .ok_or_else(|| ReductionError::NotInvertible(x.clone()))?;
        (g.substitute_one(&v, &vv), t.clone())
    };
    let mut numeric_confirmed = false;
    let g = if g.depends_on(&eliminated) {
        match equals(&g.diff(&eliminated), &Expr::zero(), TOL)? {
            Equivalence::NotEqual => {
                return Err(ReductionError::Dependence {
                    variable: eliminated,
                    expr: g,
                })
            }
            _ => {
                numeric_confirmed = true;
                let probe = if eliminated == v {
                    Expr::one()
                } else {
                    Expr::frac(1, 2)
                };
                g.substitute_one(&eliminated, &probe)
            }
        }
    } else {
        g
    };

    let mut zeta = vec![zeta0.simplify()];
    zeta.extend(derived_invariants(ode, x, zeta0, k)?);
    Ok(InvariantChain {
        x: x.simplify(),
        zeta,
        reduced: Some(top - g),
        numeric_confirmed,
    })
}

/// `ζ_0(t, v, v_1) - rhs(x(t, v))`, where `rhs` is written in [`x_symbol`].
pub fn auxiliary_ode(x: &Expr, zeta0: &Expr, rhs: &Expr) -> Expr {
    zeta0 - rhs.substitute_one(&x_symbol(), x)
}

/// `X^{[λ,i+1]}(ζ_i) = 0` on the equation, for every member of the chain.
pub fn verify_chain(
    ode: &OdeProblem,
    lp: &LambdaPair,
    chain: &InvariantChain,
) -> Result<bool, EqualityError> {
    for (i, z) in chain.zeta.iter().enumerate() {
        let u = lambda_prolong(lp, i as u32 + 1);
        let r = crate::jet::restrict_to_manifold(&u.apply(z), ode, None);
        if !equals(&r, &Expr::zero(), TOL)?.holds() {
            return Ok(false);
        }
    }
    verify_invariant(&lambda_prolong(lp, 1), &chain.x)
}

/// Whether the Laurent polynomial `target` lies in the rational span of
/// `basis`.
pub fn spans(basis: &[Expr], target: &Expr) -> bool {
    let key = |e: &Expr| -> Option<BTreeMap<Expr, BigRational>> {
        e.laurent_terms().map(|ts| ts.into_iter().collect())
    };
    let Some(goal) = key(target) else {
        return false;
    };
    let mut cols: Vec<BTreeMap<Expr, BigRational>> = Vec::new();
    for b in basis {
        match key(b) {
            Some(m) => cols.push(m),
            None => return false,
        }
    }
    let mut monos: Vec<&Expr> = goal
        .keys()
        .chain(cols.iter().flat_map(|c| c.keys()))
        .collect();
    monos.sort();
    monos.dedup();
    let ncols = cols.len() + 1;
    let rows: Vec<BTreeMap<usize, BigRational>> = monos
        .iter()
        .map(|m| {
            let mut r: BTreeMap<usize, BigRational> = cols
                .iter()
                .enumerate()
                .filter_map(|(j, c)| c.get(*m).map(|x| (j + 1, x.clone())))
                .collect();
            if let Some(x) = goal.get(*m) {
                r.insert(0, x.clone());
            }
            r
        })
        .collect();
    nullspace(rows, ncols).iter().any(|v| !v[0].is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetContext;

    fn problem(f: &str) -> OdeProblem {
        let ctx = JetContext::new(2);
        let rhs = ctx.parse(f).unwrap();
        OdeProblem::new(ctx, rhs).unwrap()
    }

    fn p(s: &str) -> Expr {
        JetContext::new(2)
            .with_parameter("x")
            .with_parameter("zeta0")
            .with_parameter("zeta1")
            .with_constant("c")
            .parse(s)
            .unwrap()
    }

    #[test]
    fn nullspace_of_small_matrix() {
        let q = |n: i64| BigRational::from_integer(n.into());
        let rows = vec![
            BTreeMap::from([(0, q(1)), (1, q(1))]),
            BTreeMap::from([(1, q(2)), (2, q(2))]),
        ];
        let ns = nullspace(rows, 3);
        assert_eq!(ns.len(), 1);
        assert_eq!(ns[0], vec![q(1), q(-1), q(1)]);
    }

    #[test]
    fn invariants_of_plain_translation() {
        let lp = LambdaPair::new(Expr::zero(), Expr::one(), Expr::zero());
        let basis = find_invariant_ansatz(&lp, 1);
        assert!(spans(&basis, &Expr::t()));
        assert!(spans(&basis, &Expr::jet(1)));
        assert!(!spans(&basis, &Expr::jet(0)));
        let u = lambda_prolong(&lp, 1);
        for b in &basis {
            assert!(verify_invariant(&u, b).unwrap());
        }
    }

    #[test]
    fn trivial_reduction() {
        let ode = problem("0");
        let chain = reduce(&ode, &Expr::t(), &Expr::jet(1)).unwrap();
        assert_eq!(chain.reduced.unwrap(), p("zeta1"));
        assert!(chain.zeta[1].is_zero());
        assert!(!chain.numeric_confirmed);
    }

    #[test]
    fn example4_reduction() {
        let ode = problem("-t^2/(4*v^3) - v - 1/(2*v)");
        let zeta0 = p("-v1/v - t/(2*v^2)");
        let chain = reduce(&ode, &Expr::t(), &zeta0).unwrap();
        assert_eq!(chain.reduced.clone().unwrap(), p("zeta1 - zeta0^2 - 1"));
        assert_eq!(chain.zeta[1], (&zeta0 * &zeta0 + 1).simplify());
        let lp = LambdaPair::new(Expr::zero(), Expr::jet(0), p("t/v^2"));
        assert!(verify_chain(&ode, &lp, &chain).unwrap());
    }

    #[test]
    fn nonaffine_invariant_is_rejected() {
        let ode = problem("0");
        let err = reduce(&ode, &Expr::t(), &p("v1^2")).unwrap_err();
        assert!(matches!(err, ReductionError::NotAffine { order: 0, .. }));
    }

    #[test]
    fn reserved_names() {
        let ctx = JetContext::new(2).with_parameter("zeta1");
        let ode = OdeProblem::new(ctx, Expr::zero()).unwrap();
        assert_eq!(
            reduce(&ode, &Expr::t(), &Expr::jet(1)),
            Err(ReductionError::Clash("zeta1".into()))
        );
    }

    #[test]
    fn auxiliary_equations() {
        let aux = auxiliary_ode(&Expr::t(), &Expr::jet(1), &Expr::zero());
        assert_eq!(aux, Expr::jet(1));
        let aux = auxiliary_ode(&Expr::t(), &p("(v1 + t)/v - v"), &p("c"));
        assert_eq!(aux * Expr::jet(0), p("v1 + t - v^2 - c*v"));
    }

    #[test]
    fn example5_reduction() {
        let ode = problem("v1^2/v + (v + t/v)*v1 - 1");
        let chain = reduce(&ode, &Expr::t(), &p("(v1 + t)/v - v")).unwrap();
        assert_eq!(chain.reduced.unwrap(), p("zeta1"));
        assert!(chain.zeta[1].is_zero());
    }

    #[test]
    fn ansatz_recovers_known_invariants() {
        let lp = LambdaPair::new(Expr::zero(), Expr::jet(0), p("t/v^2"));
        let basis = find_invariant_ansatz(&lp, 3);
        assert!(spans(&basis, &p("-v1/v - t/(2*v^2)")));
        let lp = LambdaPair::new(Expr::zero(), Expr::jet(0), p("v + t/v"));
        let basis = find_invariant_ansatz(&lp, 2);
        assert!(spans(&basis, &p("(v1 + t)/v - v")));
    }
}
