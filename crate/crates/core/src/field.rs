//! Vector fields on finite jet spaces: prolongation, λ-prolongation,
//! brackets, and the commutation relation with the total derivative.

use crate::expr::{equals, Expr, Symbol};
use crate::jet::total_derivative;

/// `ξ ∂_t + Σ η_i ∂_{v_i} + Σ η²_i ∂_{w_i}`. Components beyond the stored
/// lengths are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub xi: Expr,
    pub eta: Vec<Expr>,
    pub eta_w: Vec<Expr>,
}

impl VectorField {
    pub fn new(xi: Expr, eta: Vec<Expr>, eta_w: Vec<Expr>) -> Self {
        VectorField { xi, eta, eta_w }
    }

    /// `ρ ∂_t + ψ ∂_v`.
    pub fn point(rho: Expr, psi: Expr) -> Self {
        VectorField::new(rho, vec![psi], Vec::new())
    }

    pub fn zero() -> Self {
        VectorField::new(Expr::zero(), Vec::new(), Vec::new())
    }

    /// `∂_w`.
    pub fn d_w() -> Self {
        VectorField::new(Expr::zero(), Vec::new(), vec![Expr::one()])
    }

    /// The total derivative truncated to `J^k`:
    /// `∂_t + v_1 ∂_v + ... + v_k ∂_{v_{k-1}}`.
    pub fn total_derivative_field(k: u32) -> Self {
        VectorField::new(Expr::one(), (1..=k).map(Expr::jet).collect(), Vec::new())
    }

    pub fn eta_at(&self, i: usize) -> Expr {
        self.eta.get(i).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn eta_w_at(&self, i: usize) -> Expr {
        self.eta_w.get(i).cloned().unwrap_or_else(Expr::zero)
    }

    /// Directional derivative `V(e)`.
    pub fn apply(&self, e: &Expr) -> Expr {
        let mut acc = Vec::new();
        if !self.xi.is_zero() {
            acc.push(&self.xi * e.diff(&Symbol::t()));
        }
        for s in e.free_symbols() {
            let coeff = match s.kind() {
                crate::expr::SymbolKind::Jet(n) => self.eta_at(*n as usize),
                crate::expr::SymbolKind::Nonlocal(n) => self.eta_w_at(*n as usize),
                _ => continue,
            };
            if !coeff.is_zero() {
                acc.push(coeff * e.diff(&s));
            }
        }
        acc.into_iter().sum()
    }

    /// Every coefficient multiplied by `factor`.
    pub fn scale(&self, factor: &Expr) -> Self {
        VectorField::new(
            &self.xi * factor,
            self.eta.iter().map(|c| c * factor).collect(),
            self.eta_w.iter().map(|c| c * factor).collect(),
        )
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        let n = self.eta.len().max(other.eta.len());
        let m = self.eta_w.len().max(other.eta_w.len());
        VectorField::new(
            &self.xi - &other.xi,
            (0..n).map(|i| self.eta_at(i) - other.eta_at(i)).collect(),
            (0..m)
                .map(|i| self.eta_w_at(i) - other.eta_w_at(i))
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.xi.is_zero()
            && self.eta.iter().all(Expr::is_zero)
            && self.eta_w.iter().all(Expr::is_zero)
    }

    /// All coefficients, `ξ` first.
    pub fn coefficients(&self) -> impl Iterator<Item = &Expr> {
        std::iter::once(&self.xi)
            .chain(&self.eta)
            .chain(&self.eta_w)
    }

    /// Reconstructs `η_i = D(η_{i-1}) - D(ξ) v_i` (and likewise on `w`) from
    /// the order-zero coefficients and compares with the stored ones.
    pub fn is_prolongation(&self) -> bool {
        let rebuilt = std_prolong(
            self,
            self.eta.len().saturating_sub(1) as u32,
            self.eta_w.len().saturating_sub(1) as u32,
        );
        self.sub(&rebuilt).is_zero()
    }
}

/// Standard prolongation through order `k` on `v` and `k_w` on `w`, using
/// the full total derivative. Only `ξ`, `η_0`, `η²_0` of `x` are read.
pub fn std_prolong(x: &VectorField, k: u32, k_w: u32) -> VectorField {
    let d_xi = total_derivative(&x.xi);
    let climb = |first: Expr, order: u32, coord: fn(u32) -> Expr| {
        let mut out = vec![first];
        for i in 1..=order {
            let prev = out.last().expect("nonempty");
            out.push(total_derivative(prev) - &d_xi * coord(i));
        }
        out
    };
    let eta = climb(x.eta_at(0), k, Expr::jet);
    let eta_w = if x.eta_w.is_empty() {
        Vec::new()
    } else {
        climb(x.eta_w_at(0), k_w, Expr::nonlocal)
    };
    VectorField::new(x.xi.clone(), eta, eta_w)
}

/// A point field `ρ ∂_t + ψ ∂_v` together with `λ(t, v, v_1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaPair {
    pub rho: Expr,
    pub psi: Expr,
    pub lambda: Expr,
}

impl LambdaPair {
    pub fn new(rho: Expr, psi: Expr, lambda: Expr) -> Self {
        LambdaPair { rho, psi, lambda }
    }

    pub fn field(&self) -> VectorField {
        VectorField::point(self.rho.clone(), self.psi.clone())
    }
}

/// `X^{[λ,k]}`: `ψ_i = D(ψ_{i-1}) - D(ρ) v_i + λ (ψ_{i-1} - ρ v_i)`.
pub fn lambda_prolong(lp: &LambdaPair, k: u32) -> VectorField {
    let d_rho = total_derivative(&lp.rho);
    let mut eta = vec![lp.psi.clone()];
    for i in 1..=k {
        let prev = eta.last().expect("nonempty");
        let vi = Expr::jet(i);
        let next = total_derivative(prev) - &d_rho * &vi + &lp.lambda * (prev - &lp.rho * &vi);
        eta.push(next);
    }
    VectorField::new(lp.rho.clone(), eta, Vec::new())
}

/// Lie bracket `[a, b]`, component by component.
pub fn commutator(a: &VectorField, b: &VectorField) -> VectorField {
    let bracket = |ca: &Expr, cb: &Expr| b_apply(a, cb) - b_apply(b, ca);
    let n = a.eta.len().max(b.eta.len());
    let m = a.eta_w.len().max(b.eta_w.len());
    VectorField::new(
        bracket(&a.xi, &b.xi),
        (0..n)
            .map(|i| bracket(&a.eta_at(i), &b.eta_at(i)))
            .collect(),
        (0..m)
            .map(|i| bracket(&a.eta_w_at(i), &b.eta_w_at(i)))
            .collect(),
    )
}

fn b_apply(v: &VectorField, e: &Expr) -> Expr {
    if e.is_zero() {
        Expr::zero()
    } else {
        v.apply(e)
    }
}

/// Outcome of checking `[U, D_0] = μ D_0 + λ U` for `U = X^{[λ,k]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Commutation {
    pub mu: Expr,
    pub ok: bool,
    /// `[U, D_0](h) - μ D_0(h) - λ U(h)` for `h = t, v, ..., v_{k-1}`.
    pub residuals: Vec<Expr>,
}

/// Checks the commutation relation with `μ = -(D_0(ρ) + λρ)` on the
/// coordinate functions of order below `k`, where truncating `D_0` at
/// order `k` is exact.
pub fn check_commutation(lp: &LambdaPair, k: u32) -> Commutation {
    let u = lambda_prolong(lp, k);
    let d0 = VectorField::total_derivative_field(k);
    let mu = -(total_derivative(&lp.rho) + &lp.lambda * &lp.rho);
    let bracket = commutator(&u, &d0);
    let mut tests = vec![Expr::t()];
    tests.extend((0..k).map(Expr::jet));
    let residuals: Vec<Expr> = tests
        .iter()
        .map(|h| bracket.apply(h) - &mu * d0.apply(h) - &lp.lambda * u.apply(h))
        .collect();
    let ok = residuals
        .iter()
        .all(|r| equals(r, &Expr::zero(), 1e-9).is_ok_and(|e| e.holds()));
    Commutation { mu, ok, residuals }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetContext;

    fn ctx() -> JetContext {
        JetContext::new(2).with_nonlocal()
    }

    fn p(s: &str) -> Expr {
        ctx().parse(s).unwrap()
    }

    #[test]
    fn prolongation_examples() {
        let dv = VectorField::point(Expr::zero(), Expr::one());
        let pr = std_prolong(&dv, 2, 0);
        assert_eq!(pr.eta, vec![Expr::one(), Expr::zero(), Expr::zero()]);

        let tdv = VectorField::point(Expr::zero(), Expr::t());
        assert_eq!(std_prolong(&tdv, 1, 0).eta, vec![Expr::t(), Expr::one()]);

        let y = VectorField::new(Expr::zero(), vec![p("exp(w)*v")], vec![p("-2*exp(w)")]);
        let pr = std_prolong(&y, 2, 1);
        assert_eq!(pr.eta[1], p("exp(w)*(v1 + w1*v)"));
        assert!(pr.is_prolongation());
    }

    #[test]
    fn lambda_prolongation_examples() {
        let lp = LambdaPair::new(Expr::one(), p("v^2"), p("-v"));
        assert_eq!(lambda_prolong(&lp, 1).eta[1], p("3*v*v1 - v^3"));

        let lp = LambdaPair::new(Expr::zero(), p("v"), p("t/v^2"));
        assert_eq!(lambda_prolong(&lp, 1).eta[1], p("v1 + t/v"));

        let lp = LambdaPair::new(Expr::zero(), Expr::one(), Expr::zero());
        let x = lp.field();
        assert_eq!(lambda_prolong(&lp, 3), std_prolong(&x, 3, 0));
    }

    #[test]
    fn brackets() {
        let dt = VectorField::new(Expr::one(), Vec::new(), Vec::new());
        let dv = VectorField::point(Expr::zero(), Expr::one());
        assert!(commutator(&dt, &dv).is_zero());
        let a = VectorField::point(Expr::zero(), Expr::jet(0));
        let b = VectorField::new(Expr::zero(), vec![Expr::zero(), Expr::jet(1)], Vec::new());
        assert!(commutator(&a, &b).is_zero());
    }

    #[test]
    fn commutation_examples() {
        let c = check_commutation(&LambdaPair::new(Expr::zero(), Expr::one(), Expr::zero()), 3);
        assert!(c.ok);
        assert!(c.mu.is_zero());

        let c = check_commutation(&LambdaPair::new(Expr::zero(), p("v"), p("t/v^2")), 2);
        assert!(c.ok);
        assert!(c.mu.is_zero());

        let c = check_commutation(&LambdaPair::new(Expr::t(), Expr::one(), Expr::jet(0)), 1);
        assert!(c.ok);
        assert_eq!(c.mu, p("-(1 + v*t)"));
    }

    #[test]
    fn apply_examples() {
        let dv = VectorField::point(Expr::zero(), Expr::one());
        assert_eq!(dv.apply(&p("v^2")), p("2*v"));
        let lp = LambdaPair::new(Expr::zero(), p("v"), p("t/v^2"));
        let u = lambda_prolong(&lp, 1);
        assert!(u.apply(&p("-v1/v - t/(2*v^2)")).is_zero());
    }
}
