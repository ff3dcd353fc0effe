//! λ-symmetries and the nonlocal symmetries of the covering
//! `{v_k = f, w_1 = λ}` that induce them.

use std::fmt;

use thiserror::Error;

use crate::expr::{equals, EqualityError, Equivalence, Expr, Symbol};
use crate::field::{commutator, lambda_prolong, std_prolong, LambdaPair, VectorField};
use crate::jet::{
    restrict_to_manifold, restricted_total_derivative, CoveringSystem, OdeError, OdeProblem,
};

const TOL: f64 = 1e-9;

fn vanishes(e: &Expr) -> Result<Equivalence, EqualityError> {
    equals(e, &Expr::zero(), TOL)
}

/// Tangency of a prolonged field to the equation manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangency {
    pub ok: bool,
    pub residual: Expr,
    pub equivalence: Equivalence,
}

/// Whether `X^{[λ,k]}` is tangent to the equation: the restriction of
/// `X^{[λ,k]}(Δ)` (or of `X^{[λ,k]}(v_k - f)`) must vanish.
pub fn is_lambda_symmetry(ode: &OdeProblem, lp: &LambdaPair) -> Result<Tangency, EqualityError> {
    let u = lambda_prolong(lp, ode.order());
    let residual = restrict_to_manifold(&u.apply(&ode.residual()), ode, None);
    let equivalence = vanishes(&residual)?;
    Ok(Tangency {
        ok: equivalence.holds(),
        residual,
        equivalence,
    })
}

/// The covering `{v_k = f, w_1 = λ}`.
pub fn build_covering(ode: &OdeProblem, lambda: &Expr) -> Result<CoveringSystem, OdeError> {
    CoveringSystem::new(ode.clone(), lambda.clone())
}

/// The linear first-order equation for `χ(t, v, ..., v_{k-1})`:
/// `R[χ] = D̄_0(χ) + λχ - S` with
/// `S = X^{[λ,1]}(λ) + λ²ρ + λ(∂_t ρ + v_1 ∂_v ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiPde {
    ode: OdeProblem,
    lambda: Expr,
    source: Expr,
}

impl ChiPde {
    pub fn lambda(&self) -> &Expr {
        &self.lambda
    }

    pub fn source(&self) -> &Expr {
        &self.source
    }

    /// `R[χ]` for a concrete `χ`.
    pub fn residual(&self, chi: &Expr) -> Expr {
        restricted_total_derivative(chi, &self.ode, None) + &self.lambda * chi - &self.source
    }
}

impl fmt::Display for ChiPde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.ode.order();
        write!(f, "d_t(chi)")?;
        for i in 0..k {
            let coeff = if i + 1 < k {
                Expr::jet(i + 1)
            } else {
                self.ode.rhs().clone()
            };
            write!(f, " + ({coeff})*d_{}(chi)", Symbol::jet(i))?;
        }
        write!(f, " + ({})*chi - ({}) = 0", self.lambda, self.source)
    }
}

pub fn chi_pde(ode: &OdeProblem, lp: &LambdaPair) -> ChiPde {
    let x1 = lambda_prolong(lp, 1);
    let t = Symbol::t();
    let v = Symbol::jet(0);
    let rho = &lp.rho;
    let lambda = &lp.lambda;
    let source = x1.apply(lambda)
        + lambda * lambda * rho
        + lambda * (rho.diff(&t) + Expr::jet(1) * rho.diff(&v));
    ChiPde {
        ode: ode.clone(),
        lambda: lambda.clone(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChiStatus {
    Solved,
    Unsolved,
    /// The ansatz solver does not apply; a supplied `χ` was checked
    /// directly, or none is available.
    VerifiedOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiResult {
    pub status: ChiStatus,
    pub chi: Option<Expr>,
    /// Coefficient equations left unsatisfied, in `C(t)` and `C'(t)` when
    /// they come from the ansatz.
    pub residual_system: Vec<Expr>,
    pub note: Option<String>,
}

impl ChiResult {
    fn unsolved(residual_system: Vec<Expr>, note: impl Into<String>) -> Self {
        ChiResult {
            status: ChiStatus::Unsolved,
            chi: None,
            residual_system,
            note: Some(note.into()),
        }
    }
}

/// Checks a supplied `χ` against the equation.
pub fn verify_chi(
    ode: &OdeProblem,
    lp: &LambdaPair,
    chi: &Expr,
) -> Result<ChiResult, EqualityError> {
    let pde = chi_pde(ode, lp);
    if chi.max_jet_order().is_some_and(|m| m >= ode.order()) || chi.max_nonlocal_order().is_some() {
        return Ok(ChiResult::unsolved(
            Vec::new(),
            "chi may depend only on t, v, ..., v_{k-1}",
        ));
    }
    let r = pde.residual(chi);
    if vanishes(&r)?.holds() {
        Ok(ChiResult {
            status: ChiStatus::VerifiedOnly,
            chi: Some(chi.clone()),
            residual_system: Vec::new(),
            note: None,
        })
    } else {
        Ok(ChiResult::unsolved(
            vec![r],
            "supplied chi does not satisfy the equation",
        ))
    }
}

/// `Σ c v^s` with `c`, `s` free of `v`, one pair per summand.
fn power_terms(e: &Expr, v: &Symbol) -> Option<Vec<(Expr, Expr)>> {
    if e.is_zero() {
        return Some(Vec::new());
    }
    let ve = Expr::symbol(v.clone());
    e.summands()
        .into_iter()
        .map(|s| {
            let s = s.simplify();
            let exponent = &ve * s.diff(v) / &s;
            if exponent.depends_on(v) {
                return None;
            }
            let coeff = &s * ve.pow(&-&exponent);
            (!coeff.depends_on(v)).then_some((coeff, exponent))
        })
        .collect()
}

/// `∫ c v^s dv` termwise.
fn integrate_powers(terms: &[(Expr, Expr)], v: &Symbol) -> Expr {
    let ve = Expr::symbol(v.clone());
    terms
        .iter()
        .map(|(c, s)| {
            let s1 = s + Expr::one();
            if s1.is_zero() {
                c * ve.ln()
            } else {
                c * ve.pow(&s1) / s1
            }
        })
        .sum()
}

/// `μ = v^a exp(G)` with `∂_v log μ = coefficient`.
fn integrating_factor(coefficient: &Expr, v: &Symbol) -> Option<(Expr, Expr)> {
    let terms = power_terms(coefficient, v)?;
    let (logs, rest): (Vec<_>, Vec<_>) = terms
        .into_iter()
        .partition(|(_, s)| (s + Expr::one()).is_zero());
    let a: Expr = logs.into_iter().map(|(c, _)| c).sum();
    let g = integrate_powers(&rest, v);
    Some((a, g))
}

/// `∫ μ S dv` for `μ = v^a exp(G)`: pure powers when `G = 0`, or
/// polynomial times `exp(αv)` when `G = αv`.
fn particular_integral(a: &Expr, g: &Expr, s1: &Expr, v: &Symbol) -> Option<Expr> {
    if s1.is_zero() {
        return Some(Expr::zero());
    }
    let ve = Expr::symbol(v.clone());
    let poly = ve.pow(a) * s1;
    if g.is_zero() {
        return Some(integrate_powers(&power_terms(&poly, v)?, v));
    }
    let alpha = g.diff(v);
    if alpha.depends_on(v) || !(g - &alpha * &ve).is_zero() {
        return None;
    }
    let mut acc = Expr::zero();
    for (c, s) in power_terms(&poly, v)? {
        let n = s.as_integer().filter(|n| *n >= 0)?;
        let mut falling = Expr::one();
        for j in 0..=n {
            let sign = if j % 2 == 0 {
                Expr::one()
            } else {
                -Expr::one()
            };
            acc = acc + &c * sign * &falling * ve.powi(n - j) / alpha.powi(j + 1);
            falling = falling * Expr::integer(n - j);
        }
    }
    Some(acc * g.exp())
}

fn placeholder(order: u32) -> Symbol {
    Symbol::new(&format!("C#{order}"), crate::expr::SymbolKind::Parameter)
}

/// Replaces the placeholders by `C(t)` and `C'(t)` for display.
fn with_applications(e: &Expr) -> Expr {
    let mut b = crate::expr::Bindings::new();
    b.insert(placeholder(0), Expr::apply("C", 0));
    b.insert(placeholder(1), Expr::apply("C", 1));
    e.substitute(&b)
}

/// Solves for `χ = χ(t, v)` when `k = 2`. `R[χ]` is collected in powers
/// of `v_1`; the linear coefficient is integrated in `v` as
/// `χ = (C(t) + ∫ μ S_1 dv) / μ`, then `C(t)` is fixed from the remaining
/// coefficients and the result checked against `R`.
pub fn solve_chi_ansatz(ode: &OdeProblem, lp: &LambdaPair) -> Result<ChiResult, EqualityError> {
    if ode.order() != 2 {
        return Ok(ChiResult {
            status: ChiStatus::VerifiedOnly,
            chi: None,
            residual_system: Vec::new(),
            note: Some("the chi(t, v) ansatz applies to second-order equations only".into()),
        });
    }
    let pde = chi_pde(ode, lp);
    let t = Symbol::t();
    let v = Symbol::jet(0);
    let v1 = Symbol::jet(1);
    let (Some(lam), Some(src)) = (
        pde.lambda.coefficients_in(&v1),
        pde.source.coefficients_in(&v1),
    ) else {
        return Ok(ChiResult::unsolved(
            Vec::new(),
            "lambda or the source term is not polynomial in v1",
        ));
    };
    let at = |xs: &[Expr], i: usize| xs.get(i).cloned().unwrap_or_else(Expr::zero);

    // χ_v + λ_1 χ = S_1
    let lam1 = at(&lam, 1);
    let src1 = at(&src, 1);
    let linear_equation = || {
        let chi = Expr::symbol(Symbol::new("chi", crate::expr::SymbolKind::Parameter));
        let chi_v = Expr::symbol(Symbol::new("chi_v", crate::expr::SymbolKind::Parameter));
        vec![chi_v + &lam1 * chi - &src1]
    };
    let Some((a, g)) = integrating_factor(&lam1, &v) else {
        return Ok(ChiResult::unsolved(
            linear_equation(),
            "no integrating factor in the table",
        ));
    };
    let Some(particular) = particular_integral(&a, &g, &src1, &v) else {
        return Ok(ChiResult::unsolved(
            linear_equation(),
            "non-elementary integral in v",
        ));
    };
    let mu = Expr::symbol(v.clone()).pow(&a) * g.exp();
    let h = Expr::one() / &mu;
    let q = particular / &mu;

    let c0 = Expr::symbol(placeholder(0));
    let c1 = Expr::symbol(placeholder(1));
    let lam0 = at(&lam, 0);
    let mut equations =
        vec![&h * &c1 + (h.diff(&t) + &lam0 * &h) * &c0 + q.diff(&t) + &lam0 * &q - at(&src, 0)];
    for j in 2..lam.len().max(src.len()) {
        let lj = at(&lam, j);
        equations.push(&lj * &h * &c0 + &lj * &q - at(&src, j));
    }

    let mut system = Vec::new();
    for e in &equations {
        for (_, coeff) in e.collect_in(&v) {
            if !coeff.is_zero() {
                system.push(coeff);
            }
        }
    }
    let zero_c = |e: &Expr| {
        e.substitute_one(&placeholder(0), &Expr::zero())
            .substitute_one(&placeholder(1), &Expr::zero())
    };

    let mut candidates: Vec<Expr> = Vec::new();
    for e in &system {
        let alpha = e.diff(&placeholder(1));
        let beta = e.diff(&placeholder(0));
        let gamma = zero_c(e);
        if alpha.is_zero() && !beta.is_zero() {
            candidates.push(-(gamma / beta));
        } else if beta.is_zero() && !alpha.is_zero() {
            if let Some(terms) = power_terms(&-(gamma / alpha), &t) {
                candidates.push(integrate_powers(&terms, &t));
            }
        }
    }
    if system.iter().all(|e| zero_c(e).is_zero()) {
        candidates.push(Expr::zero());
    }
    candidates.dedup();

    for c in candidates {
        if c.depends_on(&v) || c.max_jet_order().is_some() {
            continue;
        }
        let chi = &c * &h + &q;
        if vanishes(&pde.residual(&chi))?.holds() {
            return Ok(ChiResult {
                status: ChiStatus::Solved,
                chi: Some(chi),
                residual_system: Vec::new(),
                note: None,
            });
        }
    }
    Ok(ChiResult::unsolved(
        system.iter().map(with_applications).collect(),
        "the coefficient equations for C(t) are incompatible",
    ))
}

/// A symmetry of the covering, with the tag recording whether
/// `[∂_w, Y] = Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlocalSymmetry {
    pub field: VectorField,
    pub exponential: bool,
}

impl NonlocalSymmetry {
    pub fn new(field: VectorField) -> Result<Self, EqualityError> {
        let exponential = is_exponential(&field)?;
        Ok(NonlocalSymmetry { field, exponential })
    }
}

fn is_exponential(y: &VectorField) -> Result<bool, EqualityError> {
    let diff = commutator(&VectorField::d_w(), y).sub(y);
    for c in diff.coefficients() {
        if !vanishes(c)?.holds() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NonlocalError {
    #[error("chi does not satisfy its equation: residual {0}")]
    ChiFails(Expr),
    #[error("reconstructed field is not a symmetry of the covering")]
    NotTangent(NonlocalCheck),
    #[error("field is not of the form exp(w) times a w-free field")]
    NotExponential,
    #[error(transparent)]
    Cover(#[from] OdeError),
    #[error(transparent)]
    Sampling(#[from] EqualityError),
}

/// The three conditions on a candidate symmetry of the covering.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlocalCheck {
    pub exponential: bool,
    /// Restriction of `Y(Δ)` (or `Y(v_k - f)`).
    pub equation_residual: Expr,
    pub equation_tangent: bool,
    /// Restriction of `Y(w_1 - λ)`.
    pub cover_residual: Expr,
    pub cover_tangent: bool,
}

impl NonlocalCheck {
    pub fn ok(&self) -> bool {
        self.exponential && self.equation_tangent && self.cover_tangent
    }
}

impl fmt::Display for NonlocalCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[d_w, Y] = Y: {}; equation residual: {}; covering residual: {}",
            self.exponential, self.equation_residual, self.cover_residual
        )
    }
}

pub fn verify_nonlocal_symmetry(
    cover: &CoveringSystem,
    y: &NonlocalSymmetry,
) -> Result<NonlocalCheck, EqualityError> {
    let ode = cover.base();
    let exponential = is_exponential(&y.field)?;
    let equation_residual = restrict_to_manifold(&y.field.apply(&ode.residual()), ode, Some(cover));
    let cover_target = Expr::nonlocal(1) - cover.h();
    let cover_residual = restrict_to_manifold(&y.field.apply(&cover_target), ode, Some(cover));
    Ok(NonlocalCheck {
        exponential,
        equation_tangent: vanishes(&equation_residual)?.holds(),
        equation_residual,
        cover_tangent: vanishes(&cover_residual)?.holds(),
        cover_residual,
    })
}

/// The prolongation of `e^w (ρ ∂_t + ψ ∂_v + χ ∂_w)` through the equation's
/// order, checked to be a symmetry of the covering.
pub fn reconstruct_nonlocal(
    ode: &OdeProblem,
    lp: &LambdaPair,
    chi: &Expr,
) -> Result<NonlocalSymmetry, NonlocalError> {
    let r = chi_pde(ode, lp).residual(chi);
    if !vanishes(&r)?.holds() {
        return Err(NonlocalError::ChiFails(r));
    }
    let cover = build_covering(ode, &lp.lambda)?;
    let ew = Expr::nonlocal(0).exp();
    let base = VectorField::new(&ew * &lp.rho, vec![&ew * &lp.psi], vec![&ew * chi]);
    let k = ode.order();
    let y = NonlocalSymmetry::new(std_prolong(&base, k, k))?;
    let check = verify_nonlocal_symmetry(&cover, &y)?;
    if !check.ok() {
        return Err(NonlocalError::NotTangent(check));
    }
    Ok(y)
}

/// Recovers `(ρ, ψ, λ)` from an exponential-form symmetry of the covering.
pub fn extract_lambda_from_nonlocal(
    y: &NonlocalSymmetry,
    cover: &CoveringSystem,
) -> Result<LambdaPair, NonlocalError> {
    if !y.exponential {
        return Err(NonlocalError::NotExponential);
    }
    let w = Symbol::nonlocal(0);
    let ew = Expr::nonlocal(0).exp();
    let rho = &y.field.xi / &ew;
    let psi = y.field.eta_at(0) / &ew;
    if rho.depends_on(&w) || psi.depends_on(&w) {
        return Err(NonlocalError::NotExponential);
    }
    Ok(LambdaPair::new(rho, psi, cover.h().clone()))
}
