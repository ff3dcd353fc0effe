//! Jet contexts, the total derivative, and restriction to an equation
//! manifold and its one-dimensional coverings.

use thiserror::Error;

use crate::expr::{equals, parse::coordinate_symbol, Bindings, Expr, Symbol};

/// Names and coordinates available to one problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetContext {
    order: u32,
    nonlocal: bool,
    parameters: Vec<String>,
    constants: Vec<String>,
    functions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("`{0}` is reserved for a coordinate or elementary function")]
    Reserved(String),
    #[error("`{0}` is declared twice")]
    Duplicate(String),
}

impl JetContext {
    /// Context for an equation of order `order` (at least 1).
    pub fn new(order: u32) -> Self {
        assert!(order >= 1, "equation order must be at least 1");
        JetContext {
            order,
            nonlocal: false,
            parameters: Vec::new(),
            constants: Vec::new(),
            functions: Vec::new(),
        }
    }

    pub fn with_nonlocal(mut self) -> Self {
        self.nonlocal = true;
        self
    }

    pub fn with_parameter(mut self, name: &str) -> Self {
        self.parameters.push(name.to_string());
        self
    }

    pub fn with_constant(mut self, name: &str) -> Self {
        self.constants.push(name.to_string());
        self
    }

    pub fn with_function(mut self, name: &str) -> Self {
        self.functions.push(name.to_string());
        self
    }

    /// Rejects declarations that shadow coordinates, elementary functions,
    /// or each other.
    pub fn validate(&self) -> Result<(), ContextError> {
        let mut seen = std::collections::BTreeSet::new();
        let names = self
            .parameters
            .iter()
            .chain(&self.constants)
            .chain(&self.functions);
        for name in names {
            let reserved = coordinate_symbol(name, true).is_some()
                || crate::expr::Func::from_name(name).is_some();
            if reserved || name.is_empty() {
                return Err(ContextError::Reserved(name.clone()));
            }
            if !seen.insert(name.as_str()) {
                return Err(ContextError::Duplicate(name.clone()));
            }
        }
        Ok(())
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn has_nonlocal(&self) -> bool {
        self.nonlocal
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn functions(&self) -> &[String] {
        &self.functions
    }

    pub fn has_function(&self, name: &str) -> bool {
        self.functions.iter().any(|f| f == name)
    }

    /// Symbol for an identifier. Jet orders are unbounded: the context
    /// extends on demand.
    pub fn resolve(&self, name: &str) -> Option<Symbol> {
        if let Some(s) = coordinate_symbol(name, self.nonlocal) {
            return Some(s);
        }
        if self.parameters.iter().any(|p| p == name) {
            return Some(Symbol::parameter(name));
        }
        if self.constants.iter().any(|c| c == name) {
            return Some(Symbol::constant(name));
        }
        None
    }

    /// `v, v1, ..., v_{k-1}`.
    pub fn lower_jets(&self) -> Vec<Symbol> {
        (0..self.order).map(Symbol::jet).collect()
    }

    /// Free coordinates of the equation manifold, then parameters and
    /// constants.
    pub fn base_symbols(&self) -> Vec<Symbol> {
        let mut out = vec![Symbol::t()];
        out.extend(self.lower_jets());
        if self.nonlocal {
            out.push(Symbol::nonlocal(0));
        }
        out.extend(self.parameters.iter().map(|p| Symbol::parameter(p)));
        out.extend(self.constants.iter().map(|c| Symbol::constant(c)));
        out
    }

    pub fn parse(&self, text: &str) -> Result<Expr, crate::expr::ParseError> {
        crate::expr::parse(text, self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OdeError {
    #[error("right-hand side depends on v{found}, but the equation has order {order}")]
    RhsTooHigh { found: u32, order: u32 },
    #[error("equation must not involve the nonlocal variable")]
    Nonlocal,
    #[error("residual is not affine in v{0} with a nonzero coefficient")]
    NotNormalizable(u32),
    #[error("residual and right-hand side disagree on the manifold")]
    Inconsistent,
    #[error("covering coefficient depends on v{found}, but the equation has order {order}")]
    CoverTooHigh { found: u32, order: u32 },
    #[error("covering coefficient must not depend on derivatives of w")]
    CoverNonlocal,
}

/// A scalar ODE `v_k = f(t, v, ..., v_{k-1})`, optionally with the residual
/// `Δ(t, v, ..., v_k)` it was given as.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeProblem {
    ctx: JetContext,
    rhs: Expr,
    delta: Option<Expr>,
}

impl OdeProblem {
    pub fn new(ctx: JetContext, rhs: Expr) -> Result<Self, OdeError> {
        let k = ctx.order();
        if let Some(found) = rhs.max_jet_order().filter(|&m| m >= k) {
            return Err(OdeError::RhsTooHigh { found, order: k });
        }
        if rhs.max_nonlocal_order().is_some() {
            return Err(OdeError::Nonlocal);
        }
        Ok(OdeProblem {
            ctx,
            rhs: rhs.simplify(),
            delta: None,
        })
    }

    /// Normal form obtained by isolating `v_k` in `delta`.
    pub fn from_delta(ctx: JetContext, delta: Expr) -> Result<Self, OdeError> {
        let k = ctx.order();
        if let Some(found) = delta.max_jet_order().filter(|&m| m > k) {
            return Err(OdeError::RhsTooHigh { found, order: k });
        }
        let rhs = delta
            .isolate(&Symbol::jet(k))
            .ok_or(OdeError::NotNormalizable(k))?;
        let mut ode = OdeProblem::new(ctx, rhs)?;
        ode.delta = Some(delta.simplify());
        Ok(ode)
    }

    /// Both forms given; they must agree on the manifold.
    pub fn with_delta(ctx: JetContext, rhs: Expr, delta: Expr) -> Result<Self, OdeError> {
        let mut ode = OdeProblem::new(ctx, rhs)?;
        let on_manifold = delta.substitute_one(&Symbol::jet(ode.order()), &ode.rhs);
        match equals(&on_manifold, &Expr::zero(), 1e-9) {
            Ok(eq) if eq.holds() => {}
            _ => return Err(OdeError::Inconsistent),
        }
        ode.delta = Some(delta.simplify());
        Ok(ode)
    }

    pub fn ctx(&self) -> &JetContext {
        &self.ctx
    }

    pub fn order(&self) -> u32 {
        self.ctx.order()
    }

    pub fn rhs(&self) -> &Expr {
        &self.rhs
    }

    pub fn delta(&self) -> Option<&Expr> {
        self.delta.as_ref()
    }

    /// `Δ` when given, otherwise `v_k - f`.
    pub fn residual(&self) -> Expr {
        match &self.delta {
            Some(d) => d.clone(),
            None => Expr::jet(self.order()) - &self.rhs,
        }
    }
}

/// The system `{v_k = f, w_1 = H}` with `H` depending on
/// `(t, v, ..., v_{k-1}, w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveringSystem {
    base: OdeProblem,
    h: Expr,
}

impl CoveringSystem {
    pub fn new(base: OdeProblem, h: Expr) -> Result<Self, OdeError> {
        let k = base.order();
        if let Some(found) = h.max_jet_order().filter(|&m| m >= k) {
            return Err(OdeError::CoverTooHigh { found, order: k });
        }
        if h.max_nonlocal_order().is_some_and(|m| m > 0) {
            return Err(OdeError::CoverNonlocal);
        }
        let mut base = base;
        base.ctx.nonlocal = true;
        Ok(CoveringSystem {
            base,
            h: h.simplify(),
        })
    }

    pub fn base(&self) -> &OdeProblem {
        &self.base
    }

    pub fn h(&self) -> &Expr {
        &self.h
    }

    pub fn ctx(&self) -> &JetContext {
        self.base.ctx()
    }
}

/// `D(e) = ∂_t e + Σ v_{i+1} ∂_{v_i} e + Σ w_{i+1} ∂_{w_i} e`.
pub fn total_derivative(e: &Expr) -> Expr {
    let mut acc = e.diff(&Symbol::t());
    for s in e.free_symbols() {
        let next = match s.kind() {
            crate::expr::SymbolKind::Jet(n) => Expr::jet(n + 1),
            crate::expr::SymbolKind::Nonlocal(n) => Expr::nonlocal(n + 1),
            _ => continue,
        };
        acc = acc + next * e.diff(&s);
    }
    acc
}

/// Bindings `v_{k+s} ↦ D̄^s(f)` for `s < v_depth` and `w_{1+s} ↦ D̄^s(H)` for
/// `s < w_depth`, each over `(t, v, ..., v_{k-1}, w)`.
pub fn manifold_bindings(
    ode: &OdeProblem,
    cover: Option<&CoveringSystem>,
    v_depth: u32,
    w_depth: u32,
) -> Bindings {
    let k = ode.order();
    let mut first = Bindings::new();
    first.insert(Symbol::jet(k), ode.rhs().clone());
    if let Some(c) = cover {
        first.insert(Symbol::nonlocal(1), c.h().clone());
    }
    let mut out = Bindings::new();
    let mut v_rep = ode.rhs().clone();
    for s in 0..v_depth {
        out.insert(Symbol::jet(k + s), v_rep.clone());
        if s + 1 < v_depth {
            v_rep = total_derivative(&v_rep).substitute(&first);
        }
    }
    if let Some(c) = cover {
        let mut w_rep = c.h().clone();
        for s in 0..w_depth {
            out.insert(Symbol::nonlocal(1 + s), w_rep.clone());
            if s + 1 < w_depth {
                w_rep = total_derivative(&w_rep).substitute(&first);
            }
        }
    }
    out
}

/// Replaces every `v_{k+s}` by `D̄₀^s(f)` and, with a covering, every
/// `w_{1+s}` by `D̃^s(H)`.
pub fn restrict_to_manifold(e: &Expr, ode: &OdeProblem, cover: Option<&CoveringSystem>) -> Expr {
    let k = ode.order();
    let v_depth = e.max_jet_order().map_or(0, |m| (m + 1).saturating_sub(k));
    let w_depth = match cover {
        Some(_) => e.max_nonlocal_order().unwrap_or(0),
        None => 0,
    };
    if v_depth == 0 && w_depth == 0 {
        return e.simplify();
    }
    e.substitute(&manifold_bindings(ode, cover, v_depth, w_depth))
}

/// `restrict_to_manifold(total_derivative(e))`.
pub fn restricted_total_derivative(
    e: &Expr,
    ode: &OdeProblem,
    cover: Option<&CoveringSystem>,
) -> Expr {
    restrict_to_manifold(&total_derivative(e), ode, cover)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example4() -> OdeProblem {
        let ctx = JetContext::new(2);
        let f = ctx.parse("-t^2/(4*v^3) - v - 1/(2*v)").unwrap();
        OdeProblem::new(ctx, f).unwrap()
    }

    #[test]
    fn total_derivative_examples() {
        let ctx = JetContext::new(2).with_nonlocal();
        assert_eq!(total_derivative(&Expr::jet(0)), Expr::jet(1));
        let e = ctx.parse("t/v^2").unwrap();
        assert_eq!(
            total_derivative(&e),
            ctx.parse("1/v^2 - 2*t*v1/v^3").unwrap()
        );
        let e = ctx.parse("exp(w)*v").unwrap();
        assert_eq!(
            total_derivative(&e),
            ctx.parse("exp(w)*w1*v + exp(w)*v1").unwrap()
        );
    }

    #[test]
    fn restriction_examples() {
        let ode = example4();
        assert_eq!(
            restrict_to_manifold(&Expr::jet(2), &ode, None),
            ode.rhs().clone()
        );
        assert_eq!(
            restrict_to_manifold(&Expr::jet(1), &ode, None),
            Expr::jet(1)
        );
        let lambda = ode.ctx().parse("t/v^2").unwrap();
        let cover = CoveringSystem::new(ode.clone(), lambda.clone()).unwrap();
        assert_eq!(
            restrict_to_manifold(&Expr::nonlocal(1), &ode, Some(&cover)),
            lambda
        );
        assert_eq!(
            restricted_total_derivative(&Expr::nonlocal(0), &ode, Some(&cover)),
            lambda
        );
        assert_eq!(
            restricted_total_derivative(&Expr::jet(1), &ode, None),
            ode.rhs().clone()
        );
    }

    #[test]
    fn delta_is_normalized_by_isolation() {
        let ctx = JetContext::new(2);
        let delta = ctx.parse("v*v2 - 3*v1^2").unwrap();
        let ode = OdeProblem::from_delta(ctx.clone(), delta).unwrap();
        assert_eq!(ode.rhs(), &ctx.parse("3*v1^2/v").unwrap());
        assert!(OdeProblem::from_delta(ctx.clone(), ctx.parse("v2^2 - v").unwrap()).is_err());
        assert!(OdeProblem::new(ctx.clone(), ctx.parse("v2").unwrap()).is_err());
    }

    #[test]
    fn declarations_may_not_shadow_coordinates() {
        assert!(JetContext::new(1).with_parameter("v3").validate().is_err());
        assert!(JetContext::new(1).with_parameter("exp").validate().is_err());
        assert!(JetContext::new(1)
            .with_parameter("p")
            .with_constant("p")
            .validate()
            .is_err());
        assert!(JetContext::new(1)
            .with_parameter("p")
            .with_constant("c1")
            .with_function("g")
            .validate()
            .is_ok());
    }
}
