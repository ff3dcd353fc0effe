use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::eval::{eval, summand_scale, Point};
use crate::expr::{Expr, FnApp, Symbol, SymbolKind};
use crate::jet::{manifold_bindings, CoveringSystem, OdeProblem};

/// Sampling intervals: per-name overrides over defaults chosen by symbol
/// kind.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRanges {
    pub overrides: BTreeMap<String, (f64, f64)>,
    /// Interval for independent samples of uninterpreted applications.
    pub functions: (f64, f64),
}

impl Default for SampleRanges {
    fn default() -> Self {
        SampleRanges {
            overrides: BTreeMap::new(),
            functions: (0.5, 2.0),
        }
    }
}

impl SampleRanges {
    pub fn range(&self, s: &Symbol) -> (f64, f64) {
        if let Some(r) = self.overrides.get(s.name()) {
            return *r;
        }
        match s.kind() {
            SymbolKind::Independent => (-1.0, 1.0),
            SymbolKind::Jet(0) => (0.5, 2.0),
            SymbolKind::Jet(_) => (-2.0, 2.0),
            SymbolKind::Nonlocal(_) => (-1.0, 1.0),
            SymbolKind::Parameter => (0.5, 2.0),
            SymbolKind::Constant => (-1.0, 1.0),
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

/// Independent uniform draw for every symbol and application.
pub fn random_point<'a>(
    symbols: impl IntoIterator<Item = &'a Symbol>,
    apps: impl IntoIterator<Item = &'a FnApp>,
    ranges: &SampleRanges,
    rng: &mut ChaCha8Rng,
) -> Point {
    let mut p = Point::new();
    for s in symbols {
        p.set(s.clone(), uniform(rng, ranges.range(s)));
    }
    for a in apps {
        p.functions
            .insert(a.clone(), uniform(rng, ranges.functions));
    }
    p
}

/// How to draw sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePlan {
    pub ranges: SampleRanges,
    /// Points where any of these has magnitude at most `1e-3` are rejected.
    pub excluded: Vec<Expr>,
    pub count: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Fixed values for parameters and constants.
    pub fixed: BTreeMap<String, f64>,
    /// Concrete `g(t)` for uninterpreted functions; the others are sampled.
    pub instantiations: BTreeMap<String, Expr>,
    /// Number of jet orders above the equation's order to fill in.
    pub prolong: u32,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            ranges: SampleRanges::default(),
            excluded: Vec::new(),
            count: 100,
            seed: 42,
            tolerance: 1e-9,
            fixed: BTreeMap::new(),
            instantiations: BTreeMap::new(),
            prolong: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SampleError {
    #[error("sampling exhausted: {accepted} of {wanted} points after {attempts} draws")]
    Exhausted {
        accepted: usize,
        wanted: usize,
        attempts: usize,
    },
}

const EXCLUSION_RADIUS: f64 = 1e-3;

struct Drawer<'a> {
    plan: &'a SamplePlan,
    rng: ChaCha8Rng,
    /// `n`-th derivatives of instantiated functions, by application.
    derived: BTreeMap<FnApp, Option<Expr>>,
}

impl<'a> Drawer<'a> {
    fn new(plan: &'a SamplePlan, apps: &BTreeSet<FnApp>) -> Self {
        let t = Symbol::t();
        let derived = apps
            .iter()
            .map(|a| {
                let inst = plan
                    .instantiations
                    .get(&*a.name)
                    .map(|g| g.diff_n(&t, a.order));
                (a.clone(), inst)
            })
            .collect();
        Drawer {
            plan,
            rng: ChaCha8Rng::seed_from_u64(plan.seed),
            derived,
        }
    }

    /// Draws the free symbols, then the applications, which may depend on
    /// the sampled `t`. `None` when an instantiation fails to evaluate.
    fn draw(&mut self, symbols: &[Symbol]) -> Option<Point> {
        let mut p = Point::new();
        for s in symbols {
            let x = match self.plan.fixed.get(s.name()) {
                Some(x) if !matches!(s.kind(), SymbolKind::Jet(_) | SymbolKind::Nonlocal(_)) => *x,
                _ => uniform(&mut self.rng, self.plan.ranges.range(s)),
            };
            p.set(s.clone(), x);
        }
        let mut ok = true;
        for (a, inst) in &self.derived {
            let x = match inst {
                Some(g) => match eval(g, &p) {
                    Ok(x) => x,
                    Err(_) => {
                        ok = false;
                        0.0
                    }
                },
                None => uniform(&mut self.rng, self.plan.ranges.functions),
            };
            p.functions.insert(a.clone(), x);
        }
        ok.then_some(p)
    }

    fn admissible(&self, p: &Point) -> bool {
        self.plan
            .excluded
            .iter()
            .all(|d| eval(d, p).is_ok_and(|x| x.abs() > EXCLUSION_RADIUS))
    }
}

fn collect_apps<'a>(exprs: impl IntoIterator<Item = &'a Expr>) -> BTreeSet<FnApp> {
    exprs.into_iter().flat_map(Expr::applications).collect()
}

/// Points of the equation manifold (and covering, when given): the base
/// coordinates `(t, v, ..., v_{k-1}, w)` are drawn, and `v_k, ..., v_{k+m}`
/// and `w_1, ..., w_{1+m}` are computed, with `m = plan.prolong`.
pub fn sample_manifold(
    ode: &OdeProblem,
    cover: Option<&CoveringSystem>,
    plan: &SamplePlan,
) -> Result<Vec<Point>, SampleError> {
    let depth = plan.prolong + 1;
    let bindings = manifold_bindings(ode, cover, depth, if cover.is_some() { depth } else { 0 });
    let ctx = cover.map_or(ode.ctx(), |c| c.ctx());
    let mut symbols = ctx.base_symbols();
    for e in bindings.values().chain(&plan.excluded) {
        for s in e.free_symbols() {
            let derived = bindings.contains_key(&s);
            if !derived && !symbols.contains(&s) {
                symbols.push(s);
            }
        }
    }
    let mut apps = collect_apps(bindings.values().chain(&plan.excluded));
    let top = ode.order() + depth + 1;
    for name in ctx.functions() {
        apps.extend((0..=top).map(|n| FnApp::new(name, n)));
    }
    let mut drawer = Drawer::new(plan, &apps);
    let budget = plan.count.max(1) * 100;
    let mut out = Vec::with_capacity(plan.count);
    let mut attempts = 0;
    while out.len() < plan.count && attempts < budget {
        attempts += 1;
        let Some(mut p) = drawer.draw(&symbols) else {
            continue;
        };
        if !drawer.admissible(&p) {
            continue;
        }
        let mut ok = true;
        for (s, rep) in &bindings {
            match eval(rep, &p) {
                Ok(x) => p.set(s.clone(), x),
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            out.push(p);
        }
    }
    if out.len() < plan.count {
        return Err(SampleError::Exhausted {
            accepted: out.len(),
            wanted: plan.count,
            attempts,
        });
    }
    Ok(out)
}

/// Points drawn independently for every symbol of `exprs`.
pub fn sample_box(exprs: &[&Expr], plan: &SamplePlan) -> Result<Vec<Point>, SampleError> {
    let mut symbols: Vec<Symbol> = Vec::new();
    for e in exprs.iter().copied().chain(&plan.excluded) {
        for s in e.free_symbols() {
            if !symbols.contains(&s) {
                symbols.push(s);
            }
        }
    }
    symbols.sort();
    let apps = collect_apps(exprs.iter().copied().chain(&plan.excluded));
    let mut drawer = Drawer::new(plan, &apps);
    let budget = plan.count.max(1) * 100;
    let mut out = Vec::with_capacity(plan.count);
    let mut attempts = 0;
    while out.len() < plan.count && attempts < budget {
        attempts += 1;
        let Some(p) = drawer.draw(&symbols) else {
            continue;
        };
        if drawer.admissible(&p) && exprs.iter().all(|e| eval(e, &p).is_ok()) {
            out.push(p);
        }
    }
    if out.len() < plan.count {
        return Err(SampleError::Exhausted {
            accepted: out.len(),
            wanted: plan.count,
            attempts,
        });
    }
    Ok(out)
}

/// Residual statistics over a batch of points. A point fails when its
/// relative residual exceeds the tolerance; residuals at most `1e-12` in
/// magnitude count as exact zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub max_abs: f64,
    pub max_rel: f64,
    pub points_tested: usize,
    pub failures: Vec<(Point, f64)>,
}

impl ResidualReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub const ABSOLUTE_FLOOR: f64 = 1e-12;

/// Accumulates `(value, scale)` pairs into a report.
#[derive(Debug)]
pub struct ReportBuilder {
    tolerance: f64,
    report: ResidualReport,
}

impl ReportBuilder {
    pub fn new(tolerance: f64) -> Self {
        ReportBuilder {
            tolerance,
            report: ResidualReport {
                max_abs: 0.0,
                max_rel: 0.0,
                points_tested: 0,
                failures: Vec::new(),
            },
        }
    }

    pub fn push(&mut self, point: &Point, value: f64, scale: f64) {
        let abs = value.abs();
        let rel = if abs <= ABSOLUTE_FLOOR {
            0.0
        } else if scale > 0.0 {
            abs / scale
        } else {
            f64::INFINITY
        };
        let r = &mut self.report;
        r.points_tested += 1;
        r.max_abs = r.max_abs.max(abs);
        r.max_rel = r.max_rel.max(rel);
        if rel > self.tolerance || value.is_nan() {
            r.failures.push((point.clone(), value));
        }
    }

    pub fn finish(self) -> ResidualReport {
        self.report
    }
}

/// Evaluates `e` at each point; the relative scale is the sum of absolute
/// values of its top-level summands.
pub fn residual_report(e: &Expr, points: &[Point], tolerance: f64) -> ResidualReport {
    let mut b = ReportBuilder::new(tolerance);
    for p in points {
        let value = eval(e, p).unwrap_or(f64::NAN);
        let scale = summand_scale(e, p).unwrap_or(0.0);
        b.push(p, value, scale);
    }
    b.finish()
}

/// [`residual_report`] over independent samples of `e`'s symbols.
pub fn verify_residual(e: &Expr, plan: &SamplePlan) -> Result<ResidualReport, SampleError> {
    let points = sample_box(&[e], plan)?;
    Ok(residual_report(e, &points, plan.tolerance))
}

/// [`residual_report`] over manifold samples.
pub fn verify_on_manifold(
    e: &Expr,
    ode: &OdeProblem,
    cover: Option<&CoveringSystem>,
    plan: &SamplePlan,
) -> Result<ResidualReport, SampleError> {
    let mut plan = plan.clone();
    let top = e.max_jet_order().unwrap_or(0);
    plan.prolong = plan.prolong.max(top.saturating_sub(ode.order()));
    let points = sample_manifold(ode, cover, &plan)?;
    Ok(residual_report(e, &points, plan.tolerance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetContext;

    fn example4() -> OdeProblem {
        let ctx = JetContext::new(2);
        let f = ctx.parse("-t^2/(4*v^3) - v - 1/(2*v)").unwrap();
        OdeProblem::new(ctx, f).unwrap()
    }

    #[test]
    fn manifold_points_satisfy_the_equation() {
        let ode = example4();
        let plan = SamplePlan::default();
        let pts = sample_manifold(&ode, None, &plan).unwrap();
        assert_eq!(pts.len(), 100);
        for p in &pts {
            let f = eval(ode.rhs(), p).unwrap();
            assert!((p.get(&Symbol::jet(2)).unwrap() - f).abs() < 1e-12);
        }
    }

    #[test]
    fn excluded_zero_sets_are_avoided() {
        let plan = SamplePlan {
            excluded: vec![Expr::jet(0)],
            ranges: SampleRanges {
                overrides: [("v".to_string(), (-1.0, 1.0))].into(),
                ..SampleRanges::default()
            },
            ..SamplePlan::default()
        };
        let pts = sample_box(&[&Expr::jet(0)], &plan).unwrap();
        assert!(pts
            .iter()
            .all(|p| p.get(&Symbol::jet(0)).unwrap().abs() > 1e-3));
    }

    #[test]
    fn first_order_point_sets_the_derivative() {
        let ctx = JetContext::new(1);
        let ode = OdeProblem::new(ctx, Expr::jet(0)).unwrap();
        let plan = SamplePlan {
            count: 1,
            ..SamplePlan::default()
        };
        let p = &sample_manifold(&ode, None, &plan).unwrap()[0];
        assert_eq!(p.get(&Symbol::jet(1)), p.get(&Symbol::jet(0)));
    }

    #[test]
    fn residual_reports() {
        let plan = SamplePlan::default();
        let zero = verify_residual(&Expr::zero(), &plan).unwrap();
        assert_eq!(zero.max_abs, 0.0);
        assert!(zero.passed());
        let v1 = verify_residual(&Expr::jet(1), &plan).unwrap();
        assert!(!v1.failures.is_empty());
    }

    #[test]
    fn sampling_is_deterministic() {
        let ode = example4();
        let plan = SamplePlan::default();
        assert_eq!(
            sample_manifold(&ode, None, &plan).unwrap(),
            sample_manifold(&ode, None, &plan).unwrap()
        );
    }
}
