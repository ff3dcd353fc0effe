use std::collections::BTreeMap;

use super::eval::{eval, summand_scale, EvalError, Point};
use super::sample::{ReportBuilder, ResidualReport};
use crate::expr::{Expr, FnApp, Symbol};
use crate::jet::OdeProblem;

/// States `(v, v_1, ..., v_{k-1})` at successive times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

/// Right-hand side `f` of an equation, ready for repeated evaluation.
struct System {
    k: u32,
    rhs: Expr,
    base: Point,
    /// Instantiated applications occurring in `f`, as functions of `t`.
    apps: Vec<(FnApp, Expr)>,
}

impl System {
    fn new(
        ode: &OdeProblem,
        base: &Point,
        instantiations: &BTreeMap<String, Expr>,
    ) -> Result<Self, EvalError> {
        let t = Symbol::t();
        let mut apps = Vec::new();
        for a in ode.rhs().applications() {
            let g = instantiations
                .get(&*a.name)
                .ok_or_else(|| EvalError::Unbound(format!("{}(t)", a.name)))?;
            apps.push((a.clone(), g.diff_n(&t, a.order)));
        }
        Ok(System {
            k: ode.order(),
            rhs: ode.rhs().clone(),
            base: base.clone(),
            apps,
        })
    }

    fn point(&self, t: f64, y: &[f64]) -> Result<Point, EvalError> {
        let mut p = self.base.clone();
        p.set(Symbol::t(), t);
        for (i, yi) in y.iter().enumerate() {
            p.set(Symbol::jet(i as u32), *yi);
        }
        for (a, g) in &self.apps {
            let x = eval(g, &p)?;
            p.functions.insert(a.clone(), x);
        }
        Ok(p)
    }

    fn field(&self, t: f64, y: &[f64]) -> Result<Vec<f64>, EvalError> {
        let p = self.point(t, y)?;
        let mut dy: Vec<f64> = y[1..].to_vec();
        dy.push(eval(&self.rhs, &p)?);
        debug_assert_eq!(dy.len(), self.k as usize);
        Ok(dy)
    }
}

fn axpy(y: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// Classical fixed-step RK4 on the first-order system for
/// `(v, ..., v_{k-1})`. `initial` supplies `t`, the lower jets, and any
/// parameter values; uninterpreted functions need instantiations. The step
/// is shrunk so that it divides the span evenly.
pub fn integrate_ode(
    ode: &OdeProblem,
    initial: &Point,
    t_end: f64,
    step: f64,
    instantiations: &BTreeMap<String, Expr>,
) -> Result<Trajectory, EvalError> {
    let sys = System::new(ode, initial, instantiations)?;
    let t0 = initial
        .get(&Symbol::t())
        .ok_or_else(|| EvalError::Unbound("t".into()))?;
    let mut y = Vec::with_capacity(sys.k as usize);
    for i in 0..sys.k {
        let s = Symbol::jet(i);
        y.push(
            initial
                .get(&s)
                .ok_or_else(|| EvalError::Unbound(s.name().to_string()))?,
        );
    }
    let span = t_end - t0;
    let n = (span.abs() / step.abs()).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![y.clone()],
    };
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let k1 = sys.field(t, &y)?;
        let k2 = sys.field(t + h / 2.0, &axpy(&y, h / 2.0, &k1))?;
        let k3 = sys.field(t + h / 2.0, &axpy(&y, h / 2.0, &k2))?;
        let k4 = sys.field(t + h, &axpy(&y, h, &k3))?;
        for j in 0..y.len() {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        traj.times.push(t0 + (i + 1) as f64 * h);
        traj.states.push(y.clone());
    }
    Ok(traj)
}

/// Checks a candidate solution `v = candidate(t)`: its first `k`
/// derivatives are substituted into the equation's residual at each time.
/// `base` carries parameter and constant values.
pub fn verify_solution(
    ode: &OdeProblem,
    candidate: &Expr,
    t_points: &[f64],
    tolerance: f64,
    base: &Point,
    instantiations: &BTreeMap<String, Expr>,
) -> ResidualReport {
    let t = Symbol::t();
    let k = ode.order();
    let residual = ode.residual();
    let mut derivatives = vec![candidate.simplify()];
    for _ in 0..k {
        let next = derivatives.last().expect("nonempty").diff(&t);
        derivatives.push(next);
    }
    let mut apps: Vec<(FnApp, Expr)> = Vec::new();
    for a in residual
        .applications()
        .iter()
        .chain(candidate.applications().iter())
    {
        if let Some(g) = instantiations.get(&*a.name) {
            apps.push((a.clone(), g.diff_n(&t, a.order)));
        }
    }
    let mut b = ReportBuilder::new(tolerance);
    for &ti in t_points {
        let mut p = base.clone();
        p.set(t.clone(), ti);
        let mut ok = true;
        for (a, g) in &apps {
            match eval(g, &p) {
                Ok(x) => {
                    p.functions.insert(a.clone(), x);
                }
                Err(_) => ok = false,
            }
        }
        for (i, d) in derivatives.iter().enumerate() {
            match eval(d, &p) {
                Ok(x) => p.set(Symbol::jet(i as u32), x),
                Err(_) => ok = false,
            }
        }
        let value = if ok {
            eval(&residual, &p).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        };
        let scale = summand_scale(&residual, &p).unwrap_or(0.0);
        b.push(&p, value, scale);
    }
    b.finish()
}
