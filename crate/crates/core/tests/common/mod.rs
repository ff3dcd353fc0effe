#![allow(dead_code)]

use std::path::PathBuf;

use ljet::expr::Expr;
use ljet::field::LambdaPair;
use ljet::jet::{JetContext, OdeProblem};
use ljet::numeric::{eval, Point};
use ljet::problem::Problem;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn problem_path(n: u32) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("problems/example{n}.json"))
}

pub fn problem_text(n: u32) -> String {
    std::fs::read_to_string(problem_path(n)).unwrap()
}

pub fn load(n: u32) -> Problem {
    Problem::from_json(&problem_text(n)).unwrap()
}

pub fn ctx(order: u32) -> JetContext {
    JetContext::new(order)
}

pub fn parse(ctx: &JetContext, s: &str) -> Expr {
    ctx.parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

/// Random polynomial of total degree at most `degree` in `vars`, with
/// small integer coefficients.
pub fn poly(rng: &mut ChaCha8Rng, vars: &[Expr], degree: u32) -> Expr {
    fn monomials(vars: &[Expr], degree: u32) -> Vec<Expr> {
        match vars.split_first() {
            None => vec![Expr::one()],
            Some((x, rest)) => (0..=degree)
                .flat_map(|d| {
                    let xd = x.powi(d as i64);
                    monomials(rest, degree - d)
                        .into_iter()
                        .map(move |m| &xd * m)
                })
                .collect(),
        }
    }
    monomials(vars, degree)
        .into_iter()
        .map(|m| {
            if rng.gen_bool(0.5) {
                Expr::zero()
            } else {
                m * rng.gen_range(-3i64..=3)
            }
        })
        .sum()
}

pub fn tv() -> Vec<Expr> {
    vec![Expr::t(), Expr::jet(0)]
}

pub fn tvv1() -> Vec<Expr> {
    vec![Expr::t(), Expr::jet(0), Expr::jet(1)]
}

/// `ρ, ψ` of degree at most `degree` in `(t, v)`, `λ` in `(t, v, v_1)`.
pub fn lambda_pair(rng: &mut ChaCha8Rng, degree: u32) -> LambdaPair {
    LambdaPair::new(
        poly(rng, &tv(), degree),
        poly(rng, &tv(), degree),
        poly(rng, &tvv1(), degree),
    )
}

/// `v_k = f` with `f` a random polynomial in `(t, v, ..., v_{k-1})`.
pub fn polynomial_ode(rng: &mut ChaCha8Rng, k: u32, degree: u32) -> OdeProblem {
    let vars: Vec<Expr> = std::iter::once(Expr::t())
        .chain((0..k).map(Expr::jet))
        .collect();
    OdeProblem::new(JetContext::new(k), poly(rng, &vars, degree)).unwrap()
}

pub fn value(e: &Expr, p: &Point) -> f64 {
    eval(e, p).unwrap_or_else(|err| panic!("eval {e}: {err}"))
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Dense floating-point check that `target` lies in the span of `basis`,
/// from values at `points`: the target is projected onto an orthonormal
/// basis (modified Gram–Schmidt) of the sampled columns.
pub fn in_sampled_span(basis: &[Expr], target: &Expr, points: &[Point]) -> f64 {
    let column = |e: &Expr| -> Vec<f64> { points.iter().map(|p| value(e, p)).collect() };
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let mut q: Vec<Vec<f64>> = Vec::new();
    for b in basis {
        let mut c = column(b);
        let norm0 = dot(&c, &c).sqrt();
        for u in &q {
            let r = dot(u, &c);
            c.iter_mut().zip(u).for_each(|(x, y)| *x -= r * y);
        }
        let norm = dot(&c, &c).sqrt();
        if norm > 1e-10 * norm0 {
            q.push(c.into_iter().map(|x| x / norm).collect());
        }
    }
    let mut y = column(target);
    let norm0 = dot(&y, &y).sqrt();
    for u in &q {
        let r = dot(u, &y);
        y.iter_mut().zip(u).for_each(|(x, z)| *x -= r * z);
    }
    dot(&y, &y).sqrt() / norm0
}
