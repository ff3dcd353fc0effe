//! Commands behind the `ljet` binary, producing structured reports.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::expr::{Expr, Symbol};
use crate::field::{check_commutation, lambda_prolong, std_prolong, LambdaPair, VectorField};
use crate::jet::CoveringSystem;
use crate::lambda_symmetry::{
    build_covering, chi_pde, extract_lambda_from_nonlocal, is_lambda_symmetry,
    reconstruct_nonlocal, solve_chi_ansatz, verify_chi, verify_nonlocal_symmetry, ChiResult,
    ChiStatus, NonlocalError,
};
use crate::numeric::{verify_on_manifold, verify_solution, Point, ResidualReport, SamplePlan};
use crate::problem::Problem;
use crate::reduction::{
    auxiliary_ode, find_invariant_ansatz, reduce, verify_chain, verify_invariant, zeta_symbol,
};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Cover,
    Chi,
    Reconstruct,
    Reduce,
    VerifySolution,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Cover => "cover",
            Command::Chi => "chi",
            Command::Reconstruct => "reconstruct",
            Command::Reduce => "reduce",
            Command::VerifySolution => "verify-solution",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Command::Check,
            Command::Cover,
            Command::Chi,
            Command::Reconstruct,
            Command::Reduce,
            Command::VerifySolution,
        ]
        .into_iter()
        .find(|c| c.name() == s)
        .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Options {
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub degree_bound: Option<u32>,
    /// Overrides the candidate in the problem's `solution` block.
    pub solution: Option<String>,
}

/// Outcome of one command: an exit code and ordered key/value entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub exit_code: i32,
    pub entries: Vec<(String, Value)>,
}

impl Report {
    fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            exit_code: EXIT_OK,
            entries: Vec::new(),
        }
    }

    fn put(&mut self, key: &str, value: impl Into<Value>) {
        self.entries.push((key.to_string(), value.into()));
    }

    fn fail(&mut self) {
        if self.exit_code == EXIT_OK {
            self.exit_code = EXIT_FAILURE;
        }
    }

    fn require(&mut self, ok: bool) {
        if !ok {
            self.fail();
        }
    }

    pub fn input_error(command: &str, message: &str) -> Self {
        let mut r = Report::new(command);
        r.exit_code = EXIT_INPUT;
        r.put("error", message);
        r
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn status(&self) -> &'static str {
        match self.exit_code {
            EXIT_OK => "ok",
            EXIT_FAILURE => "failed",
            _ => "input-error",
        }
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("schema_version".into(), json!(SCHEMA_VERSION));
        m.insert("command".into(), json!(self.command));
        m.insert("status".into(), json!(self.status()));
        m.insert("exit_code".into(), json!(self.exit_code));
        for (k, v) in &self.entries {
            m.insert(k.clone(), v.clone());
        }
        Value::Object(m)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}: {}\n", self.command, self.status());
        for (k, v) in &self.entries {
            write_text(&mut out, k, v, 0);
        }
        out
    }
}

fn write_text(out: &mut String, key: &str, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match v {
        Value::String(s) => {
            let _ = writeln!(out, "{pad}{key}: {s}");
        }
        Value::Array(xs) => {
            let _ = writeln!(out, "{pad}{key}:");
            for x in xs {
                match x {
                    Value::String(s) => {
                        let _ = writeln!(out, "{pad}  - {s}");
                    }
                    other => {
                        let _ = writeln!(out, "{pad}  - {other}");
                    }
                }
            }
        }
        Value::Object(m) => {
            let _ = writeln!(out, "{pad}{key}:");
            for (k, x) in m {
                write_text(out, k, x, depth + 1);
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{key}: {other}");
        }
    }
}

fn s(e: &Expr) -> Value {
    Value::String(e.to_string())
}

fn residual_json(r: &ResidualReport) -> Value {
    json!({
        "points": r.points_tested,
        "max_abs": r.max_abs,
        "max_rel": r.max_rel,
        "failures": r.failures.len(),
        "passed": r.passed(),
    })
}

fn field_json(y: &VectorField) -> Value {
    json!({
        "xi": s(&y.xi),
        "eta": y.eta.iter().map(s).collect::<Vec<_>>(),
        "eta_w": y.eta_w.iter().map(s).collect::<Vec<_>>(),
    })
}

fn plan_for(problem: &Problem, opts: &Options) -> SamplePlan {
    let mut plan = problem.plan.clone();
    if let Some(seed) = opts.seed {
        plan.seed = seed;
    }
    if let Some(tol) = opts.tolerance {
        plan.tolerance = tol;
    }
    plan
}

/// Parses and runs; malformed input gives exit code 2.
pub fn run_json(command: Command, text: &str, opts: &Options) -> Report {
    match Problem::from_json(text) {
        Ok(p) => run(command, &p, opts),
        Err(e) => Report::input_error(command.name(), &e.to_string()),
    }
}

pub fn run(command: Command, problem: &Problem, opts: &Options) -> Report {
    let mut r = Report::new(command.name());
    let outcome = match command {
        Command::Check => cmd_check(problem, opts, &mut r),
        Command::Cover => cmd_cover(problem, &mut r),
        Command::Chi => cmd_chi(problem, opts, &mut r),
        Command::Reconstruct => cmd_reconstruct(problem, &mut r),
        Command::Reduce => cmd_reduce(problem, opts, &mut r),
        Command::VerifySolution => cmd_verify_solution(problem, opts, &mut r),
    };
    if let Err(e) = outcome {
        match e {
            Failure::Input(msg) => {
                r.exit_code = EXIT_INPUT;
                r.put("error", msg);
            }
            Failure::Math(msg) => {
                r.fail();
                r.put("error", msg);
            }
        }
    }
    r
}

enum Failure {
    Input(String),
    Math(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Math(e.to_string())
    }
}

fn pair_json(lp: &LambdaPair) -> Value {
    json!({"rho": s(&lp.rho), "psi": s(&lp.psi), "lambda": s(&lp.lambda)})
}

fn cmd_check(p: &Problem, opts: &Options, r: &mut Report) -> Result<(), Failure> {
    let k = p.ode.order();
    r.put("equation", format!("v{k} = {}", p.ode.rhs()));
    r.put("pair", pair_json(&p.pair));
    let tangency = is_lambda_symmetry(&p.ode, &p.pair)?;
    r.put("lambda_symmetry", tangency.ok);
    r.put("residual", s(&tangency.residual));
    r.put(
        "equivalence",
        serde_json::to_value(tangency.equivalence).expect("serializable"),
    );
    r.require(tangency.ok);

    let u = lambda_prolong(&p.pair, k);
    let unrestricted = u.apply(&p.ode.residual());
    let numeric = verify_on_manifold(&unrestricted, &p.ode, None, &plan_for(p, opts))?;
    r.put("numeric", residual_json(&numeric));
    r.require(numeric.passed());

    let c = check_commutation(&p.pair, k);
    r.put("commutation", json!({"mu": s(&c.mu), "ok": c.ok}));
    r.require(c.ok);
    Ok(())
}

fn covering(p: &Problem) -> Result<CoveringSystem, Failure> {
    build_covering(&p.ode, &p.pair.lambda).map_err(|e| Failure::Input(format!("in `lambda`: {e}")))
}

fn cmd_cover(p: &Problem, r: &mut Report) -> Result<(), Failure> {
    let cover = covering(p)?;
    let k = p.ode.order();
    r.put(
        "system",
        vec![
            format!("v{k} = {}", p.ode.rhs()),
            format!("w1 = {}", cover.h()),
        ],
    );
    let mut terms = vec!["d_t".to_string()];
    for i in 0..k {
        let coeff = if i + 1 < k {
            Expr::jet(i + 1)
        } else {
            p.ode.rhs().clone()
        };
        terms.push(format!("({coeff})*d_{}", Symbol::jet(i)));
    }
    terms.push(format!("({})*d_w", cover.h()));
    r.put("total_derivative", terms.join(" + "));
    Ok(())
}

fn chi_json(res: &ChiResult) -> Vec<(&'static str, Value)> {
    let mut out = vec![(
        "status",
        serde_json::to_value(res.status).expect("serializable"),
    )];
    if let Some(c) = &res.chi {
        out.push(("chi", s(c)));
    }
    out.push((
        "residual_system",
        Value::Array(res.residual_system.iter().map(s).collect()),
    ));
    if let Some(n) = &res.note {
        out.push(("note", Value::String(n.clone())));
    }
    out
}

fn resolve_chi(p: &Problem) -> Result<ChiResult, Failure> {
    Ok(match &p.chi {
        Some(chi) => verify_chi(&p.ode, &p.pair, chi)?,
        None => solve_chi_ansatz(&p.ode, &p.pair)?,
    })
}

fn cmd_chi(p: &Problem, opts: &Options, r: &mut Report) -> Result<(), Failure> {
    let pde = chi_pde(&p.ode, &p.pair);
    r.put("equation", format!("{pde}"));
    let res = resolve_chi(p)?;
    for (k, v) in chi_json(&res) {
        r.put(k, v);
    }
    match (&res.status, &res.chi) {
        (ChiStatus::Solved | ChiStatus::VerifiedOnly, Some(chi)) => {
            let numeric = verify_on_manifold(&pde.residual(chi), &p.ode, None, &plan_for(p, opts))?;
            r.put("numeric", residual_json(&numeric));
            r.require(numeric.passed());
        }
        _ => r.fail(),
    }
    Ok(())
}

fn cmd_reconstruct(p: &Problem, r: &mut Report) -> Result<(), Failure> {
    let res = resolve_chi(p)?;
    let Some(chi) = res.chi.clone() else {
        for (k, v) in chi_json(&res) {
            r.put(k, v);
        }
        return Err(Failure::Math("no chi available for reconstruction".into()));
    };
    r.put("chi", s(&chi));
    let cover = covering(p)?;
    let ew = Expr::nonlocal(0).exp();
    let generator = VectorField::new(&ew * &p.pair.rho, vec![&ew * &p.pair.psi], vec![&ew * &chi]);
    r.put("generator", field_json(&generator));
    let y = match reconstruct_nonlocal(&p.ode, &p.pair, &chi) {
        Ok(y) => y,
        Err(NonlocalError::NotTangent(check)) => {
            r.put("check", check.to_string());
            return Err(Failure::Math(
                "reconstructed field is not a symmetry of the covering".into(),
            ));
        }
        Err(e) => return Err(e.into()),
    };
    debug_assert_eq!(
        y.field,
        std_prolong(&generator, p.ode.order(), p.ode.order())
    );
    r.put("field", field_json(&y.field));
    let check = verify_nonlocal_symmetry(&cover, &y)?;
    r.put(
        "conditions",
        json!({
            "exponential": check.exponential,
            "equation_tangent": check.equation_tangent,
            "cover_tangent": check.cover_tangent,
        }),
    );
    r.require(check.ok());
    let back = extract_lambda_from_nonlocal(&y, &cover)?;
    let round_trip = back == p.pair;
    r.put("extracted", pair_json(&back));
    r.put("round_trip", round_trip);
    r.require(round_trip);
    Ok(())
}

fn cmd_reduce(p: &Problem, opts: &Options, r: &mut Report) -> Result<(), Failure> {
    let u1 = lambda_prolong(&p.pair, 1);
    let (x, zeta0, aux) = match &p.invariants {
        Some(inv) => (inv.x.clone(), inv.zeta0.clone(), inv.auxiliary_rhs.clone()),
        None => {
            let bound = opts.degree_bound.unwrap_or(3);
            let basis = find_invariant_ansatz(&p.pair, bound);
            r.put("ansatz_basis", Value::Array(basis.iter().map(s).collect()));
            if !verify_invariant(&u1, &Expr::t())? {
                return Err(Failure::Math(
                    "no invariants supplied and t is not invariant".into(),
                ));
            }
            let v1 = Symbol::jet(1);
            let Some(z) = basis.into_iter().find(|b| b.depends_on(&v1)) else {
                return Err(Failure::Math(
                    "the ansatz search found no invariant involving v1".into(),
                ));
            };
            (Expr::t(), z, None)
        }
    };
    r.put("x", s(&x));
    r.put("zeta0", s(&zeta0));
    let x_ok = verify_invariant(&u1, &x)?;
    let z_ok = verify_invariant(&u1, &zeta0)?;
    r.put("invariants_verified", x_ok && z_ok);
    if !(x_ok && z_ok) {
        return Err(Failure::Math(
            "x or zeta0 is not an invariant of the first λ-prolongation".into(),
        ));
    }
    let chain = reduce(&p.ode, &x, &zeta0)?;
    r.put("zeta", Value::Array(chain.zeta.iter().map(s).collect()));
    let reduced = chain
        .reduced
        .clone()
        .expect("reduce fills the reduced equation");
    let k = p.ode.order();
    let top = Expr::symbol(zeta_symbol(k - 1));
    r.put("reduced", format!("{top} = {}", &top - &reduced));
    r.put("reduced_residual", s(&reduced));
    r.put("numeric_confirmed", chain.numeric_confirmed);
    let chain_ok = verify_chain(&p.ode, &p.pair, &chain)?;
    r.put("chain_verified", chain_ok);
    r.require(chain_ok);
    if let Some(rhs) = aux {
        let a = auxiliary_ode(&x, &zeta0, &rhs);
        r.put("auxiliary", format!("{a} = 0"));
        r.put("auxiliary_residual", s(&a));
        if let Some(v1) = a.isolate(&Symbol::jet(1)) {
            r.put("auxiliary_normal_form", format!("v1 = {v1}"));
        }
    }
    Ok(())
}

fn cmd_verify_solution(p: &Problem, opts: &Options, r: &mut Report) -> Result<(), Failure> {
    let Some(sol) = &p.solution else {
        return Err(Failure::Input("the problem has no `solution` block".into()));
    };
    let candidate = match &opts.solution {
        Some(text) => {
            let mut ctx = p.ode.ctx().clone();
            for c in sol.constants.keys() {
                if !ctx.constants().contains(c) {
                    ctx = ctx.with_constant(c);
                }
            }
            ctx.parse(text)
                .map_err(|e| Failure::Input(format!("in `--solution`: {e}")))?
        }
        None => sol.candidate.clone(),
    };
    r.put("candidate", s(&candidate));
    let plan = plan_for(p, opts);
    let mut base = Point::new();
    for (name, x) in sol.constants.iter().chain(&plan.fixed) {
        base.set(Symbol::constant(name), *x);
        base.set(Symbol::parameter(name), *x);
    }
    let (a, b) = sol.t_range;
    let n = sol.points;
    let ts: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                a
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect();
    let tol = opts.tolerance.unwrap_or(1e-8);
    let report = verify_solution(&p.ode, &candidate, &ts, tol, &base, &plan.instantiations);
    r.put("tolerance", tol);
    r.put("residual", residual_json(&report));
    r.require(report.passed());
    Ok(())
}
