//! JSON problem files.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Expr, ParseError};
use crate::field::LambdaPair;
use crate::jet::{ContextError, JetContext, OdeError, OdeProblem};
use crate::numeric::SamplePlan;
use crate::reduction::x_symbol;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EquationSpec {
    Rhs(String),
    Delta(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub rho: String,
    pub psi: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantSpec {
    pub x: String,
    pub zeta0: String,
    /// Right-hand side of the auxiliary equation `ζ_0 = rhs(x)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auxiliary_rhs: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instantiation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub ranges: BTreeMap<String, (f64, f64)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameter_values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionSpec {
    pub candidate: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub constants: BTreeMap<String, f64>,
    pub t_range: (f64, f64),
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    50
}

/// The on-disk problem description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub order: u32,
    pub equation: EquationSpec,
    pub lambda: String,
    pub vector_field: FieldSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariants: Option<InvariantSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parameters: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constants: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numeric: Option<NumericSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<SolutionSpec>,
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("malformed problem file at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("order must be at least 1")]
    Order,
    #[error("in `{field}`: {source}")]
    Expression {
        field: String,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error("in `equation`: {0}")]
    Equation(#[from] OdeError),
    #[error("in `{field}`: {message}")]
    Invalid { field: String, message: String },
}

impl From<serde_json::Error> for ProblemError {
    fn from(e: serde_json::Error) -> Self {
        ProblemError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Invariants {
    pub x: Expr,
    pub zeta0: Expr,
    pub auxiliary_rhs: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub candidate: Expr,
    pub constants: BTreeMap<String, f64>,
    pub t_range: (f64, f64),
    pub points: usize,
}

/// A validated problem with every expression parsed.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub ode: OdeProblem,
    pub pair: LambdaPair,
    pub chi: Option<Expr>,
    pub invariants: Option<Invariants>,
    pub plan: SamplePlan,
    pub solution: Option<Solution>,
}

fn parse_in(ctx: &JetContext, field: &str, text: &str) -> Result<Expr, ProblemError> {
    ctx.parse(text).map_err(|source| ProblemError::Expression {
        field: field.to_string(),
        source,
    })
}

fn jet_bound(field: &str, e: &Expr, below: u32) -> Result<(), ProblemError> {
    match e.max_jet_order() {
        Some(m) if m >= below => Err(ProblemError::Invalid {
            field: field.to_string(),
            message: format!(
                "depends on v{m}; at most v{} is allowed",
                below.saturating_sub(1)
            ),
        }),
        _ => Ok(()),
    }
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files serialize")
    }

    fn context(&self) -> Result<JetContext, ProblemError> {
        if self.order == 0 {
            return Err(ProblemError::Order);
        }
        let mut ctx = JetContext::new(self.order);
        for p in &self.parameters {
            ctx = ctx.with_parameter(p);
        }
        for c in &self.constants {
            ctx = ctx.with_constant(c);
        }
        for f in &self.functions {
            ctx = ctx.with_function(&f.name);
        }
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn build(&self) -> Result<Problem, ProblemError> {
        let ctx = self.context()?;
        let k = self.order;
        let ode = match &self.equation {
            EquationSpec::Rhs(s) => {
                OdeProblem::new(ctx.clone(), parse_in(&ctx, "equation.rhs", s)?)?
            }
            EquationSpec::Delta(s) => {
                let delta = parse_in(&ctx, "equation.delta", s)?;
                if delta.max_jet_order() != Some(k) {
                    return Err(ProblemError::Invalid {
                        field: "equation.delta".into(),
                        message: format!("highest derivative must be v{k}"),
                    });
                }
                OdeProblem::from_delta(ctx.clone(), delta)?
            }
        };
        let lambda = parse_in(&ctx, "lambda", &self.lambda)?;
        jet_bound("lambda", &lambda, k)?;
        let rho = parse_in(&ctx, "vector_field.rho", &self.vector_field.rho)?;
        let psi = parse_in(&ctx, "vector_field.psi", &self.vector_field.psi)?;
        jet_bound("vector_field.rho", &rho, 1)?;
        jet_bound("vector_field.psi", &psi, 1)?;
        let chi = match &self.chi {
            Some(s) => {
                let e = parse_in(&ctx, "chi", s)?;
                jet_bound("chi", &e, k)?;
                Some(e)
            }
            None => None,
        };
        let invariants = match &self.invariants {
            Some(inv) => {
                let x = parse_in(&ctx, "invariants.x", &inv.x)?;
                jet_bound("invariants.x", &x, 1)?;
                let zeta0 = parse_in(&ctx, "invariants.zeta0", &inv.zeta0)?;
                jet_bound("invariants.zeta0", &zeta0, 2)?;
                let reduced_ctx = ctx.clone().with_parameter(x_symbol().name());
                reduced_ctx.validate()?;
                let auxiliary_rhs = match &inv.auxiliary_rhs {
                    Some(s) => Some(parse_in(&reduced_ctx, "invariants.auxiliary_rhs", s)?),
                    None => None,
                };
                Some(Invariants {
                    x,
                    zeta0,
                    auxiliary_rhs,
                })
            }
            None => None,
        };

        let mut plan = SamplePlan::default();
        if let Some(n) = &self.numeric {
            if let Some(seed) = n.seed {
                plan.seed = seed;
            }
            if let Some(count) = n.count {
                if count == 0 {
                    return Err(ProblemError::Invalid {
                        field: "numeric.count".into(),
                        message: "must be at least 1".into(),
                    });
                }
                plan.count = count;
            }
            if let Some(tol) = n.tolerance {
                plan.tolerance = tol;
            }
            for (name, &(lo, hi)) in &n.ranges {
                if !(lo <= hi) {
                    return Err(ProblemError::Invalid {
                        field: format!("numeric.ranges.{name}"),
                        message: "empty interval".into(),
                    });
                }
                plan.ranges.overrides.insert(name.clone(), (lo, hi));
            }
            for (name, &x) in &n.parameter_values {
                if !self.parameters.contains(name) && !self.constants.contains(name) {
                    return Err(ProblemError::Invalid {
                        field: format!("numeric.parameter_values.{name}"),
                        message: "not a declared parameter or constant".into(),
                    });
                }
                plan.fixed.insert(name.clone(), x);
            }
        }
        for f in &self.functions {
            if let Some(s) = &f.instantiation {
                let field = format!("functions.{}.instantiation", f.name);
                let g = parse_in(&ctx, &field, s)?;
                if g.free_symbols().iter().any(|s| s.jet_order().is_some()) {
                    return Err(ProblemError::Invalid {
                        field,
                        message: "must be a function of t".into(),
                    });
                }
                plan.instantiations.insert(f.name.clone(), g);
            }
        }
        plan.excluded = [ode.rhs().denominator(), lambda.denominator()]
            .into_iter()
            .filter(|d| !d.is_one())
            .collect();

        let solution = match &self.solution {
            Some(sol) => {
                let mut sctx = ctx.clone();
                for c in sol.constants.keys() {
                    if !self.constants.contains(c) {
                        sctx = sctx.with_constant(c);
                    }
                }
                sctx.validate()?;
                let candidate = parse_in(&sctx, "solution.candidate", &sol.candidate)?;
                if candidate.max_jet_order().is_some() {
                    return Err(ProblemError::Invalid {
                        field: "solution.candidate".into(),
                        message: "must be a function of t".into(),
                    });
                }
                if sol.points == 0 || !(sol.t_range.0 <= sol.t_range.1) {
                    return Err(ProblemError::Invalid {
                        field: "solution".into(),
                        message: "needs at least one point on a nonempty t_range".into(),
                    });
                }
                Some(Solution {
                    candidate,
                    constants: sol.constants.clone(),
                    t_range: sol.t_range,
                    points: sol.points,
                })
            }
            None => None,
        };

        Ok(Problem {
            ode,
            pair: LambdaPair::new(rho, psi, lambda),
            chi,
            invariants,
            plan,
            solution,
        })
    }
}

impl Problem {
    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        ProblemFile::from_json(text)?.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX4: &str = r#"{
        "order": 2,
        "equation": {"rhs": "-t^2/(4*v^3) - v - 1/(2*v)"},
        "lambda": "t/v^2",
        "vector_field": {"rho": "0", "psi": "v"},
        "invariants": {"x": "t", "zeta0": "-v1/v - t/(2*v^2)", "auxiliary_rhs": "tan(x + c1)"},
        "constants": ["c1"]
    }"#;

    #[test]
    fn builds_and_round_trips() {
        let file = ProblemFile::from_json(EX4).unwrap();
        let again = ProblemFile::from_json(&file.to_json()).unwrap();
        assert_eq!(file, again);
        let p = file.build().unwrap();
        assert_eq!(p.ode.order(), 2);
        assert_eq!(p.plan.excluded.len(), 2);
        assert!(p.invariants.unwrap().auxiliary_rhs.is_some());
    }

    #[test]
    fn reports_locations() {
        let err = Problem::from_json("{\"order\": 2,\n \"equation\": }").unwrap_err();
        assert!(matches!(err, ProblemError::Json { line: 2, .. }));
        let bad = EX4.replace("t/v^2", "t/v^^2");
        let err = Problem::from_json(&bad).unwrap_err();
        assert!(matches!(err, ProblemError::Expression { ref field, .. } if field == "lambda"));
        let bad = EX4.replace("\"lambda\": \"t/v^2\"", "\"lambda\": \"v2\"");
        assert!(matches!(
            Problem::from_json(&bad),
            Err(ProblemError::Invalid { .. })
        ));
        let bad = EX4.replace("\"constants\": [\"c1\"]", "\"constants\": [\"v1\"]");
        assert!(matches!(
            Problem::from_json(&bad),
            Err(ProblemError::Context(_))
        ));
    }
}
