//! Zero testing: exact on the rational normal form, numeric otherwise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::Expr;
use crate::numeric::{eval, random_point, SampleRanges};

/// How two expressions were found to agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Equivalence {
    /// The canonical forms coincide.
    Symbolic,
    /// Undecided symbolically, confirmed at every numeric sample.
    Numeric,
    NotEqual,
}

impl Equivalence {
    pub fn holds(self) -> bool {
        self != Equivalence::NotEqual
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualityOptions {
    pub seed: u64,
    pub points: usize,
    pub tol: f64,
    pub ranges: SampleRanges,
}

impl Default for EqualityOptions {
    fn default() -> Self {
        EqualityOptions {
            seed: 0x5eed,
            points: 100,
            tol: 1e-9,
            ranges: SampleRanges::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EqualityError {
    #[error("only {found} of {wanted} sample points were evaluable")]
    Singular { found: usize, wanted: usize },
}

/// [`equals_with`] using default options and the given relative tolerance.
pub fn equals(a: &Expr, b: &Expr, tol: f64) -> Result<Equivalence, EqualityError> {
    equals_with(
        a,
        b,
        &EqualityOptions {
            tol,
            ..EqualityOptions::default()
        },
    )
}

/// Decides `a = b`, first on canonical forms, then at random points with
/// uninterpreted applications sampled as independent values.
pub fn equals_with(
    a: &Expr,
    b: &Expr,
    opts: &EqualityOptions,
) -> Result<Equivalence, EqualityError> {
    if (a - b).is_zero() {
        return Ok(Equivalence::Symbolic);
    }
    let mut symbols = a.free_symbols();
    symbols.extend(b.free_symbols());
    let mut apps = a.applications();
    apps.extend(b.applications());

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let budget = opts.points.max(1) * 20;
    let mut found = 0;
    for _ in 0..budget {
        if found == opts.points {
            break;
        }
        let p = random_point(&symbols, &apps, &opts.ranges, &mut rng);
        let (Ok(x), Ok(y)) = (eval(a, &p), eval(b, &p)) else {
            continue;
        };
        found += 1;
        let diff = (x - y).abs();
        if diff > 1e-12 && diff > opts.tol * x.abs().max(y.abs()) {
            return Ok(Equivalence::NotEqual);
        }
    }
    if found < opts.points {
        return Err(EqualityError::Singular {
            found,
            wanted: opts.points,
        });
    }
    Ok(Equivalence::Numeric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::jet::JetContext;

    fn ctx() -> JetContext {
        JetContext::new(2).with_nonlocal().with_parameter("x")
    }

    #[test]
    fn symbolic_numeric_and_unequal() {
        let c = ctx();
        let e = parse("exp(w)*v - v*exp(w)", &c).unwrap();
        assert_eq!(equals(&e, &Expr::zero(), 1e-9), Ok(Equivalence::Symbolic));

        let a = parse("tan(x)^2 + 1", &c).unwrap();
        let b = parse("1/cos(x)^2", &c).unwrap();
        assert_eq!(equals(&a, &b, 1e-9), Ok(Equivalence::Numeric));

        assert_eq!(
            equals(&Expr::jet(1), &Expr::jet(2), 1e-9),
            Ok(Equivalence::NotEqual)
        );
    }

    #[test]
    fn everywhere_singular_expressions_error() {
        let c = ctx();
        let a = parse("ln(-1 - v^2)", &c).unwrap();
        assert!(matches!(
            equals(&a, &Expr::one(), 1e-9),
            Err(EqualityError::Singular { found: 0, .. })
        ));
    }
}
