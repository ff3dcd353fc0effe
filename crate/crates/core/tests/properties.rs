mod common;

use std::collections::BTreeMap;

use common::*;
use ljet::expr::{equals, Expr, Symbol};
use ljet::field::{
    check_commutation, commutator, lambda_prolong, std_prolong, LambdaPair, VectorField,
};
use ljet::jet::{
    restrict_to_manifold, restricted_total_derivative, total_derivative, JetContext, OdeProblem,
};
use ljet::lambda_symmetry::{build_covering, NonlocalSymmetry};
use ljet::numeric::{eval, integrate_ode, sample_manifold, verify_on_manifold, Point, SamplePlan};
use ljet::reduction::{eliminate, find_invariant_ansatz, verify_invariant, zeta_symbol};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn context() -> JetContext {
    JetContext::new(3).with_nonlocal().with_parameter("p")
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::t()),
        (0u32..3).prop_map(Expr::jet),
        Just(Expr::parameter("p")),
        (-4i64..=4).prop_map(Expr::integer),
        (-3i64..=3, 1i64..=4).prop_map(|(n, d)| Expr::frac(n, d)),
    ]
}

/// Smooth expressions over `t, v, v1, v2, p` that evaluate without
/// singularities when `v > 0`. Radicals of `v` are atoms whose algebraic
/// relations the normal form does not see, so identities that only hold
/// through those relations need `radicals = false`.
fn smooth_expr_with(radicals: bool) -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, move |inner| {
        let power = if radicals {
            (1i64..=3)
                .prop_map(|n| Expr::jet(0).pow(&Expr::frac(1, n + 1)))
                .boxed()
        } else {
            (-1i64..=1)
                .prop_map(|n| Expr::jet(0).pow(&(Expr::parameter("p") + n)))
                .boxed()
        };
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / (&b * &b + 1)),
            (inner.clone(), 0i64..=3).prop_map(|(a, n)| a.powi(n)),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| (a / 4).exp()),
            (-2i64..=2).prop_map(|n| Expr::jet(0).powi(n).ln()),
            power,
        ]
    })
}

fn smooth_expr() -> impl Strategy<Value = Expr> {
    smooth_expr_with(true)
}

fn rational_expr() -> impl Strategy<Value = Expr> {
    smooth_expr_with(false)
}

/// Polynomials with small integer coefficients in the given variables.
fn polynomial(vars: Vec<Expr>, max_degree: u32) -> impl Strategy<Value = Expr> {
    let n = vars.len();
    prop::collection::vec(
        (prop::collection::vec(0u32..=max_degree, n), -3i64..=3),
        0..6,
    )
    .prop_map(move |terms| {
        terms
            .into_iter()
            .filter(|(e, _)| e.iter().sum::<u32>() <= max_degree)
            .map(|(e, c)| {
                vars.iter()
                    .zip(&e)
                    .map(|(x, d)| x.powi(*d as i64))
                    .product::<Expr>()
                    * c
            })
            .sum()
    })
}

fn tv_poly() -> impl Strategy<Value = Expr> {
    polynomial(tv(), 2)
}

fn pair() -> impl Strategy<Value = LambdaPair> {
    (tv_poly(), tv_poly(), polynomial(tvv1(), 2)).prop_map(|(r, p, l)| LambdaPair::new(r, p, l))
}

fn field(k: u32) -> impl Strategy<Value = VectorField> {
    let vars: Vec<Expr> = std::iter::once(Expr::t())
        .chain((0..=k).map(Expr::jet))
        .collect();
    (
        polynomial(vars.clone(), 2),
        prop::collection::vec(polynomial(vars, 2), k as usize + 1),
    )
        .prop_map(|(xi, eta)| VectorField::new(xi, eta, Vec::new()))
}

fn ode(k: u32) -> impl Strategy<Value = OdeProblem> {
    let vars: Vec<Expr> = std::iter::once(Expr::t())
        .chain((0..k).map(Expr::jet))
        .collect();
    polynomial(vars, 2).prop_map(move |f| OdeProblem::new(JetContext::new(k), f).unwrap())
}

fn point_strategy() -> impl Strategy<Value = Point> {
    (
        -1.0..1.0f64,
        0.5..2.0f64,
        -2.0..2.0f64,
        -2.0..2.0f64,
        0.5..2.0f64,
    )
        .prop_map(|(t, v, v1, v2, p)| {
            Point::new()
                .with(Symbol::t(), t)
                .with(Symbol::jet(0), v)
                .with(Symbol::jet(1), v1)
                .with(Symbol::jet(2), v2)
                .with(Symbol::parameter("p"), p)
        })
}

fn symbol_strategy() -> impl Strategy<Value = Symbol> {
    prop_oneof![
        Just(Symbol::t()),
        (0u32..3).prop_map(Symbol::jet),
        Just(Symbol::parameter("p")),
    ]
}

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cases(1000))]

    #[test]
    fn simplify_is_idempotent(e in smooth_expr()) {
        let once = e.simplify();
        prop_assert_eq!(once.simplify(), once);
    }
}

proptest! {
    #![proptest_config(cases(300))]

    #[test]
    fn diff_is_linear(a in rational_expr(), b in rational_expr(), s in symbol_strategy()) {
        prop_assert_eq!((&a + &b).diff(&s), a.diff(&s) + b.diff(&s));
    }

    #[test]
    fn diff_matches_central_differences(e in smooth_expr(), s in symbol_strategy(), p in point_strategy()) {
        let x = p.get(&s).unwrap();
        let h = 1e-5 * x.abs().max(1.0);
        let at = |y: f64| eval(&e, &p.clone().with(s.clone(), y)).unwrap();
        let fd = (at(x + h) - at(x - h)) / (2.0 * h);
        let exact = eval(&e.diff(&s), &p).unwrap();
        prop_assert!(rel_err(exact, fd) < 1e-6, "{} at {:?}: {} vs {}", e, p, exact, fd);
    }

    #[test]
    fn printing_round_trips(e in smooth_expr()) {
        let printed = e.to_string();
        let back = context().parse(&printed).unwrap();
        prop_assert_eq!(back, e, "{}", printed);
    }

    #[test]
    fn total_derivative_is_affine_in_the_next_jet(m in 0u32..3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vars: Vec<Expr> = std::iter::once(Expr::t()).chain((0..=m).map(Expr::jet)).collect();
        let e = poly(&mut rng, &vars, 3) + Expr::jet(m).exp() * poly(&mut rng, &tv(), 1);
        let d = total_derivative(&e);
        let next = Symbol::jet(m + 1);
        prop_assert_eq!(d.diff(&next), e.diff(&Symbol::jet(m)));
        prop_assert!(d.diff(&next).diff(&next).is_zero());
    }

    #[test]
    fn total_derivative_obeys_leibniz(a in rational_expr(), b in rational_expr()) {
        let lhs = total_derivative(&(&a * &b));
        let rhs = total_derivative(&a) * &b + &a * total_derivative(&b);
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(cases(500))]

    #[test]
    fn restriction_commutes_with_total_derivative(o in (1u32..=3).prop_flat_map(ode), e in polynomial(vec![Expr::t(), Expr::jet(0), Expr::jet(1), Expr::jet(2), Expr::jet(3)], 2)) {
        let lhs = restrict_to_manifold(&total_derivative(&e), &o, None);
        let rhs = restricted_total_derivative(&restrict_to_manifold(&e, &o, None), &o, None);
        prop_assert!(equals(&lhs, &rhs, 1e-9).unwrap().holds(), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn affine_solvability(o in ode(3), a in polynomial(tvv1(), 2), b in polynomial(tv(), 3), c in 1i64..=3) {
        let zeta = (a + c) * Expr::jet(1) + b;
        let dz = zeta.diff(&Symbol::jet(1));
        prop_assume!(!dz.is_zero());
        let d = restricted_total_derivative(&zeta, &o, None);
        let v2 = Symbol::jet(2);
        prop_assert_eq!(d.diff(&v2), dz);
        prop_assert!(d.diff(&v2).diff(&v2).is_zero());
    }
}

proptest! {
    #![proptest_config(cases(200))]

    #[test]
    fn lambda_zero_is_the_standard_prolongation(rho in tv_poly(), psi in tv_poly(), k in 1u32..=3) {
        let lp = LambdaPair::new(rho.clone(), psi.clone(), Expr::zero());
        let a = lambda_prolong(&lp, k);
        let b = std_prolong(&VectorField::point(rho, psi), k, 0);
        prop_assert_eq!(a.xi, b.xi);
        prop_assert_eq!(a.eta, b.eta);
    }

    #[test]
    fn lambda_prolongations_commute_with_total_derivative(lp in pair(), k in 1u32..=3) {
        let c = check_commutation(&lp, k);
        prop_assert!(c.ok, "{:?}", c.residuals);
        prop_assert_eq!(c.mu, -(total_derivative(&lp.rho) + &lp.lambda * &lp.rho));
    }

    #[test]
    fn standard_prolongations_carry_their_tag(rho in tv_poly(), psi in tv_poly(), k in 1u32..=3) {
        let x = std_prolong(&VectorField::point(rho, psi), k, 0);
        prop_assert!(x.is_prolongation());
        let mut broken = x.clone();
        broken.eta[k as usize] = &broken.eta[k as usize] + Expr::jet(0);
        prop_assert!(!broken.is_prolongation());
    }
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn commutator_satisfies_jacobi((a, b, c) in (1u32..=2).prop_flat_map(|k| (field(k), field(k), field(k)))) {
        let ab_c = commutator(&commutator(&a, &b), &c);
        let cb_a = commutator(&commutator(&c, &b), &a);
        let ac_b = commutator(&commutator(&a, &c), &b);
        let j = ab_c.sub(&cb_a).sub(&ac_b);
        prop_assert!(j.is_zero(), "{:?}", j);
    }
}

proptest! {
    #![proptest_config(cases(20))]

    #[test]
    fn nonlocal_residual_is_exponentially_scaled(o in ode(2), lp in pair(), chi in tv_poly(), seed in any::<u64>()) {
        let ew = Expr::nonlocal(0).exp();
        let gen = VectorField::new(&ew * &lp.rho, vec![&ew * &lp.psi], vec![&ew * chi]);
        prop_assert!(NonlocalSymmetry::new(gen.clone()).unwrap().exponential);
        let y = std_prolong(&gen, 2, 2);
        let eq = Expr::jet(2) - o.rhs();
        let cover = build_covering(&o, &lp.lambda).unwrap();
        let lhs = restrict_to_manifold(&y.apply(&eq), &o, Some(&cover));
        let rhs = &ew * restrict_to_manifold(&lambda_prolong(&lp, 2).apply(&eq), &o, None);
        let plan = SamplePlan { seed, ..SamplePlan::default() };
        let report = verify_on_manifold(&(lhs - rhs), &o, Some(&cover), &plan).unwrap();
        prop_assert_eq!(report.points_tested, 100);
        prop_assert!(report.max_rel < 1e-9, "{:?}", report);
    }

    #[test]
    fn non_exponential_fields_are_not_tagged(rho in tv_poly(), psi in tv_poly()) {
        prop_assume!(!psi.is_zero() || !rho.is_zero());
        let g = VectorField::new(rho, vec![psi], vec![Expr::zero()]);
        prop_assert!(!NonlocalSymmetry::new(g).unwrap().exponential);
    }
}

proptest! {
    #![proptest_config(cases(100))]

    #[test]
    fn elimination_is_sound(a in tv_poly(), b in tv_poly(), c in 1i64..=3) {
        let a = a + c;
        prop_assume!(!a.is_zero());
        let zeta0 = a * Expr::jet(1) + b;
        let chain = [zeta0.clone(), total_derivative(&zeta0)];
        let solved = eliminate(&chain).unwrap();
        for (i, z) in chain.iter().enumerate() {
            let back = z.substitute(&solved) - Expr::symbol(zeta_symbol(i as u32));
            prop_assert!(back.is_zero(), "{} leaves {}", z, back);
        }
    }
}

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn ansatz_outputs_are_invariants(psi in prop_oneof![Just(Expr::one()), Just(Expr::jet(0)), Just(Expr::t() * Expr::jet(0))], lambda in polynomial(tv(), 1)) {
        let lp = LambdaPair::new(Expr::zero(), psi, lambda);
        let u = lambda_prolong(&lp, 1);
        for b in find_invariant_ansatz(&lp, 2) {
            prop_assert!(verify_invariant(&u, &b).unwrap(), "{}", b);
        }
    }

    #[test]
    fn sampling_is_deterministic(o in ode(2), seed in any::<u64>()) {
        let plan = SamplePlan { seed, count: 20, ..SamplePlan::default() };
        let a = sample_manifold(&o, None, &plan).unwrap();
        let b = sample_manifold(&o, None, &plan).unwrap();
        prop_assert_eq!(&a, &b);
        let e = o.rhs() * Expr::jet(1);
        let ra = verify_on_manifold(&e, &o, None, &plan).unwrap();
        let rb = verify_on_manifold(&e, &o, None, &plan).unwrap();
        prop_assert_eq!(ra.max_abs.to_bits(), rb.max_abs.to_bits());
        prop_assert_eq!(ra.max_rel.to_bits(), rb.max_rel.to_bits());
    }

    #[test]
    fn manifold_samples_satisfy_the_equations(o in ode(2), lambda in polynomial(tvv1(), 2), seed in any::<u64>()) {
        let cover = build_covering(&o, &lambda).unwrap();
        let plan = SamplePlan { seed, count: 50, ..SamplePlan::default() };
        for p in sample_manifold(&o, Some(&cover), &plan).unwrap() {
            let f = eval(o.rhs(), &p).unwrap();
            prop_assert!((p.get(&Symbol::jet(2)).unwrap() - f).abs() < 1e-12);
            let h = eval(&lambda, &p).unwrap();
            prop_assert!((p.get(&Symbol::nonlocal(1)).unwrap() - h).abs() < 1e-12);
            let f1 = eval(&restricted_total_derivative(o.rhs(), &o, Some(&cover)), &p).unwrap();
            prop_assert!((p.get(&Symbol::jet(3)).unwrap() - f1).abs() < 1e-12 * f1.abs().max(1.0));
        }
    }

    #[test]
    fn rk4_is_fourth_order(v0 in 0.5..2.0f64) {
        let o = OdeProblem::new(JetContext::new(1), Expr::jet(0)).unwrap();
        let start = Point::new().with(Symbol::t(), 0.0).with(Symbol::jet(0), v0);
        let err = |h: f64| {
            let tr = integrate_ode(&o, &start, 1.0, h, &BTreeMap::new()).unwrap();
            (tr.states.last().unwrap()[0] - v0 * 1f64.exp()).abs()
        };
        let e: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|h| err(*h)).collect();
        let (r1, r2) = (e[0] / e[1], e[1] / e[2]);
        prop_assert!(r1 >= 8.0 && r2 >= 8.0, "ratios {} {}", r1, r2);
        prop_assert!((r1 - r2).abs() <= 0.2 * r1.max(r2), "ratios {} {}", r1, r2);
    }
}
