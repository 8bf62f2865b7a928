//! Randomized properties of the derivative, curvature, chart and analysis
//! layers, each checked against an independent computation.

mod common;

use conformal::analysis::{constancy_report, render, sample_grid, Artifact, Format};
use conformal::charts::{compactify, decompactify, from_null, interval_field, to_null, Domain};
use conformal::curvature::{
    einstein_residual_of_factor, fd_ricci_oracle, ricci_from_jet, ricci_from_log,
    ricci_from_omega, ricci_scalar, FD_STEP,
};
use conformal::expr::{parse, Expr, Var};
use conformal::families::{factor_from_expression, flat_factor, liouville_factor, ConformalFactor};
use conformal::field::{ExprField, LogField, NullToStandard, ScalarField};
use conformal::quadrature::{Antiderivative, DEFAULT_TOLERANCE};
use proptest::prelude::*;

use common::{gauss_legendre, random_univariate, rel_err, rng};

/// Random smooth expressions in `t` and `x`, bounded on `[−1, 1]²`.
fn smooth_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("t".to_owned()),
        Just("x".to_owned()),
        (-2.0f64..2.0).prop_map(|c| format!("({c})")),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} / (2 + sin({b})))")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(sin({a}))")),
            inner.clone().prop_map(|a| format!("({a})^2")),
            inner.prop_map(|a| format!("sqrt(1 + ({a})^2)")),
        ]
    })
}

/// Random positive factors: `exp` of a smooth expression.
fn positive_factor() -> impl Strategy<Value = String> {
    smooth_expr().prop_map(|e| format!("exp(0.5 * sin({e}))"))
}

fn point() -> impl Strategy<Value = (f64, f64)> {
    (-0.9f64..0.9, -0.9f64..0.9)
}

fn explicit(src: &str) -> ConformalFactor {
    factor_from_expression(&parse(src).unwrap(), None).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    rel_err(a, b) <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn jet_matches_finite_differences(src in smooth_expr(), (t, x) in point()) {
        let f = ExprField::standard(parse(&src).unwrap());
        let j = f.jet_at((t, x)).unwrap();
        let v = |dt: f64, dx: f64| f.value_at((t + dt, x + dx)).unwrap();
        let h = 1e-4;
        let scale = j.components().iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let tol = 1e-5 * scale;
        prop_assert!(((v(h, 0.0) - v(-h, 0.0)) / (2.0 * h) - j.dt).abs() < tol);
        prop_assert!(((v(0.0, h) - v(0.0, -h)) / (2.0 * h) - j.dx).abs() < tol);
        let c = v(0.0, 0.0);
        let h2 = 1e-3;
        let v2 = |dt: f64, dx: f64| f.value_at((t + dt, x + dx)).unwrap();
        prop_assert!(((v2(h2, 0.0) - 2.0 * c + v2(-h2, 0.0)) / (h2 * h2) - j.dtt).abs() < 1e-3 * scale);
        prop_assert!(((v2(0.0, h2) - 2.0 * c + v2(0.0, -h2)) / (h2 * h2) - j.dxx).abs() < 1e-3 * scale);
        let mixed = (v2(h2, h2) - v2(h2, -h2) - v2(-h2, h2) + v2(-h2, -h2)) / (4.0 * h2 * h2);
        prop_assert!((mixed - j.dtx).abs() < 1e-3 * scale);
    }

    #[test]
    fn jet_value_is_plain_value(src in smooth_expr(), p in point()) {
        let f = ExprField::standard(parse(&src).unwrap());
        let value = f.value_at(p).unwrap();
        let jet = f.jet_at(p).unwrap();
        prop_assert!(close(jet.value, value, 1e-14), "{} vs {}", jet.value, value);
    }

    #[test]
    fn printed_expressions_reparse(src in smooth_expr(), p in point()) {
        let e = parse(&src).unwrap();
        let again: Expr = parse(&e.to_string()).unwrap();
        let (a, b) = (ExprField::standard(e), ExprField::standard(again));
        prop_assert_eq!(a.value_at(p).unwrap(), b.value_at(p).unwrap());
    }

    #[test]
    fn curvature_paths_agree(src in positive_factor(), p in point()) {
        let f = explicit(&src);
        let from_omega = ricci_from_omega(&f, p).unwrap();
        let from_log = ricci_from_log(&LogField(&f), p).unwrap();
        let best = ricci_scalar(&f, p).unwrap();
        prop_assert!(close(from_omega, from_log, 1e-9), "{from_omega} vs {from_log}");
        prop_assert!(close(best, from_log, 1e-9), "{best} vs {from_log}");
        let jet = f.jet_at(p).unwrap();
        prop_assert_eq!(ricci_from_jet(&jet, p).unwrap(), from_omega);
    }

    #[test]
    fn curvature_matches_finite_differences(src in positive_factor(), p in point()) {
        let f = explicit(&src);
        let ad = ricci_scalar(&f, p).unwrap();
        let fd = fd_ricci_oracle(&f, p, FD_STEP).unwrap();
        prop_assert!(close(ad, fd, 1e-5), "{ad} vs {fd}");
    }

    #[test]
    fn einstein_holds_and_kappa_is_half_r(src in positive_factor(), p in point()) {
        let f = explicit(&src);
        let e = einstein_residual_of_factor(&f, p).unwrap();
        let r = ricci_scalar(&f, p).unwrap();
        prop_assert!(e.residual < 1e-10);
        prop_assert!(close(e.kappa, r / 2.0, 1e-9));
    }

    #[test]
    fn null_chart_reads_the_same_field(src in smooth_expr(), p in point()) {
        // the same expression over (u, v), read through u = x + t, v = x − t
        let e = parse(&src).unwrap();
        let in_null = e.substitute(Var::T, &Expr::var(Var::U)).substitute(Var::X, &Expr::var(Var::V));
        let in_std = in_null
            .substitute(Var::U, &parse("x + t").unwrap())
            .substitute(Var::V, &parse("x - t").unwrap());
        let through = NullToStandard(ExprField::null(in_null));
        let direct = ExprField::standard(in_std);
        let (a, b) = (through.jet_at(p).unwrap(), direct.jet_at(p).unwrap());
        let scale = b.components().iter().fold(1.0f64, |m, c| m.max(c.abs()));
        for (x, y) in a.components().iter().zip(b.components()) {
            prop_assert!((x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn null_coordinates_round_trip(p in point()) {
        let q = from_null(to_null(p));
        prop_assert!((q.0 - p.0).abs() < 1e-15 && (q.1 - p.1).abs() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn compactification_preserves_curvature(
        src in positive_factor(),
        (t, x) in (-1.2f64..1.2, -1.2f64..1.2),
    ) {
        // R is a scalar, so the compact chart sees the same value at the image point
        prop_assume!(t.abs() + x.abs() < 1.5);
        let f = explicit(&src);
        let c = compactify(&f).unwrap();
        let q = decompactify((t, x));
        let (rc, r) = (ricci_scalar(&c, (t, x)).unwrap(), ricci_scalar(&f, q).unwrap());
        prop_assert!(close(rc, r, 1e-8), "{rc} vs {r} at {q:?}");
    }

    #[test]
    fn null_rays_have_zero_interval(src in positive_factor(), s in -0.9f64..0.9) {
        let f = explicit(&src);
        prop_assert_eq!(interval_field(&f, (s, s)).unwrap(), 0.0);
        prop_assert_eq!(interval_field(&f, (s, -s)).unwrap(), 0.0);
        let c = compactify(&f).unwrap();
        prop_assert_eq!(interval_field(&c, (s, s)).unwrap(), 0.0);
    }

    #[test]
    fn flat_factors_are_flat(seed in any::<u64>(), p in point()) {
        let mut r = rng(seed);
        let (a, b) = (random_univariate(&mut r, 0.5), random_univariate(&mut r, 0.5));
        let f = flat_factor(
            &parse(&format!("exp({})", a.source())).unwrap(),
            &parse(&format!("exp({})", b.source())).unwrap(),
        )
        .unwrap();
        prop_assert_eq!(ricci_scalar(&f, p).unwrap(), 0.0);
    }

    #[test]
    fn antiderivative_is_an_integral(seed in any::<u64>(), s in -3.0f64..3.0) {
        let g = random_univariate(&mut rng(seed), 1.0);
        let anti = Antiderivative::new(parse(&g.source()).unwrap(), 0.0, DEFAULT_TOLERANCE);
        let want = gauss_legendre(|l| g.eval(l), 0.0, s);
        prop_assert!((anti.value(s).unwrap() - want).abs() < 1e-9);
        let jet = anti.jet(conformal::jet::Jet2::seeds((s, 0.0)).0).unwrap();
        prop_assert!(close(jet.dt, g.eval(s), 1e-12));
    }

    #[test]
    fn liouville_curvature_is_the_parameter(seed in any::<u64>(), p in point(), r in 0.5f64..3.0) {
        let mut g = rng(seed);
        let (phi, psi) = (random_univariate(&mut g, 0.3), random_univariate(&mut g, 0.3));
        // C large enough that D = k F(u) − R/(8k) G(v) + C stays positive near the origin
        let f = liouville_factor(
            &parse(&phi.source()).unwrap(),
            &parse(&psi.source()).unwrap(),
            1.0,
            5.0,
            -r,
            Default::default(),
        )
        .unwrap();
        let got = ricci_scalar(&f, p).unwrap();
        prop_assert!((got + r).abs() < 1e-9, "{got} vs {}", -r);
    }
}

#[test]
fn exp_sine_antiderivative_matches_fine_simpson() {
    let anti = Antiderivative::new(parse("exp(sin(l))").unwrap(), 0.0, DEFAULT_TOLERANCE);
    let n = 1_000_000;
    let h = 2.0 / n as f64;
    let f = |l: f64| l.sin().exp();
    let mut sum = f(0.0) + f(2.0);
    for k in 1..n {
        sum += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    let simpson = sum * h / 3.0;
    assert!((anti.value(2.0).unwrap() - simpson).abs() < 1e-9);
}

#[test]
fn grid_sampling_is_deterministic() {
    let f = explicit("exp(sin(t*x))*(2 + x^2)");
    let domain: Domain = "rect:-1,1,-1,1".parse().unwrap();
    let a = sample_grid(&f, &domain, (37, 41)).unwrap();
    let b = sample_grid(&f, &domain, (37, 41)).unwrap();
    assert_eq!(
        render(Artifact::Grid(&a), Format::Csv).unwrap(),
        render(Artifact::Grid(&b), Format::Csv).unwrap()
    );
}

#[test]
fn report_pass_is_monotone_in_tolerance() {
    let f = explicit("exp(t^2/4)");
    let domain: Domain = "rect:-1,1,-1,1".parse().unwrap();
    let grid = sample_grid(&f, &domain, (20, 20)).unwrap();
    let mut passed = false;
    for k in -12..=1 {
        let tol = 10f64.powi(k);
        let rep = constancy_report(&grid, 0.0, tol).unwrap();
        assert!(!passed || rep.pass, "pass lost when tolerance grew to {tol}");
        passed = rep.pass;
        assert_eq!(rep.pass, rep.max_abs_deviation <= tol);
    }
    assert!(passed);
}
