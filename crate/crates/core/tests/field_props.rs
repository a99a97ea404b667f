use heis_core::calculus::{commutator_residual, directional_derivative, horizontal_gradient};
use heis_core::fielddsl::Func;
use heis_core::limit::default_lambdas;
use heis_core::{parse, DiffMode, Expr, HVector, Point, ScalarField, Var};
use proptest::prelude::*;

fn smooth_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3i32..=3).prop_map(|c| Expr::num(c as f64)),
        (0.1..2.0f64).prop_map(|c| Expr::num((c * 8.0).round() / 8.0)),
        prop::sample::select(Var::ALL.to_vec()).prop_map(Expr::var),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), 2u32..=3).prop_map(|(a, n)| Expr::pow(a, Expr::num(n as f64))),
            inner.clone().prop_map(Expr::neg),
            (prop::sample::select(vec![Func::Sin, Func::Cos]), inner.clone()).prop_map(|(f, a)| Expr::call(f, a)),
        ]
    })
}

fn point(s: f64) -> impl Strategy<Value = Point> {
    (-s..s, -s..s, -s..s).prop_map(|(x, y, t)| Point::new(x, y, t))
}

fn poly_src() -> impl Strategy<Value = String> {
    prop::collection::vec((-3i32..=3, 0u32..=2, 0u32..=2, 0u32..=2), 1..8).prop_map(|terms| {
        terms
            .iter()
            .map(|(c, i, j, k)| format!("({c})*x^{i}*y^{j}*t^{k}"))
            .collect::<Vec<_>>()
            .join("+")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn symbolic_partials_match_central_differences(e in smooth_expr(), g in point(1.0)) {
        let h = 1e-5;
        for v in Var::ALL {
            let d = e.diff(v).eval([g.x, g.y, g.t]).unwrap();
            let mut plus = [g.x, g.y, g.t];
            let mut minus = plus;
            plus[v.index()] += h;
            minus[v.index()] -= h;
            let fd = (e.eval(plus).unwrap() - e.eval(minus).unwrap()) / (2.0 * h);
            let scale = 1.0 + d.abs().max(fd.abs()) + e.eval([g.x, g.y, g.t]).unwrap().abs();
            prop_assert!((d - fd).abs() <= 1e-6 * scale, "{e} d/d{}: {d} vs {fd}", v.name());
        }
    }

    #[test]
    fn print_parse_is_idempotent(e in smooth_expr()) {
        let once = parse(&e.to_string()).unwrap();
        let twice = parse(&once.to_string()).unwrap();
        prop_assert_eq!(&once, &twice);
        let p = [0.3, -0.7, 0.45];
        let (a, b) = (e.eval(p).unwrap(), once.eval(p).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn commutator_identity(src in poly_src(), g in point(1.0)) {
        let u = ScalarField::parse(&src).unwrap();
        prop_assert!(commutator_residual(&u, g, DiffMode::Exact).unwrap().abs() <= 1e-10);
        prop_assert!(commutator_residual(&u, g, DiffMode::FiniteDifference).unwrap().abs() <= 1e-4);
    }

    #[test]
    fn exact_and_fd_gradients_agree(e in smooth_expr(), g in point(1.0)) {
        let u = ScalarField::from_expr(e);
        let a = horizontal_gradient(&u, g, DiffMode::Exact).unwrap();
        let b = horizontal_gradient(&u, g, DiffMode::FiniteDifference).unwrap();
        prop_assert!((a - b).norm() <= 1e-6 * (1.0 + a.norm()), "{} at {g}: {a} vs {b}", u.name());
    }

    #[test]
    fn quotients_decrease_for_convex_fields(
        which in 0usize..3,
        g in point(1.0),
        theta in 0.0..std::f64::consts::TAU,
    ) {
        let src = ["x^2+y^2", "(x^2+y^2)^2+t^2", "exp(x)+y^2+3*t"][which];
        let u = ScalarField::parse(src).unwrap();
        let d = directional_derivative(&u, g, HVector::from_angle(theta), &default_lambdas(), true).unwrap();
        prop_assert!(d.monotone);
    }
}
