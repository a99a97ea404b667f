use heis_core::convexity::{check_convex_hessian, check_convex_segments, linspace, radial_criterion, Region};
use heis_core::mongeampere::{ma_density, ma_measure};
use heis_core::quadrature::QuadratureSpec;
use heis_core::{DiffMode, Exec, Point, RadialField, ScalarField};
use proptest::prelude::*;

fn quadratic(a: f64, b: f64, c: f64, d: f64, e: f64) -> ScalarField {
    ScalarField::parse(&format!(
        "({a})*x^2 + ({b})*x*y + ({c})*y^2 + ({d})*t + ({e})*(x^2+y^2)^2"
    ))
    .unwrap()
}

fn small_box() -> Region {
    Region::cube(-1.0, 1.0, 5).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hessian_pass_implies_segment_pass(
        a in -1.0..2.0f64, b in -2.0..2.0f64, c in -1.0..2.0f64, d in -2.0..2.0f64, e in 0.0..1.0f64, seed in 0u64..1000,
    ) {
        let u = quadratic(a, b, c, d, e);
        let h = check_convex_hessian(&u, &small_box(), Exec::Sequential).unwrap();
        if h.passed() {
            let s = check_convex_segments(&u, &small_box(), 200, seed, Exec::Sequential).unwrap();
            prop_assert!(s.passed(), "{}: {:?}", u.name(), s.witness);
        }
    }

    #[test]
    fn radial_pass_implies_segment_pass(a in 0.0..2.0f64, b in 0.0..2.0f64, seed in 0u64..1000) {
        let v = RadialField::new(&format!("({a})*t^2 + ({b})")).unwrap();
        let rc = radial_criterion(&v, &linspace(-1.0, 1.0, 101)).unwrap();
        if rc.verdict.passed() {
            let s = check_convex_segments(v.field(), &small_box(), 200, seed, Exec::Sequential).unwrap();
            prop_assert!(s.passed(), "z = {a} t^2 + {b}: {:?}", s.witness);
        }
    }

    #[test]
    fn strictly_convex_segments_are_strict(
        l in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64), d in -2.0..2.0f64, seed in 0u64..1000,
    ) {
        // LLᵀ + I is positive definite.
        let (a, b, c) = (l.0 * l.0 + 1.0, 2.0 * l.0 * l.1, l.1 * l.1 + l.2 * l.2 + 1.0);
        let u = quadratic(a, b, c, d, 0.0);
        let s = check_convex_segments(&u, &small_box(), 200, seed, Exec::Sequential).unwrap();
        prop_assert!(s.passed());
        prop_assert!(s.worst_margin > 0.0);
    }

    #[test]
    fn ma_density_nonnegative_on_convex(
        a in -1.0..2.0f64, b in -2.0..2.0f64, c in -1.0..2.0f64, d in -2.0..2.0f64, e in 0.0..1.0f64,
        g in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
    ) {
        let u = quadratic(a, b, c, d, e);
        if check_convex_hessian(&u, &small_box(), Exec::Sequential).unwrap().passed() {
            let m = ma_density(&u, Point::new(g.0, g.1, g.2), DiffMode::Exact).unwrap();
            prop_assert!(m >= -1e-9);
        }
    }

    #[test]
    fn ma_measure_is_additive(
        a in -1.0..2.0f64, b in -2.0..2.0f64, c in -1.0..2.0f64, d in -2.0..2.0f64, e in 0.0..1.0f64,
        axis in 0usize..3, cut in 0.05..0.95f64,
    ) {
        let u = quadratic(a, b, c, d, e);
        let whole = Region::cube(0.0, 1.0, 2).unwrap();
        let (lo, hi) = whole.split(axis, cut).unwrap();
        let spec = QuadratureSpec { subdivisions: 2, ..QuadratureSpec::default() };
        let m = |r: &Region| ma_measure(&u, r, &spec, false, Exec::Sequential).unwrap().value;
        let (w, l, h) = (m(&whole), m(&lo), m(&hi));
        prop_assert!((w - l - h).abs() <= 1e-12 * (1.0 + w.abs()), "{w} vs {l} + {h}");
    }
}
