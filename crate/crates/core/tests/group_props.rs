use heis_core::hgroup::{horizontal_point, in_horizontal_plane};
use heis_core::{HVector, Point};
use proptest::prelude::*;

fn point(s: f64) -> impl Strategy<Value = Point> {
    (-s..s, -s..s, -s..s).prop_map(|(x, y, t)| Point::new(x, y, t))
}

fn close(a: Point, b: Point, tol: f64) -> bool {
    (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol && (a.t - b.t).abs() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn associativity(a in point(3.0), b in point(3.0), c in point(3.0)) {
        prop_assert!(close(a.mul(b).mul(c), a.mul(b.mul(c)), 1e-12));
    }

    #[test]
    fn inverse_and_identity(a in point(5.0)) {
        prop_assert_eq!(a.mul(Point::IDENTITY), a);
        prop_assert!(close(a.inverse().mul(a), Point::IDENTITY, 0.0));
    }

    #[test]
    fn plane_relation_is_symmetric(g in point(2.0), v in (-2.0..2.0f64, -2.0..2.0f64), dt in prop_oneof![Just(0.0), -1.0..1.0f64]) {
        let gp = g.exp_horizontal(HVector::new(v.0, v.1));
        let gp = Point::new(gp.x, gp.y, gp.t + dt);
        for tol in [1e-9, 1e-3] {
            prop_assert_eq!(in_horizontal_plane(g, gp, tol), in_horizontal_plane(gp, g, tol));
        }
    }

    #[test]
    fn gauge_is_homogeneous(g in point(3.0), r in 0.0..10.0f64) {
        let lhs = g.dilate(r).unwrap().gauge();
        prop_assert!((lhs - r * g.gauge()).abs() <= 1e-12 * (1.0 + r * g.gauge()));
    }

    #[test]
    fn distance_is_left_invariant(a in point(2.0), b in point(2.0), h in point(2.0)) {
        let d = a.distance(b);
        prop_assert!((h.mul(a).distance(h.mul(b)) - d).abs() <= 1e-12 * (1.0 + d));
    }

    #[test]
    fn segment_interpolates_first_layer(g in point(2.0), v in (-2.0..2.0f64, -2.0..2.0f64), lam in 0.0..=1.0f64) {
        let gp = g.exp_horizontal(HVector::new(v.0, v.1));
        let p = horizontal_point(g, gp, lam).unwrap();
        let expect = g.xi1().lerp(gp.xi1(), lam);
        prop_assert!((p.xi1() - expect).norm() <= 1e-12);
        prop_assert!(g.in_plane_of(p));
    }
}
