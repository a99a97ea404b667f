use heis_core::calculus::horizontal_gradient;
use heis_core::convexity::{linspace, Region};
use heis_core::subdiff::{
    lipschitz_estimate, monotonicity_condition, radial_circle_image, reconstruct_subdifferential,
    reconstruct_subdifferential_refined, verify_subgradient, Shape,
};
use heis_core::{DiffMode, Exec, HVector, Point, RadialField, ScalarField};
use proptest::prelude::*;

const FIELDS: [&str; 5] = [
    "abs(x)",
    "abs(x)+abs(y)",
    "abs(x-y)+x^2",
    "exp(x-y)+x^2+y^2+t",
    "exp(x)+y^2+t",
];

fn kinked_point() -> impl Strategy<Value = Point> {
    (
        prop_oneof![Just(0.0), -0.5..0.5f64],
        prop_oneof![Just(0.0), -0.5..0.5f64],
        -0.5..0.5f64,
    )
        .prop_map(|(x, y, t)| Point::new(x, y, t))
}

fn around(g: Point, h: f64) -> Region {
    Region::new([g.x - h, g.y - h, g.t - 1.0], [g.x + h, g.y + h, g.t + 1.0], [3, 3, 3]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn vertices_are_subgradients(
        which in 0usize..FIELDS.len(), g in kinked_point(), n_dirs in 8usize..400, seed in 0u64..100,
    ) {
        let u = ScalarField::parse(FIELDS[which]).unwrap();
        let s = reconstruct_subdifferential_refined(&u, g, n_dirs, 1e-8, Exec::Sequential).unwrap();
        prop_assert!(s.set.is_convex());
        for &p in &s.set.vertices {
            let c = verify_subgradient(&u, g, p, &around(g, 0.5), 200, seed).unwrap();
            prop_assert!(c.worst_margin >= -1e-6, "{} at {g}: vertex {p} margin {}", FIELDS[which], c.worst_margin);
        }
    }

    #[test]
    fn vertices_are_bounded_by_lipschitz(which in 0usize..FIELDS.len(), g in kinked_point()) {
        let u = ScalarField::parse(FIELDS[which]).unwrap();
        let s = reconstruct_subdifferential(&u, g, 180, Exec::Sequential).unwrap();
        let l = lipschitz_estimate(&u, g, 1e-3, 360).unwrap();
        prop_assert!(s.set.max_norm() <= l + 1e-6, "{}: {} > {l}", FIELDS[which], s.set.max_norm());
    }

    #[test]
    fn gradient_limits_are_subgradients(
        which in 3usize..FIELDS.len(), g in kinked_point(), dir in 0.0..std::f64::consts::TAU, seed in 0u64..100,
    ) {
        let u = ScalarField::parse(FIELDS[which]).unwrap();
        let step = HVector::from_angle(dir);
        let ps: Vec<HVector> = (1..=6)
            .map(|k| {
                let h = 10f64.powi(-k);
                let gn = Point::new(g.x + h * step.a, g.y + h * step.b, g.t + h);
                horizontal_gradient(&u, gn, DiffMode::Exact).unwrap()
            })
            .collect();
        let p = *ps.last().unwrap();
        prop_assert!((ps[4] - p).norm() < 1e-4);
        let c = verify_subgradient(&u, g, p, &around(g, 0.5), 200, seed).unwrap();
        prop_assert!(c.worst_margin >= -1e-5, "margin {}", c.worst_margin);
    }

    #[test]
    fn monotone_radius(a in 0.0..1.0f64, b in 0.0..2.0f64, t in -1.0..1.0f64) {
        let v = RadialField::new(&format!("({a})*t^2 + ({b})")).unwrap();
        let rg = linspace(0.0, 2.0, 41);
        if monotonicity_condition(v.profile(), &rg, &linspace(-1.0, 1.0, 21)).unwrap().pass {
            let radii: Vec<f64> = rg[1..].iter().map(|&r| radial_circle_image(v.profile(), t, r).unwrap()).collect();
            for w in radii.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12 * (1.0 + w[0]), "{w:?}");
            }
        }
    }
}

#[test]
fn smooth_diameter_shrinks_and_kink_stays_a_segment() {
    let u = ScalarField::parse("x^2+y^2+x*t").unwrap();
    let g = Point::new(0.2, -0.1, 0.3);
    let diam: Vec<f64> = [8, 64, 512]
        .iter()
        .map(|&n| {
            reconstruct_subdifferential(&u, g, n, Exec::Sequential)
                .unwrap()
                .set
                .diameter
        })
        .collect();
    assert!(diam.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{diam:?}");
    assert!(diam[2] <= 1e-4);

    let abs = ScalarField::parse("abs(x)").unwrap();
    for n in [8, 64, 512] {
        let s = reconstruct_subdifferential(&abs, Point::new(0.0, 0.3, -0.2), n, Exec::Sequential).unwrap();
        assert_eq!(s.set.shape, Shape::Segment);
        assert!((s.set.diameter - 2.0).abs() < 1e-6);
    }
}

#[test]
fn gauge_vertices_pass_on_a_small_box() {
    let u = ScalarField::parse("((x^2+y^2)^2+t^2)^(1/4)").unwrap();
    let s = reconstruct_subdifferential(&u, Point::IDENTITY, 720, Exec::default()).unwrap();
    let region = Region::cube(-0.05, 0.05, 3).unwrap();
    for &p in s.set.vertices.iter().step_by(7) {
        let c = verify_subgradient(&u, Point::IDENTITY, p, &region, 400, 1).unwrap();
        assert!(c.worst_margin >= -1e-6, "{p}: {}", c.worst_margin);
    }
}
