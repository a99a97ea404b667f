use heis_core::rockafellar::{build_chain, chain_sum};
use heis_core::verify::{random_chain, random_convex_quadratic};
use heis_core::Point;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn point(s: f64) -> impl Strategy<Value = Point> {
    (-s..s, -s..s, -s..s).prop_map(|(x, y, t)| Point::new(x, y, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn chain_sum_is_a_lower_bound(seed in any::<u64>(), len in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_convex_quadratic(&mut rng);
        let c = random_chain(&u, &mut rng, len, 1.0).unwrap();
        let s = chain_sum(&c).unwrap();
        prop_assert!(s <= u.value(c.end()).unwrap() - u.value(c.start()).unwrap() + 1e-9);
    }

    #[test]
    fn constructed_chains_are_sandwiched(seed in any::<u64>(), g0 in point(1.0), g in point(1.0), n in 1usize..64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_convex_quadratic(&mut rng);
        let c = build_chain(&u, g0, g, n).unwrap();
        let gap = c.gap(&u).unwrap();
        prop_assert!(gap >= -1e-9 && gap <= c.gap_bound() + 1e-9, "gap {gap}, bound {}", c.gap_bound());
        for w in c.nodes().windows(2) {
            prop_assert!(w[0].g.in_plane_of(w[1].g) && w[1].g.in_plane_of(w[0].g));
        }
    }

    #[test]
    fn gap_decreases_like_one_over_n(seed in any::<u64>(), g0 in point(1.0), g in point(1.0)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_convex_quadratic(&mut rng);
        let gaps: Vec<(usize, f64)> = [8usize, 16, 32, 64, 128]
            .iter()
            .map(|&n| (n, build_chain(&u, g0, g, n).unwrap().gap(&u).unwrap()))
            .collect();
        for w in gaps.windows(2) {
            prop_assert!(w[1].1 <= w[0].1 + 1e-9, "{gaps:?}");
        }
        let c = gaps.iter().map(|&(n, gap)| gap * n as f64).fold(0.0, f64::max);
        let (n, last) = gaps[gaps.len() - 1];
        prop_assert!(last <= c / n as f64 + 1e-9);
        // For a quadratic the gap is exactly C/N, so the fitted constant is flat.
        prop_assert!((gaps[0].1 * 8.0 - last * n as f64).abs() <= 1e-6 * (1.0 + c));
    }
}
