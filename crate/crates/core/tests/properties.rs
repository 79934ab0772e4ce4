//! Property-based invariants of the clock construction and the measure
//! integrals.

use proptest::prelude::*;

use pathstab_core::levy::{JumpRegion, LevyMeasureSpec};
use pathstab_core::rng::{stream_rng, StreamRole};
use pathstab_core::subordinator::{
    invert_subordinator, simulate_subordinator_path, SubordinatorSpec,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The grid inverse always satisfies D(E_t - delta) <= t < D(E_t) and is
    /// nondecreasing, whatever the index and step.
    #[test]
    fn inversion_sandwich_holds(
        alpha in 0.2f64..0.95,
        delta_exp in 6u32..10,
        seed in 0u64..1000,
    ) {
        let delta = 2f64.powi(-(delta_exp as i32));
        let spec = SubordinatorSpec::stable(alpha).unwrap();
        let mut rng = stream_rng(seed, 0, StreamRole::Clock);
        let d = simulate_subordinator_path(&spec, 4.0, delta, &mut rng).unwrap();
        prop_assert!(d.windows(2).all(|w| w[1] > w[0]));
        let top = d.last().unwrap() * 0.95;
        let grid: Vec<f64> = (1..=37).map(|j| top * j as f64 / 37.0).collect();
        let clock = invert_subordinator(&d, delta, &grid).unwrap();
        prop_assert!(clock.e_values().windows(2).all(|w| w[1] >= w[0]));
        for (j, &t) in grid.iter().enumerate() {
            let k = clock.e_cell_index(j);
            prop_assert!(d[k] > t);
            prop_assert!(d[k - 1] <= t);
        }
    }

    /// Paths are a pure function of (spec, seed, step).
    #[test]
    fn subordinator_paths_deterministic(seed in 0u64..500, alpha in 0.3f64..0.9) {
        let spec = SubordinatorSpec::stable(alpha).unwrap();
        let mut r1 = stream_rng(seed, 0, StreamRole::Clock);
        let mut r2 = stream_rng(seed, 0, StreamRole::Clock);
        let a = simulate_subordinator_path(&spec, 1.0, 0.01, &mut r1).unwrap();
        let b = simulate_subordinator_path(&spec, 1.0, 0.01, &mut r2).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Measure integration is linear in the integrand and monotone for
    /// nonnegative integrands, on both regions.
    #[test]
    fn nu_integral_linear_and_monotone(
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        cutoff in 0.4f64..2.0,
    ) {
        let m = LevyMeasureSpec::std_normal(cutoff).unwrap();
        for region in [JumpRegion::Small, JumpRegion::Large] {
            let f1 = m.integrate(region, &|y| y * y).unwrap();
            let f2 = m.integrate(region, &|y: f64| y.cos()).unwrap();
            let combo = m.integrate(region, &|y| a * y * y + b * y.cos()).unwrap();
            prop_assert!((combo - (a * f1 + b * f2)).abs() < 1e-7);
            let lo = m.integrate(region, &|y| y * y).unwrap();
            let hi = m.integrate(region, &|y| y * y + 0.5).unwrap();
            prop_assert!(hi >= lo);
        }
    }
}
