//! Property tests for the discretized operators: structural invariants that
//! must hold for every admissible parameter choice, exercised on randomly
//! drawn small configurations.

use contact_spectra::kernels::ModelSpec;
use contact_spectra::operators::{
    angular_moment, discretize_k_1d, grid_1d, radial_sector, sym_eigen,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, .. ProptestConfig::default() })]

    #[test]
    fn line_grids_are_mirror_symmetric(
        half_width in 0.5_f64..20.0,
        min_nodes in 16_usize..200,
    ) {
        let g = grid_1d(half_width, min_nodes).unwrap();
        prop_assert!(g.len() >= min_nodes);
        prop_assert_eq!(g.len() % 16, 0);
        let n = g.len();
        for i in 0..n / 2 {
            let mirror = g.nodes()[i] + g.nodes()[n - 1 - i];
            prop_assert!(mirror.abs() <= 1e-12 * half_width);
            prop_assert!((g.weights()[i] - g.weights()[n - 1 - i]).abs()
                <= 1e-12 * g.weights()[i]);
        }
        let total: f64 = g.weights().iter().sum();
        prop_assert!((total - 2.0 * half_width).abs() <= 1e-11 * half_width);
    }

    #[test]
    fn radial_measures_capture_the_volume(
        dim in 2_u32..=3,
        radius in 0.5_f64..15.0,
        sector in 0_u32..8,
    ) {
        let s = radial_sector(dim, sector, radius, 32, 32).unwrap();
        let total: f64 = s.measures().iter().sum();
        let exact = radius.powi(dim as i32) / dim as f64;
        prop_assert!((total - exact).abs() <= 1e-11 * exact);
    }

    #[test]
    fn eigensolver_reconstructs_small_random_matrices(
        seed in 0_u64..1_000_000,
        n in 1_usize..=10,
    ) {
        // splitmix-style generator: deterministic given the seed.
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let mut a = vec![0.0_f64; n * n];
        for i in 0..n {
            for j in i..n {
                let v = next();
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let eig = sym_eigen(&a, n).unwrap();
        let fro: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        for w in eig.values.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        let mut err = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let mut sum = 0.0;
                for p in 0..n {
                    sum += eig.values[p] * eig.vectors[p * n + i] * eig.vectors[p * n + j];
                }
                err += (sum - a[i * n + j]).powi(2);
            }
        }
        prop_assert!(err.sqrt() <= 1e-10 * fro);
    }
}

proptest! {
    // Each case assembles 32x32 operators; keep the count small.
    #![proptest_config(ProptestConfig { cases: 6, .. ProptestConfig::default() })]

    #[test]
    fn line_operator_is_positive_and_shift_monotone(
        omega in 0.5_f64..4.0,
        lambda in 0.2_f64..3.0,
    ) {
        let grid = grid_1d(8.0 / omega.sqrt(), 32).unwrap();
        let lo = discretize_k_1d(&ModelSpec::new(1, omega, 0.0, lambda).unwrap(), &grid)
            .unwrap();
        let hi = discretize_k_1d(
            &ModelSpec::new(1, omega, 0.0, lambda * 1.5).unwrap(),
            &grid,
        )
        .unwrap();
        let ev_lo = sym_eigen(lo.matrix(), lo.n()).unwrap().values;
        let ev_hi = sym_eigen(hi.matrix(), hi.n()).unwrap().values;
        let slack = 1e-9 * ev_lo.last().unwrap();
        prop_assert!(ev_lo[0] > 0.0);
        prop_assert!(ev_hi[0] > 0.0);
        for (a, b) in ev_lo.iter().zip(&ev_hi) {
            prop_assert!(*b <= *a + slack, "eigenvalue grew with the shift");
        }
    }

    #[test]
    fn sector_zero_moment_dominates_higher_sectors(
        dim in 2_u32..=3,
        sector in 1_u32..6,
        r in 0.3_f64..3.0,
        gap in 0.1_f64..2.0,
        lambda in 0.3_f64..2.0,
    ) {
        let sp = ModelSpec::new(dim, 1.0, 0.0, lambda).unwrap();
        let a0 = angular_moment(&sp, 0, r, r + gap).unwrap();
        let am = angular_moment(&sp, sector, r, r + gap).unwrap();
        prop_assert!(a0 > 0.0);
        prop_assert!(a0 >= am.abs());
    }
}
