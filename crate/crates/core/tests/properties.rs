//! Randomised invariants across modules.

use kgfluct_core::automaton::{run_automaton, sample_initial};
use kgfluct_core::effective_action::{minkowski_action, solve_mirror_series, tree_level_delta_s, SpacetimeField};
use kgfluct_core::observables::{expect_classical, expect_quantum_product, monomial};
use kgfluct_core::transport::{block_backward, block_forward};
use kgfluct_core::{
    fourier_pi_to_zeta, fourier_zeta_to_pi, Axis, ClassicalWaveFunction, Lattice, ModelParams, PhaseGrid,
    SiteGaussian, WaveFunction,
};
use proptest::prelude::*;

fn small_grid() -> PhaseGrid {
    let a = Axis::spanning(0.0, 6.0, 33).unwrap();
    PhaseGrid::new(a, a, 1).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn blocks_invert_to_round_off(
        sigma in prop::collection::vec(-2.0f64..2.0, 8),
        pi in prop::collection::vec(-2.0f64..2.0, 8),
        coupling in 0.0f64..1.0,
    ) {
        let lattice = Lattice::new(vec![8]);
        let params = ModelParams::new(1.0, coupling, 1, 0.1).unwrap().with_laplacian_prefactor(0.2).unwrap();
        let (mut s, mut p) = (sigma.clone(), pi.clone());
        let mut scratch = vec![0.0; 8];
        for _ in 0..50 {
            block_forward(&mut s, &mut p, &lattice, &params, &mut scratch);
        }
        for _ in 0..50 {
            block_backward(&mut s, &mut p, &lattice, &params, &mut scratch);
        }
        for (a, b) in s.iter().zip(&sigma).chain(p.iter().zip(&pi)) {
            prop_assert!((a - b).abs() < 1e-11, "{a} vs {b}");
        }
    }

    #[test]
    fn action_is_antisymmetric(
        phi in prop::collection::vec(-3.0f64..3.0, 12),
        chi in prop::collection::vec(-3.0f64..3.0, 12),
        coupling in 0.0f64..2.0,
    ) {
        let params = ModelParams::new(0.7, coupling, 2, 0.3).unwrap();
        let f = SpacetimeField::new(vec![2, 3], 2, phi).unwrap();
        let g = SpacetimeField::new(vec![2, 3], 2, chi).unwrap();
        let a = minkowski_action(&f, &g, &params).unwrap();
        let b = minkowski_action(&g, &f, &params).unwrap();
        prop_assert_eq!(a.total, -b.total);
    }

    #[test]
    fn transform_is_unitary_and_invertible(values in prop::collection::vec(-1.0f64..1.0, 33 * 33)) {
        prop_assume!(values.iter().any(|v| v.abs() > 1e-3));
        let q = ClassicalWaveFunction::new(small_grid(), values, 0.0).unwrap();
        let psi = fourier_pi_to_zeta(&q);
        prop_assert!((psi.norm_sq() - q.norm_sq()).abs() <= 1e-12 * q.norm_sq());
        let (back, residue) = fourier_zeta_to_pi(&psi).unwrap();
        prop_assert!(residue < 1e-12);
        for (a, b) in back.values.iter().zip(&q.values) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn expectations_are_blind_to_the_sign_of_q(values in prop::collection::vec(-1.0f64..1.0, 33 * 33)) {
        prop_assume!(values.iter().any(|v| v.abs() > 1e-3));
        let q = ClassicalWaveFunction::new(small_grid(), values, 0.0).unwrap().normalize().unwrap().0;
        let minus = ClassicalWaveFunction::new(q.grid.clone(), q.values.iter().map(|v| -v).collect(), 0.0).unwrap();
        let f = |s: &[f64], p: &[f64]| s[0] * s[0] - 0.3 * p[0] + s[0] * p[0];
        prop_assert_eq!(expect_classical(&q, f), expect_classical(&minus, f));
        let psi = fourier_pi_to_zeta(&q);
        let psi_minus = fourier_pi_to_zeta(&minus);
        let ops = monomial(0, 1, 1);
        let a = expect_quantum_product(&psi, &ops).unwrap();
        let b = expect_quantum_product(&psi_minus, &ops).unwrap();
        prop_assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn series_parity(coupling in 0.01f64..2.0, mass in 0.2f64..3.0, order in 1u32..6) {
        let params = ModelParams::new(mass, coupling, 0, 0.1).unwrap();
        let chi = solve_mirror_series(&params, order).unwrap().chi;
        prop_assert!(chi.is_odd());
        let ds = tree_level_delta_s(&chi, &params, order).unwrap();
        prop_assert!(ds.is_even());
    }
}

#[test]
fn ensemble_reversal_returns_to_start() {
    let params = ModelParams::new(1.0, 0.5, 1, 0.05).unwrap().with_laplacian_prefactor(0.2).unwrap();
    let ens = sample_initial(SiteGaussian::new(0.2, 0.0, 1.0, 1.0).unwrap(), &Lattice::new(vec![16]), 64, 7).unwrap();
    let there = run_automaton(&ens, &params, 500).unwrap();
    let back = run_automaton(&there.time_reversed(), &params, 500).unwrap().time_reversed();
    for (a, b) in back.members.iter().zip(&ens.members) {
        for (x, y) in a.sigma.iter().zip(&b.sigma).chain(a.pi.iter().zip(&b.pi)) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }
}
