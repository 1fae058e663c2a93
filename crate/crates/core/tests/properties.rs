//! Randomised invariants across the parameter space.

use gaqed_core::dynamics::evolve_state;
use gaqed_core::eigen::{count_below, dense_spectrum};
use gaqed_core::markovian::{
    compute_rates, liouvillian_magic, propagate, AtomsDensityMatrix, MasterForm,
};
use gaqed_core::special::{bessel_integrals, bessel_sequence};
use gaqed_core::spectral::{bic_exists_single, boc_energies, boc_rhs_closed};
use gaqed_core::{build_hamiltonian, dispersion, SingleExcitationState, SystemParams};
use proptest::prelude::*;

fn magic_params() -> impl Strategy<Value = SystemParams> {
    (2usize..12, 0.01f64..0.5, 0.01f64..0.5)
        .prop_flat_map(|(n, g, gs)| (Just(n), 1..n, Just(g), Just(gs)))
        .prop_map(|(n, m, g, gs)| SystemParams::resonant(n, g).with_small_atom(gs, m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cross_rate_is_bounded(p in magic_params()) {
        let r = compute_rates(&p).unwrap();
        prop_assert!(r.gamma_i.abs() <= (r.gamma_g * r.gamma_s).sqrt() + 1e-15);
        prop_assert!(r.gamma_g >= 0.0 && r.gamma_s >= 0.0);
    }

    #[test]
    fn lindblad_evolution_stays_physical(p in magic_params(), eta in 0.0f64..0.05, delta in -0.05f64..0.05, t in 0.0f64..500.0) {
        let p = p.with_drive(eta, delta);
        let l = liouvillian_magic(&p, MasterForm::Literal).unwrap();
        for rho0 in [AtomsDensityMatrix::giant_excited(), AtomsDensityMatrix::small_excited()] {
            let rho = &propagate(&l, &rho0, &[t]).unwrap()[0];
            prop_assert!((rho.trace().re - 1.0).abs() < 1e-10);
            prop_assert!(rho.min_eigenvalue() > -1e-8);
            prop_assert!(rho.asymmetry() < 1e-10);
        }
    }

    #[test]
    fn exact_evolution_is_unitary(n in 1usize..9, g in 0.0f64..1.5, t in 0.0f64..8.0, detuning in -1.0f64..1.0) {
        let mut p = SystemParams::resonant(n, g);
        p.omega = detuning;
        let p = p.sized_for_horizon(t);
        let s = evolve_state(&p, &SingleExcitationState::giant_excited(&p), t).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inertia_count_matches_dense(p in magic_params(), shift in -3.0f64..3.0) {
        let sites = p.separation + 25;
        let p = p.centered(sites);
        let h = build_hamiltonian(&p).unwrap();
        let vals = dense_spectrum(&h);
        // Keep the shift away from eigenvalues so both counts are unambiguous.
        prop_assume!(vals.iter().all(|v| (v - shift).abs() > 1e-9));
        prop_assert_eq!(count_below(&h, shift), vals.iter().filter(|&&v| v < shift).count());
    }

    #[test]
    fn even_separation_boc_pair_is_symmetric(half in 1usize..8, g in 0.02f64..2.0) {
        let p = SystemParams::resonant(2 * half, g);
        let (up, lo) = boc_energies(&p).unwrap();
        prop_assert!((up + lo).abs() < 1e-9);
        prop_assert!(up > 2.0);
        let e = up - p.omega_c;
        prop_assert!((e - boc_rhs_closed(&p, e)).abs() < 1e-9);
    }

    #[test]
    fn bic_exists_iff_separation_is_2_mod_4(n in 1usize..40) {
        let p = SystemParams::resonant(n, 0.1);
        prop_assert_eq!(bic_exists_single(&p).unwrap(), n % 4 == 2);
    }

    #[test]
    fn dispersion_stays_in_band(k in -std::f64::consts::PI..std::f64::consts::PI, omega_c in -3.0f64..3.0) {
        let mut p = SystemParams::resonant(4, 0.1);
        p.omega_c = omega_c;
        let w = dispersion(&p, k);
        prop_assert!(w >= omega_c - 2.0 * p.xi - 1e-15 && w <= omega_c + 2.0 * p.xi + 1e-15);
    }

    #[test]
    fn bessel_recurrence_and_neumann_sum(x in 0.01f64..500.0) {
        let j = bessel_sequence(60, x);
        for n in 1..30 {
            let lhs = j[n - 1] + j[n + 1];
            let rhs = 2.0 * n as f64 / x * j[n];
            prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()), "n={}", n);
        }
        let top = bessel_sequence(60 + x as usize * 2, x);
        let sum: f64 = top[0] + 2.0 * top.iter().skip(2).step_by(2).sum::<f64>();
        prop_assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn running_integral_derivative(n in 0usize..8, x in 0.5f64..200.0) {
        // d/dx int_0^x J_n = J_n(x)
        let h = 1e-4;
        let a = bessel_integrals(n, x - h).first[n];
        let b = bessel_integrals(n, x + h).first[n];
        let v = bessel_integrals(n, x).value[n];
        prop_assert!(((b - a) / (2.0 * h) - v).abs() < 1e-7);
    }
}
