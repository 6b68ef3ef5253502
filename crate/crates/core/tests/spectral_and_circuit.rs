mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

use trapcorr::circuit::{
    correlation_circuit, hadamard_test, potential_matrix, xgate_decomposition_matrix,
    EstimatorMode, TrotterConfig,
};
use trapcorr::hamiltonian::{
    build_basis, build_hamiltonian, correlation_exact, eigendecompose, eigenvalues, BasisMode,
};
use trapcorr::model::PhysicalParams;
use trapcorr::series::uniform_grid;

fn fig2(n_cut: usize) -> PhysicalParams {
    PhysicalParams::new(2.5, 2.0, 90.0, n_cut).unwrap()
}

#[test]
fn expm_oracle_sanity() {
    let a = Dense::from_fn(2, |i, j| match (i, j) {
        (0, 1) => Complex64::new(-1.0, 0.0),
        (1, 0) => Complex64::new(1.0, 0.0),
        _ => Complex64::new(0.0, 0.0),
    });
    let r = expm(&a.scale(Complex64::new(0.7, 0.0)));
    assert!((r.get(0, 0).re - 0.7f64.cos()).abs() < 1e-15);
    assert!((r.get(1, 0).re - 0.7f64.sin()).abs() < 1e-15);
}

#[test]
fn trace_matches_matrix_exponential_small_boxes() {
    for (mode, v0, mass, l) in [
        (BasisMode::Symmetric, 2.5, 2.0, 90.0),
        (BasisMode::Symmetric, -1.3, 0.7, 6.0),
        (BasisMode::Qubit(3), 4.0, 1.0, 12.0),
        (BasisMode::Qubit(4), 0.4, 3.0, 4.5),
    ] {
        let n_cut = if mode == BasisMode::Symmetric { 7 } else { 0 };
        let params = PhysicalParams::new(v0, mass, l, n_cut).unwrap();
        let basis = build_basis(&params, mode).unwrap();
        let d = basis.dim();
        let grid = uniform_grid(0.0, 3.0, 19);
        let ev = eigenvalues(&build_hamiltonian(&params, &basis)).unwrap();
        let c = correlation_exact(&ev, &grid).unwrap();
        for (t, ct) in c.iter() {
            let tr = exact_propagator(&params, basis.indices(), t).trace();
            assert!((ct - tr).norm() <= 1e-10 * d as f64, "D={d} t={t}: {ct} vs {tr}");
        }
    }
}

#[test]
fn spectral_propagator_matches_matrix_exponential() {
    let params = PhysicalParams::new(2.5, 2.0, 9.0, 0).unwrap();
    let basis = build_basis(&params, BasisMode::Qubit(3)).unwrap();
    let spec = eigendecompose(&build_hamiltonian(&params, &basis)).unwrap();
    let u = from_faer(&spec.propagator(1.3));
    let oracle = exact_propagator(&params, basis.indices(), 1.3);
    assert!(u.sub(&oracle).max_abs() < 1e-12);
}

#[test]
fn xgate_decomposition_matches_matrix_exponential() {
    for g in 1..=4 {
        for theta in [0.0, 0.1, 1.0, std::f64::consts::PI, 2.5] {
            let oracle = constant_coupling_propagator(g, theta);
            let dec = from_faer(&xgate_decomposition_matrix(g, theta).unwrap());
            let closed = from_faer(&potential_matrix(g, theta));
            assert!(dec.sub(&oracle).max_abs() < 1e-12, "g={g} theta={theta}");
            assert!(closed.sub(&oracle).max_abs() < 1e-12, "g={g} theta={theta}");
        }
    }
}

#[test]
fn trotter_error_is_first_order() {
    let params = fig2(0);
    let basis = build_basis(&params, BasisMode::Qubit(3)).unwrap();
    let exact = exact_propagator(&params, basis.indices(), 1.0);
    let steps = [64usize, 128, 256, 512, 1024];
    let errs: Vec<f64> = steps
        .iter()
        .map(|&n| {
            let cfg = TrotterConfig::new(n, 1.0).unwrap();
            trotter_unitary(&cfg, &params, &basis).sub(&exact).frobenius()
        })
        .collect();
    let x: Vec<f64> = steps.iter().map(|&n| n as f64).collect();
    let slope = loglog_slope(&x, &errs);
    assert!((slope + 1.0).abs() <= 0.1, "slope {slope}, errors {errs:?}");
}

#[test]
fn circuit_correlator_converges_to_exact() {
    let params = fig2(0);
    let basis = build_basis(&params, BasisMode::Qubit(3)).unwrap();
    let ev = eigenvalues(&build_hamiltonian(&params, &basis)).unwrap();
    let grid = uniform_grid(0.0, 1.0, 4);
    let exact = correlation_exact(&ev, &grid).unwrap();
    let configs: Vec<_> = grid.iter().map(|&t| TrotterConfig::from_rate(4096, t).unwrap()).collect();
    let circ = correlation_circuit(&grid, &configs, EstimatorMode::Exact, &params, &basis).unwrap();
    for ((t, a), (_, b)) in exact.iter().zip(circ.iter()) {
        assert!((a - b).norm() < 1e-9, "t={t}: {a} vs {b}");
    }
}

#[test]
fn hadamard_test_reads_trotter_diagonal() {
    let params = fig2(0);
    let basis = build_basis(&params, BasisMode::Qubit(3)).unwrap();
    let cfg = TrotterConfig::new(200, 0.8).unwrap();
    let u = trotter_unitary(&cfg, &params, &basis);
    for (pos, &k) in basis.indices().iter().enumerate() {
        let h = hadamard_test(k, &cfg, EstimatorMode::Exact, &params, &basis).unwrap();
        assert!((h - u.get(pos, pos)).norm() < 1e-12, "k={k}");
    }
}

#[test]
fn sampled_estimates_are_seed_deterministic() {
    let params = fig2(0);
    let basis = build_basis(&params, BasisMode::Qubit(2)).unwrap();
    let cfg = TrotterConfig::new(32, 0.5).unwrap();
    let mode = EstimatorMode::Sampled { shots: 500, seed: 42 };
    let a = hadamard_test(1, &cfg, mode, &params, &basis).unwrap();
    let b = hadamard_test(1, &cfg, mode, &params, &basis).unwrap();
    assert_eq!(a, b);
    let other = EstimatorMode::Sampled { shots: 500, seed: 43 };
    assert_ne!(a, hadamard_test(1, &cfg, other, &params, &basis).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trace_identity_random_parameters(
        v0 in -5.0f64..5.0,
        mass in 0.3f64..4.0,
        l in 2.0f64..40.0,
        n_cut in 0usize..8,
        t in 0.0f64..4.0,
    ) {
        let params = PhysicalParams::new(v0, mass, l, n_cut).unwrap();
        let basis = build_basis(&params, BasisMode::Symmetric).unwrap();
        let ev = eigenvalues(&build_hamiltonian(&params, &basis)).unwrap();
        let c = correlation_exact(&ev, &[t]).unwrap().values()[0];
        let tr = exact_propagator(&params, basis.indices(), t).trace();
        prop_assert!((c - tr).norm() <= 1e-10 * basis.dim() as f64);
    }

    #[test]
    fn trotter_unitary_is_unitary(
        v0 in -5.0f64..5.0,
        steps in 1usize..40,
        t in 0.0f64..3.0,
    ) {
        let params = PhysicalParams::new(v0, 2.0, 30.0, 0).unwrap();
        let basis = build_basis(&params, BasisMode::Qubit(3)).unwrap();
        let u = trotter_unitary(&TrotterConfig::new(steps, t).unwrap(), &params, &basis);
        let uh = Dense::from_fn(u.n, |i, j| u.get(j, i).conj());
        prop_assert!(uh.mul(&u).sub(&Dense::identity(u.n)).max_abs() < 1e-12);
    }
}
