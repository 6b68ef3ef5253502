//! Two-fermion Hamiltonian in the plane-wave basis of a periodic box.
//!
//! The relative-momentum states `|k>`, `k = 2 pi n / L`, carry kinetic
//! energy `2 eps0_k = k^2 / m`, and the contact interaction couples every
//! pair of states with the same strength `v0 / L`:
//!
//! `H = diag(k^2 / m) + (v0 / L) J`, with `J` the all-ones matrix.

use std::f64::consts::PI;

use faer::{Mat, Side};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::PhysicalParams;
use crate::series::{validate_grid, ComplexSeries, Provenance};

/// Largest register width accepted for qubit-mode bases.
pub const MAX_QUBITS: u32 = 24;

/// How the momentum indices are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisMode {
    /// `n` in `[-N, N]`, `D = 2N + 1`.
    Symmetric,
    /// `n` in `[-2^(g-1) + 1, 2^(g-1)]`, `D = 2^g`, one state per register value.
    Qubit(u32),
}

/// Ordered discrete relative momenta of the box.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumBasis {
    box_length: f64,
    indices: Vec<i64>,
    momenta: Vec<f64>,
}

impl MomentumBasis {
    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn indices(&self) -> &[i64] {
        &self.indices
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    /// Position of momentum index `n` in the ordered basis.
    pub fn position(&self, n: i64) -> Option<usize> {
        let first = *self.indices.first()?;
        let pos = n.checked_sub(first)?;
        (pos >= 0 && (pos as usize) < self.dim()).then_some(pos as usize)
    }

    /// Number of qubits needed to address the basis, if `D` is a power of two.
    pub fn num_qubits(&self) -> Option<u32> {
        let d = self.dim();
        d.is_power_of_two().then(|| d.trailing_zeros())
    }

    /// Two-particle kinetic energies `2 eps0_k = k^2 / m`.
    pub fn free_energies(&self, mass: f64) -> Vec<f64> {
        self.momenta.iter().map(|k| k * k / mass).collect()
    }
}

pub fn build_basis(params: &PhysicalParams, mode: BasisMode) -> Result<MomentumBasis> {
    params.validate()?;
    let (lo, hi) = match mode {
        BasisMode::Symmetric => {
            let n = i64::try_from(params.n_cut)
                .map_err(|_| Error::InvalidArgument("n_cut too large".into()))?;
            (-n, n)
        }
        BasisMode::Qubit(g) => {
            if g == 0 || g > MAX_QUBITS {
                return Err(Error::InvalidArgument(format!(
                    "qubit count must be in 1..={MAX_QUBITS}, got {g}"
                )));
            }
            let half = 1i64 << (g - 1);
            (-half + 1, half)
        }
    };
    let indices: Vec<i64> = (lo..=hi).collect();
    let momenta = indices
        .iter()
        .map(|&n| 2.0 * PI * n as f64 / params.box_length)
        .collect();
    Ok(MomentumBasis {
        box_length: params.box_length,
        indices,
        momenta,
    })
}

/// Dense real-symmetric Hamiltonian on a [`MomentumBasis`].
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    basis: MomentumBasis,
    elements: Mat<f64>,
}

impl HamiltonianMatrix {
    pub fn basis(&self) -> &MomentumBasis {
        &self.basis
    }

    pub fn elements(&self) -> &Mat<f64> {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.elements[(row, col)]
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.elements)
    }
}

pub fn build_hamiltonian(params: &PhysicalParams, basis: &MomentumBasis) -> HamiltonianMatrix {
    let coupling = params.v0 / params.box_length;
    let kinetic = basis.free_energies(params.mass);
    let d = basis.dim();
    let elements = Mat::from_fn(d, d, |i, j| {
        if i == j {
            kinetic[i] + coupling
        } else {
            coupling
        }
    });
    HamiltonianMatrix {
        basis: basis.clone(),
        elements,
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
/// Hamiltonian.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<f64>,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Mat<f64> {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max |S diag(E) S^T - H|`.
    pub fn reconstruction_error(&self, h: &HamiltonianMatrix) -> f64 {
        let s = &self.eigenvectors;
        let scaled = Mat::from_fn(self.dim(), self.dim(), |i, j| s[(i, j)] * self.eigenvalues[j]);
        let rebuilt = &scaled * s.transpose();
        max_abs(&(&rebuilt - &h.elements))
    }

    /// `max |H S - S E|`.
    pub fn residual(&self, h: &HamiltonianMatrix) -> f64 {
        let s = &self.eigenvectors;
        let hs = &h.elements * s;
        let se = Mat::from_fn(self.dim(), self.dim(), |i, j| s[(i, j)] * self.eigenvalues[j]);
        max_abs(&(&hs - &se))
    }

    /// `max |S^T S - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let s = &self.eigenvectors;
        let gram = s.transpose() * s;
        let eye = Mat::<f64>::identity(self.dim(), self.dim());
        max_abs(&(&gram - &eye))
    }

    /// Exact propagator `S exp(-i E t) S^T`.
    pub fn propagator(&self, t: f64) -> Mat<Complex64> {
        let d = self.dim();
        let s = &self.eigenvectors;
        let phases: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|e| Complex64::from_polar(1.0, -e * t))
            .collect();
        Mat::from_fn(d, d, |i, j| {
            (0..d)
                .map(|l| phases[l] * (s[(i, l)] * s[(j, l)]))
                .sum::<Complex64>()
        })
    }
}

/// Full eigendecomposition of a real-symmetric Hamiltonian.
pub fn eigendecompose(h: &HamiltonianMatrix) -> Result<SpectralDecomposition> {
    let evd = h
        .elements
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Convergence {
            what: "symmetric eigensolver",
            iterations: 0,
            detail: format!("{e:?}"),
        })?;
    let eigenvalues: Vec<f64> = evd.S().column_vector().iter().copied().collect();
    let eigenvectors = evd.U().to_owned();
    check_finite(&eigenvalues)?;
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Ascending eigenvalues only; enough for the trace form of `C(t)` and much
/// cheaper at `D` in the thousands.
pub fn eigenvalues(h: &HamiltonianMatrix) -> Result<Vec<f64>> {
    let ev = h
        .elements
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Convergence {
            what: "symmetric eigensolver",
            iterations: 0,
            detail: format!("{e:?}"),
        })?;
    check_finite(&ev)?;
    Ok(ev)
}

fn check_finite(ev: &[f64]) -> Result<()> {
    if ev.iter().all(|e| e.is_finite()) {
        Ok(())
    } else {
        Err(Error::Convergence {
            what: "symmetric eigensolver",
            iterations: 0,
            detail: "non-finite eigenvalue".into(),
        })
    }
}

/// `C(t) = sum_eps exp(-i eps t)` over the supplied spectrum.
pub fn correlation_exact(eigenvalues: &[f64], t_grid: &[f64]) -> Result<ComplexSeries> {
    validate_grid(t_grid)?;
    let values = spectral_sum(eigenvalues, t_grid);
    ComplexSeries::new(t_grid.to_vec(), values, Provenance::Exact)
}

/// Non-interacting `C0(t) = sum_k exp(-i k^2 t / m)`.
pub fn correlation_free(
    basis: &MomentumBasis,
    params: &PhysicalParams,
    t_grid: &[f64],
) -> Result<ComplexSeries> {
    validate_grid(t_grid)?;
    let energies = basis.free_energies(params.mass);
    let values = spectral_sum(&energies, t_grid);
    ComplexSeries::new(t_grid.to_vec(), values, Provenance::Exact)
}

fn spectral_sum(energies: &[f64], t_grid: &[f64]) -> Vec<Complex64> {
    t_grid
        .par_iter()
        .map(|&t| {
            energies
                .iter()
                .map(|e| {
                    let (s, c) = (e * t).sin_cos();
                    Complex64::new(c, -s)
                })
                .sum()
        })
        .collect()
}

fn max_abs(m: &Mat<f64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].abs());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(v0: f64, mass: f64, l: f64, n: usize) -> PhysicalParams {
        PhysicalParams::new(v0, mass, l, n).unwrap()
    }

    #[test]
    fn symmetric_basis() {
        let b = build_basis(&params(1.0, 1.0, 2.0 * PI, 1), BasisMode::Symmetric).unwrap();
        assert_eq!(b.dim(), 3);
        assert_eq!(b.indices(), &[-1, 0, 1]);
        for (k, want) in b.momenta().iter().zip([-1.0, 0.0, 1.0]) {
            assert_relative_eq!(*k, want, epsilon = 1e-15);
        }
        assert_eq!(b.position(-1), Some(0));
        assert_eq!(b.position(2), None);
    }

    #[test]
    fn qubit_basis_is_asymmetric() {
        let b = build_basis(&params(1.0, 1.0, 2.0 * PI, 0), BasisMode::Qubit(2)).unwrap();
        assert_eq!(b.indices(), &[-1, 0, 1, 2]);
        assert_eq!(b.num_qubits(), Some(2));
        assert_relative_eq!(b.momenta()[3], 2.0, epsilon = 1e-15);
        assert!(build_basis(&params(1.0, 1.0, 1.0, 0), BasisMode::Qubit(0)).is_err());
    }

    #[test]
    fn fig2_basis_size() {
        let b = build_basis(&params(2.5, 2.0, 90.0, 300), BasisMode::Symmetric).unwrap();
        assert_eq!(b.dim(), 601);
        assert_relative_eq!(*b.momenta().last().unwrap(), 20.944, epsilon = 1e-3);
    }

    #[test]
    fn hamiltonian_elements() {
        let p = params(2.5, 2.0, 90.0, 300);
        let b = build_basis(&p, BasisMode::Symmetric).unwrap();
        let h = build_hamiltonian(&p, &b);
        assert_relative_eq!(h.get(0, 1), 2.5 / 90.0, epsilon = 1e-16);
        assert_relative_eq!(h.get(0, 1), 0.027778, epsilon = 1e-6);
        assert_eq!(h.get(17, 400), h.get(400, 17));
        let k = b.momenta()[0];
        assert_relative_eq!(h.get(0, 0), k * k / 2.0 + 2.5 / 90.0, epsilon = 1e-12);

        let single = params(3.0, 1.0, 7.0, 0);
        let b = build_basis(&single, BasisMode::Symmetric).unwrap();
        let h = build_hamiltonian(&single, &b);
        assert_eq!(h.dim(), 1);
        assert_relative_eq!(h.get(0, 0), 3.0 / 7.0);

        let free = params(0.0, 2.0, 5.0, 3);
        let b = build_basis(&free, BasisMode::Symmetric).unwrap();
        let h = build_hamiltonian(&free, &b);
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                let want = if i == j { b.momenta()[i].powi(2) / 2.0 } else { 0.0 };
                assert_eq!(h.get(i, j), want);
            }
        }
    }

    #[test]
    fn free_spectrum() {
        let p = params(0.0, 2.0, 5.0, 4);
        let b = build_basis(&p, BasisMode::Symmetric).unwrap();
        let dec = eigendecompose(&build_hamiltonian(&p, &b)).unwrap();
        let mut free = b.free_energies(p.mass);
        free.sort_by(f64::total_cmp);
        for (e, f) in dec.eigenvalues().iter().zip(&free) {
            assert_relative_eq!(e, f, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_by_two_closed_form() {
        // N = 0 in qubit mode with g = 1 gives n in {0, 1}
        let p = params(1.3, 0.7, 3.0, 0);
        let b = build_basis(&p, BasisMode::Qubit(1)).unwrap();
        let h = build_hamiltonian(&p, &b);
        let (a, d, c) = (h.get(0, 0), h.get(1, 1), h.get(0, 1));
        let mean = 0.5 * (a + d);
        let rad = (0.25 * (a - d).powi(2) + c * c).sqrt();
        let dec = eigendecompose(&h).unwrap();
        assert_relative_eq!(dec.eigenvalues()[0], mean - rad, epsilon = 1e-14);
        assert_relative_eq!(dec.eigenvalues()[1], mean + rad, epsilon = 1e-14);
    }

    #[test]
    fn decomposition_invariants_at_fig2_scale() {
        let p = params(2.5, 2.0, 90.0, 300);
        let b = build_basis(&p, BasisMode::Symmetric).unwrap();
        let h = build_hamiltonian(&p, &b);
        let dec = eigendecompose(&h).unwrap();
        let norm = h.max_abs();
        assert!(dec.residual(&h) <= 1e-10 * norm);
        assert!(dec.reconstruction_error(&h) <= 1e-10 * norm);
        assert!(dec.orthogonality_error() <= 1e-12);
        assert!(dec.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        assert!(dec.eigenvalues()[0] > 0.0);

        let vals = eigenvalues(&h).unwrap();
        for (a, b) in vals.iter().zip(dec.eigenvalues()) {
            assert!((a - b).abs() <= 1e-10 * norm);
        }
    }

    #[test]
    fn repulsive_levels_lie_above_free_levels() {
        let p = params(2.5, 2.0, 9.0, 12);
        let b = build_basis(&p, BasisMode::Symmetric).unwrap();
        let ev = eigenvalues(&build_hamiltonian(&p, &b)).unwrap();
        let mut free = b.free_energies(p.mass);
        free.sort_by(f64::total_cmp);
        for (e, f) in ev.iter().zip(&free) {
            assert!(*e >= f - 1e-12, "{e} < {f}");
        }
    }

    #[test]
    fn correlation_at_zero_time_counts_states() {
        let p = params(2.5, 2.0, 9.0, 6);
        let b = build_basis(&p, BasisMode::Symmetric).unwrap();
        let ev = eigenvalues(&build_hamiltonian(&p, &b)).unwrap();
        let c = correlation_exact(&ev, &[0.0, 1.0]).unwrap();
        assert_eq!(c.values()[0], Complex64::new(13.0, 0.0));
        assert!(c.values()[1].norm() <= 13.0);
        let c0 = correlation_free(&b, &p, &[0.0]).unwrap();
        assert_eq!(c0.values()[0], Complex64::new(13.0, 0.0));
    }

    #[test]
    fn free_correlation_single_mode_is_constant() {
        let p = params(1.0, 1.0, 1.0, 0);
        let b = build_basis(&p, BasisMode::Symmetric).unwrap();
        let c0 = correlation_free(&b, &p, &[0.0, 0.5, 3.0]).unwrap();
        assert!(c0.values().iter().all(|v| *v == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn free_correlation_agrees_with_diagonalization() {
        let p = params(0.0, 2.0, 11.0, 20);
        let b = build_basis(&p, BasisMode::Symmetric).unwrap();
        let ev = eigenvalues(&build_hamiltonian(&p, &b)).unwrap();
        let grid: Vec<f64> = (0..50).map(|i| 0.37 * i as f64).collect();
        let exact = correlation_exact(&ev, &grid).unwrap();
        let free = correlation_free(&b, &p, &grid).unwrap();
        for (a, b) in exact.values().iter().zip(free.values()) {
            assert!((a - b).norm() <= 1e-12 * 41.0);
        }
    }

    #[test]
    fn time_reversal_conjugates() {
        let p = params(1.7, 2.0, 6.0, 5);
        let b = build_basis(&p, BasisMode::Symmetric).unwrap();
        let ev = eigenvalues(&build_hamiltonian(&p, &b)).unwrap();
        let grid = [-2.0, -0.5, 0.5, 2.0];
        let c = correlation_exact(&ev, &grid).unwrap();
        assert!((c.values()[0] - c.values()[3].conj()).norm() < 1e-12);
        assert!((c.values()[1] - c.values()[2].conj()).norm() < 1e-12);
    }

    #[test]
    fn propagator_is_unitary() {
        let p = params(1.7, 2.0, 6.0, 3);
        let b = build_basis(&p, BasisMode::Symmetric).unwrap();
        let dec = eigendecompose(&build_hamiltonian(&p, &b)).unwrap();
        let u = dec.propagator(0.8);
        let gram = u.adjoint() * &u;
        for i in 0..7 {
            for j in 0..7 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - want).norm() < 1e-13);
            }
        }
    }
}
