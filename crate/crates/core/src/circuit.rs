//! Statevector simulation of the ancilla circuit that estimates
//! `<k| U(t) |k>` for a Trotterized two-particle propagator.
//!
//! Register layout: one ancilla qubit (most significant bit) and `g` system
//! qubits. The system register stores the position of `|k>` in the qubit-mode
//! [`MomentumBasis`] in plain binary, so position 0 is the most negative
//! momentum. Amplitude index = `ancilla * 2^g + position`.

use std::f64::consts::FRAC_1_SQRT_2;

use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::MomentumBasis;
use crate::model::PhysicalParams;
use crate::series::{validate_grid, ComplexSeries, Provenance};

/// Register width accepted by [`xgate_decomposition_matrix`].
pub const MAX_DECOMPOSITION_QUBITS: u32 = 6;

/// Tolerance for the normalization check in [`Statevector::from_amplitudes`].
const NORM_TOLERANCE: f64 = 1e-10;

type Gate = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn hadamard_gate() -> Gate {
    let h = c(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

/// `diag(1, exp(i phi))`.
pub fn phase_gate(phi: f64) -> Gate {
    [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), Complex64::from_polar(1.0, phi)]]
}

/// Ancilla plus system register.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    system_qubits: u32,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// `|0>_ancilla |0...0>_system`.
    pub fn zero(system_qubits: u32) -> Self {
        let mut amplitudes = vec![c(0.0, 0.0); 1 << (system_qubits + 1)];
        amplitudes[0] = c(1.0, 0.0);
        Statevector {
            system_qubits,
            amplitudes,
        }
    }

    pub fn from_amplitudes(system_qubits: u32, amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = 1usize << (system_qubits + 1);
        if amplitudes.len() != len {
            return Err(Error::InvalidArgument(format!(
                "expected {len} amplitudes, got {}",
                amplitudes.len()
            )));
        }
        let sv = Statevector {
            system_qubits,
            amplitudes,
        };
        if (sv.norm_sqr() - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "state is not normalized: |psi|^2 = {}",
                sv.norm_sqr()
            )));
        }
        Ok(sv)
    }

    /// Ancilla in `|0>`, system register in the supplied normalized state.
    pub fn with_system_state(system_qubits: u32, system: &[Complex64]) -> Result<Self> {
        let d = 1usize << system_qubits;
        if system.len() != d {
            return Err(Error::InvalidArgument(format!(
                "expected {d} system amplitudes, got {}",
                system.len()
            )));
        }
        let mut amplitudes = vec![c(0.0, 0.0); 2 * d];
        amplitudes[..d].copy_from_slice(system);
        Self::from_amplitudes(system_qubits, amplitudes)
    }

    pub fn system_qubits(&self) -> u32 {
        self.system_qubits
    }

    /// Total register width, ancilla included.
    pub fn num_qubits(&self) -> u32 {
        self.system_qubits + 1
    }

    pub fn system_dim(&self) -> usize {
        1 << self.system_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// System amplitudes in the ancilla-0 and ancilla-1 sectors.
    pub fn blocks(&self) -> (&[Complex64], &[Complex64]) {
        self.amplitudes.split_at(self.system_dim())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies a 2x2 unitary to `qubit`; qubit `system_qubits` is the ancilla.
    pub fn apply_single_qubit(&mut self, qubit: u32, gate: &Gate) {
        assert!(qubit <= self.system_qubits, "qubit {qubit} out of range");
        let stride = 1usize << qubit;
        for base in (0..self.amplitudes.len()).step_by(2 * stride) {
            for i in base..base + stride {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i + stride];
                self.amplitudes[i] = gate[0][0] * a0 + gate[0][1] * a1;
                self.amplitudes[i + stride] = gate[1][0] * a0 + gate[1][1] * a1;
            }
        }
    }

    pub fn apply_x(&mut self, qubit: u32) {
        let x = [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]];
        self.apply_single_qubit(qubit, &x);
    }

    pub fn apply_ancilla(&mut self, gate: &Gate) {
        self.apply_single_qubit(self.system_qubits, gate);
    }

    /// Probability of reading 0 on the ancilla, normalized by the total norm.
    pub fn ancilla_zero_probability(&self) -> f64 {
        let (zero, one) = self.blocks();
        let p0: f64 = zero.iter().map(|a| a.norm_sqr()).sum();
        let p1: f64 = one.iter().map(|a| a.norm_sqr()).sum();
        p0 / (p0 + p1)
    }

    /// `<Z>` on the ancilla.
    pub fn ancilla_z_expectation(&self) -> f64 {
        let (zero, one) = self.blocks();
        let p0: f64 = zero.iter().map(|a| a.norm_sqr()).sum();
        let p1: f64 = one.iter().map(|a| a.norm_sqr()).sum();
        (p0 - p1) / (p0 + p1)
    }

    /// The amplitudes a sub-unitary acts on: ancilla-1 block when
    /// `controlled`, every amplitude otherwise.
    fn target_blocks(&mut self, controlled: bool) -> std::slice::ChunksExactMut<'_, Complex64> {
        let d = self.system_dim();
        let skip = if controlled { d } else { 0 };
        self.amplitudes[skip..].chunks_exact_mut(d)
    }
}

fn register_width(basis: &MomentumBasis) -> Result<u32> {
    basis.num_qubits().ok_or_else(|| {
        Error::InvalidArgument(format!(
            "basis dimension {} is not a power of two; build it in qubit mode",
            basis.dim()
        ))
    })
}

fn check_register(state: &Statevector, basis: &MomentumBasis) -> Result<()> {
    let g = register_width(basis)?;
    if g != state.system_qubits {
        return Err(Error::InvalidArgument(format!(
            "state has {} system qubits, basis needs {g}",
            state.system_qubits
        )));
    }
    Ok(())
}

/// `|0>_ancilla |k>` for momentum index `k_index`.
pub fn prepare_k_state(basis: &MomentumBasis, k_index: i64) -> Result<Statevector> {
    let g = register_width(basis)?;
    let pos = basis.position(k_index).ok_or_else(|| {
        Error::InvalidArgument(format!("momentum index {k_index} is outside the basis"))
    })?;
    let mut sv = Statevector::zero(g);
    for q in 0..g {
        if pos >> q & 1 == 1 {
            sv.apply_x(q);
        }
    }
    Ok(sv)
}

/// `exp(-i H0 dt)`: phase `exp(-i k^2 dt / m)` on every `|k>`.
pub fn kinetic_step(
    state: &mut Statevector,
    dt: f64,
    params: &PhysicalParams,
    basis: &MomentumBasis,
    controlled: bool,
) -> Result<()> {
    check_register(state, basis)?;
    let phases: Vec<Complex64> = basis
        .free_energies(params.mass)
        .iter()
        .map(|e| Complex64::from_polar(1.0, -e * dt))
        .collect();
    for block in state.target_blocks(controlled) {
        for (a, p) in block.iter_mut().zip(&phases) {
            *a *= p;
        }
    }
    Ok(())
}

/// Rotation angle `D v0 dt / L` of the constant-coupling propagator.
pub fn potential_angle(params: &PhysicalParams, dim: usize, dt: f64) -> f64 {
    dim as f64 * params.v0 * dt / params.box_length
}

/// `exp(-i HV dt) = I + ((exp(-i theta) - 1) / D) J`, applied in `O(D)` by
/// adding a multiple of the amplitude sum to every amplitude.
pub fn potential_step(
    state: &mut Statevector,
    dt: f64,
    params: &PhysicalParams,
    basis: &MomentumBasis,
    controlled: bool,
) -> Result<()> {
    check_register(state, basis)?;
    let d = basis.dim();
    let theta = potential_angle(params, d, dt);
    let factor = (Complex64::from_polar(1.0, -theta) - 1.0) / d as f64;
    for block in state.target_blocks(controlled) {
        let shift = factor * block.iter().sum::<Complex64>();
        for a in block.iter_mut() {
            *a += shift;
        }
    }
    Ok(())
}

/// Closed-form `exp(-i HV dt)` on `g` qubits: diagonal
/// `(exp(-i theta) + D - 1) / D`, off-diagonal `(exp(-i theta) - 1) / D`.
pub fn potential_matrix(qubits: u32, theta: f64) -> Mat<Complex64> {
    let d = 1usize << qubits;
    let e = Complex64::from_polar(1.0, -theta);
    let diag = (e + (d - 1) as f64) / d as f64;
    let off = (e - 1.0) / d as f64;
    Mat::from_fn(d, d, |i, j| if i == j { diag } else { off })
}

/// `exp(-i HV dt)` assembled term by term as a sum over every tensor product
/// of `I` and `X` on `qubits` qubits. Exponential in `qubits`; only for
/// cross-checking [`potential_step`].
pub fn xgate_decomposition_matrix(qubits: u32, theta: f64) -> Result<Mat<Complex64>> {
    if qubits == 0 || qubits > MAX_DECOMPOSITION_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "X-gate expansion needs 1..={MAX_DECOMPOSITION_QUBITS} qubits, got {qubits}"
        )));
    }
    let d = 1usize << qubits;
    let e = Complex64::from_polar(1.0, -theta);
    let identity_coeff = (e + (d - 1) as f64) / d as f64;
    let flip_coeff = (e - 1.0) / d as f64;

    let id = Mat::<Complex64>::identity(2, 2);
    let x = Mat::from_fn(2, 2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) });

    let mut total = Mat::<Complex64>::zeros(d, d);
    for mask in 0..d {
        // qubit g-1 is the leftmost tensor factor
        let mut term = Mat::<Complex64>::identity(1, 1);
        for q in (0..qubits).rev() {
            let factor = if mask >> q & 1 == 1 { &x } else { &id };
            term = kron(&term, factor);
        }
        let coeff = if mask == 0 { identity_coeff } else { flip_coeff };
        total += Mat::from_fn(d, d, |i, j| coeff * term[(i, j)]);
    }
    Ok(total)
}

fn kron(a: &Mat<Complex64>, b: &Mat<Complex64>) -> Mat<Complex64> {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// First-order product formula with `num_steps` equal steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrotterConfig {
    num_steps: usize,
    total_time: f64,
}

impl TrotterConfig {
    pub const ORDER: usize = 1;

    pub fn new(num_steps: usize, total_time: f64) -> Result<Self> {
        if num_steps == 0 {
            return Err(Error::InvalidArgument("num_steps must be positive".into()));
        }
        if !(total_time >= 0.0) || !total_time.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "total_time must be non-negative, got {total_time}"
            )));
        }
        Ok(TrotterConfig {
            num_steps,
            total_time,
        })
    }

    /// `ceil(rate * t)` steps, at least one.
    pub fn from_rate(steps_per_unit_time: usize, total_time: f64) -> Result<Self> {
        let steps = (steps_per_unit_time as f64 * total_time).ceil().max(1.0) as usize;
        Self::new(steps, total_time)
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.num_steps as f64
    }
}

/// Applies `(exp(-i H0 dt) exp(-i HV dt))^n`.
pub fn trotter_evolve(
    state: &mut Statevector,
    config: &TrotterConfig,
    params: &PhysicalParams,
    basis: &MomentumBasis,
    controlled: bool,
) -> Result<()> {
    let dt = config.dt();
    for _ in 0..config.num_steps {
        potential_step(state, dt, params, basis, controlled)?;
        kinetic_step(state, dt, params, basis, controlled)?;
    }
    Ok(())
}

/// How ancilla expectations are read out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorMode {
    /// Expectations computed from the amplitudes.
    Exact,
    /// Each expectation is the mean of `shots` single-shot outcomes drawn from
    /// the exact ancilla distribution.
    Sampled { shots: u64, seed: u64 },
}

impl EstimatorMode {
    pub fn validate(&self) -> Result<()> {
        match self {
            EstimatorMode::Sampled { shots: 0, .. } => {
                Err(Error::InvalidArgument("shots must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Hadamard test for `<k| U(t) |k>` with `U` the Trotterized propagator.
///
/// The real part comes from the ancilla `X` expectation, the imaginary part
/// from a second run with an `S^dagger` on the ancilla before the controlled
/// evolution. In sampled mode the real-part shots are drawn first, then the
/// imaginary-part shots, from one generator seeded with `seed`.
pub fn hadamard_test(
    k_index: i64,
    config: &TrotterConfig,
    mode: EstimatorMode,
    params: &PhysicalParams,
    basis: &MomentumBasis,
) -> Result<Complex64> {
    mode.validate()?;
    let p_re = ancilla_zero_probability(k_index, config, params, basis, false)?;
    let p_im = ancilla_zero_probability(k_index, config, params, basis, true)?;
    match mode {
        EstimatorMode::Exact => Ok(c(2.0 * p_re - 1.0, 2.0 * p_im - 1.0)),
        EstimatorMode::Sampled { shots, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let re = sample_z(&mut rng, p_re, shots);
            let im = sample_z(&mut rng, p_im, shots);
            Ok(c(re, im))
        }
    }
}

fn ancilla_zero_probability(
    k_index: i64,
    config: &TrotterConfig,
    params: &PhysicalParams,
    basis: &MomentumBasis,
    imaginary: bool,
) -> Result<f64> {
    let mut sv = prepare_k_state(basis, k_index)?;
    sv.apply_ancilla(&hadamard_gate());
    if imaginary {
        sv.apply_ancilla(&phase_gate(-std::f64::consts::FRAC_PI_2));
    }
    trotter_evolve(&mut sv, config, params, basis, true)?;
    sv.apply_ancilla(&hadamard_gate());
    Ok(sv.ancilla_zero_probability())
}

/// Mean of `shots` draws of `+1` (probability `p0`) or `-1`.
fn sample_z<R: Rng>(rng: &mut R, p0: f64, shots: u64) -> f64 {
    let p0 = p0.clamp(0.0, 1.0);
    let zeros = (0..shots).filter(|_| rng.random_bool(p0)).count() as f64;
    2.0 * zeros / shots as f64 - 1.0
}

/// Seed of the `(time, state)` Hadamard test inside a sampled correlator run.
fn derived_seed(seed: u64, time_index: usize, position: usize) -> u64 {
    // splitmix64 finalizer over the packed coordinates
    let mut z = seed
        ^ (time_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (position as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `C(t) = sum_k <k| U(t) |k>` from one Hadamard test per momentum state.
///
/// `configs[i]` is the Trotter schedule used at `t_grid[i]`; its total time
/// must equal the grid time.
pub fn correlation_circuit(
    t_grid: &[f64],
    configs: &[TrotterConfig],
    mode: EstimatorMode,
    params: &PhysicalParams,
    basis: &MomentumBasis,
) -> Result<ComplexSeries> {
    validate_grid(t_grid)?;
    mode.validate()?;
    register_width(basis)?;
    if configs.len() != t_grid.len() {
        return Err(Error::InvalidArgument(format!(
            "{} Trotter configs for {} time points",
            configs.len(),
            t_grid.len()
        )));
    }
    if let Some((t, cfg)) = t_grid.iter().zip(configs).find(|(t, c)| **t != c.total_time()) {
        return Err(Error::InvalidArgument(format!(
            "Trotter config for t = {t} has total time {}",
            cfg.total_time()
        )));
    }

    let indices = basis.indices();
    let values = configs
        .par_iter()
        .enumerate()
        .map(|(ti, cfg)| {
            let terms = indices
                .par_iter()
                .enumerate()
                .map(|(pos, &k)| {
                    let m = match mode {
                        EstimatorMode::Exact => mode,
                        EstimatorMode::Sampled { shots, seed } => EstimatorMode::Sampled {
                            shots,
                            seed: derived_seed(seed, ti, pos),
                        },
                    };
                    hadamard_test(k, cfg, m, params, basis)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(terms.into_iter().sum::<Complex64>())
        })
        .collect::<Result<Vec<_>>>()?;

    let provenance = match mode {
        EstimatorMode::Exact => Provenance::CircuitExact,
        EstimatorMode::Sampled { .. } => Provenance::CircuitSampled,
    };
    ComplexSeries::new(t_grid.to_vec(), values, provenance)
}
