#![allow(dead_code)]

use num_complex::Complex64;

use trapcorr::circuit::{trotter_evolve, Statevector, TrotterConfig};
use trapcorr::hamiltonian::MomentumBasis;
use trapcorr::model::PhysicalParams;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub n: usize,
    pub a: Vec<Complex64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Dense { n, a: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.n + j]
    }

    pub fn mul(&self, o: &Dense) -> Dense {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let x = self.a[i * n + k];
                for j in 0..n {
                    out.a[i * n + j] += x * o.a[k * n + j];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Dense {
        Dense { n: self.n, a: self.a.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, o: &Dense) -> Dense {
        Dense { n: self.n, a: self.a.iter().zip(&o.a).map(|(x, y)| x + y).collect() }
    }

    pub fn sub(&self, o: &Dense) -> Dense {
        Dense { n: self.n, a: self.a.iter().zip(&o.a).map(|(x, y)| x - y).collect() }
    }

    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn kron(&self, o: &Dense) -> Dense {
        let n = self.n * o.n;
        Dense::from_fn(n, |i, j| self.get(i / o.n, j / o.n) * o.get(i % o.n, j % o.n))
    }
}

/// `exp(a)` by scaling and squaring with a 30-term Taylor series.
pub fn expm(a: &Dense) -> Dense {
    let norm = a.norm1();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a.scale(Complex64::new(0.5f64.powi(s), 0.0));
    let mut term = Dense::identity(a.n);
    let mut sum = Dense::identity(a.n);
    for k in 1..=30 {
        term = term.mul(&scaled).scale(Complex64::new(1.0 / k as f64, 0.0));
        sum = sum.add(&term);
    }
    for _ in 0..s {
        sum = sum.mul(&sum);
    }
    sum
}

/// Box Hamiltonian written out directly from its matrix elements.
pub fn hamiltonian_dense(params: &PhysicalParams, indices: &[i64]) -> Dense {
    let two_pi = 2.0 * std::f64::consts::PI;
    Dense::from_fn(indices.len(), |i, j| {
        let mut h = params.v0 / params.box_length;
        if i == j {
            let k = two_pi * indices[i] as f64 / params.box_length;
            h += k * k / params.mass;
        }
        Complex64::new(h, 0.0)
    })
}

/// `exp(-i H t)` of [`hamiltonian_dense`].
pub fn exact_propagator(params: &PhysicalParams, indices: &[i64], t: f64) -> Dense {
    expm(&hamiltonian_dense(params, indices).scale(Complex64::new(0.0, -t)))
}

/// Trotterized propagator, one column per evolved basis state.
pub fn trotter_unitary(
    config: &TrotterConfig,
    params: &PhysicalParams,
    basis: &MomentumBasis,
) -> Dense {
    let d = basis.dim();
    let g = basis.num_qubits().expect("qubit basis");
    let mut u = Dense::zeros(d);
    for col in 0..d {
        let mut e = vec![Complex64::new(0.0, 0.0); d];
        e[col] = Complex64::new(1.0, 0.0);
        let mut sv = Statevector::with_system_state(g, &e).unwrap();
        trotter_evolve(&mut sv, config, params, basis, false).unwrap();
        let (zero, _) = sv.blocks();
        for (row, z) in zero.iter().enumerate() {
            u.a[row * d + col] = *z;
        }
    }
    u
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// `exp(-i (theta / D) J)` on `qubits` qubits, `J` the all-ones matrix.
pub fn constant_coupling_propagator(qubits: u32, theta: f64) -> Dense {
    let d = 1usize << qubits;
    let j = Dense::from_fn(d, |_, _| Complex64::new(1.0, 0.0));
    expm(&j.scale(Complex64::new(0.0, -theta / d as f64)))
}

/// Copy of a faer matrix into [`Dense`].
pub fn from_faer(m: &faer::Mat<Complex64>) -> Dense {
    Dense::from_fn(m.nrows(), |i, j| m[(i, j)])
}
