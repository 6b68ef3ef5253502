//! Physical parameters, the contact-interaction phase shift and the
//! infinite-volume limit of the correlator difference.
//!
//! Everything here is a pure function of its arguments.

use std::f64::consts::{FRAC_PI_4, PI};

use errorfunctions::ComplexErrorFunctions;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Couplings and geometry of the trapped two-fermion system.
///
/// Units are natural (`hbar = 1`). The reduced mass is always `mass / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub v0: f64,
    pub mass: f64,
    pub box_length: f64,
    pub n_cut: usize,
}

impl PhysicalParams {
    pub fn new(v0: f64, mass: f64, box_length: f64, n_cut: usize) -> Result<Self> {
        let p = PhysicalParams {
            v0,
            mass,
            box_length,
            n_cut,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.v0.is_finite() {
            return Err(Error::InvalidArgument(format!("v0 must be finite, got {}", self.v0)));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "mass must be positive, got {}",
                self.mass
            )));
        }
        if !(self.box_length > 0.0 && self.box_length.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "box_length must be positive, got {}",
                self.box_length
            )));
        }
        Ok(())
    }

    pub fn reduced_mass(&self) -> f64 {
        self.mass / 2.0
    }

    /// Same physics with a different coupling.
    pub fn with_v0(&self, v0: f64) -> Self {
        PhysicalParams { v0, ..*self }
    }
}

/// S-wave phase shift of the contact interaction at relative energy `eps`.
///
/// `cot(delta) = -sqrt(2 mu eps) / (mu v0)`, taken on the branch that is
/// continuous in `eps` and vanishes as `eps -> inf`. For `v0 > 0` the result
/// lies in `(-pi/2, 0)`.
pub fn phase_shift(eps: f64, params: &PhysicalParams) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("phase shift needs eps > 0, got {eps}")));
    }
    if params.v0 == 0.0 {
        return Err(Error::DegenerateCoupling);
    }
    Ok(contact_phase_shift(eps, params.v0, params.reduced_mass()))
}

/// Unchecked form of [`phase_shift`], usable inside fitting models where
/// `v0 = 0` is legitimate and yields `0`.
pub fn contact_phase_shift(eps: f64, v0: f64, reduced_mass: f64) -> f64 {
    // arccot(-x) with x = p/(mu v0) equals -atan(1/x) on this branch
    let p = (2.0 * reduced_mass * eps).sqrt();
    -(reduced_mass * v0).atan2(p)
}

/// Complementary error function of a complex argument.
///
/// Results are finite for every finite input: where `erfc` overflows the
/// components saturate at `f64::MAX`.
pub fn complex_erfc(z: Complex64) -> Complex64 {
    let w = z.erfc();
    if w.re.is_nan() || w.im.is_nan() {
        let limit = if z.re >= 0.0 { 0.0 } else { 2.0 };
        return Complex64::new(limit, 0.0);
    }
    saturate(w)
}

/// Scaled complementary error function `exp(z^2) erfc(z)`.
pub fn complex_erfcx(z: Complex64) -> Complex64 {
    let w = z.erfcx();
    if w.re.is_nan() || w.im.is_nan() {
        return Complex64::new(f64::MAX, 0.0);
    }
    saturate(w)
}

fn saturate(z: Complex64) -> Complex64 {
    let clamp = |x: f64| {
        if x.is_infinite() {
            f64::MAX.copysign(x)
        } else {
            x
        }
    };
    Complex64::new(clamp(z.re), clamp(z.im))
}

/// Infinite-volume limit of `C(t) - C0(t)` for the contact interaction:
///
/// `1/2 erfc(mu v0 sqrt(i t / 2mu)) exp((mu v0)^2 i t / 2mu) - 1/2`
///
/// with the principal square root (phase `+pi/4` for `t > 0`). Evaluated as
/// `(erfcx(z) - 1) / 2`, which stays bounded for large `t`.
pub fn delta_c_infinite(t: f64, params: &PhysicalParams) -> Result<Complex64> {
    contact_delta_c(t, params.v0, params.reduced_mass())
}

pub(crate) fn contact_delta_c(t: f64, v0: f64, reduced_mass: f64) -> Result<Complex64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    if t == 0.0 || v0 == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let modulus = reduced_mass * v0 * (t / (2.0 * reduced_mass)).sqrt();
    let z = Complex64::from_polar(modulus, FRAC_PI_4);
    Ok(0.5 * complex_erfcx(z) - 0.5)
}

/// Controls for [`weighted_integral_with`].
#[derive(Debug, Clone, Copy)]
pub struct IntegralOptions {
    /// Converged when successive diagonal extrapolants differ by less than this.
    pub tolerance: f64,
    /// Largest number of damping levels before giving up.
    pub max_levels: usize,
    /// Levels computed before convergence is tested.
    pub min_levels: usize,
}

impl Default for IntegralOptions {
    fn default() -> Self {
        IntegralOptions {
            tolerance: 1e-8,
            max_levels: 14,
            min_levels: 3,
        }
    }
}

/// `(i t / pi) * integral_0^inf delta(eps) exp(-i eps t) d eps` for a black-box
/// phase shift, with the default [`IntegralOptions`].
pub fn weighted_integral<F>(delta_fn: F, t: f64) -> Result<Complex64>
where
    F: Fn(f64) -> f64,
{
    weighted_integral_with(delta_fn, t, &IntegralOptions::default())
}

/// Weighted phase-shift integral, regularized by `exp(-eta eps)`.
///
/// The damped integral is an analytic function of `eta` near the real axis,
/// so a geometric sequence `eta_j = (t/4) 2^-j` is extrapolated to `eta = 0`
/// with a Richardson table in integer powers of `eta`.
pub fn weighted_integral_with<F>(delta_fn: F, t: f64, opts: &IntegralOptions) -> Result<Complex64>
where
    F: Fn(f64) -> f64,
{
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }

    let rule = GaussLegendre::new(20);
    let eta0 = t / 4.0;
    let mut table: Vec<Vec<Complex64>> = Vec::with_capacity(opts.max_levels);
    let mut last_change = f64::INFINITY;

    for level in 0..opts.max_levels {
        let eta = eta0 / f64::powi(2.0, level as i32);
        let mut row = Vec::with_capacity(level + 1);
        row.push(damped_transform(&delta_fn, t, eta, &rule)?);
        for k in 1..=level {
            let prev = table[level - 1][k - 1];
            let cur = row[k - 1];
            row.push(cur + (cur - prev) / (f64::powi(2.0, k as i32) - 1.0));
        }
        if level > 0 {
            last_change = (row[level] - table[level - 1][level - 1]).norm();
            if level + 1 >= opts.min_levels && last_change < opts.tolerance {
                return Ok(row[level]);
            }
        }
        table.push(row);
    }

    Err(Error::Convergence {
        what: "eta extrapolation",
        iterations: opts.max_levels,
        detail: format!(
            "t = {t}, last change between extrapolants {last_change:.3e}, tolerance {:.1e}",
            opts.tolerance
        ),
    })
}

/// `(i t / pi) * integral_0^inf delta(eps) exp(-(eta + i t) eps) d eps`.
///
/// Panels one oscillation period wide, graded geometrically towards `eps = 0`
/// where phase shifts typically behave like `sqrt(eps)`.
fn damped_transform<F>(delta_fn: &F, t: f64, eta: f64, rule: &GaussLegendre) -> Result<Complex64>
where
    F: Fn(f64) -> f64,
{
    let s = Complex64::new(eta, t);
    let period = 2.0 * PI / t;
    // exp(-eta eps) < 1e-17 beyond this point
    let eps_max = 40.0 / eta;

    let mut sum = Complex64::new(0.0, 0.0);
    let mut panel = |a: f64, b: f64| -> Result<()> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let eps = mid + half * x;
            let d = delta_fn(eps);
            if !d.is_finite() {
                return Err(Error::Domain(format!("phase shift not finite at eps = {eps}")));
            }
            acc += w * d * (-s * eps).exp();
        }
        sum += acc * half;
        Ok(())
    };

    const GRADING: i32 = 60;
    panel(0.0, period * f64::powi(2.0, -GRADING))?;
    for j in (0..GRADING).rev() {
        panel(period * f64::powi(2.0, -j - 1), period * f64::powi(2.0, -j))?;
    }
    let n_panels = (eps_max / period).ceil() as usize;
    for j in 1..n_panels {
        panel(period * j as f64, period * (j + 1) as f64)?;
    }

    Ok(Complex64::new(0.0, t / PI) * sum)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub(crate) struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
