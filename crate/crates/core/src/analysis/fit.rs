use num_complex::Complex64;
use rayon::prelude::*;

use super::average::{trapezoid, SegmentAverage};
use crate::error::{Error, Result};
use crate::model::{contact_delta_c, contact_phase_shift, weighted_integral_with, IntegralOptions};

/// A parametrized infinite-volume prediction for `C(t) - C0(t)`.
pub trait CorrelationModel: Sync {
    fn n_params(&self) -> usize;

    /// Model value at time `t`; `params` has already been checked.
    fn delta_c(&self, params: &[f64], t: f64) -> Result<Complex64>;

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::InvalidArgument(format!(
                "model takes {} parameters, got {}",
                self.n_params(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite parameters {params:?}")));
        }
        Ok(())
    }
}

/// Contact interaction with unknown strength; the single parameter is `v0`.
#[derive(Debug, Clone, Copy)]
pub struct ContactModel {
    pub reduced_mass: f64,
}

impl ContactModel {
    pub fn new(reduced_mass: f64) -> Self {
        ContactModel { reduced_mass }
    }

    /// The phase shift this model stands for, for use with [`PhaseShiftModel`].
    pub fn phase_shift(&self, eps: f64, v0: f64) -> f64 {
        contact_phase_shift(eps, v0, self.reduced_mass)
    }
}

impl CorrelationModel for ContactModel {
    fn n_params(&self) -> usize {
        1
    }

    fn delta_c(&self, params: &[f64], t: f64) -> Result<Complex64> {
        contact_delta_c(t, params[0], self.reduced_mass)
    }
}

/// Any phase-shift parametrization `delta(eps; params)`, pushed through the
/// weighted integral numerically. Costs one oscillatory quadrature per time.
pub struct PhaseShiftModel<F> {
    n_params: usize,
    delta: F,
    options: IntegralOptions,
}

impl<F> PhaseShiftModel<F>
where
    F: Fn(f64, &[f64]) -> f64 + Sync,
{
    pub fn new(n_params: usize, delta: F) -> Self {
        PhaseShiftModel {
            n_params,
            delta,
            options: IntegralOptions::default(),
        }
    }

    pub fn with_options(mut self, options: IntegralOptions) -> Self {
        self.options = options;
        self
    }
}

impl<F> CorrelationModel for PhaseShiftModel<F>
where
    F: Fn(f64, &[f64]) -> f64 + Sync,
{
    fn n_params(&self) -> usize {
        self.n_params
    }

    fn delta_c(&self, params: &[f64], t: f64) -> Result<Complex64> {
        weighted_integral_with(|eps| (self.delta)(eps, params), t, &self.options)
    }
}

/// Model prediction at a single time.
pub fn model_delta_c<M: CorrelationModel + ?Sized>(
    model: &M,
    params: &[f64],
    t: f64,
) -> Result<Complex64> {
    model.check_params(params)?;
    model.delta_c(params, t)
}

/// Segment averages of the model, integrated by the same trapezoid rule as the
/// data. With `intervals = Some(n)` each segment is resampled on `n` equal
/// intervals instead of the data grid.
pub fn model_average<M: CorrelationModel + ?Sized>(
    model: &M,
    params: &[f64],
    avg: &SegmentAverage,
    intervals: Option<usize>,
) -> Result<Vec<Complex64>> {
    model.check_params(params)?;
    let width = avg.width();
    let resampled;
    let grids = match intervals {
        None => avg.segment_grids(),
        Some(n) => {
            resampled = SegmentAverage::from_averages(avg.t0(), avg.averages().to_vec(), n)?;
            resampled.segment_grids()
        }
    };
    grids
        .par_iter()
        .map(|grid| {
            let values = grid
                .iter()
                .map(|&t| model.delta_c(params, t))
                .collect::<Result<Vec<_>>>()?;
            Ok(trapezoid(grid, &values) / width)
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Converged once `|step| <= step_tolerance * (|params| + step_tolerance)` ...
    pub step_tolerance: f64,
    /// ... and the relative drop in the sum of squares is below this.
    pub residual_tolerance: f64,
    /// Resample the model on this many intervals per segment; `None` uses the
    /// data's own grid.
    pub model_intervals: Option<usize>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 200,
            step_tolerance: 1e-8,
            residual_tolerance: 1e-8,
            model_intervals: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: Vec<f64>,
    /// Root-mean-square misfit over real and imaginary parts.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `|J^T r|` at the returned parameters.
    pub gradient_norm: f64,
    /// Frobenius norm of the final Jacobian, for scaling `gradient_norm`.
    pub jacobian_norm: f64,
    /// Residual norm after every accepted step, starting from the initial guess.
    pub history: Vec<f64>,
}

/// Least-squares fit of `model` to segment-averaged data.
///
/// Levenberg-Marquardt on the stacked real and imaginary residuals with a
/// central-difference Jacobian.
pub fn fit_potential<M: CorrelationModel + ?Sized>(
    avg: &SegmentAverage,
    model: &M,
    initial_guess: &[f64],
    options: &FitOptions,
) -> Result<FitResult> {
    let n = model.n_params();
    if avg.n_segments() < 2 * n {
        return Err(Error::InvalidArgument(format!(
            "{} averaged points cannot constrain {n} parameters; need at least {}",
            avg.n_segments(),
            2 * n
        )));
    }
    model.check_params(initial_guess)?;

    let residuals = |p: &[f64]| -> Result<Vec<f64>> {
        let m = model_average(model, p, avg, options.model_intervals)?;
        let diff: Vec<Complex64> = avg.averages().iter().zip(&m).map(|(a, b)| a - b).collect();
        Ok(diff.iter().map(|d| d.re).chain(diff.iter().map(|d| d.im)).collect())
    };
    let sum_sq = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();

    let mut params = initial_guess.to_vec();
    let mut r = residuals(&params)?;
    let m = r.len();
    let rms = |cost: f64| (cost / m as f64).sqrt();
    let mut cost = sum_sq(&r);
    let mut history = vec![rms(cost)];
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let tiny_cost = 1e-30 * m as f64;

    while iterations < options.max_iterations {
        iterations += 1;
        let jac = jacobian(&residuals, &params, m)?;
        let (normal, grad) = normal_equations(&jac, &r, n);

        if cost <= tiny_cost {
            return Ok(finish(params, cost, iterations, true, &jac, &grad, history, rms));
        }

        let mut accepted = false;
        while lambda < 1e16 {
            let mut damped = normal.clone();
            for i in 0..n {
                let d = normal[i][i];
                damped[i][i] += lambda * if d > 0.0 { d } else { 1.0 };
            }
            let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
            let step = match solve(damped, rhs) {
                Some(s) => s,
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let step_norm = norm(&step);
            let small_step = step_norm <= options.step_tolerance * (norm(&params) + options.step_tolerance);
            let trial: Vec<f64> = params.iter().zip(&step).map(|(p, s)| p + s).collect();
            let trial_r = match residuals(&trial) {
                Ok(tr) => tr,
                Err(_) => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let trial_cost = sum_sq(&trial_r);
            if trial_cost < cost {
                let small_change = cost - trial_cost <= options.residual_tolerance * trial_cost
                    || trial_cost <= tiny_cost;
                params = trial;
                r = trial_r;
                cost = trial_cost;
                history.push(rms(cost));
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if small_step && small_change {
                    let jac = jacobian(&residuals, &params, m)?;
                    let (_, grad) = normal_equations(&jac, &r, n);
                    return Ok(finish(params, cost, iterations, true, &jac, &grad, history, rms));
                }
                break;
            }
            if small_step {
                // no improving step left at this resolution
                return Ok(finish(params, cost, iterations, true, &jac, &grad, history, rms));
            }
            lambda *= 10.0;
        }
        if !accepted {
            return Ok(finish(params, cost, iterations, true, &jac, &grad, history, rms));
        }
    }

    Err(Error::FitNotConverged {
        iterations,
        best_params: params,
        rms: rms(cost),
    })
}

#[allow(clippy::too_many_arguments)]
fn finish(
    params: Vec<f64>,
    cost: f64,
    iterations: usize,
    converged: bool,
    jac: &[Vec<f64>],
    grad: &[f64],
    history: Vec<f64>,
    rms: impl Fn(f64) -> f64,
) -> FitResult {
    let jacobian_norm = jac
        .iter()
        .flat_map(|col| col.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    FitResult {
        params,
        residual_norm: rms(cost),
        iterations,
        converged,
        gradient_norm: norm(grad),
        jacobian_norm,
        history,
    }
}

/// Columns `d r / d p_j` by central differences.
fn jacobian<R>(residuals: &R, params: &[f64], m: usize) -> Result<Vec<Vec<f64>>>
where
    R: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut cols = Vec::with_capacity(params.len());
    for j in 0..params.len() {
        let h = 1e-5 * params[j].abs().max(1.0);
        let mut up = params.to_vec();
        let mut down = params.to_vec();
        up[j] += h;
        down[j] -= h;
        let ru = residuals(&up)?;
        let rd = residuals(&down)?;
        cols.push((0..m).map(|i| (ru[i] - rd[i]) / (2.0 * h)).collect());
    }
    Ok(cols)
}

/// `(J^T J, J^T r)` from Jacobian columns.
fn normal_equations(jac: &[Vec<f64>], r: &[f64], n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let normal = (0..n)
        .map(|i| (0..n).map(|j| dot(&jac[i], &jac[j])).collect())
        .collect();
    let grad = (0..n).map(|i| dot(&jac[i], r)).collect();
    (normal, grad)
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
