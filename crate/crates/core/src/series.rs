use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Where the values of a [`ComplexSeries`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Exact,
    CircuitExact,
    CircuitSampled,
    Analytic,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::Exact => "exact",
            Provenance::CircuitExact => "circuit-exact",
            Provenance::CircuitSampled => "circuit-sampled",
            Provenance::Analytic => "analytic",
        };
        f.write_str(s)
    }
}

/// Complex values on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeries {
    times: Vec<f64>,
    values: Vec<Complex64>,
    provenance: Provenance,
}

impl ComplexSeries {
    pub fn new(times: Vec<f64>, values: Vec<Complex64>, provenance: Provenance) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        validate_grid(&times)?;
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value {} at t = {}",
                values[i], times[i]
            )));
        }
        Ok(ComplexSeries {
            times,
            values,
            provenance,
        })
    }

    /// Samples `f` on `times`.
    pub fn from_fn<F>(times: Vec<f64>, provenance: Provenance, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<Complex64>,
    {
        let values = times.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
        Self::new(times, values, provenance)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    /// `a * self + b * other` on a shared grid.
    pub fn linear_combination(&self, a: f64, other: &ComplexSeries, b: f64) -> Result<Self> {
        check_same_grid(self, other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(ComplexSeries {
            times: self.times.clone(),
            values,
            provenance: self.provenance,
        })
    }
}

pub(crate) fn validate_grid(times: &[f64]) -> Result<()> {
    if let Some(t) = times.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite time {t}")));
    }
    if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!(
            "times must be strictly increasing: {} then {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

pub(crate) fn check_same_grid(a: &ComplexSeries, b: &ComplexSeries) -> Result<()> {
    if a.times.len() != b.times.len() {
        return Err(Error::GridMismatch(format!(
            "{} vs {} samples",
            a.times.len(),
            b.times.len()
        )));
    }
    if let Some((x, y)) = a.times.iter().zip(&b.times).find(|(x, y)| x != y) {
        return Err(Error::GridMismatch(format!("t = {x} vs t = {y}")));
    }
    Ok(())
}

/// `n + 1` evenly spaced points from `start` to `end` inclusive.
pub fn uniform_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    let h = (end - start) / n as f64;
    (0..=n)
        .map(|i| if i == n { end } else { start + h * i as f64 })
        .collect()
}
