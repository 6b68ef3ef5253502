use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::ComplexSeries;

/// Minimum sampling a segment must have before it is averaged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionGuard {
    /// Samples per segment, endpoints included.
    pub min_points: usize,
    /// Largest allowed spacing between neighbouring samples.
    pub max_spacing: f64,
}

impl ResolutionGuard {
    pub const MIN_POINTS: usize = 20;

    /// Guard for a box of length `box_length` truncated at momentum index
    /// `n_cut`: the oscillation period `L / (2 pi N)` must be sampled at
    /// least eight times.
    pub fn for_cutoff(box_length: f64, n_cut: u64) -> Self {
        let max_spacing = if n_cut == 0 {
            f64::INFINITY
        } else {
            oscillation_period(box_length, n_cut) / 8.0
        };
        ResolutionGuard {
            min_points: Self::MIN_POINTS,
            max_spacing,
        }
    }

    /// Only the point-count requirement.
    pub fn points_only() -> Self {
        ResolutionGuard {
            min_points: Self::MIN_POINTS,
            max_spacing: f64::INFINITY,
        }
    }
}

/// `L / (2 pi N)`.
pub fn oscillation_period(box_length: f64, n_cut: u64) -> f64 {
    box_length / (2.0 * PI * n_cut as f64)
}

/// Windowed averages of a series over `n_segments` equal segments of `[0, t0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentAverage {
    t0: f64,
    n_segments: usize,
    centers: Vec<f64>,
    averages: Vec<Complex64>,
    /// Sample times inside each segment, endpoints included.
    segment_grids: Vec<Vec<f64>>,
}

impl SegmentAverage {
    /// Averages known only through their values, with the sample grid
    /// reconstructed as `intervals` equal trapezoid intervals per segment.
    pub fn from_averages(t0: f64, averages: Vec<Complex64>, intervals: usize) -> Result<Self> {
        check_window(t0, averages.len())?;
        if intervals == 0 {
            return Err(Error::InvalidArgument("need at least one interval per segment".into()));
        }
        let n = averages.len();
        let dt = t0 / n as f64;
        let segment_grids = (0..n)
            .map(|i| {
                let a = i as f64 * dt;
                let b = (i + 1) as f64 * dt;
                let h = (b - a) / intervals as f64;
                (0..=intervals)
                    .map(|j| if j == intervals { b } else { a + h * j as f64 })
                    .collect()
            })
            .collect();
        Ok(SegmentAverage {
            t0,
            n_segments: n,
            centers: centers(t0, n),
            averages,
            segment_grids,
        })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn n_segments(&self) -> usize {
        self.n_segments
    }

    /// Segment width `t0 / n_segments`.
    pub fn width(&self) -> f64 {
        self.t0 / self.n_segments as f64
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn averages(&self) -> &[Complex64] {
        &self.averages
    }

    pub fn segment_grids(&self) -> &[Vec<f64>] {
        &self.segment_grids
    }
}

fn check_window(t0: f64, n_segments: usize) -> Result<()> {
    if n_segments == 0 {
        return Err(Error::InvalidArgument("need at least one segment".into()));
    }
    if !(t0 > 0.0) || !t0.is_finite() {
        return Err(Error::InvalidArgument(format!("t0 must be positive, got {t0}")));
    }
    Ok(())
}

/// `t_i = (i - 1/2) dt` for `i = 1..=n`.
fn centers(t0: f64, n: usize) -> Vec<f64> {
    let dt = t0 / n as f64;
    (1..=n).map(|i| (i as f64 - 0.5) * dt).collect()
}

/// Trapezoid rule on an arbitrary grid.
pub fn trapezoid(times: &[f64], values: &[Complex64]) -> Complex64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Segment averages `(1/dt) * integral_{t_(i-1)}^{t_i} dc(t) dt` by the
/// trapezoid rule on the samples of `dc`.
///
/// Segment boundaries `i * t0 / n_segments` must be sample points (to within
/// `1e-9` of the segment width), and every segment must satisfy `guard`.
pub fn segment_average(
    dc: &ComplexSeries,
    t0: f64,
    n_segments: usize,
    guard: &ResolutionGuard,
) -> Result<SegmentAverage> {
    check_window(t0, n_segments)?;
    let dt = t0 / n_segments as f64;
    let tol = 1e-9 * dt;
    let times = dc.times();
    let values = dc.values();

    let mut averages = Vec::with_capacity(n_segments);
    let mut segment_grids = Vec::with_capacity(n_segments);
    for seg in 0..n_segments {
        let a = seg as f64 * dt;
        let b = (seg + 1) as f64 * dt;
        let lo = times.partition_point(|&t| t < a - tol);
        let hi = times.partition_point(|&t| t <= b + tol);
        let label = seg + 1;
        if hi <= lo || (times[lo] - a).abs() > tol || (times[hi - 1] - b).abs() > tol {
            return Err(Error::Resolution {
                segment: label,
                reason: format!("segment [{a}, {b}] endpoints are not sample points"),
            });
        }
        let n_points = hi - lo;
        if n_points < guard.min_points {
            return Err(Error::Resolution {
                segment: label,
                reason: format!("{n_points} samples, need at least {}", guard.min_points),
            });
        }
        let spacing = times[lo..hi]
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0f64, f64::max);
        if spacing >= guard.max_spacing {
            return Err(Error::Resolution {
                segment: label,
                reason: format!(
                    "sample spacing {spacing:.3e} is not below {:.3e}",
                    guard.max_spacing
                ),
            });
        }
        averages.push(trapezoid(&times[lo..hi], &values[lo..hi]) / dt);
        segment_grids.push(times[lo..hi].to_vec());
    }

    Ok(SegmentAverage {
        t0,
        n_segments,
        centers: centers(t0, n_segments),
        averages,
        segment_grids,
    })
}
