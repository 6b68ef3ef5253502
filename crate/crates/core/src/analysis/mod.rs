//! Post-processing of correlator data: the interacting/free difference,
//! windowed averaging and phase-shift fits.

mod average;
mod fit;

pub use average::{segment_average, trapezoid, ResolutionGuard, SegmentAverage};
pub use fit::{
    fit_potential, model_average, model_delta_c, ContactModel, CorrelationModel, FitOptions,
    FitResult, PhaseShiftModel,
};

pub use crate::series::{ComplexSeries, Provenance};

use crate::error::Result;
use crate::series::check_same_grid;

/// `C(t) - C0(t)` sample by sample. Keeps the provenance of `c`.
pub fn difference(c: &ComplexSeries, c0: &ComplexSeries) -> Result<ComplexSeries> {
    check_same_grid(c, c0)?;
    let values = c
        .values()
        .iter()
        .zip(c0.values())
        .map(|(a, b)| a - b)
        .collect();
    ComplexSeries::new(c.times().to_vec(), values, c.provenance())
}
