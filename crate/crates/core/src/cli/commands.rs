use std::io::{Read, Write};

use num_complex::Complex64;
use serde::Serialize;

use super::config::{Backend, RunConfig};
use crate::analysis::{
    difference, fit_potential, segment_average, ComplexSeries, ContactModel, FitOptions,
    SegmentAverage,
};
use crate::circuit::{correlation_circuit, EstimatorMode, TrotterConfig};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, correlation_exact, correlation_free, eigenvalues};
use crate::model::{contact_phase_shift, delta_c_infinite, weighted_integral};
use crate::series::uniform_grid;

/// Shortest representation that parses back to the same `f64`.
fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt_f64))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the named columns of a CSV with a header row.
fn read_columns<R: Read>(input: R, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let idx = names
        .iter()
        .map(|n| {
            headers
                .iter()
                .position(|h| h.trim() == *n)
                .ok_or_else(|| Error::Config(format!("input CSV has no `{n}` column")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for (c, &i) in idx.iter().enumerate() {
            let field = rec.get(i).unwrap_or("").trim();
            let v: f64 = field.parse().map_err(|_| {
                Error::Config(format!("row {}: `{field}` is not a number", line + 1))
            })?;
            cols[c].push(v);
        }
    }
    Ok(cols)
}

pub fn spectrum<W: Write>(cfg: &RunConfig, out: W) -> Result<()> {
    let params = cfg.physical()?;
    let basis = cfg.basis()?;
    let ev = eigenvalues(&build_hamiltonian(&params, &basis))?;
    write_rows(
        out,
        &["index", "energy"],
        ev.iter().enumerate().map(|(i, e)| vec![i as f64, *e]),
    )
}

/// Interacting, free and difference correlators on the dense time grid.
pub struct Correlators {
    pub c: ComplexSeries,
    pub c0: ComplexSeries,
    pub delta: ComplexSeries,
}

pub fn compute_correlators(cfg: &RunConfig) -> Result<Correlators> {
    let params = cfg.physical()?;
    let basis = cfg.basis()?;
    let grid = uniform_grid(0.0, cfg.t0, cfg.total_intervals());

    let guard = cfg.guard();
    let spacing = cfg.t0 / cfg.total_intervals() as f64;
    if spacing >= guard.max_spacing {
        return Err(Error::Resolution {
            segment: 1,
            reason: format!(
                "sample spacing {spacing:.3e} is not below {:.3e}; raise samples_per_segment",
                guard.max_spacing
            ),
        });
    }

    let (c, c0) = match cfg.backend {
        Backend::Exact => {
            let ev = eigenvalues(&build_hamiltonian(&params, &basis))?;
            (correlation_exact(&ev, &grid)?, correlation_free(&basis, &params, &grid)?)
        }
        Backend::CircuitExact | Backend::CircuitSampled => {
            let rate = cfg.trotter_steps_per_unit_time.unwrap_or(1);
            let configs = grid
                .iter()
                .map(|&t| TrotterConfig::from_rate(rate, t))
                .collect::<Result<Vec<_>>>()?;
            let mode = cfg.estimator();
            let free_mode = match mode {
                EstimatorMode::Sampled { shots, seed } => EstimatorMode::Sampled {
                    shots,
                    seed: seed.wrapping_add(1),
                },
                m => m,
            };
            let c = correlation_circuit(&grid, &configs, mode, &params, &basis)?;
            let c0 = correlation_circuit(&grid, &configs, free_mode, &params.with_v0(0.0), &basis)?;
            (c, c0)
        }
    };
    let delta = difference(&c, &c0)?;
    Ok(Correlators { c, c0, delta })
}

pub const CORRELATE_HEADER: [&str; 7] = ["t", "re_c", "im_c", "re_c0", "im_c0", "re_delta_c", "im_delta_c"];

pub fn correlate<W: Write>(cfg: &RunConfig, out: W) -> Result<()> {
    let corr = compute_correlators(cfg)?;
    let rows = (0..corr.c.len()).map(|i| {
        let (c, c0, d) = (corr.c.values()[i], corr.c0.values()[i], corr.delta.values()[i]);
        vec![corr.c.times()[i], c.re, c.im, c0.re, c0.im, d.re, d.im]
    });
    write_rows(out, &CORRELATE_HEADER, rows)
}

pub fn average_series(cfg: &RunConfig, delta: &ComplexSeries) -> Result<SegmentAverage> {
    segment_average(delta, cfg.t0, cfg.n_segments, &cfg.guard())
}

pub const AVERAGE_HEADER: [&str; 5] = ["t_center", "re_avg", "im_avg", "re_delta_c_inf", "im_delta_c_inf"];

pub fn average<R: Read, W: Write>(cfg: &RunConfig, input: R, out: W) -> Result<()> {
    let cols = read_columns(input, &["t", "re_delta_c", "im_delta_c"])?;
    let values = cols[1].iter().zip(&cols[2]).map(|(re, im)| Complex64::new(*re, *im)).collect();
    let delta = ComplexSeries::new(cols[0].clone(), values, crate::series::Provenance::Exact)?;
    let avg = average_series(cfg, &delta)?;
    write_average(cfg, &avg, out)
}

fn write_average<W: Write>(cfg: &RunConfig, avg: &SegmentAverage, out: W) -> Result<()> {
    let params = cfg.physical()?;
    let rows = avg
        .centers()
        .iter()
        .zip(avg.averages())
        .map(|(&t, a)| {
            let inf = delta_c_infinite(t, &params)?;
            Ok(vec![t, a.re, a.im, inf.re, inf.im])
        })
        .collect::<Result<Vec<_>>>()?;
    write_rows(out, &AVERAGE_HEADER, rows.into_iter())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub v0: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
    pub n_segments: usize,
}

pub fn fit_average(cfg: &RunConfig, avg: &SegmentAverage) -> Result<FitReport> {
    if !cfg.fit {
        return Err(Error::Config("fitting is disabled in this configuration (fit = false)".into()));
    }
    let model = ContactModel::new(cfg.physical()?.reduced_mass());
    let result = fit_potential(avg, &model, &[cfg.initial_v0], &FitOptions::default())?;
    Ok(FitReport {
        v0: result.params[0],
        residual_norm: result.residual_norm,
        iterations: result.iterations,
        converged: result.converged,
        gradient_norm: result.gradient_norm,
        n_segments: avg.n_segments(),
    })
}

/// Rebuilds a [`SegmentAverage`] from the output of [`average`].
pub fn read_average<R: Read>(cfg: &RunConfig, input: R) -> Result<SegmentAverage> {
    let cols = read_columns(input, &["t_center", "re_avg", "im_avg"])?;
    let n = cols[0].len();
    if n == 0 {
        return Err(Error::Config("input CSV has no rows".into()));
    }
    let width = cfg.t0 / n as f64;
    for (i, t) in cols[0].iter().enumerate() {
        let want = (i as f64 + 0.5) * width;
        if (t - want).abs() > 1e-9 * width {
            return Err(Error::Config(format!(
                "row {}: center {t} does not match t0 = {} split into {n} segments",
                i + 1,
                cfg.t0
            )));
        }
    }
    let averages = cols[1].iter().zip(&cols[2]).map(|(re, im)| Complex64::new(*re, *im)).collect();
    SegmentAverage::from_averages(cfg.t0, averages, cfg.samples_per_segment)
}

pub fn fit_report_json(report: &FitReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes") + "\n"
}

pub fn fit<R: Read>(cfg: &RunConfig, input: R) -> Result<FitReport> {
    let avg = read_average(cfg, input)?;
    fit_average(cfg, &avg)
}

pub const ORACLE_HEADER: [&str; 6] = [
    "t",
    "re_quadrature",
    "im_quadrature",
    "re_closed_form",
    "im_closed_form",
    "abs_difference",
];

pub fn oracle<W: Write>(cfg: &RunConfig, out: W) -> Result<()> {
    let params = cfg.physical()?;
    let mu = params.reduced_mass();
    let grid = uniform_grid(0.0, cfg.t0, cfg.oracle_points);
    let rows = grid
        .iter()
        .map(|&t| {
            let quad = weighted_integral(|e| contact_phase_shift(e, params.v0, mu), t)?;
            let exact = delta_c_infinite(t, &params)?;
            Ok(vec![t, quad.re, quad.im, exact.re, exact.im, (quad - exact).norm()])
        })
        .collect::<Result<Vec<_>>>()?;
    write_rows(out, &ORACLE_HEADER, rows.into_iter())
}

/// correlate, average and (if enabled) fit, writing
/// `correlate.csv`, `average.csv` and `fit.json` into `dir`.
pub fn pipeline(cfg: &RunConfig, dir: &std::path::Path) -> Result<Option<FitReport>> {
    std::fs::create_dir_all(dir)?;
    correlate(cfg, std::fs::File::create(dir.join("correlate.csv"))?)?;
    average(
        cfg,
        std::fs::File::open(dir.join("correlate.csv"))?,
        std::fs::File::create(dir.join("average.csv"))?,
    )?;
    if !cfg.fit {
        return Ok(None);
    }
    let report = fit(cfg, std::fs::File::open(dir.join("average.csv"))?)?;
    std::fs::write(dir.join("fit.json"), fit_report_json(&report))?;
    Ok(Some(report))
}
