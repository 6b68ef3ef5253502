use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::analysis::ResolutionGuard;
use crate::circuit::EstimatorMode;
use crate::error::{Error, Result};
use crate::hamiltonian::{build_basis, BasisMode, MomentumBasis};
use crate::model::PhysicalParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Exact,
    CircuitExact,
    CircuitSampled,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Exact => "exact",
            Backend::CircuitExact => "circuit-exact",
            Backend::CircuitSampled => "circuit-sampled",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Grid {
    Symmetric,
    Qubit,
}

/// Flat run configuration, read from a TOML file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub v0: f64,
    pub mass: f64,
    pub box_length: f64,
    #[serde(default)]
    pub n_cut: usize,

    pub backend: Backend,
    /// Momentum grid; defaults to `symmetric` for the exact backend and
    /// `qubit` for circuit backends.
    pub grid: Option<Grid>,
    pub gamma: Option<u32>,
    pub trotter_steps_per_unit_time: Option<usize>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,

    pub t0: f64,
    pub n_segments: usize,
    pub samples_per_segment: usize,

    #[serde(default = "default_true")]
    pub fit: bool,
    #[serde(default = "default_initial_v0")]
    pub initial_v0: f64,

    #[serde(default = "default_oracle_points")]
    pub oracle_points: usize,
}

fn default_true() -> bool {
    true
}

fn default_initial_v0() -> f64 {
    1.0
}

fn default_oracle_points() -> usize {
    20
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.physical()?;
        if self.grid() == Grid::Qubit && self.gamma.is_none() {
            return Err(Error::Config("the qubit grid needs `gamma`".into()));
        }
        if self.grid() == Grid::Symmetric && self.backend != Backend::Exact {
            return Err(Error::Config(format!(
                "backend {} runs on the qubit grid only",
                self.backend
            )));
        }
        if self.backend != Backend::Exact {
            match self.trotter_steps_per_unit_time {
                Some(n) if n > 0 => {}
                _ => {
                    return Err(Error::Config(format!(
                        "backend {} needs a positive `trotter_steps_per_unit_time`",
                        self.backend
                    )))
                }
            }
        }
        if self.backend == Backend::CircuitSampled {
            match (self.shots, self.seed) {
                (Some(s), Some(_)) if s > 0 => {}
                _ => {
                    return Err(Error::Config(
                        "backend circuit-sampled needs positive `shots` and a `seed`".into(),
                    ))
                }
            }
        }
        if !(self.t0 > 0.0) || !self.t0.is_finite() {
            return Err(Error::Config(format!("t0 must be positive, got {}", self.t0)));
        }
        if self.n_segments == 0 {
            return Err(Error::Config("n_segments must be at least 1".into()));
        }
        if self.samples_per_segment < ResolutionGuard::MIN_POINTS {
            return Err(Error::Config(format!(
                "samples_per_segment must be at least {}, got {}",
                ResolutionGuard::MIN_POINTS,
                self.samples_per_segment
            )));
        }
        if !self.initial_v0.is_finite() {
            return Err(Error::Config("initial_v0 must be finite".into()));
        }
        if self.oracle_points == 0 {
            return Err(Error::Config("oracle_points must be at least 1".into()));
        }
        Ok(())
    }

    pub fn physical(&self) -> Result<PhysicalParams> {
        PhysicalParams::new(self.v0, self.mass, self.box_length, self.n_cut)
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn grid(&self) -> Grid {
        self.grid.unwrap_or(match self.backend {
            Backend::Exact => Grid::Symmetric,
            _ => Grid::Qubit,
        })
    }

    pub fn basis(&self) -> Result<MomentumBasis> {
        let mode = match self.grid() {
            Grid::Symmetric => BasisMode::Symmetric,
            Grid::Qubit => BasisMode::Qubit(self.gamma.unwrap_or(0)),
        };
        build_basis(&self.physical()?, mode).map_err(|e| Error::Config(e.to_string()))
    }

    /// Largest `|n|` on the grid, which sets the oscillation period.
    pub fn max_index(&self) -> u64 {
        match self.grid() {
            Grid::Symmetric => self.n_cut as u64,
            Grid::Qubit => 1u64 << self.gamma.unwrap_or(1).saturating_sub(1),
        }
    }

    pub fn guard(&self) -> ResolutionGuard {
        ResolutionGuard::for_cutoff(self.box_length, self.max_index())
    }

    pub fn estimator(&self) -> EstimatorMode {
        match self.backend {
            Backend::CircuitSampled => EstimatorMode::Sampled {
                shots: self.shots.unwrap_or(1),
                seed: self.seed.unwrap_or(0),
            },
            _ => EstimatorMode::Exact,
        }
    }

    /// Total number of trapezoid intervals on `[0, t0]`.
    pub fn total_intervals(&self) -> usize {
        self.n_segments * self.samples_per_segment
    }
}
