//! TOML configuration for the platform grid and the synthetic sensor.
//!
//! Every key is optional; an empty file gives the reference noisy setup
//! (γ = 0.3, noise at 1% of full scale, the default grid). Noise is set
//! either absolutely with `noise_sigma` or relative to the noise-free full
//! scale of the calibration grid with `noise_fraction`, not both.
//!
//! ```text
//! seed = 7
//! kn = 0.08
//! ks = 0.5
//! gamma = 0.3
//! noise_fraction = 0.01
//! diameters = [5.0, 7.5, 10.0, 12.0]
//! axis_aligned = false
//!
//! [depths]
//! start = 0.0
//! stop = 5.0
//! step = 1.0
//!
//! [shear_steps]
//! start = -4.0
//! stop = 4.0
//! step = 1.0
//! ```
//!
//! `shear_depths` lists the depths of the shear sweep (default: every
//! non-zero depth). `r_true`, `k_true` and `c_true` replace the reference
//! ground-truth gains, given as lists of rows.

use std::fs;
use std::path::Path;

use fibercal_core::{GridAxis, GridConfig, Matrix, Stiffness, SyntheticSensor};
use serde::Deserialize;

use crate::error::{Error, Result};

pub const DEFAULT_NOISE_FRACTION: f64 = 0.01;
pub const DEFAULT_GAMMA: f64 = 0.3;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    depths: Option<AxisDoc>,
    diameters: Option<Vec<f64>>,
    shear_steps: Option<AxisDoc>,
    shear_depths: Option<Vec<f64>>,
    axis_aligned: Option<bool>,
    kn: Option<f64>,
    ks: Option<f64>,
    noise_sigma: Option<f64>,
    noise_fraction: Option<f64>,
    gamma: Option<f64>,
    seed: Option<u64>,
    r_true: Option<Vec<Vec<f64>>>,
    k_true: Option<Vec<Vec<f64>>>,
    c_true: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AxisDoc {
    start: f64,
    stop: f64,
    step: f64,
}

impl From<AxisDoc> for GridAxis {
    fn from(a: AxisDoc) -> Self {
        GridAxis::new(a.start, a.stop, a.step)
    }
}

/// A validated simulation setup.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub grid: GridConfig,
    pub sensor: SyntheticSensor,
}

impl SimulationConfig {
    /// Reference noisy configuration on the default grid.
    pub fn reference() -> Self {
        let grid = GridConfig::default();
        let sensor =
            SyntheticSensor::reference_noisy(&grid, DEFAULT_SEED).expect("default grid is valid");
        Self { grid, sensor }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.sensor = self.sensor.with_seed(seed);
        self
    }
}

fn gain(rows: Option<Vec<Vec<f64>>>, default: &Matrix, name: &str, path: &Path) -> Result<Matrix> {
    match rows {
        None => Ok(default.clone()),
        Some(rows) => {
            Matrix::from_rows(&rows).map_err(|e| Error::config(path, format!("{name}: {e}")))
        }
    }
}

/// Parses a config document. `origin` only labels error messages.
pub fn config_from_str(text: &str, origin: &Path) -> Result<SimulationConfig> {
    let doc: ConfigDoc = toml::from_str(text).map_err(|e| Error::config(origin, e.to_string()))?;
    let defaults = GridConfig::default();
    let grid = GridConfig {
        depths: doc.depths.map_or(defaults.depths, Into::into),
        diameters: doc.diameters.unwrap_or(defaults.diameters),
        shear_steps: doc.shear_steps.map_or(defaults.shear_steps, Into::into),
        shear_depths: doc.shear_depths,
        axis_aligned: doc.axis_aligned.unwrap_or(false),
    };
    let invalid = |e: fibercal_core::Error| Error::config(origin, e.to_string());
    grid.validate().map_err(invalid)?;
    // Test positions need at least two points per axis.
    grid.test_positions().map_err(invalid)?;

    let reference = SyntheticSensor::reference();
    let stiffness = Stiffness {
        kn: doc.kn.unwrap_or(reference.stiffness.kn),
        ks: doc.ks.unwrap_or(reference.stiffness.ks),
    };
    let base = SyntheticSensor::new(
        gain(doc.r_true, reference.r_true(), "r_true", origin)?,
        gain(doc.k_true, reference.k_true(), "k_true", origin)?,
        gain(doc.c_true, reference.c_true(), "c_true", origin)?,
        stiffness,
        0.0,
        0.0,
        doc.seed.unwrap_or(DEFAULT_SEED),
    )
    .map_err(invalid)?;

    let sigma = match (doc.noise_sigma, doc.noise_fraction) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                origin,
                "set noise_sigma or noise_fraction, not both",
            ));
        }
        (Some(sigma), None) => sigma,
        (None, fraction) => {
            let fraction = fraction.unwrap_or(DEFAULT_NOISE_FRACTION);
            if !(fraction.is_finite() && fraction >= 0.0) {
                return Err(Error::config(
                    origin,
                    format!("noise_fraction must be >= 0, got {fraction}"),
                ));
            }
            fraction * base.full_scale(&grid).map_err(invalid)?
        }
    };
    let gamma = doc.gamma.unwrap_or(DEFAULT_GAMMA);
    // Re-run construction so the noise parameters get the same checks.
    let sensor = SyntheticSensor::new(
        base.r_true().clone(),
        base.k_true().clone(),
        base.c_true().clone(),
        base.stiffness,
        sigma,
        gamma,
        base.seed,
    )
    .map_err(invalid)?;
    Ok(SimulationConfig { grid, sensor })
}

pub fn load_config(path: &Path) -> Result<SimulationConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    config_from_str(&text, path)
}
