//! Two-step self-calibration and inference.
//!
//! Step one explains the lower-layer and bottom channels through the contact
//! geometry `U = (depth, radius)` with the gain `R` (3×2), and all six fiber
//! channels through `U` with the coupling gain `K` (6×2), using only
//! indentation-only samples. Step two removes `K·U` from the shear-phase
//! frames and attributes what remains to the force `F` through `C` (6×3).
//!
//! Inference mirrors this: `Û` from the lower channels, then `F̂` from the
//! fiber channels after subtracting `K·Û`. Every step is a fixed linear map,
//! so the whole frame → (F̂, Û) map is linear.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, DEFAULT_RCOND};
use crate::matrix::Matrix;
use crate::sensor::{
    ForceVector, IndentationState, IntensityFrame, Phase, Sample, FIBERS, LOWER_CHANNELS,
};

/// Below this recovered depth (mm) the radius estimate is flagged.
pub const RADIUS_RELIABLE_DEPTH_MM: f64 = 0.1;
pub const LENGTH_UNIT: &str = "mm";
pub const FORCE_UNIT: &str = "N";

const FIBER_CHANNELS: [usize; FIBERS] = [0, 1, 2, 3, 4, 5];
const GEOMETRY_FACTORS: [&str; 2] = ["depth", "radius"];
const FORCE_FACTORS: [&str; 3] = ["fx", "fy", "fz"];

/// Bookkeeping recorded alongside the fitted gains.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitMeta {
    pub indentation_samples: usize,
    pub shear_samples: usize,
    /// Frobenius norms of the fit residuals `X − G·B`.
    pub residual_r: f64,
    pub residual_k: f64,
    pub residual_c: f64,
    /// Seconds since the Unix epoch; the core has no clock, callers set it.
    pub created_unix: u64,
}

/// Fitted gains `R`, `K`, `C` with cached pseudoinverses for inference.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationModel {
    r_gain: Matrix,
    k_gain: Matrix,
    c_gain: Matrix,
    meta: FitMeta,
    r_pinv: Matrix,
    c_pinv: Matrix,
}

impl CalibrationModel {
    /// Assembles a model from gains, checking shapes and that `R` and `C`
    /// have full column rank (both are inverted at inference time).
    pub fn new(r_gain: Matrix, k_gain: Matrix, c_gain: Matrix, meta: FitMeta) -> Result<Self> {
        for (gain, shape, op) in [
            (&r_gain, (3, 2), "r_gain"),
            (&k_gain, (6, 2), "k_gain"),
            (&c_gain, (6, 3), "c_gain"),
        ] {
            if gain.shape() != shape {
                return Err(Error::Shape {
                    op,
                    left: gain.shape(),
                    right: shape,
                });
            }
        }
        if ![meta.residual_r, meta.residual_k, meta.residual_c]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let r_svd = linalg::svd(&r_gain);
        let c_svd = linalg::svd(&c_gain);
        for (svd, required) in [(&r_svd, 2), (&c_svd, 3)] {
            let rank = svd.rank(DEFAULT_RCOND);
            if rank < required {
                return Err(Error::RankDeficient { rank, required });
            }
        }
        Ok(Self {
            r_pinv: r_svd.pseudoinverse(DEFAULT_RCOND),
            c_pinv: c_svd.pseudoinverse(DEFAULT_RCOND),
            r_gain,
            k_gain,
            c_gain,
            meta,
        })
    }

    /// Runs both calibration steps on a mixed-phase dataset.
    pub fn calibrate(samples: &[Sample]) -> Result<Self> {
        let indent: Vec<Sample> = samples
            .iter()
            .filter(|s| s.phase == Phase::IndentationOnly)
            .copied()
            .collect();
        let shear: Vec<Sample> = samples
            .iter()
            .filter(|s| s.phase == Phase::WithShear)
            .copied()
            .collect();

        let r = fit_gain(&indent, Phase::IndentationOnly, &LOWER_CHANNELS, None)?;
        let k = fit_gain(&indent, Phase::IndentationOnly, &FIBER_CHANNELS, None)?;
        let c = fit_gain(&shear, Phase::WithShear, &FIBER_CHANNELS, Some(&k.gain))?;

        let meta = FitMeta {
            indentation_samples: indent.len(),
            shear_samples: shear.len(),
            residual_r: r.residual,
            residual_k: k.residual,
            residual_c: c.residual,
            created_unix: 0,
        };
        Self::new(r.gain, k.gain, c.gain, meta)
    }

    pub fn with_created_unix(mut self, created_unix: u64) -> Self {
        self.meta.created_unix = created_unix;
        self
    }

    pub fn r_gain(&self) -> &Matrix {
        &self.r_gain
    }

    pub fn k_gain(&self) -> &Matrix {
        &self.k_gain
    }

    pub fn c_gain(&self) -> &Matrix {
        &self.c_gain
    }

    pub fn meta(&self) -> &FitMeta {
        &self.meta
    }

    /// Contact geometry from PD5–PD7.
    pub fn recover_indentation(&self, frame: &IntensityFrame) -> IndentationEstimate {
        let lower = frame.lower();
        let raw = IndentationState::new(
            dot_row(&self.r_pinv, 0, &lower),
            dot_row(&self.r_pinv, 1, &lower),
        );
        let mut flags = Flags::default();
        let mut state = raw;
        if raw.depth < 0.0 {
            state.depth = 0.0;
            flags.depth_clamped = true;
        }
        if raw.depth < RADIUS_RELIABLE_DEPTH_MM {
            flags.unreliable_radius = true;
        }
        IndentationEstimate { raw, state, flags }
    }

    /// Size-calibrated force and contact geometry from a full frame.
    ///
    /// The indentation share `K·Û` is computed from the unclamped estimate so
    /// the map stays linear; clamping only affects the reported depth.
    pub fn recover_force(&self, frame: &IntensityFrame) -> Recovery {
        let indentation = self.recover_indentation(frame);
        let u = indentation.raw.as_array();
        let mut residual = frame.fibers();
        for (i, r) in residual.iter_mut().enumerate() {
            *r -= dot_row(&self.k_gain, i, &u);
        }
        let force = ForceVector::new(
            dot_row(&self.c_pinv, 0, &residual),
            dot_row(&self.c_pinv, 1, &residual),
            dot_row(&self.c_pinv, 2, &residual),
        );
        Recovery { force, indentation }
    }

    /// Mean absolute errors over samples carrying both force and geometry
    /// ground truth.
    pub fn evaluate(&self, samples: &[Sample]) -> Result<EvaluationReport> {
        evaluate(self, samples)
    }
}

fn dot_row(m: &Matrix, row: usize, x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (a, b) in m.row(row).iter().zip(x) {
        acc += a * b;
    }
    acc
}

/// Fitted gain with its residual norm.
struct GainFit {
    gain: Matrix,
    residual: f64,
}

/// Least-squares gain from `channels` of the samples' frames onto the
/// geometry (when `k_gain` is `None`) or onto the force after subtracting
/// `k_gain · U`.
fn fit_gain(
    samples: &[Sample],
    phase: Phase,
    channels: &[usize],
    k_gain: Option<&Matrix>,
) -> Result<GainFit> {
    let needed = if k_gain.is_some() { 3 } else { 2 };
    if samples.len() < needed {
        return Err(Error::NotEnoughSamples {
            phase: phase.name(),
            needed,
            found: samples.len(),
        });
    }
    for (index, s) in samples.iter().enumerate() {
        if s.phase != phase {
            return Err(Error::WrongPhase {
                index,
                expected: phase.name(),
            });
        }
    }
    let geometry = stack_geometry(samples)?;
    let mut observations = stack_channels(samples, channels)?;
    let (regressors, names): (Matrix, &[&str]) = match k_gain {
        None => (geometry, &GEOMETRY_FACTORS),
        Some(k) => {
            observations = observations.sub(&k.matmul(&geometry)?)?;
            (stack_force(samples)?, &FORCE_FACTORS)
        }
    };
    check_excitation(&regressors, names, phase)?;
    let gain = linalg::lstsq_fit(&observations, &regressors)?;
    let residual = observations
        .sub(&gain.matmul(&regressors)?)?
        .frobenius_norm();
    Ok(GainFit { gain, residual })
}

/// Every regressor row has to vary across samples and the centered rows
/// have to be linearly independent; otherwise a factor is not excited.
fn check_excitation(regressors: &Matrix, names: &[&str], phase: Phase) -> Result<()> {
    let (m, n) = regressors.shape();
    let mut constant = Vec::new();
    let mut centered = Vec::with_capacity(m * n);
    for (i, name) in names.iter().enumerate().take(m) {
        let row = regressors.row(i);
        let mean = row.iter().sum::<f64>() / n as f64;
        let scale = row.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let spread = row.iter().fold(0.0f64, |a, v| a.max((v - mean).abs()));
        if spread <= 1e-12 * scale {
            constant.push(*name);
        }
        centered.extend(row.iter().map(|v| v - mean));
    }
    if !constant.is_empty() {
        return Err(Error::Unexcited {
            phase: phase.name(),
            factors: join(&constant),
        });
    }
    let rank = linalg::rank(&Matrix::new(m, n, centered)?, DEFAULT_RCOND)?;
    if rank < m {
        return Err(Error::Unexcited {
            phase: phase.name(),
            factors: format!("independent variation of {}", join(names)),
        });
    }
    Ok(())
}

fn join(names: &[&str]) -> String {
    let mut out = String::new();
    for (i, n) in names.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(n);
    }
    out
}

fn stack_channels(samples: &[Sample], channels: &[usize]) -> Result<Matrix> {
    let n = samples.len();
    let mut data = Vec::with_capacity(channels.len() * n);
    for &c in channels {
        data.extend(samples.iter().map(|s| s.frame.pd[c]));
    }
    Matrix::new(channels.len(), n, data)
}

fn stack_geometry(samples: &[Sample]) -> Result<Matrix> {
    let mut depth = Vec::with_capacity(samples.len());
    let mut radius = Vec::with_capacity(samples.len());
    for (index, s) in samples.iter().enumerate() {
        let u = s.indentation.ok_or(Error::MissingGroundTruth {
            index,
            what: "indentation",
        })?;
        depth.push(u.depth);
        radius.push(u.radius);
    }
    Matrix::from_rows(&[depth, radius])
}

fn stack_force(samples: &[Sample]) -> Result<Matrix> {
    let mut rows = [Vec::new(), Vec::new(), Vec::new()];
    for (index, s) in samples.iter().enumerate() {
        let f = s.force.ok_or(Error::MissingGroundTruth {
            index,
            what: "force",
        })?;
        for (row, v) in rows.iter_mut().zip(f.as_array()) {
            row.push(v);
        }
    }
    Matrix::from_rows(&rows)
}

/// Fits `R` (3×2) from indentation-only samples: PD5–PD7 against `U`.
pub fn fit_indentation_gain(indent_samples: &[Sample]) -> Result<Matrix> {
    fit_gain(
        indent_samples,
        Phase::IndentationOnly,
        &LOWER_CHANNELS,
        None,
    )
    .map(|f| f.gain)
}

/// Fits `K` (6×2) from indentation-only samples: PD1–PD6 against `U`.
pub fn fit_indent_coupling(indent_samples: &[Sample]) -> Result<Matrix> {
    fit_gain(
        indent_samples,
        Phase::IndentationOnly,
        &FIBER_CHANNELS,
        None,
    )
    .map(|f| f.gain)
}

/// Fits `C` (6×3) from shear-phase samples after removing `k_gain · U`,
/// using the ground-truth geometry.
pub fn fit_force_gain(shear_samples: &[Sample], k_gain: &Matrix) -> Result<Matrix> {
    if k_gain.shape() != (6, 2) {
        return Err(Error::Shape {
            op: "fit_force_gain",
            left: k_gain.shape(),
            right: (6, 2),
        });
    }
    fit_gain(
        shear_samples,
        Phase::WithShear,
        &FIBER_CHANNELS,
        Some(k_gain),
    )
    .map(|f| f.gain)
}

pub fn recover_indentation(
    frame: &IntensityFrame,
    model: &CalibrationModel,
) -> IndentationEstimate {
    model.recover_indentation(frame)
}

pub fn recover_force(frame: &IntensityFrame, model: &CalibrationModel) -> Recovery {
    model.recover_force(frame)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Flags {
    /// Recovered depth was negative and is reported as zero.
    pub depth_clamped: bool,
    /// Depth is too small for the radius to be observable.
    pub unreliable_radius: bool,
}

impl Flags {
    pub fn is_empty(&self) -> bool {
        !(self.depth_clamped || self.unreliable_radius)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &'static str> {
        [
            (self.depth_clamped, "depth_clamped"),
            (self.unreliable_radius, "unreliable_radius"),
        ]
        .into_iter()
        .filter_map(|(set, name)| set.then_some(name))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndentationEstimate {
    /// Unclamped least-squares estimate.
    pub raw: IndentationState,
    /// Reported estimate, depth clamped at zero.
    pub state: IndentationState,
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recovery {
    pub force: ForceVector,
    pub indentation: IndentationEstimate,
}

/// Per-sample truth and prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleResidual {
    pub index: usize,
    pub true_force: ForceVector,
    pub true_indentation: IndentationState,
    pub recovery: Recovery,
}

impl SampleResidual {
    /// Predicted minus true force.
    pub fn force_error(&self) -> [f64; 3] {
        let p = self.recovery.force.as_array();
        let t = self.true_force.as_array();
        [p[0] - t[0], p[1] - t[1], p[2] - t[2]]
    }

    pub fn depth_error(&self) -> f64 {
        self.recovery.indentation.state.depth - self.true_indentation.depth
    }

    pub fn diameter_error(&self) -> f64 {
        2.0 * (self.recovery.indentation.state.radius - self.true_indentation.radius)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub mae_fx: f64,
    pub mae_fy: f64,
    pub mae_fz: f64,
    pub mae_depth: f64,
    pub mae_diameter: f64,
    pub residuals: Vec<SampleResidual>,
}

impl EvaluationReport {
    /// Mean of the three per-axis force errors.
    pub fn mean_force_mae(&self) -> f64 {
        (self.mae_fx + self.mae_fy + self.mae_fz) / 3.0
    }
}

pub fn evaluate(model: &CalibrationModel, test_samples: &[Sample]) -> Result<EvaluationReport> {
    if test_samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut residuals = Vec::with_capacity(test_samples.len());
    let mut sums = [0.0; 5];
    for (index, s) in test_samples.iter().enumerate() {
        let true_force = s.force.ok_or(Error::MissingGroundTruth {
            index,
            what: "force",
        })?;
        let true_indentation = s.indentation.ok_or(Error::MissingGroundTruth {
            index,
            what: "indentation",
        })?;
        let r = SampleResidual {
            index,
            true_force,
            true_indentation,
            recovery: model.recover_force(&s.frame),
        };
        let [ex, ey, ez] = r.force_error();
        for (acc, e) in sums
            .iter_mut()
            .zip([ex, ey, ez, r.depth_error(), r.diameter_error()])
        {
            *acc += e.abs();
        }
        residuals.push(r);
    }
    let n = test_samples.len() as f64;
    Ok(EvaluationReport {
        mae_fx: sums[0] / n,
        mae_fy: sums[1] / n,
        mae_fz: sums[2] / n,
        mae_depth: sums[3] / n,
        mae_diameter: sums[4] / n,
        residuals,
    })
}
