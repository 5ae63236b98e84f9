//! Sensor domain types and the synthetic forward model.
//!
//! Channel map: `pd[0..4]` are the upper-layer U-fibers PD1–PD4, `pd[4..6]`
//! the lower-layer straight fibers PD5–PD6, and `pd[6]` the bottom leakage
//! photodiode PD7.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const CHANNELS: usize = 7;
/// Fiber channels PD1–PD6.
pub const FIBERS: usize = 6;
/// Rows of the frame used for indentation recovery: PD5, PD6, PD7.
pub const LOWER_CHANNELS: [usize; 3] = [4, 5, 6];

/// Normalized intensity change ΔI/I₀ on each of the seven photodiodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityFrame {
    pub pd: [f64; CHANNELS],
}

impl IntensityFrame {
    pub const ZERO: Self = Self {
        pd: [0.0; CHANNELS],
    };

    pub fn new(pd: [f64; CHANNELS]) -> Result<Self> {
        if pd.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { pd })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let pd: [f64; CHANNELS] = values.try_into().map_err(|_| Error::ChannelCount {
            expected: CHANNELS,
            found: values.len(),
        })?;
        Self::new(pd)
    }

    /// PD1–PD6.
    pub fn fibers(&self) -> [f64; FIBERS] {
        let mut out = [0.0; FIBERS];
        out.copy_from_slice(&self.pd[..FIBERS]);
        out
    }

    /// PD5, PD6, PD7.
    pub fn lower(&self) -> [f64; 3] {
        LOWER_CHANNELS.map(|c| self.pd[c])
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            pd: self.pd.map(|v| v * factor),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut pd = self.pd;
        for (a, b) in pd.iter_mut().zip(other.pd) {
            *a += b;
        }
        Self { pd }
    }
}

/// Contact geometry: indentation depth and indenter radius, both in mm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndentationState {
    pub depth: f64,
    pub radius: f64,
}

impl IndentationState {
    pub fn new(depth: f64, radius: f64) -> Self {
        Self { depth, radius }
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.depth, self.radius]
    }
}

/// Contact force in newtons: shear `fx`, `fy` and normal `fz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceVector {
    pub fx: f64,
    pub fy: f64,
    pub fz: f64,
}

impl ForceVector {
    pub const ZERO: Self = Self {
        fx: 0.0,
        fy: 0.0,
        fz: 0.0,
    };

    pub fn new(fx: f64, fy: f64, fz: f64) -> Self {
        Self { fx, fy, fz }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.fx, self.fy, self.fz]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Pure normal indentation, no shear.
    IndentationOnly,
    /// Shear loading with a simultaneous normal load.
    WithShear,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::IndentationOnly => "indentation_only",
            Phase::WithShear => "with_shear",
        }
    }
}

/// A frame with optional ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub frame: IntensityFrame,
    pub force: Option<ForceVector>,
    pub indentation: Option<IndentationState>,
    pub phase: Phase,
}

impl Sample {
    pub fn new(
        phase: Phase,
        frame: IntensityFrame,
        force: Option<ForceVector>,
        indentation: Option<IndentationState>,
    ) -> Result<Self> {
        if phase == Phase::IndentationOnly {
            if let Some(f) = force {
                if f.fx != 0.0 || f.fy != 0.0 {
                    return Err(Error::ShearInIndentationPhase { index: 0 });
                }
            }
        }
        Ok(Self {
            frame,
            force,
            indentation,
            phase,
        })
    }
}

/// Linear displacement-to-force surrogate for the motion platform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stiffness {
    /// N/(mm·mm): `fz = kn · depth · radius`.
    pub kn: f64,
    /// N/mm: `fx = ks · dx`, `fy = ks · dy`.
    pub ks: f64,
}

impl Default for Stiffness {
    fn default() -> Self {
        Self { kn: 0.08, ks: 0.5 }
    }
}

/// Ground-truth sensor used to synthesize frames.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSensor {
    r_true: Matrix,
    k_true: Matrix,
    c_true: Matrix,
    pub stiffness: Stiffness,
    pub noise_sigma: f64,
    pub gamma: f64,
    pub seed: u64,
}

const ANISOTROPY_LIMIT: f64 = 0.05;

impl SyntheticSensor {
    pub fn new(
        r_true: Matrix,
        k_true: Matrix,
        c_true: Matrix,
        stiffness: Stiffness,
        noise_sigma: f64,
        gamma: f64,
        seed: u64,
    ) -> Result<Self> {
        let invalid = |msg: alloc::string::String| Err(Error::InvalidSensor(msg));
        if r_true.shape() != (3, 2) || k_true.shape() != (6, 2) || c_true.shape() != (6, 3) {
            return invalid(format!(
                "gain shapes must be 3x2, 6x2, 6x3; got {:?}, {:?}, {:?}",
                r_true.shape(),
                k_true.shape(),
                c_true.shape()
            ));
        }
        for (r_row, k_row) in [(0, 4), (1, 5)] {
            if r_true.row(r_row) != k_true.row(k_row) {
                return invalid(format!(
                    "r_true row PD{} must equal the matching k_true row",
                    k_row + 1
                ));
            }
        }
        let k_max = k_true.max_abs();
        for i in 0..4 {
            if k_true
                .row(i)
                .iter()
                .any(|v| v.abs() > ANISOTROPY_LIMIT * k_max)
            {
                return invalid(format!(
                    "k_true row PD{} exceeds 5% of the largest indentation gain",
                    i + 1
                ));
            }
        }
        let c_max = c_true.max_abs();
        for i in 4..6 {
            if (0..2).any(|j| c_true[(i, j)].abs() > ANISOTROPY_LIMIT * c_max) {
                return invalid(format!(
                    "c_true shear response of PD{} exceeds 5% of the largest force gain",
                    i + 1
                ));
            }
        }
        if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
            return invalid(format!(
                "noise_sigma must be finite and >= 0, got {noise_sigma}"
            ));
        }
        if !gamma.is_finite() {
            return invalid(format!("gamma must be finite, got {gamma}"));
        }
        if !(stiffness.kn.is_finite() && stiffness.ks.is_finite()) {
            return invalid(format!("stiffness must be finite, got {stiffness:?}"));
        }
        Ok(Self {
            r_true,
            k_true,
            c_true,
            stiffness,
            noise_sigma,
            gamma,
            seed,
        })
    }

    /// Reference ground truth: noise-free and linear. Full-scale loads give
    /// channel magnitudes between roughly 0.1 and 0.45.
    pub fn reference() -> Self {
        Self::new(
            reference_r(),
            reference_k(),
            reference_c(),
            Stiffness::default(),
            0.0,
            0.0,
            0,
        )
        .expect("reference sensor is valid")
    }

    /// Reference noisy configuration: cubic term 0.3 and noise at 1% of full scale.
    pub fn reference_noisy(grid: &GridConfig, seed: u64) -> Result<Self> {
        let base = Self::reference();
        let full_scale = base.full_scale(grid)?;
        Ok(base.with_noise(0.01 * full_scale, 0.3).with_seed(seed))
    }

    pub fn with_noise(mut self, noise_sigma: f64, gamma: f64) -> Self {
        self.noise_sigma = noise_sigma;
        self.gamma = gamma;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_stiffness(mut self, stiffness: Stiffness) -> Self {
        self.stiffness = stiffness;
        self
    }

    pub fn r_true(&self) -> &Matrix {
        &self.r_true
    }

    pub fn k_true(&self) -> &Matrix {
        &self.k_true
    }

    pub fn c_true(&self) -> &Matrix {
        &self.c_true
    }

    /// Noise-free linear response, before the cubic term.
    pub fn linear_frame(
        &self,
        force: &ForceVector,
        indentation: &IndentationState,
    ) -> [f64; CHANNELS] {
        let f = force.as_array();
        let u = indentation.as_array();
        let mut pd = [0.0; CHANNELS];
        for (i, out) in pd.iter_mut().take(FIBERS).enumerate() {
            let c = self.c_true.row(i);
            let k = self.k_true.row(i);
            *out = c[0] * f[0] + c[1] * f[1] + c[2] * f[2] + k[0] * u[0] + k[1] * u[1];
        }
        let r = self.r_true.row(2);
        pd[6] = r[0] * u[0] + r[1] * u[1];
        pd
    }

    /// Synthesizes one frame: linear response, then `x + γx³`, then additive
    /// Gaussian noise drawn from `rng`. No random numbers are consumed when
    /// the noise level is zero.
    pub fn synth_frame<R: Rng + ?Sized>(
        &self,
        force: &ForceVector,
        indentation: &IndentationState,
        rng: &mut R,
    ) -> IntensityFrame {
        let mut pd = self.linear_frame(force, indentation);
        for v in pd.iter_mut() {
            *v += self.gamma * *v * *v * *v;
        }
        if self.noise_sigma > 0.0 {
            for v in pd.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v += self.noise_sigma * z;
            }
        }
        IntensityFrame { pd }
    }

    /// Maps platform displacements (mm) and the indenter radius to the
    /// applied load and contact geometry.
    pub fn platform_to_load(
        &self,
        dz: f64,
        dx: f64,
        dy: f64,
        radius: f64,
    ) -> (ForceVector, IndentationState) {
        debug_assert!(dz >= 0.0, "platform depth must be non-negative");
        let Stiffness { kn, ks } = self.stiffness;
        (
            ForceVector::new(ks * dx, ks * dy, kn * dz * radius),
            IndentationState::new(dz, radius),
        )
    }

    /// Largest channel magnitude of the noise-free linear model over the
    /// calibration grid.
    pub fn full_scale(&self, grid: &GridConfig) -> Result<f64> {
        let plan = grid.calibration_positions()?;
        Ok(plan
            .iter()
            .map(|p| {
                let (f, u) = self.platform_to_load(p.dz, p.dx, p.dy, p.radius);
                self.linear_frame(&f, &u)
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v.abs()))
            })
            .fold(0.0, f64::max))
    }

    /// Generates the calibration grid and the midpoint test set from a
    /// PRNG seeded with `self.seed`.
    pub fn generate_grid_dataset(&self, grid: &GridConfig) -> Result<DatasetPair> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let calibration = self.sample_positions(&grid.calibration_positions()?, &mut rng)?;
        let test = self.sample_positions(&grid.test_positions()?, &mut rng)?;
        Ok(DatasetPair { calibration, test })
    }

    fn sample_positions<R: Rng + ?Sized>(
        &self,
        positions: &[Position],
        rng: &mut R,
    ) -> Result<Vec<Sample>> {
        positions
            .iter()
            .map(|p| {
                let (force, indentation) = self.platform_to_load(p.dz, p.dx, p.dy, p.radius);
                let frame = self.synth_frame(&force, &indentation, rng);
                Sample::new(p.phase, frame, Some(force), Some(indentation))
            })
            .collect()
    }
}

fn reference_k() -> Matrix {
    Matrix::from_rows(&[
        [-0.002, 0.0005],
        [-0.001, 0.0],
        [-0.002, 0.0],
        [-0.001, 0.0005],
        [-0.06, -0.02],
        [-0.05, -0.03],
    ])
    .expect("static matrix")
}

fn reference_r() -> Matrix {
    Matrix::from_rows(&[[-0.06, -0.02], [-0.05, -0.03], [-0.08, 0.005]]).expect("static matrix")
}

fn reference_c() -> Matrix {
    Matrix::from_rows(&[
        [0.10, 0.0, -0.05],
        [-0.10, 0.0, -0.05],
        [0.0, 0.10, -0.05],
        [0.0, -0.10, -0.05],
        [0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0],
    ])
    .expect("static matrix")
}

/// Evenly spaced closed range `start, start + step, …, ≤ stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridAxis {
    pub const fn new(start: f64, stop: f64, step: f64) -> Self {
        Self { start, stop, step }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(Error::InvalidGrid(format!("{name}: bounds must be finite")));
        }
        if self.step <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "{name}: step must be > 0, got {}",
                self.step
            )));
        }
        if self.stop < self.start {
            return Err(Error::InvalidGrid(format!("{name}: stop is below start")));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9) as usize + 1;
        (0..count)
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        let p = self.points();
        p.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

/// Motion-platform grid for calibration and testing.
///
/// The calibration set is the indentation-only sweep (`depths` × `diameters`,
/// no lateral motion) followed by the shear sweep (`shear_depths` ×
/// lateral offsets × `diameters`). The test set visits the midpoints between
/// neighbouring calibration positions along every axis.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub depths: GridAxis,
    pub diameters: Vec<f64>,
    pub shear_steps: GridAxis,
    /// Depths for the shear sweep; `None` means every non-zero calibration depth.
    pub shear_depths: Option<Vec<f64>>,
    /// Restrict lateral motion to one axis at a time.
    pub axis_aligned: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            depths: GridAxis::new(0.0, 5.0, 1.0),
            diameters: alloc::vec![5.0, 7.5, 10.0, 12.0],
            shear_steps: GridAxis::new(-4.0, 4.0, 1.0),
            shear_depths: None,
            axis_aligned: false,
        }
    }
}

/// One platform position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub phase: Phase,
    pub dz: f64,
    pub dx: f64,
    pub dy: f64,
    pub radius: f64,
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        self.depths.validate("depths")?;
        self.shear_steps.validate("shear_steps")?;
        if self.depths.start < 0.0 {
            return Err(Error::InvalidGrid("depths must be >= 0".into()));
        }
        if self.diameters.is_empty() {
            return Err(Error::InvalidGrid("no indenter diameters".into()));
        }
        if self.diameters.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::InvalidGrid("diameters must be positive".into()));
        }
        if let Some(depths) = &self.shear_depths {
            if depths.is_empty() {
                return Err(Error::InvalidGrid("shear_depths is empty".into()));
            }
            if depths.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
                return Err(Error::InvalidGrid("shear_depths must be >= 0".into()));
            }
        }
        Ok(())
    }

    fn shear_depth_list(&self) -> Vec<f64> {
        match &self.shear_depths {
            Some(d) => d.clone(),
            None => self
                .depths
                .points()
                .into_iter()
                .filter(|d| *d > 0.0)
                .collect(),
        }
    }

    fn lateral(&self, steps: &[f64]) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        if self.axis_aligned {
            for &x in steps {
                out.push((x, 0.0));
            }
            // (0, 0) already came from the x sweep.
            for &y in steps.iter().filter(|y| **y != 0.0) {
                out.push((0.0, y));
            }
        } else {
            for &x in steps {
                for &y in steps {
                    out.push((x, y));
                }
            }
        }
        out
    }

    pub fn calibration_positions(&self) -> Result<Vec<Position>> {
        self.validate()?;
        let depths = self.depths.points();
        let shear_depths = self.shear_depth_list();
        let lateral = self.lateral(&self.shear_steps.points());
        let mut out = Vec::new();
        for &d in &self.diameters {
            let radius = 0.5 * d;
            for &dz in &depths {
                out.push(Position {
                    phase: Phase::IndentationOnly,
                    dz,
                    dx: 0.0,
                    dy: 0.0,
                    radius,
                });
            }
        }
        for &d in &self.diameters {
            let radius = 0.5 * d;
            for &dz in &shear_depths {
                for &(dx, dy) in &lateral {
                    out.push(Position {
                        phase: Phase::WithShear,
                        dz,
                        dx,
                        dy,
                        radius,
                    });
                }
            }
        }
        Ok(out)
    }

    pub fn test_positions(&self) -> Result<Vec<Position>> {
        self.validate()?;
        let depths = self.depths.midpoints();
        let lateral = self.lateral(&self.shear_steps.midpoints());
        if depths.is_empty() || lateral.is_empty() {
            return Err(Error::InvalidGrid(
                "grid has fewer than two points along an axis".into(),
            ));
        }
        let mut out = Vec::new();
        for &d in &self.diameters {
            let radius = 0.5 * d;
            for &dz in &depths {
                for &(dx, dy) in &lateral {
                    out.push(Position {
                        phase: Phase::WithShear,
                        dz,
                        dx,
                        dy,
                        radius,
                    });
                }
            }
        }
        Ok(out)
    }
}

/// Calibration and held-out test samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetPair {
    pub calibration: Vec<Sample>,
    pub test: Vec<Sample>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1)
    }

    #[test]
    fn zero_load_gives_zero_frame() {
        let s = SyntheticSensor::reference().with_noise(0.0, 0.3);
        let f = s.synth_frame(
            &ForceVector::ZERO,
            &IndentationState::new(0.0, 0.0),
            &mut rng(),
        );
        assert_eq!(f, IntensityFrame::ZERO);
    }

    #[test]
    fn linear_frame_matches_matmul() {
        let s = SyntheticSensor::reference();
        let force = ForceVector::new(0.7, -1.2, 1.4);
        let u = IndentationState::new(3.5, 3.75);
        let frame = s.synth_frame(&force, &u, &mut rng());
        let fv = Matrix::column_vector(&force.as_array()).unwrap();
        let uv = Matrix::column_vector(&u.as_array()).unwrap();
        let six = s
            .c_true()
            .matmul(&fv)
            .unwrap()
            .add(&s.k_true().matmul(&uv).unwrap())
            .unwrap();
        let pd7 = s.r_true().matmul(&uv).unwrap()[(2, 0)];
        for i in 0..6 {
            assert!((frame.pd[i] - six[(i, 0)]).abs() <= 1e-12);
        }
        assert!((frame.pd[6] - pd7).abs() <= 1e-12);
    }

    #[test]
    fn doubling_load_doubles_frame() {
        let s = SyntheticSensor::reference();
        let f = ForceVector::new(0.3, 0.2, 0.9);
        let u = IndentationState::new(1.5, 2.5);
        let a = s.synth_frame(&f, &u, &mut rng());
        let b = s.synth_frame(
            &ForceVector::new(0.6, 0.4, 1.8),
            &IndentationState::new(3.0, 5.0),
            &mut rng(),
        );
        for i in 0..CHANNELS {
            assert!((b.pd[i] - 2.0 * a.pd[i]).abs() <= 1e-15);
        }
    }

    #[test]
    fn cubic_term_is_odd() {
        let s = SyntheticSensor::reference().with_noise(0.0, 0.3);
        let f = ForceVector::new(1.2, -0.4, 1.0);
        let u = IndentationState::new(2.0, 3.0);
        let pos = s.synth_frame(&f, &u, &mut rng());
        let neg = s.synth_frame(
            &ForceVector::new(-1.2, 0.4, -1.0),
            &IndentationState::new(-2.0, -3.0),
            &mut rng(),
        );
        assert_eq!(pos.scaled(-1.0), neg);
        let lin = s.linear_frame(&f, &u);
        assert!((pos.pd[0] - (lin[0] + 0.3 * lin[0].powi(3))).abs() < 1e-15);
    }

    #[test]
    fn platform_surrogate() {
        let s = SyntheticSensor::reference();
        let (f, u) = s.platform_to_load(0.0, 0.0, 0.0, 4.0);
        assert_eq!(f, ForceVector::ZERO);
        assert_eq!(u.depth, 0.0);
        let (f, _) = s.platform_to_load(5.0, 0.0, 0.0, 5.0);
        assert!((f.fz - 2.0).abs() < 1e-15);
        let (a, _) = s.platform_to_load(2.0, 4.0, 0.0, 3.0);
        let (b, _) = s.platform_to_load(2.0, 0.0, 4.0, 3.0);
        assert_eq!(a.fx, b.fy);
        assert_eq!(a.fy, 0.0);
        assert_eq!(b.fx, 0.0);
    }

    #[test]
    fn reference_invariants_hold() {
        let s = SyntheticSensor::reference();
        assert_eq!(s.r_true().row(0), s.k_true().row(4));
        assert_eq!(s.r_true().row(1), s.k_true().row(5));
    }

    #[test]
    fn rejects_inconsistent_lower_rows() {
        let mut r = reference_r().as_slice().to_vec();
        r[0] += 0.01;
        let r = Matrix::new(3, 2, r).unwrap();
        let err = SyntheticSensor::new(
            r,
            reference_k(),
            reference_c(),
            Stiffness::default(),
            0.0,
            0.0,
            0,
        );
        assert!(matches!(err, Err(Error::InvalidSensor(_))));
    }

    #[test]
    fn rejects_normal_sensitive_upper_fibers() {
        let mut k = reference_k().as_slice().to_vec();
        k[0] = -0.05;
        let k = Matrix::new(6, 2, k).unwrap();
        let err = SyntheticSensor::new(
            reference_r(),
            k,
            reference_c(),
            Stiffness::default(),
            0.0,
            0.0,
            0,
        );
        assert!(matches!(err, Err(Error::InvalidSensor(_))));
    }

    #[test]
    fn rejects_shear_sensitive_lower_fibers() {
        let mut c = reference_c().as_slice().to_vec();
        c[4 * 3] = 0.02;
        let c = Matrix::new(6, 3, c).unwrap();
        let err = SyntheticSensor::new(
            reference_r(),
            reference_k(),
            c,
            Stiffness::default(),
            0.0,
            0.0,
            0,
        );
        assert!(matches!(err, Err(Error::InvalidSensor(_))));
    }

    #[test]
    fn default_grid_counts() {
        let grid = GridConfig::default();
        let cal = grid.calibration_positions().unwrap();
        let io = cal
            .iter()
            .filter(|p| p.phase == Phase::IndentationOnly)
            .count();
        assert_eq!(io, 24);
        assert_eq!(cal.len() - io, 4 * 5 * 81);
        let test = grid.test_positions().unwrap();
        assert_eq!(test.len(), 4 * 5 * 64);
        let mut radii: Vec<f64> = cal.iter().map(|p| 2.0 * p.radius).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        assert_eq!(radii, [5.0, 7.5, 10.0, 12.0]);
    }

    #[test]
    fn test_depths_are_midpoints() {
        let grid = GridConfig::default();
        let mut depths: Vec<f64> = grid
            .test_positions()
            .unwrap()
            .iter()
            .map(|p| p.dz)
            .collect();
        depths.sort_by(f64::total_cmp);
        depths.dedup();
        assert_eq!(depths, [0.5, 1.5, 2.5, 3.5, 4.5]);
    }

    #[test]
    fn axis_aligned_lateral_grid() {
        let grid = GridConfig {
            axis_aligned: true,
            ..GridConfig::default()
        };
        let shear = grid
            .calibration_positions()
            .unwrap()
            .into_iter()
            .filter(|p| p.phase == Phase::WithShear)
            .count();
        assert_eq!(shear, 4 * 5 * 17);
        assert!(grid
            .calibration_positions()
            .unwrap()
            .iter()
            .all(|p| p.dx == 0.0 || p.dy == 0.0));
        assert_eq!(grid.test_positions().unwrap().len(), 4 * 5 * 16);
    }

    #[test]
    fn zero_step_is_rejected() {
        let grid = GridConfig {
            depths: GridAxis::new(0.0, 5.0, 0.0),
            ..GridConfig::default()
        };
        assert!(matches!(
            SyntheticSensor::reference().generate_grid_dataset(&grid),
            Err(Error::InvalidGrid(_))
        ));
        let empty = GridConfig {
            diameters: Vec::new(),
            ..GridConfig::default()
        };
        assert!(empty.validate().is_err());
    }

    #[test]
    fn indentation_only_samples_have_no_shear() {
        let s = SyntheticSensor::reference_noisy(&GridConfig::default(), 3).unwrap();
        let data = s.generate_grid_dataset(&GridConfig::default()).unwrap();
        for sample in data
            .calibration
            .iter()
            .filter(|s| s.phase == Phase::IndentationOnly)
        {
            let f = sample.force.unwrap();
            assert_eq!((f.fx, f.fy), (0.0, 0.0));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let grid = GridConfig::default();
        let s = SyntheticSensor::reference_noisy(&grid, 11).unwrap();
        let a = s.generate_grid_dataset(&grid).unwrap();
        let b = s.generate_grid_dataset(&grid).unwrap();
        assert_eq!(a, b);
        let c = s
            .clone()
            .with_seed(12)
            .generate_grid_dataset(&grid)
            .unwrap();
        assert_ne!(a.calibration[0].frame, c.calibration[0].frame);
    }

    #[test]
    fn sample_rejects_shear_in_indentation_phase() {
        let err = Sample::new(
            Phase::IndentationOnly,
            IntensityFrame::ZERO,
            Some(ForceVector::new(0.1, 0.0, 1.0)),
            None,
        );
        assert!(matches!(err, Err(Error::ShearInIndentationPhase { .. })));
    }

    #[test]
    fn frame_channel_count() {
        assert_eq!(
            IntensityFrame::from_slice(&[0.0; 6]),
            Err(Error::ChannelCount {
                expected: 7,
                found: 6
            })
        );
    }
}
