//! Calibration core for a seven-channel optical-fiber tactile sensor.
//!
//! The sensor reports normalized intensity changes on four shear-sensitive
//! upper fibers, two normal-sensitive lower fibers and a bottom leakage
//! photodiode. [`calibration`] fits the linear gains that map contact
//! geometry and force to those channels and inverts them at inference time
//! to recover the indenter size along with a size-calibrated force vector.
//! [`sensor`] holds the domain types and a synthetic forward model used as
//! the test oracle.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]

extern crate alloc;

pub mod baseline;
pub mod calibration;
pub mod error;
pub mod linalg;
pub mod matrix;
pub mod sensor;

pub use calibration::{
    CalibrationModel, EvaluationReport, FitMeta, Flags, IndentationEstimate, Recovery,
};
pub use error::{Error, Result};
pub use matrix::{matmul, Matrix};
pub use sensor::{
    DatasetPair, ForceVector, GridAxis, GridConfig, IndentationState, IntensityFrame, Phase,
    Sample, Stiffness, SyntheticSensor,
};
