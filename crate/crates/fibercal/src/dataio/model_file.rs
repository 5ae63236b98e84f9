//! Versioned JSON model files.
//!
//! ```text
//! {
//!   "format_version": 1,
//!   "units": { "length": "mm", "force": "N", "intensity": "dI/I0" },
//!   "r_gain": { "rows": 3, "cols": 2, "data": [ ... ] },
//!   "k_gain": { "rows": 6, "cols": 2, "data": [ ... ] },
//!   "c_gain": { "rows": 6, "cols": 3, "data": [ ... ] },
//!   "meta": { ... }
//! }
//! ```
//!
//! Matrices are row-major. Numbers are written in shortest round-trip form.

use std::fs;
use std::path::Path;

use fibercal_core::calibration::{FORCE_UNIT, LENGTH_UNIT};
use fibercal_core::{CalibrationModel, FitMeta, Matrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u64 = 1;
pub const INTENSITY_UNIT: &str = "dI/I0";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    format_version: u64,
    units: Units,
    r_gain: MatrixDoc,
    k_gain: MatrixDoc,
    c_gain: MatrixDoc,
    meta: MetaDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Units {
    length: String,
    force: String,
    intensity: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaDoc {
    indentation_samples: usize,
    shear_samples: usize,
    residual_r: f64,
    residual_k: f64,
    residual_c: f64,
    created_unix: u64,
}

impl From<&Matrix> for MatrixDoc {
    fn from(m: &Matrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.as_slice().to_vec(),
        }
    }
}

impl MatrixDoc {
    fn into_matrix(self, name: &str, path: &Path) -> Result<Matrix> {
        Matrix::new(self.rows, self.cols, self.data)
            .map_err(|e| Error::schema(path, format!("{name}: {e}")))
    }
}

pub fn model_to_string(model: &CalibrationModel) -> String {
    let meta = model.meta();
    let doc = ModelDoc {
        format_version: FORMAT_VERSION,
        units: Units {
            length: LENGTH_UNIT.into(),
            force: FORCE_UNIT.into(),
            intensity: INTENSITY_UNIT.into(),
        },
        r_gain: model.r_gain().into(),
        k_gain: model.k_gain().into(),
        c_gain: model.c_gain().into(),
        meta: MetaDoc {
            indentation_samples: meta.indentation_samples,
            shear_samples: meta.shear_samples,
            residual_r: meta.residual_r,
            residual_k: meta.residual_k,
            residual_c: meta.residual_c,
            created_unix: meta.created_unix,
        },
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("model document serializes");
    text.push('\n');
    text
}

/// Parses a model document. `origin` only labels error messages.
pub fn model_from_str(text: &str, origin: &Path) -> Result<CalibrationModel> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::schema(origin, e.to_string()))?;
    let version = value
        .get("format_version")
        .ok_or_else(|| Error::schema(origin, "missing field `format_version`"))?;
    let found = version
        .as_u64()
        .ok_or_else(|| Error::schema(origin, "`format_version` must be a non-negative integer"))?;
    if found != FORMAT_VERSION {
        return Err(Error::Version {
            path: origin.to_path_buf(),
            found,
            expected: FORMAT_VERSION,
        });
    }
    let doc: ModelDoc =
        serde_json::from_value(value).map_err(|e| Error::schema(origin, e.to_string()))?;
    if doc.units.length != LENGTH_UNIT
        || doc.units.force != FORCE_UNIT
        || doc.units.intensity != INTENSITY_UNIT
    {
        return Err(Error::schema(
            origin,
            format!(
                "units must be {LENGTH_UNIT}, {FORCE_UNIT}, {INTENSITY_UNIT}; got {}, {}, {}",
                doc.units.length, doc.units.force, doc.units.intensity
            ),
        ));
    }
    let meta = FitMeta {
        indentation_samples: doc.meta.indentation_samples,
        shear_samples: doc.meta.shear_samples,
        residual_r: doc.meta.residual_r,
        residual_k: doc.meta.residual_k,
        residual_c: doc.meta.residual_c,
        created_unix: doc.meta.created_unix,
    };
    let r = doc.r_gain.into_matrix("r_gain", origin)?;
    let k = doc.k_gain.into_matrix("k_gain", origin)?;
    let c = doc.c_gain.into_matrix("c_gain", origin)?;
    CalibrationModel::new(r, k, c, meta).map_err(|e| match e {
        e if e.is_identifiability() => Error::Core(e),
        e => Error::schema(origin, e.to_string()),
    })
}

pub fn save_model(model: &CalibrationModel, path: &Path) -> Result<()> {
    fs::write(path, model_to_string(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<CalibrationModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_str(&text, path)
}
