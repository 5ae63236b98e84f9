//! Baseline normalization, datasets, model files and configuration.

pub mod config;
pub mod dataset;
pub mod model_file;

pub use fibercal_core::baseline::{
    denormalize, estimate_baseline, normalize, Baseline, RawFrame, DEFAULT_WINDOW,
};

pub use config::{config_from_str, load_config, SimulationConfig};
pub use dataset::{load_dataset, read_dataset, save_dataset, write_dataset};
pub use model_file::{load_model, model_from_str, model_to_string, save_model, FORMAT_VERSION};
