//! File formats: dataset CSV, model archives and run configuration.

mod archive;
mod config;
mod table;

pub use archive::{load_model, read_model, save_model, write_model, ModelArchive, FORMAT_VERSION};
pub use config::{RunConfig, ENV_OUTPUT_DIR, ENV_THREADS};
pub use table::{load_covariates, load_csv, read_csv, write_dataset_csv, write_dataset_csv_to};
