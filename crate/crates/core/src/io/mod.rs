//! File formats: dataset loaders, the key = value config file, CSV outputs.

pub mod config;
pub mod csv;
pub mod ratings;
pub mod tu;

pub use config::ConfigMap;
pub use csv::{format_sig6, read_signals, write_embeddings, write_report, write_runlog, write_signals, write_timing};
pub use ratings::{load_ratings, SplitSpec};
pub use tu::{load_tu_dataset, write_tu_dataset, DatasetBundle};

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
