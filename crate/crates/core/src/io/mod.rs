//! Reading instances and cuts, writing reports.

pub mod cuts;
pub mod json;
pub mod mps;
pub mod report;

use std::path::Path;

use thiserror::Error;

use crate::model::{Inequality, MipInstance};

pub use cuts::{read_cuts, write_cuts, CutFileError};
pub use json::{instance_from_json, instance_to_json, JsonError};
pub use mps::{parse_mps, write_mps, MpsError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceFormat {
    Mps,
    NativeJson,
}

impl InstanceFormat {
    /// `.json` is native JSON; everything else is read as MPS.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => InstanceFormat::NativeJson,
            _ => InstanceFormat::Mps,
        }
    }
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Mps { path: String, source: MpsError },
    #[error("{path}: {source}")]
    Json { path: String, source: JsonError },
    #[error("{path}: {source}")]
    Cuts { path: String, source: CutFileError },
}

fn read_text(path: &Path) -> Result<String, ReadError> {
    std::fs::read_to_string(path).map_err(|source| ReadError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn parse_instance(text: &str, format: InstanceFormat, path: &Path) -> Result<MipInstance, ReadError> {
    let path = path.display().to_string();
    match format {
        InstanceFormat::Mps => parse_mps(text).map_err(|source| ReadError::Mps { path, source }),
        InstanceFormat::NativeJson => instance_from_json(text).map_err(|source| ReadError::Json { path, source }),
    }
}

/// Reads an instance, choosing the format from the file extension.
pub fn read_instance(path: &Path) -> Result<MipInstance, ReadError> {
    parse_instance(&read_text(path)?, InstanceFormat::from_path(path), path)
}

pub fn read_cut_file(path: &Path, n: usize) -> Result<Vec<Inequality>, ReadError> {
    read_cuts(&read_text(path)?, n).map_err(|source| ReadError::Cuts {
        path: path.display().to_string(),
        source,
    })
}
