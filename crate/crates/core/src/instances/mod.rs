//! Instance sources: the Gehring & Homberger benchmark format, its
//! transformation into FTL instances, the native JSON format and a
//! programmatic builder.

mod builder;
mod gh;
mod native;
mod transform;

use std::path::PathBuf;

use thiserror::Error;

use crate::model::ModelError;

pub use builder::{daily_windows, euclidean_km, InstanceBuilder};
pub use gh::{parse_gh, GhInstance, GhNode};
pub use native::{instance_to_json, parse_instance, read_instance, write_instance};
pub use transform::{transform, TransformConfig};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("transformation failed: {0}")]
    Transform(String),
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl From<ModelError> for InstanceError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Invalid { path, message } => InstanceError::Schema { pointer: path, message },
            other => InstanceError::Schema {
                pointer: String::new(),
                message: other.to_string(),
            },
        }
    }
}
