//! Versioned instance documents. The payload is the canonical
//! `InstanceSpec`; loading always derives and validates, so a loaded
//! instance is ready for model building or fails with the offending fields.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{DadError, Result};
use crate::model::{InstanceSpec, NetworkInstance};

pub const INSTANCE_FORMAT: &str = "dadnet-instance";
pub const INSTANCE_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub format: String,
    pub version: u32,
    pub instance: InstanceSpec,
}

pub fn save_instance(path: &Path, spec: &InstanceSpec) -> Result<()> {
    let doc = InstanceFile {
        format: INSTANCE_FORMAT.into(),
        version: INSTANCE_VERSION,
        instance: spec.clone(),
    };
    let text = serde_json::to_string_pretty(&doc).map_err(|e| DadError::Model(e.to_string()))?;
    super::atomic_write(path, &text)
}

/// Parses the raw spec without validation (generator output, fixtures).
pub fn load_instance_spec(path: &Path) -> Result<InstanceSpec> {
    let text = std::fs::read_to_string(path)?;
    let doc: InstanceFile = serde_json::from_str(&text)
        .map_err(|e| DadError::parse(path.display().to_string(), e.to_string()))?;
    if doc.format != INSTANCE_FORMAT {
        return Err(DadError::parse(
            path.display().to_string(),
            format!("expected format {INSTANCE_FORMAT}, found {}", doc.format),
        ));
    }
    if doc.version != INSTANCE_VERSION {
        return Err(DadError::parse(
            path.display().to_string(),
            format!("unsupported version {}", doc.version),
        ));
    }
    Ok(doc.instance)
}

/// Loads, derives, and validates.
pub fn load_instance(path: &Path) -> Result<NetworkInstance> {
    NetworkInstance::build(&load_instance_spec(path)?)
}
