//! Reading configuration files and the CLI's error type.

use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;

/// Every variant maps to exit code 2.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Config(String),
    Core(vext_core::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) | CliError::Config(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "invalid configuration: {e}"),
        }
    }
}

impl From<vext_core::Error> for CliError {
    fn from(e: vext_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(format!("serialization failed: {e}"))
    }
}

/// Parses a JSON file, naming the offending key on failure.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let key = e.path().to_string();
        let inner = e.into_inner();
        CliError::Config(format!("malformed config {} at key `{key}`: {inner}", path.display()))
    })?;
    de.end()
        .map_err(|e| CliError::Config(format!("malformed config {}: {e}", path.display())))?;
    Ok(value)
}
