//! Run configuration: a flat TOML key-value document mirroring the CLI
//! flags. Flags always override file values.

use std::path::{Path, PathBuf};

use crate::CliError;

/// Parsed config file; keys are the CLI flag names with underscores,
/// e.g. `gamma = 1.0`, `decay = "power:2"`, `cost_floor = 0.1`.
#[derive(Debug, Default)]
pub struct FileConfig {
    table: toml::Table,
}

impl FileConfig {
    /// Loads the file when given; `None` yields an empty config.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        let table: toml::Table = text
            .parse()
            .map_err(|e| CliError::Validation(format!("invalid config {}: {e}", path.display())))?;
        Ok(Self { table })
    }

    pub fn string(&self, key: &str) -> Result<Option<String>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(CliError::Validation(format!(
                "config key {key} must be a string, got {other}"
            ))),
        }
    }

    pub fn float(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(v)) => Ok(Some(*v)),
            Some(toml::Value::Integer(v)) => Ok(Some(*v as f64)),
            Some(other) => Err(CliError::Validation(format!(
                "config key {key} must be a number, got {other}"
            ))),
        }
    }

    pub fn integer(&self, key: &str) -> Result<Option<u64>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(v)) if *v >= 0 => Ok(Some(*v as u64)),
            Some(other) => Err(CliError::Validation(format!(
                "config key {key} must be a non-negative integer, got {other}"
            ))),
        }
    }

    pub fn boolean(&self, key: &str) -> Result<Option<bool>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Boolean(v)) => Ok(Some(*v)),
            Some(other) => Err(CliError::Validation(format!(
                "config key {key} must be a boolean, got {other}"
            ))),
        }
    }

    pub fn path(&self, key: &str) -> Result<Option<PathBuf>, CliError> {
        Ok(self.string(key)?.map(PathBuf::from))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn flat_keys_parse_with_types() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "gamma = 1.5").unwrap();
        writeln!(f, "decay = \"power:2\"").unwrap();
        writeln!(f, "max_iterations = 500").unwrap();
        writeln!(f, "strict = true").unwrap();
        let config = FileConfig::load(Some(f.path())).unwrap();
        assert_eq!(config.float("gamma").unwrap(), Some(1.5));
        assert_eq!(config.string("decay").unwrap(), Some("power:2".into()));
        assert_eq!(config.integer("max_iterations").unwrap(), Some(500));
        assert_eq!(config.boolean("strict").unwrap(), Some(true));
        assert_eq!(config.float("missing").unwrap(), None);
        assert!(config.float("decay").is_err());
    }

    #[test]
    fn absent_file_yields_empty_config() {
        let config = FileConfig::load(None).unwrap();
        assert_eq!(config.string("anything").unwrap(), None);
    }
}
