use std::fs;
use std::path::{Path, PathBuf};

use super::EtlError;

/// Where registry facts come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegistryEndpoint {
    /// Base URL of a registry server.
    Http(String),
    /// A local fixture file.
    Fixture(PathBuf),
}

impl RegistryEndpoint {
    /// An `http(s)://` URL, otherwise a fixture path resolved against `base`.
    pub fn parse(value: &str, base: &Path) -> Self {
        if value.starts_with("http://") || value.starts_with("https://") {
            RegistryEndpoint::Http(value.trim_end_matches('/').to_string())
        } else {
            RegistryEndpoint::Fixture(base.join(value))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtlConfig {
    /// Updates closer than this to the previous event on the same card by the
    /// same participant are merged. 0 disables coalescing.
    pub coalesce_window_seconds: u64,
    pub batch_size: usize,
    pub source_journal_path: PathBuf,
    pub registry_endpoint: Option<RegistryEndpoint>,
    pub warehouse_path: PathBuf,
}

pub const DEFAULT_BATCH_SIZE: usize = 1000;

impl EtlConfig {
    pub fn new(source_journal_path: impl Into<PathBuf>, warehouse_path: impl Into<PathBuf>) -> Self {
        Self {
            coalesce_window_seconds: 0,
            batch_size: DEFAULT_BATCH_SIZE,
            source_journal_path: source_journal_path.into(),
            registry_endpoint: None,
            warehouse_path: warehouse_path.into(),
        }
    }

    /// Parses `key = value` lines. Relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, EtlError> {
        let mut window = None;
        let mut batch = None;
        let mut journal = None;
        let mut registry = None;
        let mut warehouse = None;
        let resolve = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_absolute() { p } else { base.join(p) }
        };
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| EtlError::Config(format!("line {}: {msg}", idx + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "coalesce_window_seconds" => {
                    window = Some(value.parse::<u64>().map_err(|e| bad(format!("{key}: {e}")))?)
                }
                "batch_size" => batch = Some(value.parse::<usize>().map_err(|e| bad(format!("{key}: {e}")))?),
                "source_journal_path" => journal = Some(resolve(value)),
                "registry_endpoint" => {
                    registry = if value.is_empty() || value == "none" {
                        None
                    } else {
                        Some(RegistryEndpoint::parse(value, base))
                    }
                }
                "warehouse_path" => warehouse = Some(resolve(value)),
                other => return Err(bad(format!("unknown key {other:?}"))),
            }
        }
        let config = Self {
            coalesce_window_seconds: window.unwrap_or(0),
            batch_size: batch.unwrap_or(DEFAULT_BATCH_SIZE),
            source_journal_path: journal.ok_or_else(|| EtlError::Config("source_journal_path is required".into()))?,
            registry_endpoint: registry,
            warehouse_path: warehouse.ok_or_else(|| EtlError::Config("warehouse_path is required".into()))?,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EtlError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| EtlError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<(), EtlError> {
        if self.batch_size == 0 {
            return Err(EtlError::Config("batch_size must be at least 1".into()));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let registry = match &self.registry_endpoint {
            None => "none".to_string(),
            Some(RegistryEndpoint::Http(url)) => url.clone(),
            Some(RegistryEndpoint::Fixture(p)) => p.display().to_string(),
        };
        format!(
            "coalesce_window_seconds = {}\nbatch_size = {}\nsource_journal_path = {}\nregistry_endpoint = {}\nwarehouse_path = {}\n",
            self.coalesce_window_seconds,
            self.batch_size,
            self.source_journal_path.display(),
            registry,
            self.warehouse_path.display()
        )
    }
}
