//! JSON run configuration (see `schema/system-config.v1.schema.json`).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use vnc::systems::builtin;
use vnc::{SystemDefinition, SystemSpec};

use crate::exit::Failure;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Accepted so editors can point at the schema; not interpreted.
    #[allow(dead_code)]
    #[serde(rename = "$schema", default)]
    pub schema: Option<String>,
    #[serde(default)]
    pub version: Option<u32>,
    /// Builtin system name.
    #[serde(default)]
    pub name: Option<String>,
    /// Overrides for the builtin's parameters.
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default)]
    pub custom: Option<SystemDefinition>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub initial: Option<InitialConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Option<String>,
    pub dt: Option<f64>,
    pub atol: Option<f64>,
    pub rtol: Option<f64>,
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<String>,
}

impl SystemConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let cfg: SystemConfig =
            serde_json::from_str(text).map_err(|e| Failure::config(format!("invalid config: {e}")))?;
        if let Some(v) = cfg.version {
            if v != SCHEMA_VERSION {
                return Err(Failure::config(format!("unsupported config version {v} (expected {SCHEMA_VERSION})")));
            }
        }
        match (&cfg.name, &cfg.custom) {
            (Some(_), Some(_)) => Err(Failure::config("config must give either `name` or `custom`, not both")),
            (None, None) => Err(Failure::config("config must give a builtin `name` or a `custom` system")),
            (None, Some(_)) if !cfg.parameters.is_empty() => {
                Err(Failure::config("`parameters` overrides apply to builtins; put custom parameters inside `custom`"))
            }
            _ => Ok(cfg),
        }
    }
}

/// Build the system from `--system`/`--param` or from a config.
pub fn resolve_system(
    name: Option<&str>,
    params: &BTreeMap<String, f64>,
    config: Option<&SystemConfig>,
) -> Result<SystemSpec, Failure> {
    match (name, config) {
        (Some(n), _) => {
            let mut merged = config.map(|c| c.parameters.clone()).unwrap_or_default();
            if config.and_then(|c| c.name.as_deref()).is_some_and(|cn| cn != n) {
                merged.clear();
            }
            merged.extend(params.iter().map(|(k, v)| (k.clone(), *v)));
            Ok(builtin::by_name(n, &merged)?)
        }
        (None, Some(cfg)) => {
            if let Some(def) = &cfg.custom {
                if !params.is_empty() {
                    return Err(Failure::config("--param applies to builtin systems only"));
                }
                Ok(SystemSpec::from_definition(def)?)
            } else {
                let mut merged = cfg.parameters.clone();
                merged.extend(params.iter().map(|(k, v)| (k.clone(), *v)));
                Ok(builtin::by_name(cfg.name.as_deref().unwrap_or_default(), &merged)?)
            }
        }
        (None, None) => Err(Failure::config("no system given: use --system NAME or --config PATH")),
    }
}
