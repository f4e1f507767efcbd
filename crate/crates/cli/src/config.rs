use std::path::{Path, PathBuf};

use journey_core::icpc::{IcpcConfig, DEFAULT_EPSILON};
use journey_core::naming::PromptKind;
use journey_core::pipeline::{CoocParams, MultimodalParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable holding the bearer token for the remote backend.
pub const TOKEN_ENV: &str = "JOURNEYS_API_TOKEN";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NamingConfig {
    pub endpoint: Option<String>,
    pub template: PromptKind,
    pub max_items: Option<usize>,
    pub exemplars: Option<PathBuf>,
    pub max_in_flight: usize,
    pub timeout_secs: u64,
}

impl Default for NamingConfig {
    fn default() -> Self {
        Self {
            endpoint: None,
            template: PromptKind::NaturalTitles,
            max_items: None,
            exemplars: None,
            max_in_flight: 4,
            timeout_secs: 60,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IoConfig {
    pub items: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub epsilon: f64,
    pub min_cluster_size: usize,
    pub cooc: CoocParams,
    pub multimodal: MultimodalParams,
    pub naming: NamingConfig,
    pub io: IoConfig,
    /// Worker threads for per-user work; 0 picks the machine default.
    pub parallelism: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            min_cluster_size: 1,
            cooc: CoocParams::default(),
            multimodal: MultimodalParams::default(),
            naming: NamingConfig::default(),
            io: IoConfig::default(),
            parallelism: 0,
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn icpc(&self) -> Result<IcpcConfig, CliError> {
        IcpcConfig::new(self.epsilon, self.min_cluster_size).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_partial_override() {
        let c: Config = serde_json::from_str(r#"{"epsilon":0.2,"cooc":{"K":7}}"#).unwrap();
        assert_eq!(c.epsilon, 0.2);
        assert_eq!(c.cooc.k, 7);
        assert_eq!(c.cooc.dim, 16);
        assert_eq!(c.min_cluster_size, 1);
        assert_eq!(Config::default().multimodal.merge_conflicts, 3);
        assert_eq!(Config::default().epsilon, 0.1);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<Config>(r#"{"epsilonn":0.2}"#).is_err());
        assert!(serde_json::from_str::<Config>(r#"{"naming":{"endpoint":"x","bogus":1}}"#).is_err());
    }
}
