//! The single TOML configuration holding every tunable of the pipeline.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytics::BaselineConfig;
use crate::composite::CompositeConfig;
use crate::dataset::DatasetConfig;
use crate::deform::{DeformConfig, SamplingConfig};
use crate::mesh::CanParams;
use crate::render::{CameraConfig, LightConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    /// OBJ replacing the built-in can (groups from its `.groups` sidecar).
    pub mesh: Option<PathBuf>,
    /// PNG wrapped around the lateral wall; built-in label when unset.
    pub label_texture: Option<PathBuf>,
    /// Background pool directory for `--background pool`.
    pub background_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub seed: u64,
    pub can: CanParams,
    pub deform: DeformConfig,
    pub sampling: SamplingConfig,
    pub camera: CameraConfig,
    pub light: LightConfig,
    pub composite: CompositeConfig,
    pub paths: PathsConfig,
    pub dataset: DatasetConfig,
    pub baseline: BaselineConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 7,
            can: CanParams::default(),
            deform: DeformConfig::default(),
            sampling: SamplingConfig::default(),
            camera: CameraConfig::default(),
            light: LightConfig::default(),
            composite: CompositeConfig::default(),
            paths: PathsConfig::default(),
            dataset: DatasetConfig::default(),
            baseline: BaselineConfig::default(),
        }
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<()> {
        self.can.validate()?;
        for p in &self.deform.displace {
            p.validate()?;
        }
        if self.deform.displace.len() != 3 {
            return Err(Error::param("deform.displace", "exactly 3 displacement textures are required"));
        }
        self.sampling.validate()?;
        self.camera.validate()?;
        self.light.validate()?;
        self.composite.validate()?;
        self.dataset.validate()?;
        self.baseline.validate()?;
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    /// One `dotted.key = value` line per leaf of the default config.
    pub fn describe_defaults() -> String {
        fn walk(prefix: &str, v: &serde_json::Value, out: &mut String) {
            match v {
                serde_json::Value::Object(map) => {
                    for (k, v) in map {
                        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                        walk(&key, v, out);
                    }
                }
                serde_json::Value::Null => {
                    let _ = writeln!(out, "  {prefix} = (unset)");
                }
                other => {
                    let _ = writeln!(out, "  {prefix} = {other}");
                }
            }
        }
        let value = serde_json::to_value(Config::default()).expect("config serializes");
        let mut out = String::new();
        walk("", &value, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let cfg = Config::default();
        cfg.validate().unwrap();
        assert_eq!(Config::from_toml_str(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let cfg = Config::from_toml_str("seed = 99\n[camera]\nvertical_fov = 35.0\n").unwrap();
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.camera.vertical_fov, 35.0);
        assert_eq!(cfg.camera.r, [0.3, 0.45]);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = Config::from_toml_str("[camera]\nfov = 35.0\n").unwrap_err().to_string();
        assert!(err.contains("fov"), "{err}");
        let err = Config::from_toml_str("sed = 1\n").unwrap_err().to_string();
        assert!(err.contains("sed"), "{err}");
    }

    #[test]
    fn invalid_value_names_key() {
        let err = Config::from_toml_str("[can]\nradial_segments = 7\n").unwrap_err().to_string();
        assert!(err.contains("can.radial_segments"), "{err}");
    }

    #[test]
    fn hash_tracks_content() {
        let a = Config::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn defaults_listing_covers_nested_keys() {
        let d = Config::describe_defaults();
        for key in ["seed = 7", "camera.phi", "composite.close_radius = 2", "deform.lattice.counts.crush = 3", "paths.background_dir = (unset)"] {
            assert!(d.contains(key), "missing {key}\n{d}");
        }
    }
}
