//! Balanced dataset generation, manifests, splits and real-photo ingestion.

mod generate;
mod ingest;
mod manifest;
mod split;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use generate::{generate_dataset, GenerateSummary, GeneratedSample, Generator};
pub use ingest::ingest_real;
pub use manifest::{sha256_hex, DatasetManifest, ManifestEntry, ManifestHeader, SampleSpec, KEY_BLACK, MANIFEST_VERSION};
pub use split::{split, write_split, Split};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    /// 1: one camera per scene. 4: every scene is shot from all four
    /// quadrants and shares one deformation state.
    pub views_per_scene: u32,
    /// Train fraction used by `split` when none is given.
    pub split_fraction: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            views_per_scene: 1,
            split_fraction: 0.8,
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.views_per_scene, 1 | 4) {
            return Err(Error::param("dataset.views_per_scene", format!("must be 1 or 4, got {}", self.views_per_scene)));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::param("dataset.split_fraction", "must lie strictly between 0 and 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundMode {
    Black,
    Pool,
}

impl BackgroundMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BackgroundMode::Black => "black",
            BackgroundMode::Pool => "pool",
        }
    }
}

impl fmt::Display for BackgroundMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BackgroundMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "black" => Ok(BackgroundMode::Black),
            "pool" => Ok(BackgroundMode::Pool),
            _ => Err(Error::param("background", format!("expected `black` or `pool`, got `{s}`"))),
        }
    }
}

/// What a random stream is used for; keeps streams of one index disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    Deformation = 0,
    View = 1,
    Split = 2,
    Training = 3,
}

/// Independent generator for `(seed, index, purpose)`. Counter-based, so
/// the draws of one sample never depend on scheduling.
pub fn stream_rng(seed: u64, index: u64, purpose: StreamPurpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_mul(4).wrapping_add(purpose as u64));
    rng
}
