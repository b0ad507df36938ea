//! Synthetic deformation-inspection datasets.
//!
//! The pipeline stages are:
//!
//! 1. **Mesh** – parametric can geometry with vertex groups, OBJ interchange.
//! 2. **Deform** – lattice (FFD) shape keys, turbulence displacement and the
//!    stochastic policy that mixes them into deformed / intact states.
//! 3. **Render** – Table-style camera sampling, directional lighting and a
//!    z-buffered software rasterizer over a key-color background.
//! 4. **Composite** – exact chroma keying, mask morphology and background
//!    transfer from an image pool.
//! 5. **Dataset** – balanced, reproducible generation with a digest manifest,
//!    stratified splits and real-photo ingestion.
//! 6. **Analytics** – confusion matrices, metrics, PCA and a linear baseline.

pub mod analytics;
pub mod cli;
pub mod composite;
pub mod config;
pub mod dataset;
pub mod deform;
pub mod error;
pub mod mesh;
pub mod render;

pub use error::{Error, Result};

/// 3D vector type used throughout (meters).
pub type Vec3 = nalgebra::Vector3<f64>;

/// Binary class label. `Deformed` is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Deformed,
    NonDeformed,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Deformed => "deformed",
            Label::NonDeformed => "non_deformed",
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Deformed
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
