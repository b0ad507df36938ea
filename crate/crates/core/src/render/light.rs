use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LightConfig {
    pub diffuse: [f64; 2],
    pub ambient: [f64; 2],
}

impl Default for LightConfig {
    fn default() -> Self {
        LightConfig {
            diffuse: [0.5, 0.9],
            ambient: [0.1, 0.3],
        }
    }
}

impl LightConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [("light.diffuse", self.diffuse), ("light.ambient", self.ambient)] {
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(Error::param(name, format!("need 0 <= lo <= hi <= 1, got [{lo}, {hi}]")));
            }
        }
        if self.diffuse[1] + self.ambient[1] > 1.2 {
            return Err(Error::param("light", "ambient + diffuse upper bounds exceed 1.2"));
        }
        Ok(())
    }
}

/// One directional light plus an ambient term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LightSpec {
    /// Unit vector pointing from the surface toward the light.
    pub direction: Vec3,
    pub diffuse: f64,
    pub ambient: f64,
}

impl LightSpec {
    /// Lambert intensity `clamp(ambient + diffuse · max(0, n·l), 0, 1)`.
    pub fn intensity(&self, normal: &Vec3) -> f64 {
        (self.ambient + self.diffuse * normal.dot(&self.direction).max(0.0)).clamp(0.0, 1.0)
    }
}

/// Direction uniform on the upper hemisphere (uniform `z` by Archimedes'
/// theorem), diffuse and ambient uniform in their ranges.
pub fn sample_light<R: Rng + ?Sized>(rng: &mut R, config: &LightConfig) -> LightSpec {
    let z: f64 = rng.random();
    let az = TAU * rng.random::<f64>();
    let ring = (1.0 - z * z).max(0.0).sqrt();
    let direction = Vec3::new(ring * az.cos(), ring * az.sin(), z).normalize();
    let lerp = |[lo, hi]: [f64; 2], u: f64| lo + (hi - lo) * u;
    let diffuse = lerp(config.diffuse, rng.random());
    let ambient = lerp(config.ambient, rng.random());
    LightSpec {
        direction,
        diffuse,
        ambient,
    }
}
