use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

/// Camera sampling ranges. Angles in degrees, distance in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraConfig {
    /// Azimuth range per camera quadrant 1..=4.
    pub theta_ranges: [[f64; 2]; 4],
    /// Polar angle from +z.
    pub phi: [f64; 2],
    pub r: [f64; 2],
    pub vertical_fov: f64,
    pub image_size: u32,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            theta_ranges: [[20.0, 70.0], [110.0, 160.0], [200.0, 250.0], [290.0, 340.0]],
            phi: [50.0, 70.0],
            r: [0.3, 0.45],
            vertical_fov: 40.0,
            image_size: 512,
        }
    }
}

impl CameraConfig {
    pub fn validate(&self) -> Result<()> {
        let ordered = |name: &str, [lo, hi]: [f64; 2]| {
            if lo.is_finite() && hi.is_finite() && lo <= hi {
                Ok(())
            } else {
                Err(Error::param(name, format!("need lo <= hi, got [{lo}, {hi}]")))
            }
        };
        for t in self.theta_ranges {
            ordered("camera.theta_ranges", t)?;
        }
        ordered("camera.phi", self.phi)?;
        ordered("camera.r", self.r)?;
        if self.r[0] <= 0.0 {
            return Err(Error::param("camera.r", "distance must be > 0"));
        }
        if !(self.vertical_fov > 0.0 && self.vertical_fov < 180.0) {
            return Err(Error::param("camera.vertical_fov", format!("must be in (0, 180), got {}", self.vertical_fov)));
        }
        if self.image_size == 0 {
            return Err(Error::param("camera.image_size", "must be > 0"));
        }
        Ok(())
    }

    fn theta_range(&self, quadrant: u8) -> Result<[f64; 2]> {
        match quadrant {
            1..=4 => Ok(self.theta_ranges[quadrant as usize - 1]),
            q => Err(Error::param("quadrant", format!("must be 1..=4, got {q}"))),
        }
    }
}

/// Spherical camera placement looking at the origin with +z as world up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    /// Azimuth, degrees.
    pub theta: f64,
    /// Polar angle from +z, degrees.
    pub phi: f64,
    /// Meters.
    pub r: f64,
    pub quadrant: u8,
    pub vertical_fov: f64,
    pub image_size: u32,
}

/// Orthonormal camera frame; the camera looks along `-back`.
#[derive(Debug, Clone, Copy)]
pub struct ViewFrame {
    pub eye: Vec3,
    pub right: Vec3,
    pub up: Vec3,
    pub back: Vec3,
}

impl ViewFrame {
    /// Camera-space coordinates (x right, y up, visible points have z < 0).
    pub fn to_camera(&self, p: &Vec3) -> Vec3 {
        let d = p - self.eye;
        Vec3::new(d.dot(&self.right), d.dot(&self.up), d.dot(&self.back))
    }
}

impl CameraPose {
    pub fn position(&self) -> Vec3 {
        let (st, ct) = self.theta.to_radians().sin_cos();
        let (sp, cp) = self.phi.to_radians().sin_cos();
        Vec3::new(self.r * sp * ct, self.r * sp * st, self.r * cp)
    }

    pub fn frame(&self) -> ViewFrame {
        let eye = self.position();
        let forward = (-eye).normalize();
        let world_up = if forward.cross(&Vec3::z()).norm() < 1e-9 { Vec3::y() } else { Vec3::z() };
        let right = forward.cross(&world_up).normalize();
        let up = right.cross(&forward);
        ViewFrame {
            eye,
            right,
            up,
            back: -forward,
        }
    }

    /// Focal length in normalized device units, `1 / tan(fov / 2)`.
    pub fn focal(&self) -> f64 {
        1.0 / (0.5 * self.vertical_fov.to_radians()).tan()
    }

    /// Pixel coordinates and view depth of a world point, or `None` if it
    /// is not in front of the camera.
    pub fn project(&self, p: &Vec3) -> Option<(f64, f64, f64)> {
        let c = self.frame().to_camera(p);
        let w = -c.z;
        if w <= 0.0 {
            return None;
        }
        let f = self.focal();
        let size = self.image_size as f64;
        Some(((f * c.x / w + 1.0) * 0.5 * size, (1.0 - f * c.y / w) * 0.5 * size, w))
    }

    /// Whether the pose lies inside the configured ranges.
    pub fn within(&self, config: &CameraConfig) -> bool {
        let inside = |v: f64, [lo, hi]: [f64; 2]| lo <= v && v <= hi;
        config
            .theta_range(self.quadrant)
            .is_ok_and(|t| inside(self.theta, t))
            && inside(self.phi, config.phi)
            && inside(self.r, config.r)
    }
}

/// Maps three unit draws onto the quadrant's ranges; `(0,0,0)` gives the
/// lower bounds and `(1,1,1)` the upper bounds.
pub fn pose_from_unit(config: &CameraConfig, quadrant: u8, unit: [f64; 3]) -> Result<CameraPose> {
    let theta_range = config.theta_range(quadrant)?;
    let lerp = |[lo, hi]: [f64; 2], u: f64| lo + (hi - lo) * u;
    Ok(CameraPose {
        theta: lerp(theta_range, unit[0]),
        phi: lerp(config.phi, unit[1]),
        r: lerp(config.r, unit[2]),
        quadrant,
        vertical_fov: config.vertical_fov,
        image_size: config.image_size,
    })
}

pub fn sample_camera<R: Rng + ?Sized>(rng: &mut R, config: &CameraConfig, quadrant: u8) -> Result<CameraPose> {
    config.theta_range(quadrant)?;
    let unit = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
    pose_from_unit(config, quadrant, unit)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn unit_draw_endpoints_hit_table_bounds() {
        let cfg = CameraConfig::default();
        let lo = pose_from_unit(&cfg, 1, [0.0; 3]).unwrap();
        assert_eq!((lo.theta, lo.phi, lo.r), (20.0, 50.0, 0.3));
        let hi = pose_from_unit(&cfg, 3, [1.0; 3]).unwrap();
        assert_eq!((hi.theta, hi.phi, hi.r), (250.0, 70.0, 0.45));
    }

    #[test]
    fn spherical_convention() {
        let pose = CameraPose { theta: 0.0, phi: 90.0, r: 1.0, quadrant: 1, vertical_fov: 40.0, image_size: 512 };
        assert!((pose.position() - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn invalid_quadrant_is_parameter_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for q in [0, 5] {
            assert!(matches!(sample_camera(&mut rng, &CameraConfig::default(), q), Err(Error::Parameter { .. })));
        }
    }

    #[test]
    fn origin_projects_to_image_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cfg = CameraConfig::default();
        for q in 1..=4 {
            let pose = sample_camera(&mut rng, &cfg, q).unwrap();
            assert!(pose.within(&cfg));
            let (x, y, w) = pose.project(&Vec3::zeros()).unwrap();
            assert!((x - 256.0).abs() < 1e-9 && (y - 256.0).abs() < 1e-9);
            assert!((w - pose.r).abs() < 1e-12);
        }
    }

    #[test]
    fn world_up_projects_upward() {
        let pose = pose_from_unit(&CameraConfig::default(), 2, [0.5; 3]).unwrap();
        let (_, y_top, _) = pose.project(&Vec3::new(0.0, 0.0, 0.05)).unwrap();
        assert!(y_top < 256.0);
    }
}
