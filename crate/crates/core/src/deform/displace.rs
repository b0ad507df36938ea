use serde::{Deserialize, Serialize};

use super::noise::Turbulence;
use super::shape_key::{Category, ShapeKey};
use crate::mesh::Mesh;
use crate::{Error, Result, Vec3};

/// Displace-modifier settings: offset along the normal by
/// `strength · T(scale · v) + bias`, gated by a vertex group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisplaceParams {
    pub noise_seed: u64,
    /// Spatial frequency in 1/m.
    pub scale: f64,
    /// Meters.
    pub strength: f64,
    /// Meters. Positive values inflate.
    pub bias: f64,
    pub group: String,
}

impl DisplaceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0) {
            return Err(Error::param("displace.scale", format!("must be > 0, got {}", self.scale)));
        }
        if !(self.strength >= 0.0) {
            return Err(Error::param("displace.strength", format!("must be >= 0, got {}", self.strength)));
        }
        if !self.bias.is_finite() {
            return Err(Error::param("displace.bias", "must be finite"));
        }
        Ok(())
    }
}

fn offsets(mesh: &Mesh, params: &DisplaceParams, weight: f64) -> Result<Vec<Vec3>> {
    params.validate()?;
    let gate = mesh.group(&params.group)?;
    let tex = Turbulence::new(params.noise_seed);
    Ok(mesh
        .vertices
        .iter()
        .zip(&mesh.normals)
        .zip(gate)
        .map(|((v, n), &g)| {
            if g == 0.0 || weight == 0.0 {
                return Vec3::zeros();
            }
            let amount = params.strength * tex.sample(&(v * params.scale)) + params.bias;
            n * (g * weight * amount)
        })
        .collect())
}

/// `v'ᵢ = vᵢ + n̂ᵢ · gᵢ · weight · (strength · T(scale · vᵢ) + bias)`.
/// Vertices with zero group weight keep their exact positions.
pub fn apply_displacement(mesh: &Mesh, params: &DisplaceParams, weight: f64) -> Result<Mesh> {
    let off = offsets(mesh, params, weight)?;
    let positions = mesh
        .vertices
        .iter()
        .zip(&off)
        .map(|(v, d)| if *d == Vec3::zeros() { *v } else { v + d })
        .collect();
    mesh.with_positions(positions)
}

/// Displacement at weight 1 as a shape key, so its weight blends linearly
/// with the lattice keys.
pub fn bake_displacement_key(mesh: &Mesh, params: &DisplaceParams, name: &str) -> Result<ShapeKey> {
    Ok(ShapeKey {
        name: name.to_string(),
        category: Category::Displace,
        offsets: offsets(mesh, params, 1.0)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_can, CanParams};

    fn params() -> DisplaceParams {
        DisplaceParams {
            noise_seed: 11,
            scale: 70.0,
            strength: 0.002,
            bias: 0.0004,
            group: "side".into(),
        }
    }

    #[test]
    fn weight_zero_is_identity() {
        let can = generate_can(&CanParams::default()).unwrap();
        let out = apply_displacement(&can, &params(), 0.0).unwrap();
        assert_eq!(out.vertices, can.vertices);
    }

    #[test]
    fn caps_are_bit_identical_at_full_weight() {
        let can = generate_can(&CanParams::default()).unwrap();
        let out = apply_displacement(&can, &params(), 1.0).unwrap();
        let side = can.group("side").unwrap();
        let mut moved = 0;
        for ((a, b), &g) in can.vertices.iter().zip(&out.vertices).zip(side) {
            if g == 0.0 {
                assert_eq!(a, b);
            } else if a != b {
                moved += 1;
            }
        }
        assert!(moved > 0);
    }

    #[test]
    fn integer_noise_coordinate_gets_bias_only() {
        // scale·v lands on an integer lattice point where the noise is 0.
        let scale = 50.0;
        let v0 = Vec3::new(1.0, 2.0, -3.0) / scale;
        let mut m = Mesh::from_triangles(
            vec![v0, v0 + Vec3::new(0.01, 0.0, 0.0), v0 + Vec3::new(0.0, 0.01, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        m.groups.insert("side".into(), vec![1.0, 0.0, 0.0]);
        let p = DisplaceParams { scale, ..params() };
        let w = 0.6;
        let out = apply_displacement(&m, &p, w).unwrap();
        let expect = v0 + m.normals[0] * (w * p.bias);
        assert!((out.vertices[0] - expect).norm() < 1e-15);
    }

    #[test]
    fn unknown_group_is_lookup_error() {
        let can = generate_can(&CanParams::default()).unwrap();
        let p = DisplaceParams { group: "label".into(), ..params() };
        assert!(matches!(apply_displacement(&can, &p, 1.0), Err(Error::UnknownGroup(_))));
    }

    #[test]
    fn baked_key_matches_direct_application() {
        let can = generate_can(&CanParams { radial_segments: 24, height_segments: 10, ..CanParams::default() }).unwrap();
        let key = bake_displacement_key(&can, &params(), "d0").unwrap();
        let direct = apply_displacement(&can, &params(), 0.7).unwrap();
        for i in 0..can.vertex_count() {
            let via_key = can.vertices[i] + 0.7 * key.offsets[i];
            assert!((via_key - direct.vertices[i]).norm() < 1e-15);
        }
    }
}
