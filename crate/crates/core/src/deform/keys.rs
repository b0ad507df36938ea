//! The authored deformation vocabulary: twelve lattice keys across five
//! categories, three displacement keys and the tab/seal hinge keys.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::displace::{bake_displacement_key, DisplaceParams};
use super::lattice::{bake_lattice_key, Lattice};
use super::shape_key::{apply_shape_keys, Category, ShapeKey};
use super::state::DeformationState;
use crate::mesh::Mesh;
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CategoryCounts {
    pub crush: usize,
    pub pinch: usize,
    pub fold: usize,
    pub twist: usize,
    pub crunch: usize,
}

impl Default for CategoryCounts {
    fn default() -> Self {
        CategoryCounts {
            crush: 3,
            pinch: 2,
            fold: 2,
            twist: 3,
            crunch: 2,
        }
    }
}

impl CategoryCounts {
    pub fn get(&self, c: Category) -> usize {
        match c {
            Category::Crush => self.crush,
            Category::Pinch => self.pinch,
            Category::Fold => self.fold,
            Category::Twist => self.twist,
            Category::Crunch => self.crunch,
            _ => 0,
        }
    }

    pub fn total(&self) -> usize {
        Category::LATTICE.iter().map(|&c| self.get(c)).sum()
    }
}

/// Amplitudes are fractions of the lattice half-extent (or full height for
/// crush) unless noted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeKeyParams {
    pub resolution: [usize; 3],
    /// Rest box growth per side, as a fraction of the mesh extent.
    pub padding: f64,
    pub counts: CategoryCounts,
    pub crush_depth: f64,
    pub pinch_depth: f64,
    pub fold_shift: f64,
    pub twist_degrees: f64,
    pub crunch_amplitude: f64,
    pub crunch_seed: u64,
}

impl Default for LatticeKeyParams {
    fn default() -> Self {
        LatticeKeyParams {
            resolution: [4, 4, 4],
            padding: 0.05,
            counts: CategoryCounts::default(),
            crush_depth: 0.25,
            pinch_depth: 0.4,
            fold_shift: 0.45,
            twist_degrees: 30.0,
            crunch_amplitude: 0.18,
            crunch_seed: 1234,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HingeParams {
    pub tab_angle_deg: f64,
    pub seal_angle_deg: f64,
}

impl Default for HingeParams {
    fn default() -> Self {
        HingeParams {
            tab_angle_deg: 60.0,
            seal_angle_deg: 70.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeformConfig {
    pub lattice: LatticeKeyParams,
    /// Exactly three displacement textures.
    pub displace: Vec<DisplaceParams>,
    pub hinge: HingeParams,
}

impl Default for DeformConfig {
    fn default() -> Self {
        let variant = |noise_seed, scale| DisplaceParams {
            noise_seed,
            scale,
            strength: 0.004,
            bias: 0.0005,
            group: "side".into(),
        };
        DeformConfig {
            lattice: LatticeKeyParams::default(),
            displace: vec![variant(11, 45.0), variant(23, 70.0), variant(37, 110.0)],
            hinge: HingeParams::default(),
        }
    }
}

fn unit_dir(angle: f64) -> Vec3 {
    Vec3::new(angle.cos(), angle.sin(), 0.0)
}

fn rotate_z(v: Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
}

/// Builds the twelve (by default) lattice keys, each a parametric
/// control-point edit of `rest` baked onto `mesh`.
///
/// - crush: upper layers pushed down, optionally tilted, with a mild bulge
/// - pinch: mid-height layers squeezed along one horizontal direction
/// - fold: layers above a fold line sheared sideways
/// - twist: each layer rotated about the axis in proportion to height
/// - crunch: seeded jitter of every control point above the base layer
pub fn builtin_lattice_keys(mesh: &Mesh, rest: &Lattice, params: &LatticeKeyParams) -> Result<Vec<ShapeKey>> {
    mesh.group("side")?;
    let (lo, hi) = rest.rest_box();
    let center = (lo + hi) / 2.0;
    let half = (hi - lo) / 2.0;
    let n_layers = rest.resolution()[2];
    let layer_t = |k: usize| k as f64 / (n_layers - 1) as f64;

    let mut keys = Vec::with_capacity(params.counts.total());
    for category in Category::LATTICE {
        let count = params.counts.get(category);
        for v in 0..count {
            let vf = v as f64;
            let mut lat = rest.clone();
            match category {
                Category::Crush => {
                    let depth = params.crush_depth * (1.0 - 0.15 * vf) * 2.0 * half.z;
                    let tilt_dir = unit_dir(TAU * vf / count as f64);
                    let tilt = if v == 0 { 0.0 } else { 0.5 };
                    lat.map_points(|p, [_, _, k]| {
                        let t = layer_t(k);
                        let rel = p - center;
                        let lean = 1.0 + tilt * (rel.x * tilt_dir.x / half.x + rel.y * tilt_dir.y / half.y);
                        let bulge = 0.4 * params.crush_depth * (PI * t).sin();
                        Vec3::new(
                            p.x + bulge * rel.x,
                            p.y + bulge * rel.y,
                            p.z - depth * t * t * lean,
                        )
                    });
                }
                Category::Pinch => {
                    let dir = unit_dir(PI * vf / count as f64);
                    lat.map_points(|p, [_, _, k]| {
                        let w = (PI * layer_t(k)).sin().powi(2);
                        let rel = p - center;
                        p - dir * (params.pinch_depth * w * rel.dot(&dir))
                    });
                }
                Category::Fold => {
                    let dir = unit_dir(TAU * vf / count as f64 + PI / 3.0);
                    let t0 = 0.35 + 0.15 * vf / count as f64;
                    let shift = params.fold_shift * half.x;
                    lat.map_points(|p, [_, _, k]| {
                        let t = layer_t(k);
                        p + dir * (shift * ((t - t0) / (1.0 - t0)).max(0.0))
                    });
                }
                Category::Twist => {
                    let sign = if v % 2 == 0 { 1.0 } else { -1.0 };
                    let angle = sign * params.twist_degrees.to_radians() * (1.0 + 0.5 * vf);
                    lat.map_points(|p, [_, _, k]| center + rotate_z(p - center, angle * layer_t(k)));
                }
                Category::Crunch => {
                    let mut rng = ChaCha8Rng::seed_from_u64(params.crunch_seed.wrapping_add(v as u64));
                    let amp = half * params.crunch_amplitude;
                    lat.map_points(|p, [_, _, k]| {
                        let j = Vec3::new(
                            rng.random_range(-1.0..=1.0),
                            rng.random_range(-1.0..=1.0),
                            rng.random_range(-1.0..=1.0),
                        );
                        if k == 0 {
                            p
                        } else {
                            p + amp.component_mul(&j)
                        }
                    });
                }
                _ => unreachable!("LATTICE holds lattice categories only"),
            }
            let name = format!("{}_{v}", category.as_str());
            keys.push(bake_lattice_key(mesh, rest, &lat, &name, category)?);
        }
    }
    Ok(keys)
}

/// Rotates the vertices of `group` about a horizontal hinge line at
/// `hinge_x` (parallel to y) by `angle`. Points on the +x side of the hinge
/// go down, points on the -x side go up.
fn hinge_key(mesh: &Mesh, group: &str, hinge_x: f64, hinge_z: f64, angle: f64, category: Category) -> Result<ShapeKey> {
    let weights = mesh.group(group)?;
    let (s, c) = angle.sin_cos();
    let offsets = mesh
        .vertices
        .iter()
        .zip(weights)
        .map(|(v, &w)| {
            if w == 0.0 {
                return Vec3::zeros();
            }
            let dx = v.x - hinge_x;
            let dz = v.z - hinge_z;
            let rotated = Vec3::new(hinge_x + dx * c + dz * s, v.y, hinge_z - dx * s + dz * c);
            (rotated - v) * w
        })
        .collect();
    Ok(ShapeKey {
        name: group.to_string(),
        category,
        offsets,
    })
}

/// Tab and seal opening keys. The seal hinges at its innermost edge and
/// drops into the can; the tab hinges at its outermost edge and lifts.
pub fn hinge_keys(mesh: &Mesh, params: &HingeParams) -> Result<Vec<ShapeKey>> {
    let extent = |group: &str| -> Result<Option<(f64, f64, f64)>> {
        let w = mesh.group(group)?;
        let pts: Vec<&Vec3> = mesh.vertices.iter().zip(w).filter(|(_, &w)| w > 0.0).map(|(v, _)| v).collect();
        if pts.is_empty() {
            return Ok(None);
        }
        let min_x = pts.iter().map(|v| v.x).fold(f64::INFINITY, f64::min);
        let max_x = pts.iter().map(|v| v.x).fold(f64::NEG_INFINITY, f64::max);
        let max_z = pts.iter().map(|v| v.z).fold(f64::NEG_INFINITY, f64::max);
        Ok(Some((min_x, max_x, max_z)))
    };
    let mut keys = Vec::new();
    if let Some((min_x, _, z)) = extent("seal")? {
        keys.push(hinge_key(mesh, "seal", min_x, z, params.seal_angle_deg.to_radians(), Category::Seal)?);
    }
    if let Some((_, max_x, z)) = extent("tab")? {
        keys.push(hinge_key(mesh, "tab", max_x, z, params.tab_angle_deg.to_radians(), Category::Tab)?);
    }
    Ok(keys)
}

/// Base mesh plus its complete key set.
#[derive(Debug, Clone)]
pub struct DeformRig {
    base: Mesh,
    keys: Vec<ShapeKey>,
}

impl DeformRig {
    pub fn build(base: Mesh, config: &DeformConfig) -> Result<Self> {
        if config.displace.len() != 3 {
            return Err(Error::Config(format!(
                "deform.displace needs exactly 3 entries, got {}",
                config.displace.len()
            )));
        }
        let rest = Lattice::enclosing(&base, config.lattice.resolution, config.lattice.padding)?;
        let mut keys = builtin_lattice_keys(&base, &rest, &config.lattice)?;
        for (i, p) in config.displace.iter().enumerate() {
            keys.push(bake_displacement_key(&base, p, &format!("displace_{i}"))?);
        }
        if base.groups.contains_key("tab") && base.groups.contains_key("seal") {
            keys.extend(hinge_keys(&base, &config.hinge)?);
        }
        Ok(DeformRig { base, keys })
    }

    pub fn base(&self) -> &Mesh {
        &self.base
    }

    pub fn keys(&self) -> &[ShapeKey] {
        &self.keys
    }

    /// Weighted key list realizing `state`.
    pub fn weights<'a>(&'a self, state: &DeformationState) -> Vec<(&'a ShapeKey, f64)> {
        let mut displace_idx = 0;
        self.keys
            .iter()
            .map(|k| {
                let w = match k.category {
                    Category::Tab => state.tab_open,
                    Category::Seal => state.seal_open,
                    Category::Displace => {
                        let w = state.displace_weights.get(displace_idx).copied().unwrap_or(0.0);
                        displace_idx += 1;
                        w
                    }
                    _ => state.lattice_weights.get(&k.name).copied().unwrap_or(0.0),
                };
                (k, w)
            })
            .collect()
    }

    pub fn pose(&self, state: &DeformationState) -> Result<Mesh> {
        apply_shape_keys(&self.base, &self.weights(state))
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::mesh::{generate_can, CanParams};
    use crate::Label;

    fn setup() -> (Mesh, Lattice, Vec<ShapeKey>) {
        let mesh = generate_can(&CanParams::default()).unwrap();
        let params = LatticeKeyParams::default();
        let rest = Lattice::enclosing(&mesh, params.resolution, params.padding).unwrap();
        let keys = builtin_lattice_keys(&mesh, &rest, &params).unwrap();
        (mesh, rest, keys)
    }

    #[test]
    fn twelve_keys_with_configured_categories() {
        let (_, _, keys) = setup();
        assert_eq!(keys.len(), 12);
        let counts = CategoryCounts::default();
        for c in Category::LATTICE {
            assert_eq!(keys.iter().filter(|k| k.category == c).count(), counts.get(c));
        }
    }

    #[test]
    fn every_key_moves_something_by_a_millimeter() {
        let (_, _, keys) = setup();
        for k in &keys {
            assert!(k.max_offset() >= 1e-3, "{} max offset {}", k.name, k.max_offset());
        }
    }

    #[test]
    fn crush_keys_reduce_height() {
        let (mesh, _, keys) = setup();
        let (lo, hi) = mesh.bounds().unwrap();
        for k in keys.iter().filter(|k| k.category == Category::Crush) {
            let out = apply_shape_keys(&mesh, &[(k, 1.0)]).unwrap();
            let (lo2, hi2) = out.bounds().unwrap();
            assert!(hi2.z - lo2.z < hi.z - lo.z - 1e-3, "{}", k.name);
        }
    }

    #[test]
    fn twist_azimuth_grows_with_height() {
        let (mesh, rest, keys) = setup();
        let twist = keys.iter().find(|k| k.name == "twist_0").unwrap();
        let side = mesh.group("side").unwrap();
        let (lo, hi) = rest.rest_box();
        let total = LatticeKeyParams::default().twist_degrees.to_radians();
        for (i, v) in mesh.vertices.iter().enumerate() {
            if side[i] == 0.0 {
                continue;
            }
            let moved = v + twist.offsets[i];
            let d_az = moved.y.atan2(moved.x) - v.y.atan2(v.x);
            let d_az = (d_az + PI).rem_euclid(TAU) - PI;
            let u = (v.z - lo.z) / (hi.z - lo.z);
            // Bernstein smoothing of a layer-linear rotation: the exact
            // per-layer angle is linear in u only for small angles.
            assert!((d_az - total * u).abs() < 0.05 * total + 0.02, "u={u} d_az={d_az}");
        }
    }

    #[test]
    fn hinge_keys_open_seal_down_and_tab_up() {
        let mesh = generate_can(&CanParams::default()).unwrap();
        let keys = hinge_keys(&mesh, &HingeParams::default()).unwrap();
        let seal = keys.iter().find(|k| k.category == Category::Seal).unwrap();
        let tab = keys.iter().find(|k| k.category == Category::Tab).unwrap();
        assert!(seal.offsets.iter().all(|o| o.z <= 1e-15));
        assert!(seal.offsets.iter().any(|o| o.z < -1e-3));
        assert!(tab.offsets.iter().all(|o| o.z >= -1e-15));
        assert!(tab.offsets.iter().any(|o| o.z > 1e-3));
    }

    #[test]
    fn rig_pose_of_rest_state_is_base() {
        let mesh = generate_can(&CanParams { radial_segments: 16, height_segments: 8, ..CanParams::default() }).unwrap();
        let rig = DeformRig::build(mesh.clone(), &DeformConfig::default()).unwrap();
        assert_eq!(rig.keys().len(), 12 + 3 + 2);
        let rest = DeformationState {
            lattice_weights: BTreeMap::new(),
            displace_weights: [0.0; 3],
            tab_open: 0.0,
            seal_open: 0.0,
            label: Label::NonDeformed,
        };
        assert_eq!(rig.pose(&rest).unwrap().vertices, mesh.vertices);
    }
}
