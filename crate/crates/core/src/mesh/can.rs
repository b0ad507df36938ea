use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::Mesh;
use crate::{Error, Result, Vec3};

/// Concentric vertex rings on each end cap.
pub const CAP_RINGS: usize = 6;

/// Parametric soda can, centered at the origin with its axis along +z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CanParams {
    pub radius: f64,
    pub height: f64,
    /// Fraction of the radius lost at each rim. The tapered band spans the
    /// same fraction of the height.
    pub taper_fraction: f64,
    pub radial_segments: usize,
    pub height_segments: usize,
}

impl Default for CanParams {
    fn default() -> Self {
        // 330 ml form factor.
        CanParams {
            radius: 0.033,
            height: 0.115,
            taper_fraction: 0.12,
            radial_segments: 64,
            height_segments: 32,
        }
    }
}

impl CanParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::param("can.radius", format!("must be > 0, got {}", self.radius)));
        }
        if !(self.height > 0.0) || !self.height.is_finite() {
            return Err(Error::param("can.height", format!("must be > 0, got {}", self.height)));
        }
        if !(0.0..0.5).contains(&self.taper_fraction) {
            return Err(Error::param(
                "can.taper_fraction",
                format!("must be in [0, 0.5), got {}", self.taper_fraction),
            ));
        }
        if self.radial_segments < 8 {
            return Err(Error::param(
                "can.radial_segments",
                format!("must be >= 8, got {}", self.radial_segments),
            ));
        }
        if self.height_segments < 8 {
            return Err(Error::param(
                "can.height_segments",
                format!("must be >= 8, got {}", self.height_segments),
            ));
        }
        Ok(())
    }

    /// Closed-form vertex count of [`generate_can`].
    pub fn vertex_count(&self) -> usize {
        let rings = self.height_segments + 3;
        rings * (self.radial_segments + 1) + 2 * (1 + CAP_RINGS * self.radial_segments)
    }

    pub fn rim_radius(&self) -> f64 {
        self.radius * (1.0 - self.taper_fraction)
    }

    /// Half-height of the straight lateral wall.
    pub fn wall_half_height(&self) -> f64 {
        0.5 * self.height - self.taper_fraction * self.height
    }
}

fn ring_point(radius: f64, segments: usize, j: usize, z: f64) -> Vec3 {
    let j = j % segments;
    let a = TAU * j as f64 / segments as f64;
    Vec3::new(radius * a.cos(), radius * a.sin(), z)
}

/// Seal region on the lid, in units of the rim radius.
fn in_seal(x: f64, y: f64) -> bool {
    (0.2..=0.75).contains(&x) && y.abs() <= 0.3
}

fn in_tab(x: f64, y: f64) -> bool {
    (-0.55..=-0.1).contains(&x) && y.abs() <= 0.25
}

/// Generates the can: a lateral wall, tapered bands at both rims and two
/// polar-grid caps. Groups: `side` (straight wall only), `tab` and `seal`
/// (disjoint lid regions), `top` and `bottom` (cap vertices).
pub fn generate_can(params: &CanParams) -> Result<Mesh> {
    params.validate()?;
    let s = params.radial_segments;
    let h = params.height_segments;
    let half = 0.5 * params.height;
    let wall = params.wall_half_height();
    let rim = params.rim_radius();

    let mut vertices = Vec::with_capacity(params.vertex_count());
    let mut uvs = Vec::with_capacity(params.vertex_count());
    let mut side = Vec::with_capacity(params.vertex_count());
    let mut faces = Vec::new();

    // Lateral rings, bottom rim first. The seam column is duplicated for UVs.
    let ring_count = h + 3;
    for ring in 0..ring_count {
        let (radius, z, on_wall) = match ring {
            0 => (rim, -half, false),
            r if r == ring_count - 1 => (rim, half, false),
            r => (params.radius, -wall + 2.0 * wall * (r - 1) as f64 / h as f64, true),
        };
        let v = ((z + wall) / (2.0 * wall)).clamp(0.0, 1.0);
        for j in 0..=s {
            vertices.push(ring_point(radius, s, j, z));
            uvs.push([j as f64 / s as f64, v]);
            side.push(if on_wall { 1.0 } else { 0.0 });
        }
    }
    let row = s as u32 + 1;
    for ring in 0..(ring_count as u32 - 1) {
        for j in 0..s as u32 {
            let a0 = ring * row + j;
            let a1 = a0 + 1;
            let b0 = a0 + row;
            let b1 = b0 + 1;
            faces.push([a0, a1, b1]);
            faces.push([a0, b1, b0]);
        }
    }

    let mut top = vec![0.0; vertices.len()];
    let mut bottom = vec![0.0; vertices.len()];
    let mut tab = vec![0.0; vertices.len()];
    let mut seal = vec![0.0; vertices.len()];

    for (z, is_top) in [(half, true), (-half, false)] {
        let center = vertices.len() as u32;
        let mut push = |p: Vec3| {
            uvs.push([0.5 + p.x / (2.0 * rim), 0.5 + p.y / (2.0 * rim)]);
            side.push(0.0);
            top.push(if is_top { 1.0 } else { 0.0 });
            bottom.push(if is_top { 0.0 } else { 1.0 });
            let (x, y) = (p.x / rim, p.y / rim);
            tab.push(if is_top && in_tab(x, y) { 1.0 } else { 0.0 });
            seal.push(if is_top && in_seal(x, y) { 1.0 } else { 0.0 });
            vertices.push(p);
        };
        push(Vec3::new(0.0, 0.0, z));
        for c in 1..=CAP_RINGS {
            let radius = if c == CAP_RINGS { rim } else { rim * c as f64 / CAP_RINGS as f64 };
            for j in 0..s {
                push(ring_point(radius, s, j, z));
            }
        }
        let ring_start = |c: usize| center + 1 + ((c - 1) * s) as u32;
        let mut tri = |a: u32, b: u32, c: u32| {
            faces.push(if is_top { [a, b, c] } else { [a, c, b] });
        };
        for j in 0..s as u32 {
            let j1 = (j + 1) % s as u32;
            tri(center, ring_start(1) + j, ring_start(1) + j1);
        }
        for c in 1..CAP_RINGS {
            let inner = ring_start(c);
            let outer = ring_start(c + 1);
            for j in 0..s as u32 {
                let j1 = (j + 1) % s as u32;
                tri(inner + j, outer + j, outer + j1);
                tri(inner + j, outer + j1, inner + j1);
            }
        }
    }

    let n = vertices.len();
    debug_assert_eq!(n, params.vertex_count());
    let mut groups = BTreeMap::new();
    groups.insert("side".to_string(), side);
    groups.insert("top".to_string(), top);
    groups.insert("bottom".to_string(), bottom);
    groups.insert("tab".to_string(), tab);
    groups.insert("seal".to_string(), seal);

    let mut mesh = Mesh {
        vertices,
        faces,
        normals: vec![Vec3::z(); n],
        uvs,
        groups,
    };
    mesh.recompute_normals();
    Ok(mesh)
}
