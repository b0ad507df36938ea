//! Triangle meshes with named vertex groups and the parametric can.

mod can;
mod obj;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

pub use can::{generate_can, CanParams, CAP_RINGS};
pub use obj::{groups_sidecar_path, load_obj, save_obj};

/// Faces whose accumulated normals differ by more than this stay split at
/// shared positions (seams are smoothed, rims stay sharp).
const CREASE_ANGLE_DEG: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
    pub normals: Vec<Vec3>,
    pub uvs: Vec<[f64; 2]>,
    /// Dense per-vertex weights in [0, 1], keyed by group name.
    pub groups: BTreeMap<String, Vec<f64>>,
}

impl Mesh {
    /// Builds a mesh from positions and faces with zero UVs, no groups and
    /// freshly computed normals.
    pub fn from_triangles(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Result<Self> {
        let n = vertices.len();
        let mut mesh = Mesh {
            vertices,
            faces,
            normals: vec![Vec3::z(); n],
            uvs: vec![[0.0, 0.0]; n],
            groups: BTreeMap::new(),
        };
        mesh.check_faces()?;
        mesh.recompute_normals();
        Ok(mesh)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() || self.faces.is_empty()
    }

    fn check_faces(&self) -> Result<()> {
        let n = self.vertices.len();
        for (fi, face) in self.faces.iter().enumerate() {
            if let Some(&bad) = face.iter().find(|&&i| i as usize >= n) {
                return Err(Error::Shape(format!(
                    "face {fi} references vertex {bad} but mesh has {n} vertices"
                )));
            }
        }
        Ok(())
    }

    /// Checks every structural invariant of the type.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        self.check_faces()?;
        if self.normals.len() != n || self.uvs.len() != n {
            return Err(Error::Shape(format!(
                "{n} vertices but {} normals and {} uvs",
                self.normals.len(),
                self.uvs.len()
            )));
        }
        if let Some(i) = self.normals.iter().position(|nrm| (nrm.norm() - 1.0).abs() > 1e-6) {
            return Err(Error::Geometry(format!("normal {i} is not unit length")));
        }
        for (name, weights) in &self.groups {
            if weights.len() != n {
                return Err(Error::Shape(format!(
                    "group `{name}` has {} weights for {n} vertices",
                    weights.len()
                )));
            }
            if let Some(i) = weights.iter().position(|w| !(0.0..=1.0).contains(w)) {
                return Err(Error::Geometry(format!(
                    "group `{name}` weight at vertex {i} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn group(&self, name: &str) -> Result<&[f64]> {
        self.groups
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownGroup(name.to_string()))
    }

    /// Axis-aligned bounds `(min, max)`; `None` for an empty mesh.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), v| {
            (lo.inf(v), hi.sup(v))
        }))
    }

    pub fn centroid(&self) -> Vec3 {
        if self.vertices.is_empty() {
            return Vec3::zeros();
        }
        self.vertices.iter().sum::<Vec3>() / self.vertices.len() as f64
    }

    /// Copy of this mesh with new positions and recomputed normals.
    pub fn with_positions(&self, vertices: Vec<Vec3>) -> Result<Mesh> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::Shape(format!(
                "expected {} positions, got {}",
                self.vertices.len(),
                vertices.len()
            )));
        }
        let mut out = self.clone();
        out.vertices = vertices;
        out.recompute_normals();
        Ok(out)
    }

    /// Area-weighted vertex normals. Vertices sharing a position are
    /// smoothed together unless their normals differ by more than the
    /// crease angle.
    pub fn recompute_normals(&mut self) {
        let n = self.vertices.len();
        let mut acc = vec![Vec3::zeros(); n];
        for f in &self.faces {
            let [a, b, c] = f.map(|i| i as usize);
            let fn_ = (self.vertices[b] - self.vertices[a]).cross(&(self.vertices[c] - self.vertices[a]));
            acc[a] += fn_;
            acc[b] += fn_;
            acc[c] += fn_;
        }

        let mut coincident: HashMap<[u64; 3], Vec<usize>> = HashMap::new();
        for (i, v) in self.vertices.iter().enumerate() {
            coincident
                .entry([v.x.to_bits(), v.y.to_bits(), v.z.to_bits()])
                .or_default()
                .push(i);
        }
        let cos_crease = CREASE_ANGLE_DEG.to_radians().cos();
        let mut smoothed = acc.clone();
        for members in coincident.values().filter(|m| m.len() > 1) {
            for &i in members {
                let Some(ni) = acc[i].try_normalize(0.0) else { continue };
                smoothed[i] = members
                    .iter()
                    .filter(|&&j| j == i || acc[j].try_normalize(0.0).is_some_and(|nj| nj.dot(&ni) >= cos_crease))
                    .map(|&j| acc[j])
                    .sum();
            }
        }

        self.normals = smoothed
            .into_iter()
            .map(|v| v.try_normalize(0.0).unwrap_or_else(Vec3::z))
            .collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Mesh {
        Mesh::from_triangles(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(1.0, 1.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn flat_square_normals_point_up() {
        let m = unit_square();
        for n in &m.normals {
            assert!((n - Vec3::z()).norm() < 1e-12);
        }
        m.validate().unwrap();
    }

    #[test]
    fn out_of_range_face_is_rejected() {
        let err = Mesh::from_triangles(vec![Vec3::zeros(); 3], vec![[0, 1, 3]]).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }

    #[test]
    fn group_weight_outside_unit_interval_fails_validation() {
        let mut m = unit_square();
        m.groups.insert("g".into(), vec![0.0, 0.5, 1.5, 0.0]);
        assert!(m.validate().is_err());
    }

    #[test]
    fn missing_group_is_lookup_error() {
        assert!(matches!(unit_square().group("side"), Err(Error::UnknownGroup(_))));
    }
}
