//! Trivariate Bernstein free-form deformation.

use serde::{Deserialize, Serialize};

use super::shape_key::{Category, ShapeKey};
use crate::mesh::Mesh;
use crate::{Error, Result, Vec3};

/// Control grid over an axis-aligned rest box. Control point `(i, j, k)`
/// lives at `control_points[(i * m + j) * n + k]` for resolution `[l, m, n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    resolution: [usize; 3],
    rest_min: Vec3,
    rest_max: Vec3,
    control_points: Vec<Vec3>,
}

/// `C(n, i) tⁱ (1-t)ⁿ⁻ⁱ` for every `i` in `0..=degree`.
pub fn bernstein(degree: usize, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; degree + 1];
    let mut binom = 1.0;
    for (i, b) in out.iter_mut().enumerate() {
        *b = binom * t.powi(i as i32) * (1.0 - t).powi((degree - i) as i32);
        binom = binom * (degree - i) as f64 / (i + 1) as f64;
    }
    out
}

impl Lattice {
    /// Lattice with control points at their rest positions.
    pub fn new(resolution: [usize; 3], rest_min: Vec3, rest_max: Vec3) -> Result<Self> {
        Self::check(resolution, &rest_min, &rest_max)?;
        let [l, m, n] = resolution;
        let mut control_points = Vec::with_capacity(l * m * n);
        for i in 0..l {
            for j in 0..m {
                for k in 0..n {
                    control_points.push(Self::rest_position(resolution, &rest_min, &rest_max, i, j, k));
                }
            }
        }
        Ok(Lattice {
            resolution,
            rest_min,
            rest_max,
            control_points,
        })
    }

    pub fn from_control_points(
        resolution: [usize; 3],
        rest_min: Vec3,
        rest_max: Vec3,
        control_points: Vec<Vec3>,
    ) -> Result<Self> {
        Self::check(resolution, &rest_min, &rest_max)?;
        let expected = resolution.iter().product::<usize>();
        if control_points.len() != expected {
            return Err(Error::Shape(format!(
                "lattice {resolution:?} needs {expected} control points, got {}",
                control_points.len()
            )));
        }
        Ok(Lattice {
            resolution,
            rest_min,
            rest_max,
            control_points,
        })
    }

    /// Rest box around `mesh` grown by `padding` times its extent on every
    /// side, so every vertex is strictly inside.
    pub fn enclosing(mesh: &Mesh, resolution: [usize; 3], padding: f64) -> Result<Self> {
        let (lo, hi) = mesh
            .bounds()
            .ok_or_else(|| Error::Geometry("cannot fit a lattice around an empty mesh".into()))?;
        if !(padding > 0.0) {
            return Err(Error::param("lattice.padding", "must be > 0"));
        }
        let pad = (hi - lo) * padding;
        Self::new(resolution, lo - pad, hi + pad)
    }

    fn check(resolution: [usize; 3], lo: &Vec3, hi: &Vec3) -> Result<()> {
        if resolution.iter().any(|&r| r < 2) {
            return Err(Error::param(
                "lattice.resolution",
                format!("every axis needs >= 2 control points, got {resolution:?}"),
            ));
        }
        let extent = hi - lo;
        if extent.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::Geometry(format!("rest box has non-positive extent {extent:?}")));
        }
        Ok(())
    }

    fn rest_position(resolution: [usize; 3], lo: &Vec3, hi: &Vec3, i: usize, j: usize, k: usize) -> Vec3 {
        let f = |idx: usize, axis: usize| idx as f64 / (resolution[axis] - 1) as f64;
        Vec3::new(
            lo.x + f(i, 0) * (hi.x - lo.x),
            lo.y + f(j, 1) * (hi.y - lo.y),
            lo.z + f(k, 2) * (hi.z - lo.z),
        )
    }

    pub fn resolution(&self) -> [usize; 3] {
        self.resolution
    }

    pub fn rest_box(&self) -> (Vec3, Vec3) {
        (self.rest_min, self.rest_max)
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let [_, m, n] = self.resolution;
        (i * m + j) * n + k
    }

    pub fn rest_point(&self, i: usize, j: usize, k: usize) -> Vec3 {
        Self::rest_position(self.resolution, &self.rest_min, &self.rest_max, i, j, k)
    }

    pub fn control_points(&self) -> &[Vec3] {
        &self.control_points
    }

    pub fn control_point_mut(&mut self, i: usize, j: usize, k: usize) -> &mut Vec3 {
        let idx = self.index(i, j, k);
        &mut self.control_points[idx]
    }

    /// Applies `f(rest_position, (i, j, k))` to produce each control point.
    pub fn map_points(&mut self, mut f: impl FnMut(Vec3, [usize; 3]) -> Vec3) {
        let [l, m, n] = self.resolution;
        for i in 0..l {
            for j in 0..m {
                for k in 0..n {
                    let rest = self.rest_point(i, j, k);
                    *self.control_point_mut(i, j, k) = f(rest, [i, j, k]);
                }
            }
        }
    }

    /// Normalized `(s, t, u)` box coordinates, or `None` outside the box.
    pub fn local_coords(&self, p: &Vec3) -> Option<[f64; 3]> {
        let mut out = [0.0; 3];
        for a in 0..3 {
            let t = (p[a] - self.rest_min[a]) / (self.rest_max[a] - self.rest_min[a]);
            if !(0.0..=1.0).contains(&t) {
                return None;
            }
            out[a] = t;
        }
        Some(out)
    }

    pub fn same_frame(&self, other: &Lattice) -> bool {
        self.resolution == other.resolution && self.rest_min == other.rest_min && self.rest_max == other.rest_max
    }

    /// `Σᵢⱼₖ Bᵢ(s) Bⱼ(t) Bₖ(u) Pᵢⱼₖ`. Points outside the rest box are
    /// returned unchanged.
    pub fn evaluate(&self, p: &Vec3) -> Vec3 {
        let Some([s, t, u]) = self.local_coords(p) else {
            return *p;
        };
        let [l, m, n] = self.resolution;
        let bs = bernstein(l - 1, s);
        let bt = bernstein(m - 1, t);
        let bu = bernstein(n - 1, u);
        let mut out = Vec3::zeros();
        for (i, wi) in bs.iter().enumerate() {
            for (j, wj) in bt.iter().enumerate() {
                let wij = wi * wj;
                let base = (i * m + j) * n;
                for (k, wk) in bu.iter().enumerate() {
                    out += (wij * wk) * self.control_points[base + k];
                }
            }
        }
        out
    }
}

pub fn ffd_evaluate(lattice: &Lattice, point: &Vec3) -> Vec3 {
    lattice.evaluate(point)
}

/// Bakes the lattice edit `rest -> deformed` into per-vertex offsets.
pub fn bake_lattice_key(
    mesh: &Mesh,
    rest: &Lattice,
    deformed: &Lattice,
    name: &str,
    category: Category,
) -> Result<ShapeKey> {
    if !rest.same_frame(deformed) {
        return Err(Error::Shape(format!(
            "lattice mismatch: rest {:?} vs deformed {:?}",
            rest.resolution, deformed.resolution
        )));
    }
    let offsets = mesh
        .vertices
        .iter()
        .map(|v| deformed.evaluate(v) - rest.evaluate(v))
        .collect();
    Ok(ShapeKey {
        name: name.to_string(),
        category,
        offsets,
    })
}
