use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::mesh::Mesh;
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Crush,
    Pinch,
    Fold,
    Twist,
    Crunch,
    Tab,
    Seal,
    Displace,
}

impl Category {
    pub const LATTICE: [Category; 5] = [
        Category::Crush,
        Category::Pinch,
        Category::Fold,
        Category::Twist,
        Category::Crunch,
    ];

    pub fn is_lattice(self) -> bool {
        Self::LATTICE.contains(&self)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Crush => "crush",
            Category::Pinch => "pinch",
            Category::Fold => "fold",
            Category::Twist => "twist",
            Category::Crunch => "crunch",
            Category::Tab => "tab",
            Category::Seal => "seal",
            Category::Displace => "displace",
        }
    }

    pub fn parse(s: &str) -> Option<Category> {
        [Self::LATTICE.as_slice(), &[Category::Tab, Category::Seal, Category::Displace]]
            .concat()
            .into_iter()
            .find(|c| c.as_str() == s)
    }
}

/// Named per-vertex offsets blended into a base mesh with a scalar weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeKey {
    pub name: String,
    pub category: Category,
    pub offsets: Vec<Vec3>,
}

impl ShapeKey {
    /// Largest offset magnitude.
    pub fn max_offset(&self) -> f64 {
        self.offsets.iter().map(|o| o.norm()).fold(0.0, f64::max)
    }
}

/// `v'ᵢ = vᵢ + Σₖ wₖ·Δₖᵢ`, then normals are recomputed.
pub fn apply_shape_keys(mesh: &Mesh, keys: &[(&ShapeKey, f64)]) -> Result<Mesh> {
    let mut positions = mesh.vertices.clone();
    for (key, weight) in keys {
        if key.offsets.len() != positions.len() {
            return Err(Error::Shape(format!(
                "shape key `{}` has {} offsets for {} vertices",
                key.name,
                key.offsets.len(),
                positions.len()
            )));
        }
        if *weight == 0.0 {
            continue;
        }
        for (p, d) in positions.iter_mut().zip(&key.offsets) {
            *p += *weight * d;
        }
    }
    mesh.with_positions(positions)
}

/// Text format: `key <name> <category> <count>` followed by `count` rows of
/// `dx dy dz`.
pub fn save_shape_keys(keys: &[ShapeKey], path: &Path) -> Result<()> {
    let mut out = String::new();
    for k in keys {
        let _ = writeln!(out, "key {} {} {}", k.name, k.category.as_str(), k.offsets.len());
        for d in &k.offsets {
            let _ = writeln!(out, "{} {} {}", d.x, d.y, d.z);
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_shape_keys(path: &Path) -> Result<Vec<ShapeKey>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let err = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut keys = Vec::new();
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    while let Some((ln, header)) = lines.next() {
        let f: Vec<&str> = header.split_whitespace().collect();
        let [tag, name, cat, count] = f[..] else {
            return Err(err(ln + 1, "expected `key <name> <category> <count>`".into()));
        };
        if tag != "key" {
            return Err(err(ln + 1, format!("expected `key`, got `{tag}`")));
        }
        let category = Category::parse(cat).ok_or_else(|| err(ln + 1, format!("unknown category `{cat}`")))?;
        let count: usize = count.parse().map_err(|_| err(ln + 1, format!("bad count `{count}`")))?;
        let mut offsets = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, row) = lines.next().ok_or_else(|| err(ln + 1, "truncated key".into()))?;
            let v: Vec<f64> = row
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| err(ln + 1, "bad offset row".into()))?;
            let [x, y, z] = v[..] else {
                return Err(err(ln + 1, "offset row needs 3 numbers".into()));
            };
            offsets.push(Vec3::new(x, y, z));
        }
        keys.push(ShapeKey {
            name: name.to_string(),
            category,
            offsets,
        });
    }
    Ok(keys)
}
