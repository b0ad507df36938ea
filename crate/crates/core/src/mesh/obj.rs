//! Wavefront OBJ subset (`v`, `vn`, `vt`, `f`) plus a `.groups` sidecar.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::Mesh;
use crate::{Error, Result, Vec3};

/// `dir/can.obj` -> `dir/can.groups`.
pub fn groups_sidecar_path(obj_path: &Path) -> PathBuf {
    obj_path.with_extension("groups")
}

/// Writes `mesh` as OBJ. Floats use shortest round-trip formatting so a
/// reload reproduces positions exactly. Groups go to the sidecar file.
pub fn save_obj(mesh: &Mesh, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(mesh.vertices.len() * 96);
    out.push_str("# deformsynth mesh\n");
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for t in &mesh.uvs {
        let _ = writeln!(out, "vt {} {}", t[0], t[1]);
    }
    for n in &mesh.normals {
        let _ = writeln!(out, "vn {} {} {}", n.x, n.y, n.z);
    }
    for f in &mesh.faces {
        let [a, b, c] = f.map(|i| i + 1);
        let _ = writeln!(out, "f {a}/{a}/{a} {b}/{b}/{b} {c}/{c}/{c}");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))?;

    if !mesh.groups.is_empty() {
        let mut side = String::from("# vertex groups: `group <name>` then `<index> <weight>` rows\n");
        for (name, weights) in &mesh.groups {
            let _ = writeln!(side, "group {name}");
            for (i, w) in weights.iter().enumerate().filter(|(_, w)| **w != 0.0) {
                let _ = writeln!(side, "{i} {w}");
            }
        }
        let sp = groups_sidecar_path(path);
        fs::write(&sp, side).map_err(|e| Error::io(&sp, e))?;
    }
    Ok(())
}

struct Cursor<'a> {
    path: &'a Path,
    line: usize,
}

impl Cursor<'_> {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            reason: reason.into(),
        }
    }

    fn floats<const N: usize>(&self, fields: &[&str]) -> Result<[f64; N]> {
        if fields.len() < N {
            return Err(self.err(format!("expected {N} numbers, got {}", fields.len())));
        }
        let mut out = [0.0; N];
        for (o, f) in out.iter_mut().zip(fields) {
            *o = f.parse().map_err(|_| self.err(format!("bad number `{f}`")))?;
        }
        Ok(out)
    }

    /// Resolves a 1-based (or negative, relative) OBJ index.
    fn index(&self, raw: &str, count: usize) -> Result<usize> {
        let i: i64 = raw.parse().map_err(|_| self.err(format!("bad index `{raw}`")))?;
        let resolved = match i {
            0 => return Err(self.err("index 0 is invalid in 1-based OBJ indexing")),
            i if i > 0 => i - 1,
            i => count as i64 + i,
        };
        if resolved < 0 || resolved as usize >= count {
            return Err(self.err(format!("index {i} out of range ({count} defined)")));
        }
        Ok(resolved as usize)
    }
}

/// Loads an OBJ file. Polygons with more than three corners are fan
/// triangulated. A `.groups` sidecar next to the file is read if present.
pub fn load_obj(path: &Path) -> Result<Mesh> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cur = Cursor { path, line: 0 };

    let mut positions = Vec::new();
    let mut tex = Vec::new();
    let mut norms = Vec::new();
    let mut corners: Vec<Vec<(usize, Option<usize>, Option<usize>)>> = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        cur.line = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut fields = line.split_whitespace();
        let Some(tag) = fields.next() else { continue };
        let rest: Vec<&str> = fields.collect();
        match tag {
            "v" => {
                let [x, y, z] = cur.floats::<3>(&rest)?;
                positions.push(Vec3::new(x, y, z));
            }
            "vt" => tex.push(cur.floats::<2>(&rest)?),
            "vn" => {
                let [x, y, z] = cur.floats::<3>(&rest)?;
                norms.push(Vec3::new(x, y, z));
            }
            "f" => {
                if rest.len() < 3 {
                    return Err(cur.err("face needs at least 3 corners"));
                }
                let mut poly = Vec::with_capacity(rest.len());
                for c in &rest {
                    let mut parts = c.split('/');
                    let v = cur.index(parts.next().unwrap_or(""), positions.len())?;
                    let t = match parts.next() {
                        Some("") | None => None,
                        Some(s) => Some(cur.index(s, tex.len())?),
                    };
                    let n = match parts.next() {
                        Some("") | None => None,
                        Some(s) => Some(cur.index(s, norms.len())?),
                    };
                    poly.push((v, t, n));
                }
                corners.push(poly);
            }
            _ => {}
        }
    }

    let count = positions.len();
    let mut uvs = vec![[0.0, 0.0]; count];
    let mut normals = vec![Vec3::zeros(); count];
    let mut have_normals = !norms.is_empty();
    let mut faces = Vec::new();
    for poly in &corners {
        for &(v, t, n) in poly {
            if let Some(t) = t {
                uvs[v] = tex[t];
            }
            match n {
                Some(n) => normals[v] = norms[n],
                None => have_normals = false,
            }
        }
        for k in 1..poly.len() - 1 {
            faces.push([poly[0].0 as u32, poly[k].0 as u32, poly[k + 1].0 as u32]);
        }
    }

    let mut mesh = Mesh {
        vertices: positions,
        faces,
        normals,
        uvs,
        groups: BTreeMap::new(),
    };
    if have_normals && mesh.normals.iter().all(|n| n.norm() > 0.0) {
        for n in &mut mesh.normals {
            n.normalize_mut();
        }
    } else {
        mesh.recompute_normals();
    }

    let sp = groups_sidecar_path(path);
    if sp.exists() {
        mesh.groups = load_groups(&sp, count)?;
    }
    mesh.validate()?;
    Ok(mesh)
}

fn load_groups(path: &Path, count: usize) -> Result<BTreeMap<String, Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cur = Cursor { path, line: 0 };
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (ln, raw) in text.lines().enumerate() {
        cur.line = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix("group ") {
            let name = name.trim().to_string();
            groups.entry(name.clone()).or_insert_with(|| vec![0.0; count]);
            current = Some(name);
            continue;
        }
        let Some(name) = &current else {
            return Err(cur.err("weight row before any `group` header"));
        };
        let mut fields = line.split_whitespace();
        let (Some(i), Some(w), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(cur.err("expected `<index> <weight>`"));
        };
        let i: usize = i.parse().map_err(|_| cur.err(format!("bad index `{i}`")))?;
        let w: f64 = w.parse().map_err(|_| cur.err(format!("bad weight `{w}`")))?;
        if i >= count {
            return Err(cur.err(format!("vertex {i} out of range ({count} vertices)")));
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(cur.err(format!("weight {w} outside [0, 1]")));
        }
        groups.get_mut(name).expect("inserted above")[i] = w;
    }
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_can, CanParams};

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn can_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let can = generate_can(&CanParams::default()).unwrap();
        let p = dir.path().join("can.obj");
        save_obj(&can, &p).unwrap();
        let back = load_obj(&p).unwrap();
        assert_eq!(back.vertices, can.vertices);
        assert_eq!(back.faces, can.faces);
        assert_eq!(back.uvs, can.uvs);
        assert_eq!(back.groups, can.groups);
    }

    #[test]
    fn zero_index_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "bad.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\n\nf 0 1 2\n");
        match load_obj(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_number_is_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "bad.obj", "v 0 zero 0\n");
        assert!(matches!(load_obj(&p), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn cube_quads_are_fan_triangulated() {
        let dir = tempfile::tempdir().unwrap();
        let cube = "\
v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 0 0 1\nv 1 0 1\nv 1 1 1\nv 0 1 1
f 1 4 3 2\nf 5 6 7 8\nf 1 2 6 5\nf 2 3 7 6\nf 3 4 8 7\nf 4 1 5 8
";
        let p = write(dir.path(), "cube.obj", cube);
        let m = load_obj(&p).unwrap();
        assert_eq!(m.faces.len(), 6 * 2);
        assert_eq!(m.vertex_count(), 8);
        m.validate().unwrap();
        // outward corner normal on the (1,1,1) vertex
        let n = m.normals[6];
        assert!(n.x > 0.0 && n.y > 0.0 && n.z > 0.0);
    }

    #[test]
    fn negative_indices_are_relative() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "rel.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n");
        assert_eq!(load_obj(&p).unwrap().faces, vec![[0, 1, 2]]);
    }

    #[test]
    fn sidecar_weight_out_of_range_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "t.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
        write(dir.path(), "t.groups", "group side\n0 1\n1 2.5\n");
        assert!(matches!(load_obj(&p), Err(Error::Parse { line: 3, .. })));
    }
}
