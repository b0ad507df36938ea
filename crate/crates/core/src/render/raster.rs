//! Perspective-correct, z-buffered triangle rasterization with Lambert
//! shading. No anti-aliasing: every pixel is either fully object or exactly
//! the background color.

use std::sync::OnceLock;

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use super::camera::CameraPose;
use super::light::LightSpec;
use super::texture::LabelTexture;
use crate::composite::BinaryMask;
use crate::mesh::Mesh;
use crate::Vec3;

/// View-depth of the near clipping plane, meters.
pub const NEAR_PLANE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Background {
    KeyGreen,
    Black,
}

impl Background {
    pub fn color(self) -> [u8; 3] {
        match self {
            Background::KeyGreen => [0, 255, 0],
            Background::Black => [0, 0, 0],
        }
    }
}

pub struct RenderedSample {
    pub rgb: RgbImage,
    /// True exactly where the depth buffer was written.
    pub coverage: BinaryMask,
    pub pose: CameraPose,
    pub light: LightSpec,
}

impl RenderedSample {
    pub fn coverage_fraction(&self) -> f64 {
        self.coverage.count() as f64 / (self.coverage.width() * self.coverage.height()) as f64
    }
}

/// Material setup: the label texture is blended in by the per-vertex weight
/// of `texture_group`; elsewhere the surface uses `metal_albedo`.
#[derive(Debug, Clone)]
pub struct Renderer {
    pub texture: LabelTexture,
    pub metal_albedo: [f64; 3],
    pub texture_group: String,
}

impl Default for Renderer {
    fn default() -> Self {
        Renderer {
            texture: LabelTexture::procedural(),
            metal_albedo: [0.78, 0.78, 0.8],
            texture_group: "side".into(),
        }
    }
}

#[derive(Clone, Copy)]
struct ClipVertex {
    cam: Vec3,
    normal: Vec3,
    uv: [f64; 2],
    label: f64,
}

impl ClipVertex {
    fn depth(&self) -> f64 {
        -self.cam.z
    }

    fn lerp(&self, o: &ClipVertex, t: f64) -> ClipVertex {
        ClipVertex {
            cam: self.cam + (o.cam - self.cam) * t,
            normal: self.normal + (o.normal - self.normal) * t,
            uv: [self.uv[0] + (o.uv[0] - self.uv[0]) * t, self.uv[1] + (o.uv[1] - self.uv[1]) * t],
            label: self.label + (o.label - self.label) * t,
        }
    }
}

/// Sutherland–Hodgman against `depth >= NEAR_PLANE`.
fn clip_near(poly: &[ClipVertex]) -> Vec<ClipVertex> {
    let mut out = Vec::with_capacity(4);
    for i in 0..poly.len() {
        let a = &poly[i];
        let b = &poly[(i + 1) % poly.len()];
        let (da, db) = (a.depth() - NEAR_PLANE, b.depth() - NEAR_PLANE);
        if da >= 0.0 {
            out.push(*a);
        }
        if (da >= 0.0) != (db >= 0.0) {
            out.push(a.lerp(b, da / (da - db)));
        }
    }
    out
}

struct Target<'a> {
    size: usize,
    rgb: &'a mut RgbImage,
    inv_depth: Vec<f64>,
    coverage: BinaryMask,
    background: [u8; 3],
}

impl Renderer {
    /// Shared default renderer (procedural label).
    pub fn shared() -> &'static Renderer {
        static DEFAULT: OnceLock<Renderer> = OnceLock::new();
        DEFAULT.get_or_init(Renderer::default)
    }

    pub fn render(&self, mesh: &Mesh, pose: &CameraPose, light: &LightSpec, background: Background) -> RenderedSample {
        let size = pose.image_size as usize;
        let bg = background.color();
        let mut rgb = RgbImage::from_pixel(pose.image_size, pose.image_size, Rgb(bg));
        let mut target = Target {
            size,
            rgb: &mut rgb,
            inv_depth: vec![0.0; size * size],
            coverage: BinaryMask::new(pose.image_size, pose.image_size),
            background: bg,
        };

        let frame = pose.frame();
        let label = mesh.groups.get(&self.texture_group);
        let verts: Vec<ClipVertex> = (0..mesh.vertex_count())
            .map(|i| ClipVertex {
                cam: frame.to_camera(&mesh.vertices[i]),
                normal: mesh.normals[i],
                uv: mesh.uvs[i],
                label: label.map_or(0.0, |g| g[i]),
            })
            .collect();
        let focal = pose.focal();

        for face in &mesh.faces {
            let [a, b, c] = face.map(|i| verts[i as usize]);
            let p0 = mesh.vertices[face[0] as usize];
            let face_n = (mesh.vertices[face[1] as usize] - p0).cross(&(mesh.vertices[face[2] as usize] - p0));
            let front = face_n.dot(&(frame.eye - p0)) >= 0.0;
            let tri = [a, b, c];
            if tri.iter().all(|v| v.depth() >= NEAR_PLANE) {
                self.draw(&mut target, &tri, front, focal, light);
                continue;
            }
            let poly = clip_near(&tri);
            for k in 1..poly.len().saturating_sub(1) {
                self.draw(&mut target, &[poly[0], poly[k], poly[k + 1]], front, focal, light);
            }
        }

        let coverage = target.coverage;
        RenderedSample {
            rgb,
            coverage,
            pose: *pose,
            light: *light,
        }
    }

    fn draw(&self, t: &mut Target<'_>, tri: &[ClipVertex; 3], front: bool, focal: f64, light: &LightSpec) {
        let half = 0.5 * t.size as f64;
        let scr: [(f64, f64, f64); 3] = tri.map(|v| {
            let w = v.depth();
            ((focal * v.cam.x / w + 1.0) * half, (1.0 - focal * v.cam.y / w) * half, 1.0 / w)
        });
        let edge = |a: (f64, f64, f64), b: (f64, f64, f64), px: f64, py: f64| {
            (b.0 - a.0) * (py - a.1) - (b.1 - a.1) * (px - a.0)
        };
        let area = edge(scr[0], scr[1], scr[2].0, scr[2].1);
        if area.abs() < 1e-12 || !area.is_finite() {
            return;
        }
        let max_px = (t.size - 1) as f64;
        let x0 = scr.iter().map(|s| s.0).fold(f64::INFINITY, f64::min).floor().max(0.0);
        let x1 = scr.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max).ceil().min(max_px);
        let y0 = scr.iter().map(|s| s.1).fold(f64::INFINITY, f64::min).floor().max(0.0);
        let y1 = scr.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max).ceil().min(max_px);
        if x0 > x1 || y0 > y1 {
            return;
        }

        for py in y0 as usize..=y1 as usize {
            let cy = py as f64 + 0.5;
            for px in x0 as usize..=x1 as usize {
                let cx = px as f64 + 0.5;
                let b0 = edge(scr[1], scr[2], cx, cy) / area;
                let b1 = edge(scr[2], scr[0], cx, cy) / area;
                let b2 = edge(scr[0], scr[1], cx, cy) / area;
                if b0 < 0.0 || b1 < 0.0 || b2 < 0.0 {
                    continue;
                }
                let inv = b0 * scr[0].2 + b1 * scr[1].2 + b2 * scr[2].2;
                let idx = py * t.size + px;
                if inv <= t.inv_depth[idx] {
                    continue;
                }
                t.inv_depth[idx] = inv;
                t.coverage.set(px as u32, py as u32, true);

                // perspective-correct barycentrics
                let (w0, w1, w2) = (b0 * scr[0].2 / inv, b1 * scr[1].2 / inv, b2 * scr[2].2 / inv);
                let mut n = tri[0].normal * w0 + tri[1].normal * w1 + tri[2].normal * w2;
                if !front {
                    n = -n;
                }
                let n = n.try_normalize(0.0).unwrap_or_else(Vec3::z);
                let label = (tri[0].label * w0 + tri[1].label * w1 + tri[2].label * w2).clamp(0.0, 1.0);
                let albedo = if label > 0.0 {
                    let uv = [
                        tri[0].uv[0] * w0 + tri[1].uv[0] * w1 + tri[2].uv[0] * w2,
                        tri[0].uv[1] * w0 + tri[1].uv[1] * w1 + tri[2].uv[1] * w2,
                    ];
                    let tex = self.texture.sample(uv);
                    std::array::from_fn(|i| self.metal_albedo[i] + label * (tex[i] - self.metal_albedo[i]))
                } else {
                    self.metal_albedo
                };
                let intensity = light.intensity(&n);
                let mut color = albedo.map(|a| (a * intensity * 255.0).round().clamp(0.0, 255.0) as u8);
                if color == t.background {
                    color[0] ^= 1;
                }
                t.rgb.put_pixel(px as u32, py as u32, Rgb(color));
            }
        }
    }
}

/// Renders with the shared default renderer.
pub fn rasterize(mesh: &Mesh, pose: &CameraPose, light: &LightSpec, background: Background) -> RenderedSample {
    Renderer::shared().render(mesh, pose, light, background)
}
