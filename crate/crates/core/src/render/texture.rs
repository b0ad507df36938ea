use std::path::Path;

use image::{Rgb, RgbImage};

use crate::{Error, Result};

/// Label image wrapped around the lateral wall. `u` wraps, `v` clamps.
#[derive(Debug, Clone)]
pub struct LabelTexture {
    image: RgbImage,
}

impl LabelTexture {
    pub fn from_image(image: RgbImage) -> Result<Self> {
        if image.width() == 0 || image.height() == 0 {
            return Err(Error::param("label_texture", "image is empty"));
        }
        Ok(LabelTexture { image })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|e| Error::Image {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::from_image(img.to_rgb8())
    }

    pub fn uniform(color: [u8; 3]) -> Self {
        LabelTexture {
            image: RgbImage::from_pixel(4, 4, Rgb(color)),
        }
    }

    /// Built-in soda label: red field, a white wave band, a blue badge and
    /// dark text-like bars.
    pub fn procedural() -> Self {
        let (w, h) = (512u32, 256u32);
        let image = RgbImage::from_fn(w, h, |x, y| {
            let u = x as f64 / w as f64;
            let v = y as f64 / h as f64;
            let wave = 0.5 + 0.12 * (u * std::f64::consts::TAU * 2.0).sin();
            if (v - wave).abs() < 0.06 {
                return Rgb([245, 245, 240]);
            }
            let badge = ((u - 0.25).powi(2) * 16.0 + (v - 0.3).powi(2) * 25.0) < 0.35;
            if badge {
                return Rgb([30, 60, 170]);
            }
            let bars = (0.72..0.86).contains(&v) && ((u * 40.0) as u32 % 3 != 0) && (0.55..0.95).contains(&u);
            if bars {
                return Rgb([40, 20, 20]);
            }
            Rgb([196, 24, 36])
        });
        LabelTexture { image }
    }

    /// Bilinear sample, returned as linear [0, 1] RGB.
    pub fn sample(&self, uv: [f64; 2]) -> [f64; 3] {
        let (w, h) = (self.image.width() as i64, self.image.height() as i64);
        let x = uv[0].rem_euclid(1.0) * w as f64 - 0.5;
        let y = (1.0 - uv[1].clamp(0.0, 1.0)) * h as f64 - 0.5;
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        let px = |xi: i64, yi: i64| {
            let p = self.image.get_pixel(xi.rem_euclid(w) as u32, yi.clamp(0, h - 1) as u32);
            [p[0] as f64, p[1] as f64, p[2] as f64]
        };
        let (x0, y0) = (x0 as i64, y0 as i64);
        let (a, b, c, d) = (px(x0, y0), px(x0 + 1, y0), px(x0, y0 + 1), px(x0 + 1, y0 + 1));
        let mut out = [0.0; 3];
        for i in 0..3 {
            let top = a[i] + fx * (b[i] - a[i]);
            let bottom = c[i] + fx * (d[i] - c[i]);
            out[i] = (top + fy * (bottom - top)) / 255.0;
        }
        out
    }
}
