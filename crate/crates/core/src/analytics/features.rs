use image::RgbImage;
use rayon::prelude::*;

use crate::dataset::DatasetManifest;
use crate::{Error, Label, Result};

pub const FEATURE_SIDE: u32 = 32;
pub const FEATURE_DIM: usize = (FEATURE_SIDE * FEATURE_SIDE) as usize;
/// Recorded in models and PCA metadata.
pub const FEATURE_SPEC: &str = "grayscale BT.601 luma, 32x32 area average, scaled to [0,1]";

/// Luma averaged over a 32×32 grid of equal cells, row-major.
pub fn features(img: &RgbImage) -> Vec<f64> {
    let (w, h) = img.dimensions();
    let side = FEATURE_SIDE;
    let bounds = |c: u32, len: u32| {
        let lo = (c * len / side).min(len.saturating_sub(1));
        (lo, ((c + 1) * len / side).max(lo + 1))
    };
    let mut out = Vec::with_capacity(FEATURE_DIM);
    for cy in 0..side {
        let (y0, y1) = bounds(cy, h);
        for cx in 0..side {
            let (x0, x1) = bounds(cx, w);
            let mut sum = 0.0;
            for y in y0..y1 {
                for x in x0..x1 {
                    let [r, g, b] = img.get_pixel(x, y).0;
                    sum += 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
                }
            }
            out.push(sum / ((x1 - x0) * (y1 - y0)) as f64 / 255.0);
        }
    }
    out
}

/// Features and labels of every entry, in manifest order.
pub fn manifest_features(manifest: &DatasetManifest) -> Result<(Vec<Vec<f64>>, Vec<Label>)> {
    let feats = manifest
        .entries
        .par_iter()
        .map(|e| {
            let path = manifest.image_path(e);
            let img = image::open(&path).map_err(|err| Error::Image {
                path: path.clone(),
                reason: err.to_string(),
            })?;
            Ok(features(&img.to_rgb8()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((feats, manifest.entries.iter().map(|e| e.label).collect()))
}

#[cfg(test)]
mod tests {
    use image::Rgb;

    use super::*;

    #[test]
    fn constant_images_map_to_constant_features() {
        let white = features(&RgbImage::from_pixel(512, 512, Rgb([255, 255, 255])));
        assert_eq!(white.len(), FEATURE_DIM);
        assert!(white.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!(features(&RgbImage::new(64, 64)).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cells_average_their_block() {
        // Left half white in a 64-wide image: cells 0..16 white, rest black.
        let img = RgbImage::from_fn(64, 64, |x, _| if x < 32 { Rgb([255; 3]) } else { Rgb([0; 3]) });
        let f = features(&img);
        assert!((f[15] - 1.0).abs() < 1e-12 && f[16] == 0.0);
        // Pure green weights by its luma coefficient.
        let g = features(&RgbImage::from_pixel(32, 32, Rgb([0, 255, 0])));
        assert!((g[0] - 0.587).abs() < 1e-12);
    }
}
