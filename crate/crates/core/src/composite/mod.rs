//! Green-screen keying, mask morphology and background transfer.

mod background;
mod chroma;
mod mask;

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

pub use background::{square_resample, BackgroundPool};
pub use chroma::{chroma_mask, chroma_mask_with, ChromaKeying, KEY_GREEN};
pub use mask::{close, dilate, dilate_padded, erode, erode_padded, open, BinaryMask};

use crate::{Error, Result};

/// Radii of the mask clean-up pipeline; 0 skips a step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompositeConfig {
    pub close_radius: u32,
    pub open_radius: u32,
    pub erode_radius: u32,
    pub keying: ChromaKeying,
    /// RGB distance for threshold keying.
    pub threshold: f64,
}

impl Default for CompositeConfig {
    fn default() -> Self {
        CompositeConfig {
            close_radius: 2,
            open_radius: 1,
            erode_radius: 1,
            keying: ChromaKeying::Exact,
            threshold: 60.0,
        }
    }
}

impl CompositeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.keying == ChromaKeying::Threshold && !(self.threshold > 0.0) {
            return Err(Error::param("composite.threshold", "must be > 0 for threshold keying"));
        }
        Ok(())
    }
}

/// `close(close_radius) -> open(open_radius) -> erode(erode_radius)`.
/// Closing fills pinholes, opening drops speckle, the final erosion pulls
/// the boundary inward so no key-colored fringe survives.
pub fn refine_mask(mask: &BinaryMask, config: &CompositeConfig) -> BinaryMask {
    let mut m = mask.clone();
    if config.close_radius > 0 {
        m = close(&m, config.close_radius);
    }
    if config.open_radius > 0 {
        m = open(&m, config.open_radius);
    }
    if config.erode_radius > 0 {
        m = erode(&m, config.erode_radius);
    }
    m
}

/// Foreground where `mask` is set, resampled background elsewhere. Any
/// output pixel equal to `key` is nudged by one level in red so the key
/// color never survives compositing.
pub fn composite(rgb: &RgbImage, mask: &BinaryMask, background: &RgbImage, key: [u8; 3]) -> Result<RgbImage> {
    if (rgb.width(), rgb.height()) != (mask.width(), mask.height()) {
        return Err(Error::Shape(format!(
            "frame {}x{} vs mask {}x{}",
            rgb.width(),
            rgb.height(),
            mask.width(),
            mask.height()
        )));
    }
    if rgb.width() != rgb.height() {
        return Err(Error::Shape("compositing expects square frames".into()));
    }
    let bg = square_resample(background, rgb.width())?;
    Ok(RgbImage::from_fn(rgb.width(), rgb.height(), |x, y| {
        let mut p = if mask.get(x, y) { *rgb.get_pixel(x, y) } else { *bg.get_pixel(x, y) };
        if p.0 == key {
            p = Rgb([key[0] ^ 1, key[1], key[2]]);
        }
        p
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checkerboard(w: u32, h: u32) -> RgbImage {
        RgbImage::from_fn(w, h, |x, y| if (x / 8 + y / 8) % 2 == 0 { Rgb([0, 255, 0]) } else { Rgb([200, 10, 10]) })
    }

    #[test]
    fn all_true_mask_keeps_foreground() {
        let fg = RgbImage::from_fn(16, 16, |x, y| Rgb([x as u8, y as u8, 7]));
        let out = composite(&fg, &BinaryMask::filled(16, 16, true), &checkerboard(40, 30), KEY_GREEN).unwrap();
        assert_eq!(out, fg);
    }

    #[test]
    fn all_false_mask_is_resized_background() {
        let fg = RgbImage::from_pixel(16, 16, Rgb([1, 2, 3]));
        let bg = RgbImage::from_fn(32, 24, |x, _| Rgb([(x * 7) as u8, 100, 50]));
        let out = composite(&fg, &BinaryMask::new(16, 16), &bg, KEY_GREEN).unwrap();
        assert_eq!(out, square_resample(&bg, 16).unwrap());
    }

    #[test]
    fn key_green_background_pixels_are_nudged() {
        let fg = RgbImage::from_pixel(32, 32, Rgb([0, 255, 0]));
        let out = composite(&fg, &BinaryMask::new(32, 32), &checkerboard(64, 64), KEY_GREEN).unwrap();
        assert!(out.pixels().all(|p| p.0 != KEY_GREEN));
    }

    #[test]
    fn refine_drops_pepper_noise_and_keeps_empty_empty() {
        let cfg = CompositeConfig::default();
        assert_eq!(refine_mask(&BinaryMask::new(20, 20), &cfg).count(), 0);
        let mut m = BinaryMask::from_fn(40, 40, |x, y| (10..30).contains(&x) && (10..30).contains(&y));
        m.set(2, 2, true);
        m.set(37, 5, true);
        let r = refine_mask(&m, &cfg);
        assert!(!r.get(2, 2) && !r.get(37, 5));
        assert!(r.get(20, 20));
    }
}
