use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::mask::BinaryMask;

pub const KEY_GREEN: [u8; 3] = [0, 255, 0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChromaKeying {
    /// Foreground is every pixel that differs from the key at all.
    Exact,
    /// Foreground is every pixel farther than the threshold (RGB Euclidean)
    /// from the key. For externally rendered, anti-aliased inputs.
    Threshold,
}

/// True exactly where the pixel differs from `key`.
pub fn chroma_mask(rgb: &RgbImage, key: [u8; 3]) -> BinaryMask {
    BinaryMask::from_fn(rgb.width(), rgb.height(), |x, y| rgb.get_pixel(x, y).0 != key)
}

pub fn chroma_mask_with(rgb: &RgbImage, key: [u8; 3], keying: ChromaKeying, threshold: f64) -> BinaryMask {
    match keying {
        ChromaKeying::Exact => chroma_mask(rgb, key),
        ChromaKeying::Threshold => BinaryMask::from_fn(rgb.width(), rgb.height(), |x, y| {
            let p = rgb.get_pixel(x, y).0;
            let d2: f64 = (0..3).map(|i| (p[i] as f64 - key[i] as f64).powi(2)).sum();
            d2.sqrt() > threshold
        }),
    }
}
