//! Binary masks and square-element morphology.

use std::fs;
use std::path::Path;

use crate::{Error, Result};

/// Row-major boolean mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self::filled(width, height, false)
    }

    pub fn filled(width: u32, height: u32, value: bool) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![value; (width * height) as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity((width * height) as usize);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        BinaryMask { width, height, bits }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.bits[(y * self.width + x) as usize] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Intersection over union; two empty masks count as identical (1.0).
    pub fn iou(&self, other: &BinaryMask) -> f64 {
        let (mut inter, mut union) = (0usize, 0usize);
        for (&a, &b) in self.bits.iter().zip(&other.bits) {
            inter += (a && b) as usize;
            union += (a || b) as usize;
        }
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }

    /// Encodes as a 1-bit grayscale PNG (set = white).
    pub fn encode_png(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        let mut enc = png::Encoder::new(&mut buf, self.width, self.height);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::One);
        let stride = self.width.div_ceil(8) as usize;
        let mut packed = vec![0u8; stride * self.height as usize];
        for y in 0..self.height as usize {
            for x in 0..self.width as usize {
                if self.bits[y * self.width as usize + x] {
                    packed[y * stride + x / 8] |= 0x80 >> (x % 8);
                }
            }
        }
        let mut w = enc.write_header().expect("in-memory PNG header");
        w.write_image_data(&packed).expect("in-memory PNG data");
        w.finish().expect("in-memory PNG finish");
        buf
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        fs::write(path, self.encode_png()).map_err(|e| Error::io(path, e))
    }

    /// Reads any grayscale/RGB image; nonzero luma counts as set.
    pub fn load_png(path: &Path) -> Result<Self> {
        let img = image::open(path)
            .map_err(|e| Error::Image {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?
            .to_luma8();
        Ok(BinaryMask::from_fn(img.width(), img.height(), |x, y| img.get_pixel(x, y)[0] > 0))
    }
}

/// Running-window pass along one axis. A window position is set for
/// erosion when every cell (with out-of-frame cells taking `pad`) is set,
/// and for dilation when any is.
fn window_pass(src: &[bool], len: usize, lines: usize, stride: usize, step: usize, r: usize, pad: bool, erode: bool) -> Vec<bool> {
    let mut out = vec![false; src.len()];
    let mut prefix = vec![0usize; len + 1];
    let window = 2 * r + 1;
    for line in 0..lines {
        let base = line * stride;
        for i in 0..len {
            prefix[i + 1] = prefix[i] + src[base + i * step] as usize;
        }
        for i in 0..len {
            let lo = i.saturating_sub(r);
            let hi = (i + r).min(len - 1);
            let inside = hi - lo + 1;
            let set = prefix[hi + 1] - prefix[lo] + if pad { window - inside } else { 0 };
            out[base + i * step] = if erode { set == window } else { set > 0 };
        }
    }
    out
}

fn morph(mask: &BinaryMask, radius: u32, pad: bool, erode: bool) -> BinaryMask {
    if radius == 0 || mask.bits.is_empty() {
        return mask.clone();
    }
    let (w, h, r) = (mask.width as usize, mask.height as usize, radius as usize);
    let rows = window_pass(&mask.bits, w, h, w, 1, r, pad, erode);
    let bits = window_pass(&rows, h, w, 1, w, r, pad, erode);
    BinaryMask {
        width: mask.width,
        height: mask.height,
        bits,
    }
}

/// Erosion by a `(2r+1)²` square; pixels outside the frame read as `pad`.
pub fn erode_padded(mask: &BinaryMask, radius: u32, pad: bool) -> BinaryMask {
    morph(mask, radius, pad, true)
}

pub fn dilate_padded(mask: &BinaryMask, radius: u32, pad: bool) -> BinaryMask {
    morph(mask, radius, pad, false)
}

/// Erosion with false padding.
pub fn erode(mask: &BinaryMask, radius: u32) -> BinaryMask {
    erode_padded(mask, radius, false)
}

/// Dilation with false padding.
pub fn dilate(mask: &BinaryMask, radius: u32) -> BinaryMask {
    dilate_padded(mask, radius, false)
}

/// `dilate ∘ erode`: removes features narrower than the element.
pub fn open(mask: &BinaryMask, radius: u32) -> BinaryMask {
    dilate(&erode(mask, radius), radius)
}

/// `erode ∘ dilate`: fills holes narrower than the element.
pub fn close(mask: &BinaryMask, radius: u32) -> BinaryMask {
    erode(&dilate(mask, radius), radius)
}
