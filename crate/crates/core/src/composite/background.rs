use std::fs;
use std::path::{Path, PathBuf};

use image::imageops::{self, FilterType};
use image::RgbImage;

use crate::{Error, Result};

/// Center-crops to a square, then bilinearly resamples to `size`².
pub fn square_resample(img: &RgbImage, size: u32) -> Result<RgbImage> {
    let (w, h) = img.dimensions();
    if w == 0 || h == 0 || size == 0 {
        return Err(Error::Shape(format!("cannot resample {w}x{h} to {size}")));
    }
    let side = w.min(h);
    let cropped = imageops::crop_imm(img, (w - side) / 2, (h - side) / 2, side, side).to_image();
    if side == size {
        return Ok(cropped);
    }
    Ok(imageops::resize(&cropped, size, size, FilterType::Triangle))
}

fn is_image(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
}

/// SplitMix64 finalizer over `(seed, index)`.
fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sorted index of every PNG/JPEG under a directory tree.
#[derive(Debug, Clone)]
pub struct BackgroundPool {
    root: PathBuf,
    entries: Vec<PathBuf>,
}

impl BackgroundPool {
    pub fn open(root: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(dir) = stack.pop() {
            for e in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
                let path = e.map_err(|e| Error::io(&dir, e))?.path();
                if path.is_dir() {
                    stack.push(path);
                } else if is_image(&path) {
                    entries.push(path);
                }
            }
        }
        entries.sort();
        if entries.is_empty() {
            return Err(Error::Data(format!("background pool {} has no PNG/JPEG images", root.display())));
        }
        Ok(BackgroundPool {
            root: root.to_path_buf(),
            entries,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn path(&self, idx: usize) -> &Path {
        &self.entries[idx]
    }

    /// Path relative to the pool root, used as the manifest background id.
    pub fn id(&self, idx: usize) -> String {
        let p = &self.entries[idx];
        p.strip_prefix(&self.root).unwrap_or(p).to_string_lossy().replace('\\', "/")
    }

    /// `hash(seed, sample) mod len`.
    pub fn index_for(&self, seed: u64, sample: u64) -> usize {
        (mix(seed, sample) % self.entries.len() as u64) as usize
    }

    pub fn load(&self, idx: usize) -> Result<RgbImage> {
        let p = &self.entries[idx];
        image::open(p)
            .map(|img| img.to_rgb8())
            .map_err(|e| Error::Image {
                path: p.clone(),
                reason: e.to_string(),
            })
    }

    /// Loads the entry for `(seed, sample)`, moving on to the next entry
    /// when one fails to decode.
    pub fn pick(&self, seed: u64, sample: u64) -> Result<(usize, RgbImage)> {
        let start = self.index_for(seed, sample);
        let mut last = None;
        for k in 0..self.entries.len() {
            let idx = (start + k) % self.entries.len();
            match self.load(idx) {
                Ok(img) => return Ok((idx, img)),
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("pool is non-empty"))
    }
}
