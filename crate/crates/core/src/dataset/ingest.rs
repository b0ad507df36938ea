use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::generate::encode_rgb_png;
use super::manifest::{sha256_hex, DatasetManifest, ManifestEntry, ManifestHeader, MANIFEST_VERSION};
use crate::composite::square_resample;
use crate::{Error, Label, Result};

fn class_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in rd {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let p = entry.path();
        let hidden = p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with('.'));
        if p.is_file() && !hidden {
            files.push(p);
        }
    }
    if files.is_empty() {
        return Err(Error::Data(format!("class directory {} is empty", dir.display())));
    }
    files.sort();
    Ok(files)
}

/// Builds a manifest from `src/deformed/` and `src/non_deformed/` photos.
/// Every image is center-cropped to a square and resampled to `size`²,
/// then written under `out_dir` in the generated-dataset layout.
pub fn ingest_real(src: &Path, out_dir: &Path, size: u32) -> Result<DatasetManifest> {
    let mut inputs = Vec::new();
    for label in [Label::Deformed, Label::NonDeformed] {
        for f in class_files(&src.join(label.as_str()))? {
            inputs.push((label, f));
        }
    }
    for label in [Label::Deformed, Label::NonDeformed] {
        let d = out_dir.join(label.as_str());
        fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    let entries = inputs
        .par_iter()
        .enumerate()
        .map(|(i, (label, path))| {
            let img = image::open(path)
                .map_err(|e| Error::Image {
                    path: path.clone(),
                    reason: e.to_string(),
                })?
                .to_rgb8();
            let png = encode_rgb_png(&square_resample(&img, size)?);
            let rel = format!("{}/{i:06}.png", label.as_str());
            let dest = out_dir.join(&rel);
            fs::write(&dest, &png).map_err(|e| Error::io(&dest, e))?;
            let origin = path.strip_prefix(src).unwrap_or(path).to_string_lossy().replace('\\', "/");
            Ok(ManifestEntry {
                index: i as u64,
                label: *label,
                image: rel,
                image_sha256: sha256_hex(&png),
                mask: None,
                mask_sha256: None,
                sample: None,
                origin: Some(origin),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = DatasetManifest {
        header: ManifestHeader {
            version: MANIFEST_VERSION,
            source: "real".into(),
            config_hash: None,
            seed: None,
            background: None,
            views_per_scene: None,
            subset: None,
        },
        entries,
        root: out_dir.to_path_buf(),
    };
    manifest.save(&out_dir.join("manifest.jsonl"))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use image::{Rgb, RgbImage};

    use super::*;

    fn write(path: &Path, img: &RgbImage) {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        img.save(path).unwrap();
    }

    #[test]
    fn labels_come_from_directories() {
        let src = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        for i in 0..3 {
            write(&src.path().join(format!("deformed/d{i}.png")), &RgbImage::new(20, 20));
        }
        write(&src.path().join("non_deformed/n.jpg"), &RgbImage::new(30, 20));
        let m = ingest_real(src.path(), out.path(), 16).unwrap();
        assert_eq!((m.count(Label::Deformed), m.count(Label::NonDeformed)), (3, 1));
        assert!(m.verify().is_empty());
        assert!(m.entries.iter().all(|e| e.sample.is_none() && e.mask.is_none()));
        assert_eq!(m.entries[3].origin.as_deref(), Some("non_deformed/n.jpg"));
        let img = image::open(out.path().join(&m.entries[3].image)).unwrap();
        assert_eq!((img.width(), img.height()), (16, 16));
    }

    #[test]
    fn four_by_three_is_center_cropped() {
        let src = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        // 40x30: outer 5-column bands red, center blue.
        let img = RgbImage::from_fn(40, 30, |x, _| if (5..35).contains(&x) { Rgb([0, 0, 255]) } else { Rgb([255, 0, 0]) });
        write(&src.path().join("deformed/a.png"), &img);
        write(&src.path().join("non_deformed/b.png"), &img);
        let m = ingest_real(src.path(), out.path(), 30).unwrap();
        let got = image::open(out.path().join(&m.entries[0].image)).unwrap().to_rgb8();
        assert!(got.pixels().all(|p| p.0 == [0, 0, 255]));
    }

    #[test]
    fn empty_class_and_bad_file_are_errors() {
        let src = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        write(&src.path().join("deformed/a.png"), &RgbImage::new(4, 4));
        fs::create_dir_all(src.path().join("non_deformed")).unwrap();
        let err = ingest_real(src.path(), out.path(), 8).unwrap_err().to_string();
        assert!(err.contains("non_deformed") && err.contains("empty"), "{err}");

        fs::write(src.path().join("non_deformed/broken.png"), b"not a png").unwrap();
        let err = ingest_real(src.path(), out.path(), 8).unwrap_err().to_string();
        assert!(err.contains("broken.png"), "{err}");
    }
}
