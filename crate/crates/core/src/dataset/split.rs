use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;

use super::manifest::DatasetManifest;
use super::{stream_rng, StreamPurpose};
use crate::{Error, Label, Result};

/// Positions into a manifest's entry list.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub fraction: f64,
    pub stratified: bool,
}

/// Stratified shuffle split: each class contributes
/// `round(fraction · count)` samples to train, clamped so both sides get
/// at least one.
pub fn split(manifest: &DatasetManifest, fraction: f64, seed: u64) -> Result<Split> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::param("fraction", format!("must lie strictly between 0 and 1, got {fraction}")));
    }
    let mut rng = stream_rng(seed, 0, StreamPurpose::Split);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for label in [Label::Deformed, Label::NonDeformed] {
        let mut idx: Vec<usize> = (0..manifest.entries.len()).filter(|&i| manifest.entries[i].label == label).collect();
        if idx.len() < 2 {
            return Err(Error::Data(format!("class `{label}` has {} sample(s); a split needs at least 2", idx.len())));
        }
        idx.shuffle(&mut rng);
        let k = ((fraction * idx.len() as f64).round() as usize).clamp(1, idx.len() - 1);
        train.extend_from_slice(&idx[..k]);
        test.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split {
        train,
        test,
        fraction,
        stratified: true,
    })
}

impl DatasetManifest {
    pub fn subset(&self, positions: &[usize], name: &str) -> DatasetManifest {
        let mut header = self.header.clone();
        header.subset = Some(name.to_string());
        DatasetManifest {
            header,
            entries: positions.iter().map(|&i| self.entries[i].clone()).collect(),
            root: self.root.clone(),
        }
    }
}

/// Writes `<stem>.train.jsonl` and `<stem>.test.jsonl` next to the source
/// manifest so relative image paths keep resolving.
pub fn write_split(manifest: &DatasetManifest, manifest_path: &Path, split: &Split) -> Result<(PathBuf, PathBuf)> {
    let stem = manifest_path.file_stem().and_then(|s| s.to_str()).unwrap_or("manifest");
    let dir = manifest_path.parent().unwrap_or(Path::new(""));
    let train_path = dir.join(format!("{stem}.train.jsonl"));
    let test_path = dir.join(format!("{stem}.test.jsonl"));
    manifest.subset(&split.train, "train").save(&train_path)?;
    manifest.subset(&split.test, "test").save(&test_path)?;
    Ok((train_path, test_path))
}

#[cfg(test)]
mod tests {
    use super::super::manifest::{ManifestEntry, ManifestHeader, MANIFEST_VERSION};
    use super::*;

    pub(crate) fn toy(labels: &[Label]) -> DatasetManifest {
        DatasetManifest {
            header: ManifestHeader {
                version: MANIFEST_VERSION,
                source: "real".into(),
                config_hash: None,
                seed: None,
                background: None,
                views_per_scene: None,
                subset: None,
            },
            entries: labels
                .iter()
                .enumerate()
                .map(|(i, &label)| ManifestEntry {
                    index: i as u64,
                    label,
                    image: format!("{i}.png"),
                    image_sha256: String::new(),
                    mask: None,
                    mask_sha256: None,
                    sample: None,
                    origin: None,
                })
                .collect(),
            root: PathBuf::new(),
        }
    }

    fn balanced(n: usize) -> DatasetManifest {
        let labels: Vec<_> = (0..n).map(|i| if i % 2 == 0 { Label::Deformed } else { Label::NonDeformed }).collect();
        toy(&labels)
    }

    fn per_class(m: &DatasetManifest, idx: &[usize]) -> (usize, usize) {
        let d = idx.iter().filter(|&&i| m.entries[i].label == Label::Deformed).count();
        (d, idx.len() - d)
    }

    #[test]
    fn hundred_at_eighty_percent() {
        let m = balanced(100);
        let s = split(&m, 0.8, 1).unwrap();
        assert_eq!(per_class(&m, &s.train), (40, 40));
        assert_eq!(per_class(&m, &s.test), (10, 10));
    }

    #[test]
    fn half_of_four() {
        let m = balanced(4);
        let s = split(&m, 0.5, 9).unwrap();
        assert_eq!(per_class(&m, &s.train), (1, 1));
        assert_eq!(per_class(&m, &s.test), (1, 1));
    }

    #[test]
    fn disjoint_covering_and_seeded() {
        let m = balanced(50);
        let a = split(&m, 0.7, 3).unwrap();
        assert_eq!(a, split(&m, 0.7, 3).unwrap());
        assert_ne!(a.train, split(&m, 0.7, 4).unwrap().train);
        let mut all: Vec<_> = a.train.iter().chain(&a.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn singleton_class_is_an_error() {
        let m = toy(&[Label::Deformed, Label::Deformed, Label::NonDeformed]);
        assert!(matches!(split(&m, 0.5, 0), Err(Error::Data(_))));
        assert!(split(&balanced(4), 1.0, 0).unwrap_err().is_usage());
    }
}
