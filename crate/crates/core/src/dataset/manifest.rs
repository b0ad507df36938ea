use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::deform::DeformationState;
use crate::render::{CameraPose, LightSpec};
use crate::{Error, Label, Result};

pub const MANIFEST_VERSION: u32 = 1;
/// Background id recorded for samples composited over solid black.
pub const KEY_BLACK: &str = "key_black";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Everything needed to regenerate one sample's pixels under a given config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub index: u64,
    pub label: Label,
    pub deformation: DeformationState,
    pub pose: CameraPose,
    pub light: LightSpec,
    pub background_id: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub version: u32,
    /// `synthetic` or `real`.
    pub source: String,
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    /// `black` or `pool` for synthetic data.
    pub background: Option<String>,
    pub views_per_scene: Option<u32>,
    /// Set on manifests written by `split` (`train` / `test`).
    pub subset: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: u64,
    pub label: Label,
    /// Relative to the manifest's directory.
    pub image: String,
    pub image_sha256: String,
    pub mask: Option<String>,
    pub mask_sha256: Option<String>,
    pub sample: Option<SampleSpec>,
    /// Original file for ingested photos, relative to the ingest root.
    pub origin: Option<String>,
}

/// Line-delimited JSON: one header line, then one line per entry.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub header: ManifestHeader,
    pub entries: Vec<ManifestEntry>,
    /// Directory that entry paths are relative to.
    pub root: PathBuf,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.entries.iter().filter(|e| e.label == label).count()
    }

    pub fn image_path(&self, entry: &ManifestEntry) -> PathBuf {
        self.root.join(&entry.image)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("entry serializes"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_jsonl().as_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |line: usize, e: serde_json::Error| Error::Parse {
            path: path.to_path_buf(),
            line,
            reason: e.to_string(),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, htext) = lines.next().ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            reason: "missing header line".into(),
        })?;
        let header: ManifestHeader = serde_json::from_str(htext).map_err(|e| parse_err(hline + 1, e))?;
        if header.version != MANIFEST_VERSION {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: hline + 1,
                reason: format!("unsupported manifest version {}", header.version),
            });
        }
        let entries = lines
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| parse_err(i + 1, e)))
            .collect::<Result<Vec<ManifestEntry>>>()?;
        let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(DatasetManifest { header, entries, root })
    }

    /// Entries whose files are missing or whose digest differs from the
    /// recorded one, as `(relative path, reason)`.
    pub fn verify(&self) -> Vec<(String, String)> {
        let mut bad = Vec::new();
        for e in &self.entries {
            let files = std::iter::once((&e.image, Some(&e.image_sha256)))
                .chain(e.mask.as_ref().map(|m| (m, e.mask_sha256.as_ref())));
            for (rel, digest) in files {
                match fs::read(self.root.join(rel)) {
                    Err(err) => bad.push((rel.clone(), err.to_string())),
                    Ok(bytes) => {
                        let actual = sha256_hex(&bytes);
                        if digest != Some(&actual) {
                            bad.push((rel.clone(), format!("digest mismatch (found {actual})")));
                        }
                    }
                }
            }
        }
        bad
    }

    /// Relative path → digest for every file the manifest lists.
    pub fn digests(&self) -> Vec<(String, String)> {
        let mut out = Vec::with_capacity(self.entries.len() * 2);
        for e in &self.entries {
            out.push((e.image.clone(), e.image_sha256.clone()));
            if let (Some(m), Some(d)) = (&e.mask, &e.mask_sha256) {
                out.push((m.clone(), d.clone()));
            }
        }
        out
    }
}
