use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::features::FEATURE_SPEC;
use crate::{Error, Result};

/// Principal axes of a point cloud.
#[derive(Debug, Clone)]
pub struct Pca {
    pub mean: DVector<f64>,
    /// `k × d`, one unit component per row, variance-descending.
    pub components: DMatrix<f64>,
    /// Covariance eigenvalue of each component.
    pub variances: Vec<f64>,
}

/// Sample covariance (`n − 1` denominator) of the rows of `data`.
pub fn covariance(data: &DMatrix<f64>) -> DMatrix<f64> {
    let n = data.nrows();
    let mean = data.row_mean();
    let mut centered = data.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let denom = (n.max(2) - 1) as f64;
    centered.transpose() * centered / denom
}

/// Sum of per-feature sample variances (trace of the covariance).
pub fn total_variance(data: &DMatrix<f64>) -> f64 {
    let n = data.nrows();
    if n < 2 {
        return 0.0;
    }
    data.column_iter()
        .map(|c| {
            let m = c.mean();
            c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
        })
        .sum()
}

pub fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let d = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::Shape(format!("feature rows of length {d} and {}", bad.len())));
    }
    Ok(DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
}

/// Eigendecomposition of the covariance; each component is signed so its
/// largest-magnitude entry is positive.
pub fn pca_fit(data: &DMatrix<f64>, k: usize) -> Result<Pca> {
    let (n, d) = data.shape();
    if n < 2 {
        return Err(Error::Data(format!("PCA needs at least 2 samples, got {n}")));
    }
    if k == 0 || k > n.min(d) {
        return Err(Error::param("k", format!("must be in 1..={}, got {k}", n.min(d))));
    }
    let eig = SymmetricEigen::new(covariance(data));
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut components = DMatrix::zeros(k, d);
    for (r, &c) in order.iter().take(k).enumerate() {
        let v = eig.eigenvectors.column(c);
        let pivot = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for j in 0..d {
            components[(r, j)] = sign * v[j];
        }
    }
    Ok(Pca {
        mean: data.row_mean().transpose(),
        components,
        variances: order.iter().take(k).map(|&c| eig.eigenvalues[c]).collect(),
    })
}

impl Pca {
    /// `(x − mean) · componentsᵀ` for each row.
    pub fn project(&self, data: &DMatrix<f64>) -> DMatrix<f64> {
        let mut centered = data.clone();
        let mean = self.mean.transpose();
        for mut row in centered.row_iter_mut() {
            row -= &mean;
        }
        centered * self.components.transpose()
    }
}

/// Per-sample projected coordinates tagged by dataset.
#[derive(Debug, Clone)]
pub struct Scatter {
    pub tags: Vec<String>,
    /// `n × k`.
    pub coords: DMatrix<f64>,
    pub variances: Vec<f64>,
}

#[derive(Serialize)]
struct ScatterMeta<'a> {
    feature_space: &'a str,
    components: usize,
    samples: usize,
    variances: &'a [f64],
    datasets: Vec<(&'a str, usize)>,
}

/// Fits one PCA on the union of all sets and projects every sample.
/// Requested components beyond the data rank come out as zero columns,
/// so a single sample sits at the origin.
pub fn pca_scatter(sets: &[(String, Vec<Vec<f64>>)], k: usize) -> Result<Scatter> {
    if let Some((tag, _)) = sets.iter().find(|(_, rows)| rows.is_empty()) {
        return Err(Error::Data(format!("dataset `{tag}` is empty")));
    }
    if sets.is_empty() {
        return Err(Error::Data("no datasets given".into()));
    }
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    let all: Vec<Vec<f64>> = sets.iter().flat_map(|(_, r)| r.iter().cloned()).collect();
    let data = rows_to_matrix(&all)?;
    let (n, d) = data.shape();
    let k_eff = k.min(n).min(d);
    let mut coords = DMatrix::zeros(n, k);
    let mut variances = vec![0.0; k];
    if n >= 2 {
        let pca = pca_fit(&data, k_eff)?;
        coords.columns_mut(0, k_eff).copy_from(&pca.project(&data));
        variances[..k_eff].copy_from_slice(&pca.variances);
    }
    let tags = sets.iter().flat_map(|(t, r)| std::iter::repeat_n(t.clone(), r.len())).collect();
    Ok(Scatter { tags, coords, variances })
}

impl Scatter {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset");
        for c in 0..self.coords.ncols() {
            let _ = write!(out, ",pc{}", c + 1);
        }
        out.push('\n');
        for (i, tag) in self.tags.iter().enumerate() {
            out.push_str(tag);
            for c in 0..self.coords.ncols() {
                let _ = write!(out, ",{}", self.coords[(i, c)]);
            }
            out.push('\n');
        }
        out
    }

    /// Writes the CSV and a `<name>.meta.json` sidecar naming the feature
    /// space and component variances.
    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))?;
        let mut datasets: Vec<(&str, usize)> = Vec::new();
        for t in &self.tags {
            match datasets.last_mut() {
                Some((last, n)) if *last == t.as_str() => *n += 1,
                _ => datasets.push((t, 1)),
            }
        }
        let meta = ScatterMeta {
            feature_space: FEATURE_SPEC,
            components: self.coords.ncols(),
            samples: self.tags.len(),
            variances: &self.variances,
            datasets,
        };
        let meta_path = path.with_extension("meta.json");
        let text = serde_json::to_string_pretty(&meta).expect("meta serializes");
        fs::write(&meta_path, text).map_err(|e| Error::io(&meta_path, e))
    }
}
