use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::shape_key::{Category, ShapeKey};
use crate::{Error, Label, Result};

/// Weight ranges of the sampling policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    pub lattice_weight: [f64; 2],
    pub displace_weight: [f64; 2],
    /// Inclusive range of how many lattice categories a deformed sample mixes.
    pub categories: [usize; 2],
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            lattice_weight: [0.3, 1.0],
            displace_weight: [0.2, 1.0],
            categories: [3, 5],
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [
            ("sampling.lattice_weight", self.lattice_weight),
            ("sampling.displace_weight", self.displace_weight),
        ] {
            if !(0.0 < lo && lo <= hi && hi <= 1.0) {
                return Err(Error::param(name, format!("need 0 < lo <= hi <= 1, got [{lo}, {hi}]")));
            }
        }
        let [lo, hi] = self.categories;
        if !(3 <= lo && lo <= hi && hi <= Category::LATTICE.len()) {
            return Err(Error::param("sampling.categories", format!("need 3 <= lo <= hi <= 5, got [{lo}, {hi}]")));
        }
        Ok(())
    }
}

/// Full deformation record of one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformationState {
    /// Lattice shape-key name to weight; absent keys have weight 0.
    pub lattice_weights: BTreeMap<String, f64>,
    pub displace_weights: [f64; 3],
    pub tab_open: f64,
    pub seal_open: f64,
    pub label: Label,
}

impl DeformationState {
    /// Distinct lattice categories with a positive-weight key.
    pub fn active_categories(&self, keys: &[ShapeKey]) -> BTreeSet<Category> {
        keys.iter()
            .filter(|k| k.category.is_lattice())
            .filter(|k| self.lattice_weights.get(&k.name).is_some_and(|&w| w > 0.0))
            .map(|k| k.category)
            .collect()
    }

    /// Checks the class rules and the tab/seal ordering.
    pub fn validate(&self, keys: &[ShapeKey]) -> Result<()> {
        let unit = |w: f64| (0.0..=1.0).contains(&w);
        if !self.lattice_weights.values().chain(&self.displace_weights).all(|&w| unit(w)) {
            return Err(Error::Data("weight outside [0, 1]".into()));
        }
        if !unit(self.tab_open) || !unit(self.seal_open) || self.tab_open > self.seal_open {
            return Err(Error::Data(format!(
                "tab_open {} must be <= seal_open {} (both in [0, 1])",
                self.tab_open, self.seal_open
            )));
        }
        match self.label {
            Label::NonDeformed => {
                if self.lattice_weights.values().chain(&self.displace_weights).any(|&w| w != 0.0) {
                    return Err(Error::Data("non_deformed sample carries deformation weights".into()));
                }
            }
            Label::Deformed => {
                let active = self.active_categories(keys).len();
                if active < 3 {
                    return Err(Error::Data(format!("deformed sample has {active} active categories, need >= 3")));
                }
                if !self.displace_weights.iter().any(|&w| w > 0.0) {
                    return Err(Error::Data("deformed sample has no displacement".into()));
                }
            }
        }
        Ok(())
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Draws a state for `label`. Deformed samples mix a uniformly drawn number
/// of lattice categories, each with one or more of its keys; all three
/// displacement weights are drawn. Tab and seal openings are drawn for both
/// classes and swapped so the tab is never more open than the seal.
pub fn sample_deformation<R: Rng + ?Sized>(
    rng: &mut R,
    keys: &[ShapeKey],
    label: Label,
    config: &SamplingConfig,
) -> Result<DeformationState> {
    config.validate()?;
    let mut by_category: BTreeMap<Category, Vec<&str>> = BTreeMap::new();
    for k in keys.iter().filter(|k| k.category.is_lattice()) {
        by_category.entry(k.category).or_default().push(&k.name);
    }
    let displace_count = keys.iter().filter(|k| k.category == Category::Displace).count();
    if by_category.len() < 3 {
        return Err(Error::Config(format!(
            "need keys in >= 3 lattice categories, have {}",
            by_category.len()
        )));
    }
    if displace_count != 3 {
        return Err(Error::Config(format!("need 3 displacement keys, have {displace_count}")));
    }

    let mut lattice_weights = BTreeMap::new();
    let mut displace_weights = [0.0; 3];
    if label == Label::Deformed {
        let available: Vec<_> = by_category.into_iter().collect();
        let [lo, hi] = config.categories;
        let count = rng.random_range(lo..=hi).min(available.len());
        let mut chosen: Vec<usize> = index::sample(rng, available.len(), count).into_vec();
        chosen.sort_unstable();
        for ci in chosen {
            let names = &available[ci].1;
            let take = rng.random_range(1..=names.len());
            let mut picked = index::sample(rng, names.len(), take).into_vec();
            picked.sort_unstable();
            for name in picked.into_iter().map(|i| names[i]) {
                lattice_weights.insert(name.to_string(), uniform(rng, config.lattice_weight));
            }
        }
        for w in &mut displace_weights {
            *w = uniform(rng, config.displace_weight);
        }
    }

    let mut tab_open = rng.random::<f64>();
    let mut seal_open = rng.random::<f64>();
    if tab_open > seal_open {
        std::mem::swap(&mut tab_open, &mut seal_open);
    }
    Ok(DeformationState {
        lattice_weights,
        displace_weights,
        tab_open,
        seal_open,
        label,
    })
}
