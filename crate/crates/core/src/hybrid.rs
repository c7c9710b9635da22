//! Hybrid real + synthetic manifests with per-class injection targets.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetManifest, ImageEntry, Provenance};
use crate::error::{Error, Result};
use crate::rng::PlanRng;
use crate::stats::ClassDistribution;

/// Prefix applied to synthetic ids in the hybrid output.
pub const SYNTHETIC_ID_PREFIX: &str = "synthetic/";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TargetStrategy {
    /// Every listed class gets the same count.
    FixedPerClass { classes: Vec<String>, count: usize },
    /// Tops every class up to the largest instance count.
    MatchMax,
    /// Explicit counts by class name; unlisted classes get 0.
    Manual(BTreeMap<String, usize>),
}

/// Number of synthetic images to inject per class, indexed by class id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceTargets {
    pub counts: Vec<usize>,
}

pub fn balance_targets(d: &ClassDistribution, strategy: &TargetStrategy) -> Result<BalanceTargets> {
    let n = d.class_names.len();
    let index_of = |name: &str| {
        d.class_names
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Argument(format!("unknown class `{name}` in targets")))
    };
    let counts = match strategy {
        TargetStrategy::FixedPerClass { classes, count } => {
            let mut counts = vec![0; n];
            for name in classes {
                counts[index_of(name)?] = *count;
            }
            counts
        }
        TargetStrategy::MatchMax => {
            let max = d.instance_counts.iter().copied().max().unwrap_or(0);
            d.instance_counts
                .iter()
                .map(|&c| max.saturating_sub(c) as usize)
                .collect()
        }
        TargetStrategy::Manual(table) => {
            let mut counts = vec![0; n];
            for (name, &count) in table {
                counts[index_of(name)?] = count;
            }
            counts
        }
    };
    Ok(BalanceTargets { counts })
}

/// Combines all real entries with a seeded selection of synthetic ones.
///
/// Classes are filled in class order. A selected image counts toward every
/// class it contains, so a class whose target is already met by earlier picks
/// draws nothing more. Remaining picks are a uniform sample without
/// replacement from the unselected synthetic images containing the class.
/// Synthetic entries keep their manifest order in the output and get
/// [`SYNTHETIC_ID_PREFIX`] prepended to their ids.
pub fn mix(
    real: &DatasetManifest,
    synth: &DatasetManifest,
    targets: &BalanceTargets,
    seed: u64,
) -> Result<DatasetManifest> {
    if real.class_names != synth.class_names {
        return Err(Error::Validation(
            "real and synthetic manifests declare different class names".into(),
        ));
    }
    if targets.counts.len() != real.n_classes() {
        return Err(Error::Argument(format!(
            "{} targets for {} classes",
            targets.counts.len(),
            real.n_classes()
        )));
    }
    if let Some(e) = synth.entries.iter().find(|e| e.provenance != Provenance::Synthetic) {
        return Err(Error::Entry {
            id: e.id.clone(),
            message: "synthetic manifest entry is not marked synthetic".into(),
        });
    }

    let mut rng = PlanRng::new(seed);
    let mut selected = vec![false; synth.entries.len()];
    for (class, &target) in targets.counts.iter().enumerate() {
        let already = synth
            .entries
            .iter()
            .zip(&selected)
            .filter(|(e, &s)| s && e.contains_class(class))
            .count();
        let need = target.saturating_sub(already);
        if need == 0 {
            continue;
        }
        let mut pool: Vec<usize> = synth
            .entries
            .iter()
            .enumerate()
            .filter(|(i, e)| !selected[*i] && e.contains_class(class))
            .map(|(i, _)| i)
            .collect();
        if pool.len() < need {
            return Err(Error::Shortfall {
                class: real.class_names[class].clone(),
                requested: need,
                available: pool.len(),
                deficit: need - pool.len(),
            });
        }
        // Partial Fisher-Yates: the first `need` slots become the sample.
        for i in 0..need {
            let j = i + rng.index(pool.len() - i);
            pool.swap(i, j);
        }
        for &i in &pool[..need] {
            selected[i] = true;
        }
    }

    let mut ids: HashSet<&str> = real.entries.iter().map(|e| e.id.as_str()).collect();
    let mut entries: Vec<ImageEntry> = real.entries.clone();
    for (e, _) in synth.entries.iter().zip(&selected).filter(|(_, &s)| s) {
        let mut e = e.clone();
        e.id = format!("{SYNTHETIC_ID_PREFIX}{}", e.id);
        entries.push(e);
    }
    for e in &entries[real.entries.len()..] {
        if !ids.insert(e.id.as_str()) {
            return Err(Error::DuplicateId(e.id.clone()));
        }
    }
    Ok(DatasetManifest {
        class_names: real.class_names.clone(),
        entries,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceCounts {
    pub real: u64,
    pub synthetic: u64,
}

impl ProvenanceCounts {
    fn bump(&mut self, p: Provenance, by: u64) {
        match p {
            Provenance::Real => self.real += by,
            Provenance::Synthetic => self.synthetic += by,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassProvenance {
    pub class: String,
    pub images: ProvenanceCounts,
    pub instances: ProvenanceCounts,
}

/// Image counts by provenance, overall and per class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceSummary {
    pub images: ProvenanceCounts,
    pub per_class: Vec<ClassProvenance>,
}

pub fn provenance_summary(m: &DatasetManifest) -> ProvenanceSummary {
    let mut images = ProvenanceCounts::default();
    let mut per_class: Vec<ClassProvenance> = m
        .class_names
        .iter()
        .map(|c| ClassProvenance {
            class: c.clone(),
            images: ProvenanceCounts::default(),
            instances: ProvenanceCounts::default(),
        })
        .collect();
    for e in &m.entries {
        images.bump(e.provenance, 1);
        let mut present = vec![false; m.n_classes()];
        for a in &e.annotations {
            per_class[a.class_id].instances.bump(e.provenance, 1);
            present[a.class_id] = true;
        }
        for (c, p) in present.into_iter().enumerate() {
            if p {
                per_class[c].images.bump(e.provenance, 1);
            }
        }
    }
    ProvenanceSummary { images, per_class }
}
