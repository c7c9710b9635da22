//! Per-class instance and image counts, and the long-tail report built on them.

use std::fmt::Write as _;

use serde::Serialize;

use crate::dataset::DatasetManifest;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassDistribution {
    pub class_names: Vec<String>,
    /// Total annotations per class.
    pub instance_counts: Vec<u64>,
    /// Images containing at least one instance, per class.
    pub image_counts: Vec<u64>,
    pub total_images: u64,
    pub total_instances: u64,
}

impl ClassDistribution {
    /// Image frequency `image_count(c) / total_images`; 0 for an empty manifest.
    pub fn image_frequency(&self, class_id: usize) -> f64 {
        if self.total_images == 0 {
            0.0
        } else {
            self.image_counts[class_id] as f64 / self.total_images as f64
        }
    }
}

pub fn class_distribution(m: &DatasetManifest) -> ClassDistribution {
    let n = m.n_classes();
    let mut instance_counts = vec![0u64; n];
    let mut image_counts = vec![0u64; n];
    let mut seen = vec![false; n];
    for e in &m.entries {
        seen.iter_mut().for_each(|s| *s = false);
        for a in &e.annotations {
            instance_counts[a.class_id] += 1;
            if !seen[a.class_id] {
                seen[a.class_id] = true;
                image_counts[a.class_id] += 1;
            }
        }
    }
    ClassDistribution {
        class_names: m.class_names.clone(),
        total_instances: instance_counts.iter().sum(),
        instance_counts,
        image_counts,
        total_images: m.entries.len() as u64,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassRow {
    pub class_id: usize,
    pub name: String,
    pub instance_count: u64,
    pub image_count: u64,
    pub image_frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImbalanceReport {
    pub total_images: u64,
    pub total_instances: u64,
    /// max instance count / min non-zero instance count
    pub imbalance_ratio: f64,
    /// Sorted by instance count, largest first; ties keep class order.
    pub classes: Vec<ClassRow>,
}

pub fn imbalance_report(d: &ClassDistribution) -> Result<ImbalanceReport> {
    let max = d.instance_counts.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return Err(Error::EmptyDataset("no class has any instances".into()));
    }
    let min_nonzero = d
        .instance_counts
        .iter()
        .copied()
        .filter(|&c| c > 0)
        .min()
        .unwrap_or(max);

    let mut classes: Vec<ClassRow> = (0..d.class_names.len())
        .map(|c| ClassRow {
            class_id: c,
            name: d.class_names[c].clone(),
            instance_count: d.instance_counts[c],
            image_count: d.image_counts[c],
            image_frequency: d.image_frequency(c),
        })
        .collect();
    classes.sort_by_key(|c| std::cmp::Reverse(c.instance_count));

    Ok(ImbalanceReport {
        total_images: d.total_images,
        total_instances: d.total_instances,
        imbalance_ratio: max as f64 / min_nonzero as f64,
        classes,
    })
}

impl ImbalanceReport {
    /// Aligned plain-text table, one row per class.
    pub fn to_table(&self) -> String {
        let name_w = self
            .classes
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(5)
            .max(5);
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<name_w$}  {:>10}  {:>8}  {:>9}",
            "class", "instances", "images", "img_freq"
        );
        for c in &self.classes {
            let _ = writeln!(
                s,
                "{:<name_w$}  {:>10}  {:>8}  {:>9.4}",
                c.name, c.instance_count, c.image_count, c.image_frequency
            );
        }
        let _ = writeln!(
            s,
            "images: {}  instances: {}  imbalance ratio: {:.2}",
            self.total_images, self.total_instances, self.imbalance_ratio
        );
        s
    }
}
