//! Seeded epoch plans for the three sampling regimes: a plain shuffle,
//! repeat factor sampling (RFS) and class-aware sampling (CAS).
//!
//! A plan is a pure function of `(manifest, parameters, seed)`; all
//! randomness comes from [`PlanRng`] in a fixed draw order.

use serde::{Deserialize, Serialize};

use crate::dataset::DatasetManifest;
use crate::error::{Error, Result};
use crate::rng::PlanRng;
use crate::stats::class_distribution;

/// Default RFS frequency threshold.
pub const DEFAULT_RFS_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Baseline,
    Rfs,
    Cas,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Strategy::Baseline),
            "rfs" => Ok(Strategy::Rfs),
            "cas" => Ok(Strategy::Cas),
            other => Err(Error::Argument(format!(
                "unknown strategy `{other}` (expected baseline, rfs or cas)"
            ))),
        }
    }
}

/// An ordered, batched sequence of image ids for one epoch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochPlan {
    pub strategy: Strategy,
    pub seed: u64,
    pub batch_size: usize,
    pub batches: Vec<Vec<String>>,
}

impl EpochPlan {
    fn from_slots(strategy: Strategy, seed: u64, batch_size: usize, slots: Vec<String>) -> Self {
        let batches = slots.chunks(batch_size).map(|c| c.to_vec()).collect();
        Self {
            strategy,
            seed,
            batch_size,
            batches,
        }
    }

    pub fn epoch_length(&self) -> usize {
        self.batches.iter().map(Vec::len).sum()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.batches.iter().flatten().map(String::as_str)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn check_batch(batch_size: usize) -> Result<()> {
    if batch_size == 0 {
        return Err(Error::Argument("batch_size must be at least 1".into()));
    }
    Ok(())
}

/// Seeded uniform permutation of all entries.
pub fn baseline_plan(m: &DatasetManifest, batch_size: usize, seed: u64) -> Result<EpochPlan> {
    check_batch(batch_size)?;
    if m.entries.is_empty() {
        return Err(Error::EmptyDataset("manifest has no entries".into()));
    }
    let mut ids: Vec<String> = m.entries.iter().map(|e| e.id.clone()).collect();
    PlanRng::new(seed).shuffle(&mut ids);
    Ok(EpochPlan::from_slots(Strategy::Baseline, seed, batch_size, ids))
}

/// `max(1, sqrt(t / f_c))`.
pub fn repeat_factor(f_c: f64, t: f64) -> Result<f64> {
    if !(f_c > 0.0) {
        return Err(Error::Argument(format!(
            "repeat factor undefined for class frequency {f_c}"
        )));
    }
    if !(f_c <= 1.0) || !(t > 0.0 && t <= 1.0) {
        return Err(Error::Argument(format!(
            "frequency {f_c} and threshold {t} must lie in (0, 1]"
        )));
    }
    Ok((t / f_c).sqrt().max(1.0))
}

/// How fractional image repeat factors become whole repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    /// `floor(r)` plus one more copy with probability `frac(r)`.
    #[default]
    Stochastic,
    Ceil,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepeatFactorTable {
    /// `None` for classes that never occur.
    pub class_factors: Vec<Option<f64>>,
    /// Per manifest entry, in manifest order.
    pub image_factors: Vec<f64>,
}

pub fn repeat_factor_table(m: &DatasetManifest, t: f64) -> Result<RepeatFactorTable> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Argument(format!("threshold {t} must lie in (0, 1]")));
    }
    let dist = class_distribution(m);
    let class_factors = (0..m.n_classes())
        .map(|c| {
            if dist.image_counts[c] == 0 {
                Ok(None)
            } else {
                repeat_factor(dist.image_frequency(c), t).map(Some)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let image_factors = m
        .entries
        .iter()
        .map(|e| {
            e.annotations
                .iter()
                .filter_map(|a| class_factors[a.class_id])
                .fold(1.0f64, f64::max)
        })
        .collect();
    Ok(RepeatFactorTable {
        class_factors,
        image_factors,
    })
}

/// Repeat factor sampling.
///
/// Entries are visited in manifest order; an image with factor `r` gets
/// `floor(r)` copies and, when `r` has a fractional part, one draw of
/// `next_f64` decides the extra copy. Images with integral factors consume
/// no randomness, so with every factor at 1 the plan equals
/// [`baseline_plan`] for the same seed. The replicated list is then shuffled
/// and chunked.
pub fn rfs_plan(
    m: &DatasetManifest,
    t: f64,
    batch_size: usize,
    seed: u64,
    rounding: Rounding,
) -> Result<EpochPlan> {
    check_batch(batch_size)?;
    if m.entries.is_empty() {
        return Err(Error::EmptyDataset("manifest has no entries".into()));
    }
    let table = repeat_factor_table(m, t)?;
    let mut rng = PlanRng::new(seed);
    let mut slots = Vec::new();
    for (e, &r) in m.entries.iter().zip(&table.image_factors) {
        let whole = r.floor();
        let frac = r - whole;
        let mut copies = whole as usize;
        if frac > 0.0 {
            match rounding {
                Rounding::Ceil => copies += 1,
                Rounding::Stochastic => {
                    if rng.next_f64() < frac {
                        copies += 1;
                    }
                }
            }
        }
        slots.extend(std::iter::repeat_n(e.id.clone(), copies));
    }
    rng.shuffle(&mut slots);
    Ok(EpochPlan::from_slots(Strategy::Rfs, seed, batch_size, slots))
}

/// Class-aware sampling.
///
/// Each slot draws a class with `below(n_classes)` and then an image from
/// that class's list (manifest order, with replacement) with
/// `below(list_len)`. Slots are batched in draw order.
pub fn cas_plan(
    m: &DatasetManifest,
    batch_size: usize,
    epoch_length: usize,
    seed: u64,
) -> Result<EpochPlan> {
    check_batch(batch_size)?;
    if epoch_length == 0 {
        return Err(Error::Argument("epoch_length must be at least 1".into()));
    }
    let per_class = class_image_lists(m);
    if let Some(c) = per_class.iter().position(Vec::is_empty) {
        return Err(Error::Config(format!(
            "class `{}` has no images; class-aware sampling cannot represent it",
            m.class_names[c]
        )));
    }
    let mut rng = PlanRng::new(seed);
    let slots = (0..epoch_length)
        .map(|_| {
            let class = &per_class[rng.index(per_class.len())];
            m.entries[class[rng.index(class.len())]].id.clone()
        })
        .collect();
    Ok(EpochPlan::from_slots(Strategy::Cas, seed, batch_size, slots))
}

/// Indices of the entries containing each class, in manifest order.
pub fn class_image_lists(m: &DatasetManifest) -> Vec<Vec<usize>> {
    let mut lists = vec![Vec::new(); m.n_classes()];
    for (i, e) in m.entries.iter().enumerate() {
        let mut present = vec![false; m.n_classes()];
        for a in &e.annotations {
            present[a.class_id] = true;
        }
        for (c, p) in present.into_iter().enumerate() {
            if p {
                lists[c].push(i);
            }
        }
    }
    lists
}

/// Class-aware plan that also reports which class each slot drew.
/// Used to measure per-class selection share.
pub fn cas_class_draws(m: &DatasetManifest, epoch_length: usize, seed: u64) -> Result<Vec<usize>> {
    let per_class = class_image_lists(m);
    if let Some(c) = per_class.iter().position(Vec::is_empty) {
        return Err(Error::Config(format!(
            "class `{}` has no images; class-aware sampling cannot represent it",
            m.class_names[c]
        )));
    }
    let mut rng = PlanRng::new(seed);
    Ok((0..epoch_length)
        .map(|_| {
            let c = rng.index(per_class.len());
            let _ = rng.index(per_class[c].len());
            c
        })
        .collect())
}
