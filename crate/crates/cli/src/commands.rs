use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use log::info;
use serde::{Deserialize, Serialize};

use longtail_core::augment::{
    mixup_labels, mosaic_labels, sample_mixup_lambda, MixupPlan, MosaicPlan,
    DEFAULT_MIXUP_ALPHA, DEFAULT_MOSAIC_MIN_AREA,
};
use longtail_core::dataset::{format_label_file, load_manifest_file, validate_manifest, ImageEntry};
use longtail_core::eval_det::{default_thresholds, map_range, parse_detections_jsonl};
use longtail_core::eval_gen::{
    clip_score, fid, gaussian_stats, inception_score, ClipScale, ProbMatrix,
};
use longtail_core::geometry::{remap_crop, resize_invariance_check, PixelRect, DEFAULT_MIN_VISIBLE};
use longtail_core::hybrid::{balance_targets, mix, provenance_summary, TargetStrategy};
use longtail_core::matrix_io::read_matrix;
use longtail_core::rng::PlanRng;
use longtail_core::sampling::{
    baseline_plan, cas_plan, rfs_plan, Rounding, Strategy, DEFAULT_RFS_THRESHOLD,
};
use longtail_core::stats::{class_distribution, imbalance_report};
use longtail_core::{DatasetManifest, Error};

use crate::args::*;
use crate::output::{dir_of, emit, relative_path, to_json, write_atomic};

pub const DEFAULT_BATCH: usize = 64;

/// Missing or inconsistent flags; reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn required<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| UsageError(format!("missing required flag --{flag}")).into())
}

fn load(path: &Path) -> Result<DatasetManifest> {
    Ok(load_manifest_file(path)?)
}

pub fn analyze(a: AnalyzeArgs) -> Result<()> {
    let manifest = load(&required(a.manifest, "manifest")?)?;
    let distribution = class_distribution(&manifest);
    let report = imbalance_report(&distribution)?;
    let validation = validate_manifest(&manifest);

    #[derive(Serialize)]
    struct Out<'a> {
        distribution: &'a longtail_core::stats::ClassDistribution,
        report: &'a longtail_core::stats::ImbalanceReport,
        validation: &'a longtail_core::dataset::ValidationReport,
    }
    let json = to_json(&Out {
        distribution: &distribution,
        report: &report,
        validation: &validation,
    })?;
    emit(a.out.as_deref(), &json)?;
    let table = report.to_table();
    if let Some(p) = &a.table_out {
        write_atomic(p, table.as_bytes())?;
    }
    if a.out.is_some() {
        print!("{table}");
    }
    Ok(())
}

pub fn plan(a: PlanArgs) -> Result<()> {
    let strategy: Strategy = required(a.strategy, "strategy")?.parse()?;
    let manifest = load(&required(a.manifest, "manifest")?)?;
    let seed = required(a.seed, "seed")?;
    let batch = a.batch.unwrap_or(DEFAULT_BATCH);
    let plan = match strategy {
        Strategy::Baseline => baseline_plan(&manifest, batch, seed)?,
        Strategy::Rfs => {
            let rounding = match a.rounding.as_deref() {
                None | Some("stochastic") => Rounding::Stochastic,
                Some("ceil") => Rounding::Ceil,
                Some(other) => {
                    return Err(UsageError(format!("unknown rounding `{other}`")).into())
                }
            };
            let t = a.rfs_threshold.unwrap_or(DEFAULT_RFS_THRESHOLD);
            rfs_plan(&manifest, t, batch, seed, rounding)?
        }
        Strategy::Cas => {
            let len = a.epoch_length.unwrap_or(manifest.entries.len());
            cas_plan(&manifest, batch, len, seed)?
        }
    };
    info!(
        "{:?} plan: {} slots in {} batches",
        plan.strategy,
        plan.epoch_length(),
        plan.batches.len()
    );
    emit(a.out.as_deref(), &to_json(&plan)?)
}

/// Points each entry's label file at the same file, relative to `out_dir`.
fn rebase_labels(m: &mut DatasetManifest, from_dir: &Path, out_dir: &Path) -> Result<()> {
    for e in &mut m.entries {
        let rel = relative_path(&from_dir.join(&e.label_file), out_dir)?;
        e.label_file = rel.to_string_lossy().replace('\\', "/");
    }
    Ok(())
}

pub fn mix_cmd(a: MixArgs) -> Result<()> {
    let real_path = required(a.real, "real")?;
    let synth_path = required(a.synth, "synth")?;
    let out = required(a.out, "out")?;
    let seed = required(a.seed, "seed")?;
    let mut real = load(&real_path)?;
    let mut synth = load(&synth_path)?;

    let strategy = match required(a.targets, "targets")?.as_str() {
        "fixed" => TargetStrategy::FixedPerClass {
            classes: if a.classes.is_empty() {
                return Err(UsageError("--targets fixed needs --classes".into()).into());
            } else {
                a.classes
            },
            count: required(a.per_class, "per-class")?,
        },
        "match-max" => TargetStrategy::MatchMax,
        "manual" => {
            let p = required(a.manual, "manual")?;
            let text = std::fs::read_to_string(&p)
                .with_context(|| format!("reading {}", p.display()))?;
            let table: BTreeMap<String, usize> = serde_json::from_str(&text)?;
            TargetStrategy::Manual(table)
        }
        other => return Err(UsageError(format!("unknown targets `{other}`")).into()),
    };
    let targets = balance_targets(&class_distribution(&real), &strategy)?;

    let out_dir = dir_of(&out);
    std::fs::create_dir_all(&out_dir)?;
    rebase_labels(&mut real, &dir_of(&real_path), &out_dir)?;
    rebase_labels(&mut synth, &dir_of(&synth_path), &out_dir)?;

    let hybrid = mix(&real, &synth, &targets, seed)?;
    let summary = provenance_summary(&hybrid);
    info!(
        "hybrid: {} real + {} synthetic",
        summary.images.real, summary.images.synthetic
    );
    let mut manifest_json = hybrid.to_json()?;
    manifest_json.push('\n');
    write_atomic(&out, manifest_json.as_bytes())?;
    let summary_json = to_json(&summary)?;
    match &a.summary {
        Some(p) => write_atomic(p, summary_json.as_bytes())?,
        None => print!("{summary_json}"),
    }
    Ok(())
}

fn label_file_name(index: usize, id: &str) -> String {
    let safe: String = id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect();
    format!("{index:05}_{safe}.txt")
}

pub fn remap(a: RemapArgs) -> Result<()> {
    let manifest_path = required(a.manifest, "manifest")?;
    let out = required(a.out, "out")?;
    let manifest = load(&manifest_path)?;
    let min_visible = a.min_visible.unwrap_or(DEFAULT_MIN_VISIBLE);
    let crops: BTreeMap<String, PixelRect> = match &a.crops {
        Some(p) => serde_json::from_str(
            &std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        )?,
        None => BTreeMap::new(),
    };
    if let Some(unknown) = crops.keys().find(|k| manifest.entry(k).is_none()) {
        return Err(Error::Validation(format!("crop given for unknown entry `{unknown}`")).into());
    }

    let out_dir = dir_of(&out);
    let labels_dir = out_dir.join("labels");
    let mut entries = Vec::with_capacity(manifest.entries.len());
    let mut dropped = 0usize;
    for (i, e) in manifest.entries.iter().enumerate() {
        let (w, h) = (e.width_px as f64, e.height_px as f64);
        let crop = crops
            .get(&e.id)
            .copied()
            .unwrap_or(PixelRect { x0: 0.0, y0: 0.0, w, h });
        let mut annotations = Vec::with_capacity(e.annotations.len());
        for ann in &e.annotations {
            match remap_crop(&ann.bbox, w, h, &crop, min_visible).map_err(|err| Error::Entry {
                id: e.id.clone(),
                message: err.to_string(),
            })? {
                Some(b) => annotations.push(longtail_core::Annotation {
                    class_id: ann.class_id,
                    bbox: resize_invariance_check(b),
                }),
                None => dropped += 1,
            }
        }
        let (width_px, height_px) = match a.resize {
            Some(s) => (s, s),
            None => (crop.w.round().max(1.0) as u32, crop.h.round().max(1.0) as u32),
        };
        let name = label_file_name(i, &e.id);
        write_atomic(&labels_dir.join(&name), format_label_file(&annotations).as_bytes())?;
        entries.push(ImageEntry {
            id: e.id.clone(),
            width_px,
            height_px,
            provenance: e.provenance,
            label_file: format!("labels/{name}"),
            annotations,
        });
    }
    info!("remap: dropped {dropped} boxes below min_visible {min_visible}");
    let out_manifest = DatasetManifest {
        class_names: manifest.class_names.clone(),
        entries,
    };
    let mut json = out_manifest.to_json()?;
    json.push('\n');
    write_atomic(&out, json.as_bytes())
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
enum AugmentOutput {
    Mosaic { seed: u64, plans: Vec<MosaicPlan> },
    Mixup { seed: u64, plans: Vec<MixupPlan> },
}

fn pick_sources<'a>(
    m: &'a DatasetManifest,
    ids: &[String],
    k: usize,
    rng: &mut PlanRng,
) -> Result<Vec<&'a ImageEntry>> {
    if ids.is_empty() {
        if m.entries.is_empty() {
            return Err(Error::EmptyDataset("manifest has no entries".into()).into());
        }
        return Ok((0..k).map(|_| &m.entries[rng.index(m.entries.len())]).collect());
    }
    if ids.len() != k {
        return Err(UsageError(format!("--ids needs exactly {k} ids, got {}", ids.len())).into());
    }
    ids.iter()
        .map(|id| {
            m.entry(id)
                .ok_or_else(|| Error::Validation(format!("unknown entry `{id}`")).into())
        })
        .collect()
}

pub fn augment(a: AugmentArgs) -> Result<()> {
    let manifest = load(&required(a.manifest, "manifest")?)?;
    let seed = required(a.seed, "seed")?;
    let count = a.count.unwrap_or(1);
    let mut rng = PlanRng::new(seed);
    let output = match required(a.mode, "mode")?.as_str() {
        "mosaic" => {
            let center = match a.center.as_slice() {
                [] => None,
                [x, y] => Some((*x, *y)),
                _ => return Err(UsageError("--center takes fx,fy".into()).into()),
            };
            let size = a.output_size.unwrap_or(320);
            let min_area = a.min_area.unwrap_or(DEFAULT_MOSAIC_MIN_AREA);
            let mut plans = Vec::with_capacity(count);
            for _ in 0..count {
                let src = pick_sources(&manifest, &a.ids, 4, &mut rng)?;
                let plan_seed = rng.next_u64();
                plans.push(mosaic_labels(
                    [src[0], src[1], src[2], src[3]],
                    size,
                    center,
                    min_area,
                    plan_seed,
                )?);
            }
            AugmentOutput::Mosaic { seed, plans }
        }
        "mixup" => {
            let alpha = a.alpha.unwrap_or(DEFAULT_MIXUP_ALPHA);
            let mut plans = Vec::with_capacity(count);
            for _ in 0..count {
                let src = pick_sources(&manifest, &a.ids, 2, &mut rng)?;
                let lambda = match a.lambda {
                    Some(l) => l,
                    None => sample_mixup_lambda(alpha, &mut rng)?,
                };
                plans.push(mixup_labels(src[0], src[1], lambda)?);
            }
            AugmentOutput::Mixup { seed, plans }
        }
        other => return Err(UsageError(format!("unknown mode `{other}`")).into()),
    };
    emit(a.out.as_deref(), &to_json(&output)?)
}

pub fn eval_det(a: EvalDetArgs) -> Result<()> {
    let gt = load(&required(a.gt, "gt")?)?;
    let dets_path = required(a.dets, "dets")?;
    let text = std::fs::read_to_string(&dets_path)
        .with_context(|| format!("reading {}", dets_path.display()))?;
    let dets = parse_detections_jsonl(&text)?;
    let thresholds = if a.thresholds.is_empty() {
        default_thresholds()
    } else {
        a.thresholds
    };
    let report = map_range(&dets, &gt, &thresholds)?;
    let table = report.to_table(a.percent);
    emit(a.out.as_deref(), &to_json(&report)?)?;
    if let Some(p) = &a.table_out {
        write_atomic(p, table.as_bytes())?;
    }
    if a.out.is_some() {
        print!("{table}");
    }
    Ok(())
}

#[derive(Debug, Default, Serialize)]
struct GenReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    fid: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fid_clamped: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    is_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    is_std: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    clip_score: Option<f64>,
}

pub fn eval_gen(a: EvalGenArgs) -> Result<()> {
    let mut report = GenReport::default();
    match (&a.real_features, &a.gen_features) {
        (Some(r), Some(g)) => {
            let result = fid(
                &gaussian_stats(&read_matrix(r)?)?,
                &gaussian_stats(&read_matrix(g)?)?,
            )?;
            report.fid = Some(result.value);
            report.fid_clamped = Some(result.clamped);
        }
        (None, None) => {}
        _ => {
            return Err(UsageError("FID needs both --real-features and --gen-features".into()).into())
        }
    }
    if let Some(p) = &a.probs {
        let splits = a.splits.unwrap_or(1);
        let seed = if splits > 1 {
            required(a.seed, "seed")?
        } else {
            a.seed.unwrap_or(0)
        };
        let probs = ProbMatrix::from_features(&read_matrix(p)?)?;
        let is = inception_score(&probs, splits, seed)?;
        report.is_mean = Some(is.mean);
        report.is_std = Some(is.std);
    }
    match (&a.img_emb, &a.txt_emb) {
        (Some(i), Some(t)) => {
            let scale: ClipScale = a.clip_scale.as_deref().unwrap_or("hundred").parse()?;
            report.clip_score = Some(clip_score(&read_matrix(i)?, &read_matrix(t)?, scale)?);
        }
        (None, None) => {}
        _ => return Err(UsageError("CLIP score needs both --img-emb and --txt-emb".into()).into()),
    }
    emit(a.out.as_deref(), &to_json(&report)?)
}

pub fn read_config(path: Option<&PathBuf>) -> Result<Option<serde_json::Value>> {
    match path {
        None => Ok(None),
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(Some(serde_json::from_str(&text).context("parsing config")?))
        }
    }
}
