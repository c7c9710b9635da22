use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "longtail", version, about = "Long-tail detection dataset tooling")]
pub struct Cli {
    /// JSON file whose keys mirror the command's flags; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Class distribution and long-tail report for a manifest.
    Analyze(AnalyzeArgs),
    /// Seeded epoch plan: baseline, rfs or cas.
    Plan(PlanArgs),
    /// Hybrid real + synthetic manifest.
    Mix(MixArgs),
    /// Crop-remap every annotation of a manifest.
    Remap(RemapArgs),
    /// Mosaic or mixup label plans.
    Augment(AugmentArgs),
    /// Per-class AP and mAP50-95 from a detections file.
    #[command(name = "eval-det")]
    EvalDet(EvalDetArgs),
    /// FID, Inception Score and CLIP score from precomputed matrices.
    #[command(name = "eval-gen")]
    EvalGen(EvalGenArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Report JSON path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the text table here.
    #[arg(long)]
    pub table_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PlanArgs {
    /// baseline, rfs or cas
    #[arg(long)]
    pub strategy: Option<String>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Batch size [default: 64]
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CAS slots per epoch [default: manifest size]
    #[arg(long)]
    pub epoch_length: Option<usize>,
    /// RFS frequency threshold [default: 0.01]
    #[arg(long)]
    pub rfs_threshold: Option<f64>,
    /// RFS rounding: stochastic or ceil [default: stochastic]
    #[arg(long)]
    pub rounding: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct MixArgs {
    #[arg(long)]
    pub real: Option<PathBuf>,
    #[arg(long)]
    pub synth: Option<PathBuf>,
    /// fixed, match-max or manual
    #[arg(long)]
    pub targets: Option<String>,
    /// Count for `--targets fixed`.
    #[arg(long)]
    pub per_class: Option<usize>,
    /// Comma-separated class names for `--targets fixed`.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<String>,
    /// JSON object `{class: count}` for `--targets manual`.
    #[arg(long)]
    pub manual: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Hybrid manifest path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Provenance summary JSON path.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RemapArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// JSON object `{id: {"x0","y0","w","h"}}`; entries not listed keep the full image.
    #[arg(long)]
    pub crops: Option<PathBuf>,
    /// [default: 0.25]
    #[arg(long)]
    pub min_visible: Option<f64>,
    /// Final square size recorded in the output manifest.
    #[arg(long)]
    pub resize: Option<u32>,
    /// Output manifest; label files go to `labels/` next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct AugmentArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// mosaic or mixup
    #[arg(long)]
    pub mode: Option<String>,
    /// Source ids (4 for mosaic, 2 for mixup); drawn with the seed when absent.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ids: Vec<String>,
    /// Number of plans [default: 1]
    #[arg(long)]
    pub count: Option<usize>,
    /// Mosaic output size in pixels [default: 320]
    #[arg(long)]
    pub output_size: Option<u32>,
    /// Mosaic split point `fx,fy`; jittered with the seed when absent.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub center: Vec<f64>,
    /// [default: 0.10]
    #[arg(long)]
    pub min_area: Option<f64>,
    /// Fixed mixup weight; drawn from Beta(alpha, alpha) when absent.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// [default: 32.0]
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct EvalDetArgs {
    /// Ground-truth manifest.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// JSON-lines detections.
    #[arg(long)]
    pub dets: Option<PathBuf>,
    /// Comma-separated IoU thresholds [default: 0.50:0.05:0.95]
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub thresholds: Vec<f64>,
    /// Print table values as percentages.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub percent: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub table_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct EvalGenArgs {
    #[arg(long)]
    pub real_features: Option<PathBuf>,
    #[arg(long)]
    pub gen_features: Option<PathBuf>,
    #[arg(long)]
    pub probs: Option<PathBuf>,
    #[arg(long)]
    pub img_emb: Option<PathBuf>,
    #[arg(long)]
    pub txt_emb: Option<PathBuf>,
    /// [default: 1]
    #[arg(long)]
    pub splits: Option<usize>,
    /// hundred or hessel_w [default: hundred]
    #[arg(long)]
    pub clip_scale: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Overlays explicitly given flags on top of a config object.
pub fn merge_config<T>(flags: &T, config: Option<&serde_json::Value>) -> anyhow::Result<T>
where
    T: Serialize + for<'de> Deserialize<'de>,
{
    let Some(config) = config else {
        return Ok(serde_json::from_value(serde_json::to_value(flags)?)?);
    };
    let mut merged = match config {
        serde_json::Value::Object(m) => m.clone(),
        _ => anyhow::bail!("config file must hold a JSON object"),
    };
    if let serde_json::Value::Object(given) = serde_json::to_value(flags)? {
        for (k, v) in given {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    merged.retain(|_, v| !v.is_null());
    Ok(serde_json::from_value(serde_json::Value::Object(merged))?)
}
