//! Detection evaluation: greedy IoU matching, 101-point interpolated AP,
//! and mAP over a range of IoU thresholds (COCO-style).

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::{Annotation, DatasetManifest, NormBox};
use crate::error::{Error, Result};
use crate::geometry::iou;

pub const RECALL_POINTS: usize = 101;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub image_id: String,
    pub class_id: usize,
    pub bbox: NormBox,
    pub confidence: f64,
}

/// `{0.50, 0.55, ..., 0.95}`
pub fn default_thresholds() -> Vec<f64> {
    (0..10).map(|i| (50 + 5 * i) as f64 / 100.0).collect()
}

/// Recall grid `{0.00, 0.01, ..., 1.00}`.
pub fn recall_grid() -> Vec<f64> {
    (0..RECALL_POINTS).map(|i| i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// `(confidence, is_true_positive)` in descending confidence order.
    pub flags: Vec<(f64, bool)>,
    pub n_gt: usize,
}

/// Matches one class's detections against ground truth at one threshold.
///
/// Detections are visited by descending confidence (stable for ties). Each
/// takes the unmatched ground truth of its image with the highest IoU (first
/// one on IoU ties); it is a true positive when that IoU reaches `iou_t`.
pub fn match_detections(
    dets: &[&Detection],
    gts: &HashMap<&str, Vec<NormBox>>,
    class_id: usize,
    iou_t: f64,
) -> MatchResult {
    let mut order: Vec<&Detection> = dets.iter().copied().filter(|d| d.class_id == class_id).collect();
    order.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));

    let mut used: HashMap<&str, Vec<bool>> = gts
        .iter()
        .map(|(k, v)| (*k, vec![false; v.len()]))
        .collect();
    let n_gt = gts.values().map(Vec::len).sum();

    let flags = order
        .into_iter()
        .map(|d| {
            let boxes = match gts.get(d.image_id.as_str()) {
                Some(b) => b,
                None => return (d.confidence, false),
            };
            let taken = used.get_mut(d.image_id.as_str()).expect("same keys as gts");
            let mut best: Option<(usize, f64)> = None;
            for (g, gt) in boxes.iter().enumerate() {
                if taken[g] {
                    continue;
                }
                let v = iou(&d.bbox, gt);
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((g, v));
                }
            }
            match best {
                Some((g, v)) if v >= iou_t => {
                    taken[g] = true;
                    (d.confidence, true)
                }
                _ => (d.confidence, false),
            }
        })
        .collect();
    MatchResult { flags, n_gt }
}

/// Interpolated precision at each of the 101 recall points.
///
/// Precision is made non-increasing from the right; the value at recall `r`
/// is taken at the first rank whose recall reaches `r`, or 0 if none does.
pub fn interpolated_precision(flags: &[(f64, bool)], n_gt: usize) -> Vec<f64> {
    let mut tp_cum = Vec::with_capacity(flags.len());
    let mut precision = Vec::with_capacity(flags.len());
    let (mut tp, mut fp) = (0usize, 0usize);
    for &(_, is_tp) in flags {
        if is_tp {
            tp += 1;
        } else {
            fp += 1;
        }
        tp_cum.push(tp);
        precision.push(tp as f64 / (tp + fp) as f64);
    }
    for i in (0..precision.len().saturating_sub(1)).rev() {
        if precision[i + 1] > precision[i] {
            precision[i] = precision[i + 1];
        }
    }
    (0..RECALL_POINTS)
        .map(|i| {
            if n_gt == 0 {
                return 0.0;
            }
            // recall >= i/100  <=>  tp * 100 >= i * n_gt, exact in integers
            let k = tp_cum.partition_point(|&t| t * 100 < i * n_gt);
            precision.get(k).copied().unwrap_or(0.0)
        })
        .collect()
}

/// 101-point AP. `None` means "absent": no ground truth and no detections.
pub fn average_precision(flags: &[(f64, bool)], n_gt: i64) -> Result<Option<f64>> {
    if n_gt < 0 {
        return Err(Error::Argument(format!("negative ground-truth count {n_gt}")));
    }
    let n_gt = n_gt as usize;
    if n_gt == 0 {
        return Ok(if flags.is_empty() { None } else { Some(0.0) });
    }
    let curve = interpolated_precision(flags, n_gt);
    Ok(Some(curve.iter().sum::<f64>() / RECALL_POINTS as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEval {
    pub class_id: usize,
    pub name: String,
    pub n_gt: usize,
    pub n_det: usize,
    /// AP per threshold; `null` when absent.
    pub ap: Vec<Option<f64>>,
    pub ap50_95: Option<f64>,
    /// Interpolated precision on the recall grid, one curve per threshold.
    pub pr_curves: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetEvalReport {
    pub thresholds: Vec<f64>,
    pub recall_grid: Vec<f64>,
    pub classes: Vec<ClassEval>,
    /// Mean over classes with ground truth, per threshold.
    pub map_per_threshold: Vec<f64>,
    pub map50_95: f64,
}

/// Evaluates detections against the manifest's annotations.
///
/// The mAP averages classes that have ground truth. A class without ground
/// truth but with detections reports AP 0; one with neither is absent.
pub fn map_range(
    dets: &[Detection],
    gt: &DatasetManifest,
    thresholds: &[f64],
) -> Result<DetEvalReport> {
    if thresholds.is_empty() {
        return Err(Error::Argument("no IoU thresholds".into()));
    }
    if let Some(t) = thresholds.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
        return Err(Error::Argument(format!("IoU threshold {t} outside (0,1]")));
    }
    let n_classes = gt.n_classes();
    let known: HashMap<&str, &[Annotation]> = gt
        .entries
        .iter()
        .map(|e| (e.id.as_str(), e.annotations.as_slice()))
        .collect();
    for d in dets {
        if d.class_id >= n_classes {
            return Err(Error::Validation(format!(
                "detection on `{}` has class id {} >= {n_classes}",
                d.image_id, d.class_id
            )));
        }
        if !known.contains_key(d.image_id.as_str()) {
            return Err(Error::Validation(format!(
                "detection references unknown image `{}`",
                d.image_id
            )));
        }
        if !(0.0..=1.0).contains(&d.confidence) {
            return Err(Error::Validation(format!(
                "detection on `{}` has confidence {} outside [0,1]",
                d.image_id, d.confidence
            )));
        }
    }
    if gt.entries.iter().all(|e| e.annotations.is_empty()) {
        return Err(Error::EmptyDataset("ground truth has no annotations".into()));
    }

    let mut classes = Vec::with_capacity(n_classes);
    for c in 0..n_classes {
        let gts: HashMap<&str, Vec<NormBox>> = known
            .iter()
            .map(|(id, anns)| {
                let boxes = anns.iter().filter(|a| a.class_id == c).map(|a| a.bbox).collect();
                (*id, boxes)
            })
            .collect();
        let class_dets: Vec<&Detection> = dets.iter().filter(|d| d.class_id == c).collect();
        let mut ap = Vec::with_capacity(thresholds.len());
        let mut pr_curves = Vec::with_capacity(thresholds.len());
        let mut n_gt = 0;
        for &t in thresholds {
            let m = match_detections(&class_dets, &gts, c, t);
            n_gt = m.n_gt;
            ap.push(average_precision(&m.flags, m.n_gt as i64)?);
            pr_curves.push(interpolated_precision(&m.flags, m.n_gt));
        }
        let ap50_95 = mean_present(&ap);
        classes.push(ClassEval {
            class_id: c,
            name: gt.class_names[c].clone(),
            n_gt,
            n_det: class_dets.len(),
            ap,
            ap50_95,
            pr_curves,
        });
    }

    let with_gt: Vec<&ClassEval> = classes.iter().filter(|c| c.n_gt > 0).collect();
    let map_per_threshold = (0..thresholds.len())
        .map(|t| {
            with_gt.iter().map(|c| c.ap[t].unwrap_or(0.0)).sum::<f64>() / with_gt.len() as f64
        })
        .collect();
    let map50_95 = with_gt
        .iter()
        .map(|c| c.ap50_95.unwrap_or(0.0))
        .sum::<f64>()
        / with_gt.len() as f64;

    Ok(DetEvalReport {
        thresholds: thresholds.to_vec(),
        recall_grid: recall_grid(),
        classes,
        map_per_threshold,
        map50_95,
    })
}

fn mean_present(values: &[Option<f64>]) -> Option<f64> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.is_empty() {
        None
    } else {
        Some(present.iter().sum::<f64>() / present.len() as f64)
    }
}

/// `0.66 -> "66"`, `0.665 -> "66.5"`: one decimal, trailing `.0` dropped.
pub fn format_percent(x: f64) -> String {
    let s = format!("{:.1}", x * 100.0);
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

impl DetEvalReport {
    fn threshold_index(&self, t: f64) -> Option<usize> {
        self.thresholds.iter().position(|v| (v - t).abs() < 1e-9)
    }

    /// Text table: an "All classes" row, then one row per class.
    pub fn to_table(&self, percent: bool) -> String {
        let fmt = |v: Option<f64>| match v {
            None => "-".to_string(),
            Some(x) if percent => format_percent(x),
            Some(x) => format!("{x:.4}"),
        };
        let i50 = self.threshold_index(0.5);
        let i75 = self.threshold_index(0.75);
        let name_w = self
            .classes
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(0)
            .max("All classes".len());

        let mut s = String::new();
        let _ = write!(s, "{:<name_w$}  {:>6}  {:>6}", "class", "gt", "dets");
        if i50.is_some() {
            let _ = write!(s, "  {:>8}", "AP50");
        }
        if i75.is_some() {
            let _ = write!(s, "  {:>8}", "AP75");
        }
        let _ = writeln!(s, "  {:>8}", "AP50-95");

        let total_gt: usize = self.classes.iter().map(|c| c.n_gt).sum();
        let total_det: usize = self.classes.iter().map(|c| c.n_det).sum();
        let _ = write!(s, "{:<name_w$}  {total_gt:>6}  {total_det:>6}", "All classes");
        if let Some(i) = i50 {
            let _ = write!(s, "  {:>8}", fmt(Some(self.map_per_threshold[i])));
        }
        if let Some(i) = i75 {
            let _ = write!(s, "  {:>8}", fmt(Some(self.map_per_threshold[i])));
        }
        let _ = writeln!(s, "  {:>8}", fmt(Some(self.map50_95)));

        for c in &self.classes {
            let _ = write!(s, "{:<name_w$}  {:>6}  {:>6}", c.name, c.n_gt, c.n_det);
            if let Some(i) = i50 {
                let _ = write!(s, "  {:>8}", fmt(c.ap[i]));
            }
            if let Some(i) = i75 {
                let _ = write!(s, "  {:>8}", fmt(c.ap[i]));
            }
            let _ = writeln!(s, "  {:>8}", fmt(c.ap50_95));
        }
        s
    }
}

#[derive(Deserialize)]
struct DetectionLine {
    image_id: String,
    class_id: usize,
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
    conf: f64,
}

/// Parses the JSON-lines detections format, one object per line:
/// `{"image_id","class_id","cx","cy","w","h","conf"}`.
pub fn parse_detections_jsonl(text: &str) -> Result<Vec<Detection>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let perr = |message: String| Error::Parse {
            source_name: "detections".into(),
            line: idx + 1,
            message,
        };
        let d: DetectionLine = serde_json::from_str(line).map_err(|e| perr(e.to_string()))?;
        let bbox = NormBox::new(d.cx, d.cy, d.w, d.h).map_err(|e| perr(e.to_string()))?;
        if !(0.0..=1.0).contains(&d.conf) {
            return Err(perr(format!("confidence {} outside [0,1]", d.conf)));
        }
        out.push(Detection {
            image_id: d.image_id,
            class_id: d.class_id,
            bbox,
            confidence: d.conf,
        });
    }
    Ok(out)
}
