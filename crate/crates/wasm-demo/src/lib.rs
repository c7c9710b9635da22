//! Browser bindings for the demo page in `www/`.
//!
//! Every export returns a JSON string; errors come back as a JS exception.

use longtail_core::dataset::{Annotation, DatasetManifest, ImageEntry, NormBox, Provenance};
use longtail_core::eval_gen::{fid, GaussianStats};
use longtail_core::geometry::{iou, remap_crop, PixelRect};
use longtail_core::sampling::{cas_plan, repeat_factor_table, rfs_plan, Rounding};
use nalgebra::{DMatrix, DVector};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// A manifest with `counts[c]` single-annotation images of class `c`.
fn synthetic_manifest(counts: &[u32]) -> DatasetManifest {
    let bbox = NormBox { cx: 0.5, cy: 0.5, w: 0.5, h: 0.5 };
    let entries = counts
        .iter()
        .enumerate()
        .flat_map(|(c, &n)| {
            (0..n).map(move |i| ImageEntry {
                id: format!("{c}/{i}"),
                width_px: 64,
                height_px: 64,
                provenance: Provenance::Real,
                label_file: String::new(),
                annotations: vec![Annotation { class_id: c, bbox }],
            })
        })
        .collect();
    DatasetManifest {
        class_names: (0..counts.len()).map(|c| format!("class {c}")).collect(),
        entries,
    }
}

fn shares(counts: Vec<f64>) -> Vec<f64> {
    let total: f64 = counts.iter().sum();
    counts.iter().map(|c| if total > 0.0 { c / total } else { 0.0 }).collect()
}

pub fn sampling_shares_impl(counts: &[u32], threshold: f64, seed: u64) -> Result<String, String> {
    if counts.is_empty() || counts.contains(&0) {
        return Err("every class needs at least one image".into());
    }
    let m = synthetic_manifest(counts);
    let k = counts.len();
    let table = repeat_factor_table(&m, threshold).map_err(|e| e.to_string())?;
    let n_images = m.entries.len();

    let baseline = shares(counts.iter().map(|&n| n as f64).collect());
    let rfs_expected = shares(
        counts
            .iter()
            .zip(&table.class_factors)
            .map(|(&n, f)| n as f64 * f.unwrap_or(1.0))
            .collect(),
    );
    let cas_expected = vec![1.0 / k as f64; k];

    let class_of = |id: &str| id.split('/').next().and_then(|c| c.parse::<usize>().ok()).unwrap_or(0);
    let tally = |ids: Vec<&str>| {
        let mut out = vec![0.0; k];
        for id in ids {
            out[class_of(id)] += 1.0;
        }
        shares(out)
    };
    let rfs = rfs_plan(&m, threshold, 32, seed, Rounding::Stochastic).map_err(|e| e.to_string())?;
    let cas = cas_plan(&m, 32, n_images, seed).map_err(|e| e.to_string())?;

    Ok(json!({
        "images": n_images,
        "repeat_factors": table.class_factors,
        "baseline": baseline,
        "rfs_expected": rfs_expected,
        "cas_expected": cas_expected,
        "rfs_sampled": tally(rfs.ids().collect()),
        "rfs_epoch_length": rfs.epoch_length(),
        "cas_sampled": tally(cas.ids().collect()),
    })
    .to_string())
}

/// Per-class share of training slots under each sampling strategy.
#[wasm_bindgen]
pub fn sampling_shares(counts: Vec<u32>, threshold: f64, seed: u64) -> Result<String, JsValue> {
    js(sampling_shares_impl(&counts, threshold, seed))
}

fn norm_box(v: &[f64]) -> Result<NormBox, String> {
    match v {
        [cx, cy, w, h] => NormBox::new(*cx, *cy, *w, *h).map_err(|e| e.to_string()),
        _ => Err("a box needs four values: cx, cy, w, h".into()),
    }
}

pub fn crop_box_impl(
    bbox: &[f64],
    image_w: f64,
    image_h: f64,
    crop: &[f64],
    min_visible: f64,
) -> Result<String, String> {
    let b = norm_box(bbox)?;
    let [x0, y0, w, h] = crop else {
        return Err("a crop needs four values: x0, y0, w, h".into());
    };
    let rect = PixelRect::new(*x0, *y0, *w, *h).map_err(|e| e.to_string())?;
    let remapped = remap_crop(&b, image_w, image_h, &rect, min_visible).map_err(|e| e.to_string())?;
    let crop_norm = NormBox {
        cx: (x0 + w / 2.0) / image_w,
        cy: (y0 + h / 2.0) / image_h,
        w: w / image_w,
        h: h / image_h,
    };
    Ok(json!({
        "kept": remapped.is_some(),
        "box": remapped.map(|r| [r.cx, r.cy, r.w, r.h]),
        "iou_with_crop": iou(&b, &crop_norm),
    })
    .to_string())
}

/// Remaps a normalized box into a pixel crop of the image.
#[wasm_bindgen]
pub fn crop_box(bbox: Vec<f64>, image_w: f64, image_h: f64, crop: Vec<f64>, min_visible: f64) -> Result<String, JsValue> {
    js(crop_box_impl(&bbox, image_w, image_h, &crop, min_visible))
}

pub fn box_iou_impl(a: &[f64], b: &[f64]) -> Result<f64, String> {
    Ok(iou(&norm_box(a)?, &norm_box(b)?))
}

#[wasm_bindgen]
pub fn box_iou(a: Vec<f64>, b: Vec<f64>) -> Result<f64, JsValue> {
    box_iou_impl(&a, &b).map_err(|e| JsValue::from_str(&e))
}

fn gaussian(mu: &[f64], sigma: &[f64]) -> Result<GaussianStats, String> {
    let d = mu.len();
    if sigma.len() != d * d {
        return Err(format!("covariance needs {} values for dimension {d}", d * d));
    }
    GaussianStats::new(DVector::from_column_slice(mu), DMatrix::from_row_slice(d, d, sigma)).map_err(|e| e.to_string())
}

pub fn gaussian_fid_impl(mu_r: &[f64], sigma_r: &[f64], mu_g: &[f64], sigma_g: &[f64]) -> Result<String, String> {
    let r = gaussian(mu_r, sigma_r)?;
    let g = gaussian(mu_g, sigma_g)?;
    let out = fid(&r, &g).map_err(|e| e.to_string())?;
    Ok(json!({ "fid": out.value, "clamped": out.clamped }).to_string())
}

/// Frechet distance between two Gaussians given as mean and row-major covariance.
#[wasm_bindgen]
pub fn gaussian_fid(mu_r: Vec<f64>, sigma_r: Vec<f64>, mu_g: Vec<f64>, sigma_g: Vec<f64>) -> Result<String, JsValue> {
    js(gaussian_fid_impl(&mu_r, &sigma_r, &mu_g, &sigma_g))
}
