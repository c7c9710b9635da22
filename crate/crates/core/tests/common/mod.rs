//! Fixtures and independent reference implementations for tests.
//!
//! Nothing here calls into the evaluation or geometry code it is used to
//! check; only plain data types are shared.
#![allow(dead_code)]

use longtail_core::dataset::{Annotation, DatasetManifest, ImageEntry, NormBox, Provenance};
use longtail_core::eval_det::Detection;

pub fn entry(id: &str, classes: &[usize], provenance: Provenance) -> ImageEntry {
    ImageEntry {
        id: id.to_string(),
        width_px: 320,
        height_px: 320,
        provenance,
        label_file: format!("labels/{id}.txt"),
        annotations: classes
            .iter()
            .map(|&c| Annotation {
                class_id: c,
                bbox: NormBox { cx: 0.5, cy: 0.5, w: 0.25, h: 0.25 },
            })
            .collect(),
    }
}

pub fn class_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("class{i}")).collect()
}

/// One single-class image per count, `images_per_class[c]` images of class `c`.
pub fn single_class_manifest(images_per_class: &[usize]) -> DatasetManifest {
    let mut entries = Vec::new();
    for (c, &n) in images_per_class.iter().enumerate() {
        for i in 0..n {
            entries.push(entry(&format!("c{c}_{i}"), &[c], Provenance::Real));
        }
    }
    DatasetManifest {
        class_names: class_names(images_per_class.len()),
        entries,
    }
}

/// Small deterministic generator for fixtures (xorshift64*).
pub struct FixtureRng(u64);

impl FixtureRng {
    pub fn new(seed: u64) -> Self {
        Self(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
    }
    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

pub fn random_box(rng: &mut FixtureRng) -> NormBox {
    NormBox {
        cx: rng.range(0.05, 0.95),
        cy: rng.range(0.05, 0.95),
        w: rng.range(0.02, 0.6),
        h: rng.range(0.02, 0.6),
    }
}

// ---------------------------------------------------------------------------
// Brute-force detection evaluator
// ---------------------------------------------------------------------------

fn oracle_iou(a: &NormBox, b: &NormBox) -> f64 {
    let (ax0, ax1) = (a.cx - a.w / 2.0, a.cx + a.w / 2.0);
    let (ay0, ay1) = (a.cy - a.h / 2.0, a.cy + a.h / 2.0);
    let (bx0, bx1) = (b.cx - b.w / 2.0, b.cx + b.w / 2.0);
    let (by0, by1) = (b.cy - b.h / 2.0, b.cy + b.h / 2.0);
    let ix = if ax1 < bx1 { ax1 } else { bx1 } - if ax0 > bx0 { ax0 } else { bx0 };
    let iy = if ay1 < by1 { ay1 } else { by1 } - if ay0 > by0 { ay0 } else { by0 };
    if ix <= 0.0 || iy <= 0.0 {
        return 0.0;
    }
    let inter = ix * iy;
    let union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter;
    inter / union
}

/// TP/FP flags in rank order for one class and threshold.
fn oracle_flags(
    dets: &[Detection],
    gt: &DatasetManifest,
    class_id: usize,
    t: f64,
) -> (Vec<bool>, usize) {
    // Rank: higher confidence first, earlier input first on ties.
    let mut ranked: Vec<(usize, &Detection)> = dets
        .iter()
        .enumerate()
        .filter(|(_, d)| d.class_id == class_id)
        .collect();
    for i in 1..ranked.len() {
        let mut j = i;
        while j > 0 && ranked[j].1.confidence > ranked[j - 1].1.confidence {
            ranked.swap(j, j - 1);
            j -= 1;
        }
    }
    let gt_boxes: Vec<(String, NormBox)> = gt
        .entries
        .iter()
        .flat_map(|e| {
            e.annotations
                .iter()
                .filter(|a| a.class_id == class_id)
                .map(move |a| (e.id.clone(), a.bbox))
        })
        .collect();
    let mut used = vec![false; gt_boxes.len()];
    let mut flags = Vec::new();
    for (_, d) in ranked {
        let mut best: Option<usize> = None;
        let mut best_iou = -1.0;
        for (g, (img, b)) in gt_boxes.iter().enumerate() {
            if used[g] || *img != d.image_id {
                continue;
            }
            let v = oracle_iou(&d.bbox, b);
            if v > best_iou {
                best_iou = v;
                best = Some(g);
            }
        }
        match best {
            Some(g) if best_iou >= t => {
                used[g] = true;
                flags.push(true);
            }
            _ => flags.push(false),
        }
    }
    (flags, gt_boxes.len())
}

/// AP by exhaustive enumeration: at every recall level, the best precision
/// over all ranking prefixes that reach it.
pub fn oracle_ap(flags: &[bool], n_gt: usize) -> Option<f64> {
    if n_gt == 0 {
        return if flags.is_empty() { None } else { Some(0.0) };
    }
    let mut prefixes = Vec::new();
    for k in 1..=flags.len() {
        let tp = flags[..k].iter().filter(|&&f| f).count();
        prefixes.push((tp, tp as f64 / k as f64));
    }
    let mut total = 0.0;
    for i in 0..=100usize {
        let mut best = 0.0f64;
        for &(tp, p) in &prefixes {
            if tp * 100 >= i * n_gt && p > best {
                best = p;
            }
        }
        total += best;
    }
    Some(total / 101.0)
}

pub struct OracleReport {
    pub ap: Vec<Vec<Option<f64>>>,
    pub ap50_95: Vec<Option<f64>>,
    pub map: f64,
}

pub fn oracle_evaluate(dets: &[Detection], gt: &DatasetManifest, thresholds: &[f64]) -> OracleReport {
    let mut ap = Vec::new();
    let mut ap50_95 = Vec::new();
    let mut class_means = Vec::new();
    for c in 0..gt.class_names.len() {
        let mut row = Vec::new();
        let mut n_gt = 0;
        for &t in thresholds {
            let (flags, n) = oracle_flags(dets, gt, c, t);
            n_gt = n;
            row.push(oracle_ap(&flags, n));
        }
        let present: Vec<f64> = row.iter().flatten().copied().collect();
        let mean = if present.is_empty() {
            None
        } else {
            Some(present.iter().sum::<f64>() / present.len() as f64)
        };
        if n_gt > 0 {
            class_means.push(mean.unwrap_or(0.0));
        }
        ap.push(row);
        ap50_95.push(mean);
    }
    let map = class_means.iter().sum::<f64>() / class_means.len() as f64;
    OracleReport { ap, ap50_95, map }
}

/// Random micro-instance: <= 5 images, <= 4 GT boxes, <= 6 detections.
pub fn micro_instance(rng: &mut FixtureRng) -> (DatasetManifest, Vec<Detection>) {
    let n_classes = 1 + rng.below(3);
    let n_images = 1 + rng.below(5);
    let mut entries: Vec<ImageEntry> = (0..n_images)
        .map(|i| entry(&format!("img{i}"), &[], Provenance::Real))
        .collect();
    let n_gt = 1 + rng.below(4);
    let mut gt_list = Vec::new();
    for _ in 0..n_gt {
        let img = rng.below(n_images);
        let a = Annotation {
            class_id: rng.below(n_classes),
            bbox: random_box(rng),
        };
        entries[img].annotations.push(a);
        gt_list.push((img, a));
    }
    let n_det = rng.below(7);
    let mut dets = Vec::new();
    for _ in 0..n_det {
        // Half the detections jitter a ground-truth box so matches happen.
        let (image, class_id, bbox) = if rng.unit() < 0.6 {
            let (img, a) = gt_list[rng.below(gt_list.len())];
            let j = |v: f64, s: f64, rng: &mut FixtureRng| (v + rng.range(-s, s)).clamp(0.0, 1.0);
            let b = NormBox {
                cx: j(a.bbox.cx, 0.05, rng),
                cy: j(a.bbox.cy, 0.05, rng),
                w: j(a.bbox.w, 0.05, rng).max(0.01),
                h: j(a.bbox.h, 0.05, rng).max(0.01),
            };
            let class = if rng.unit() < 0.85 { a.class_id } else { rng.below(n_classes) };
            (img, class, b)
        } else {
            (rng.below(n_images), rng.below(n_classes), random_box(rng))
        };
        dets.push(Detection {
            image_id: format!("img{image}"),
            class_id,
            bbox,
            // Coarse confidences so ties occur.
            confidence: rng.below(5) as f64 / 4.0,
        });
    }
    let m = DatasetManifest {
        class_names: class_names(n_classes),
        entries,
    };
    (m, dets)
}

// ---------------------------------------------------------------------------
// Dense linear algebra for the FID oracle (plain row-major Vec<Vec<f64>>)
// ---------------------------------------------------------------------------

pub type Mat = Vec<Vec<f64>>;

pub fn identity(d: usize) -> Mat {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for p in 0..k {
            for j in 0..m {
                out[i][j] += a[i][p] * b[p][j];
            }
        }
    }
    out
}

pub fn inverse(a: &Mat) -> Mat {
    let d = a.len();
    let mut aug: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..d).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&x, &y| aug[x][col].abs().total_cmp(&aug[y][col].abs()))
            .unwrap();
        aug.swap(col, pivot);
        let p = aug[col][col];
        for v in aug[col].iter_mut() {
            *v /= p;
        }
        for r in 0..d {
            if r != col {
                let f = aug[r][col];
                if f != 0.0 {
                    let pivot_row = aug[col].clone();
                    for (v, pv) in aug[r].iter_mut().zip(pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
    }
    aug.into_iter().map(|r| r[d..].to_vec()).collect()
}

/// Principal square root of a matrix with positive real spectrum via the
/// Denman-Beavers iteration.
pub fn sqrtm_denman_beavers(a: &Mat) -> Mat {
    let d = a.len();
    let mut y = a.clone();
    let mut z = identity(d);
    for _ in 0..100 {
        let yi = inverse(&y);
        let zi = inverse(&z);
        let ny: Mat = (0..d)
            .map(|i| (0..d).map(|j| 0.5 * (y[i][j] + zi[i][j])).collect())
            .collect();
        let nz: Mat = (0..d)
            .map(|i| (0..d).map(|j| 0.5 * (z[i][j] + yi[i][j])).collect())
            .collect();
        let delta: f64 = ny
            .iter()
            .zip(&y)
            .flat_map(|(r, s)| r.iter().zip(s).map(|(a, b)| (a - b).abs()))
            .sum();
        y = ny;
        z = nz;
        if delta < 1e-15 {
            break;
        }
    }
    y
}

/// FID through the non-symmetric product `S_r S_g`, square-rooted directly.
pub fn oracle_fid(mu_r: &[f64], s_r: &Mat, mu_g: &[f64], s_g: &Mat) -> f64 {
    let d = mu_r.len();
    let mean_term: f64 = mu_r.iter().zip(mu_g).map(|(a, b)| (a - b) * (a - b)).sum();
    let covmean = sqrtm_denman_beavers(&matmul(s_r, s_g));
    let tr = |m: &Mat| (0..d).map(|i| m[i][i]).sum::<f64>();
    mean_term + tr(s_r) + tr(s_g) - 2.0 * tr(&covmean)
}

/// Random symmetric positive definite `A A^T + eps I`.
pub fn random_spd(rng: &mut FixtureRng, d: usize, eps: f64) -> Mat {
    let a: Mat = (0..d).map(|_| (0..d).map(|_| rng.range(-1.0, 1.0)).collect()).collect();
    let mut m = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            m[i][j] = (0..d).map(|k| a[i][k] * a[j][k]).sum::<f64>() + if i == j { eps } else { 0.0 };
        }
    }
    m
}

// ---------------------------------------------------------------------------
// Mosaic placement oracle
// ---------------------------------------------------------------------------

/// Maps a source box into mosaic slot `k` by transforming its four corners
/// with the slot's affine map, then clipping to the slot's quadrant.
/// Returns normalized output corners `(x0, y0, x1, y1)`.
pub fn oracle_mosaic_corners(
    b: &NormBox,
    k: usize,
    size: f64,
    fx: f64,
    fy: f64,
) -> Option<(f64, f64, f64, f64)> {
    let (xc, yc) = (fx * size, fy * size);
    let half = size / 2.0;
    let (right, bottom) = (k % 2 == 1, k >= 2);
    let ox = if right { xc } else { xc - half };
    let oy = if bottom { yc } else { yc - half };
    let affine = |u: f64, v: f64| (half * u + ox, half * v + oy);
    let corners = [
        affine(b.cx - b.w / 2.0, b.cy - b.h / 2.0),
        affine(b.cx + b.w / 2.0, b.cy - b.h / 2.0),
        affine(b.cx - b.w / 2.0, b.cy + b.h / 2.0),
        affine(b.cx + b.w / 2.0, b.cy + b.h / 2.0),
    ];
    let xmin = corners.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let xmax = corners.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
    let ymin = corners.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let ymax = corners.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let (qx0, qx1) = if right { (xc, size) } else { (0.0, xc) };
    let (qy0, qy1) = if bottom { (yc, size) } else { (0.0, yc) };
    let (x0, x1) = (xmin.max(qx0), xmax.min(qx1));
    let (y0, y1) = (ymin.max(qy0), ymax.min(qy1));
    if x1 <= x0 || y1 <= y0 {
        return None;
    }
    Some((x0 / size, y0 / size, x1 / size, y1 / size))
}
