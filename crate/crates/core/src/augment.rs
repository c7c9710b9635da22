//! Label-space mosaic and mixup.
//!
//! Nothing here touches pixels. A plan records where each source image goes
//! (or how two images blend) together with the resulting annotations, so any
//! image tool can execute it.
//!
//! Mosaic layout: a split point `(fx*S, fy*S)` divides the `S x S` output
//! into four quadrants (top-left, top-right, bottom-left, bottom-right). Each
//! source is stretched to an `S/2 x S/2` tile whose inner corner sits on the
//! split point, so tiles overhanging the canvas are cut by the quadrant
//! boundary.

use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::dataset::{Annotation, ImageEntry};
use crate::error::{Error, Result};
use crate::geometry::{from_corners, PixelRect};
use crate::rng::PlanRng;

pub const DEFAULT_MOSAIC_MIN_AREA: f64 = 0.10;
pub const DEFAULT_MIXUP_ALPHA: f64 = 32.0;
pub const CENTER_JITTER: (f64, f64) = (0.25, 0.75);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MosaicPlacement {
    pub source_id: String,
    /// Region of the output this source fills.
    pub quadrant: PixelRect,
    /// Where the whole resized source lands; may extend past the canvas.
    pub tile: PixelRect,
    pub scale_x: f64,
    pub scale_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MosaicPlan {
    pub output_size: u32,
    pub center: (f64, f64),
    pub placements: Vec<MosaicPlacement>,
    pub annotations: Vec<Annotation>,
}

/// Builds a mosaic from four entries. When `center` is `None` the split
/// point is drawn uniformly from `[0.25, 0.75]^2` with `seed` (x first).
pub fn mosaic_labels(
    entries: [&ImageEntry; 4],
    output_size: u32,
    center: Option<(f64, f64)>,
    min_area: f64,
    seed: u64,
) -> Result<MosaicPlan> {
    if output_size == 0 {
        return Err(Error::Argument("output size must be positive".into()));
    }
    if !(0.0..1.0).contains(&min_area) {
        return Err(Error::Argument(format!("min_area {min_area} outside [0,1)")));
    }
    let (fx, fy) = match center {
        Some(c) => c,
        None => {
            let mut rng = PlanRng::new(seed);
            let fx = rng.uniform(CENTER_JITTER.0, CENTER_JITTER.1);
            let fy = rng.uniform(CENTER_JITTER.0, CENTER_JITTER.1);
            (fx, fy)
        }
    };
    let jitter = CENTER_JITTER.0..=CENTER_JITTER.1;
    if !jitter.contains(&fx) || !jitter.contains(&fy) {
        return Err(Error::Argument(format!(
            "mosaic center ({fx}, {fy}) outside [0.25, 0.75]^2"
        )));
    }

    let s = output_size as f64;
    let half = s / 2.0;
    let (xc, yc) = (fx * s, fy * s);
    let quadrants = [
        (0.0, 0.0, xc, yc),
        (xc, 0.0, s - xc, yc),
        (0.0, yc, xc, s - yc),
        (xc, yc, s - xc, s - yc),
    ];
    let tiles = [
        (xc - half, yc - half),
        (xc, yc - half),
        (xc - half, yc),
        (xc, yc),
    ];

    let mut placements = Vec::with_capacity(4);
    let mut annotations = Vec::new();
    for (k, entry) in entries.iter().enumerate() {
        let (qx, qy, qw, qh) = quadrants[k];
        let quadrant = PixelRect::new(qx, qy, qw, qh)
            .map_err(|_| Error::Argument(format!("degenerate mosaic quadrant {k}")))?;
        let tile = PixelRect::new(tiles[k].0, tiles[k].1, half, half)?;
        for a in &entry.annotations {
            if let Some(bbox) = place_box(a, &tile, &quadrant, s, min_area) {
                annotations.push(Annotation {
                    class_id: a.class_id,
                    bbox,
                });
            }
        }
        placements.push(MosaicPlacement {
            source_id: entry.id.clone(),
            quadrant,
            tile,
            scale_x: half / entry.width_px as f64,
            scale_y: half / entry.height_px as f64,
        });
    }

    Ok(MosaicPlan {
        output_size,
        center: (fx, fy),
        placements,
        annotations,
    })
}

fn place_box(
    a: &Annotation,
    tile: &PixelRect,
    quadrant: &PixelRect,
    s: f64,
    min_area: f64,
) -> Option<crate::dataset::NormBox> {
    let b = &a.bbox;
    let x0 = tile.x0 + b.x0() * tile.w;
    let x1 = tile.x0 + b.x1() * tile.w;
    let y0 = tile.y0 + b.y0() * tile.h;
    let y1 = tile.y0 + b.y1() * tile.h;
    let full = (x1 - x0) * (y1 - y0);

    let cx0 = x0.max(quadrant.x0);
    let cx1 = x1.min(quadrant.x1());
    let cy0 = y0.max(quadrant.y0);
    let cy1 = y1.min(quadrant.y1());
    if cx1 <= cx0 || cy1 <= cy0 {
        return None;
    }
    if (cx1 - cx0) * (cy1 - cy0) / full < min_area {
        return None;
    }
    Some(from_corners(
        (cx0 / s).clamp(0.0, 1.0),
        (cy0 / s).clamp(0.0, 1.0),
        (cx1 / s).clamp(0.0, 1.0),
        (cy1 / s).clamp(0.0, 1.0),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedAnnotation {
    pub source_id: String,
    pub annotation: Annotation,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixupPlan {
    pub source_a: String,
    pub source_b: String,
    pub lambda: f64,
    pub annotations: Vec<WeightedAnnotation>,
}

/// Union of both label sets; `a`'s boxes weigh `lambda`, `b`'s `1 - lambda`.
pub fn mixup_labels(a: &ImageEntry, b: &ImageEntry, lambda: f64) -> Result<MixupPlan> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Argument(format!("lambda {lambda} outside [0,1]")));
    }
    let weighted = |e: &ImageEntry, w: f64| {
        e.annotations
            .iter()
            .map(|&annotation| WeightedAnnotation {
                source_id: e.id.clone(),
                annotation,
                weight: w,
            })
            .collect::<Vec<_>>()
    };
    let mut annotations = weighted(a, lambda);
    annotations.extend(weighted(b, 1.0 - lambda));
    Ok(MixupPlan {
        source_a: a.id.clone(),
        source_b: b.id.clone(),
        lambda,
        annotations,
    })
}

/// Draws a mixup weight from `Beta(alpha, alpha)`.
pub fn sample_mixup_lambda(alpha: f64, rng: &mut PlanRng) -> Result<f64> {
    let beta = Beta::new(alpha, alpha)
        .map_err(|e| Error::Argument(format!("invalid mixup alpha {alpha}: {e}")))?;
    Ok(beta.sample(rng.as_rng_core()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{NormBox, Provenance};

    fn entry(id: &str, boxes: &[(usize, f64, f64, f64, f64)]) -> ImageEntry {
        ImageEntry {
            id: id.into(),
            width_px: 640,
            height_px: 480,
            provenance: Provenance::Real,
            label_file: format!("{id}.txt"),
            annotations: boxes
                .iter()
                .map(|&(c, cx, cy, w, h)| Annotation {
                    class_id: c,
                    bbox: NormBox { cx, cy, w, h },
                })
                .collect(),
        }
    }

    #[test]
    fn centered_mosaic_halves_boxes() {
        let e = entry("e", &[(0, 0.5, 0.5, 0.4, 1.0)]);
        let plan = mosaic_labels([&e, &e, &e, &e], 320, Some((0.5, 0.5)), 0.1, 0).unwrap();
        assert_eq!(plan.annotations.len(), 4);
        let centers = [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)];
        for (a, (cx, cy)) in plan.annotations.iter().zip(centers) {
            assert!((a.bbox.w - 0.2).abs() < 1e-12);
            assert!((a.bbox.h - 0.5).abs() < 1e-12);
            assert!((a.bbox.cx - cx).abs() < 1e-12 && (a.bbox.cy - cy).abs() < 1e-12);
        }
        for (p, a) in plan.placements.iter().zip(&plan.annotations) {
            assert!(a.bbox.x0() * 320.0 >= p.quadrant.x0 - 1e-9);
            assert!(a.bbox.x1() * 320.0 <= p.quadrant.x1() + 1e-9);
        }
    }

    #[test]
    fn offscreen_box_is_dropped() {
        // Top-left tile spans x in [-64, 96] with center 0.3; a box in the
        // left 30% of the source lands entirely at x < 0.
        let e = entry("e", &[(1, 0.1, 0.5, 0.1, 0.2)]);
        let plain = entry("p", &[]);
        let plan = mosaic_labels([&e, &plain, &plain, &plain], 320, Some((0.3, 0.5)), 0.0, 0).unwrap();
        assert!(plan.annotations.is_empty());
    }

    #[test]
    fn min_area_zero_keeps_partial_boxes() {
        // Box straddles the canvas edge; ~37% survives.
        let e = entry("e", &[(0, 0.35, 0.5, 0.4, 0.2)]);
        let plain = entry("p", &[]);
        let kept = mosaic_labels([&e, &plain, &plain, &plain], 320, Some((0.3, 0.5)), 0.0, 0).unwrap();
        assert_eq!(kept.annotations.len(), 1);
        let dropped = mosaic_labels([&e, &plain, &plain, &plain], 320, Some((0.3, 0.5)), 0.5, 0).unwrap();
        assert!(dropped.annotations.is_empty());
    }

    #[test]
    fn jittered_center_is_seeded() {
        let e = entry("e", &[(0, 0.5, 0.5, 0.3, 0.3)]);
        let a = mosaic_labels([&e, &e, &e, &e], 320, None, 0.1, 42).unwrap();
        let b = mosaic_labels([&e, &e, &e, &e], 320, None, 0.1, 42).unwrap();
        assert_eq!(a, b);
        assert!((0.25..=0.75).contains(&a.center.0) && (0.25..=0.75).contains(&a.center.1));
    }

    #[test]
    fn center_outside_bounds_rejected() {
        let e = entry("e", &[]);
        assert!(mosaic_labels([&e, &e, &e, &e], 320, Some((0.9, 0.5)), 0.1, 0).is_err());
        assert!(mosaic_labels([&e, &e, &e, &e], 0, Some((0.5, 0.5)), 0.1, 0).is_err());
    }

    #[test]
    fn mixup_weights() {
        let a = entry("a", &[(0, 0.5, 0.5, 0.1, 0.1), (1, 0.2, 0.2, 0.1, 0.1)]);
        let b = entry("b", &[(2, 0.5, 0.5, 0.1, 0.1), (2, 0.6, 0.6, 0.1, 0.1), (0, 0.7, 0.7, 0.1, 0.1)]);
        let p = mixup_labels(&a, &b, 0.5).unwrap();
        assert_eq!(p.annotations.len(), 5);
        assert!(p.annotations.iter().all(|w| w.weight == 0.5));

        let p = mixup_labels(&a, &b, 1.0).unwrap();
        assert!(p.annotations.iter().filter(|w| w.source_id == "b").all(|w| w.weight == 0.0));
        let p = mixup_labels(&a, &b, 0.0).unwrap();
        assert!(p.annotations.iter().filter(|w| w.source_id == "a").all(|w| w.weight == 0.0));
        assert!(mixup_labels(&a, &b, 1.5).is_err());
    }

    #[test]
    fn beta_lambda_in_range() {
        let mut rng = PlanRng::new(1);
        let draws: Vec<f64> = (0..2000)
            .map(|_| sample_mixup_lambda(DEFAULT_MIXUP_ALPHA, &mut rng).unwrap())
            .collect();
        assert!(draws.iter().all(|l| (0.0..=1.0).contains(l)));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
    }
}
