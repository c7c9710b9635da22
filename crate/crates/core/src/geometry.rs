//! Box arithmetic: IoU, crop remapping, clipping.

use serde::{Deserialize, Serialize};

use crate::dataset::NormBox;
use crate::error::{Error, Result};

/// Default minimum visible fraction for [`remap_crop`].
pub const DEFAULT_MIN_VISIBLE: f64 = 0.25;

/// Axis-aligned rectangle in pixels, top-left origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelRect {
    pub x0: f64,
    pub y0: f64,
    pub w: f64,
    pub h: f64,
}

impl PixelRect {
    pub fn new(x0: f64, y0: f64, w: f64, h: f64) -> Result<Self> {
        if !(w > 0.0 && h > 0.0) || !x0.is_finite() || !y0.is_finite() || !w.is_finite() || !h.is_finite() {
            return Err(Error::Argument(format!(
                "rectangle ({x0}, {y0}, {w}, {h}) must be finite with positive size"
            )));
        }
        Ok(Self { x0, y0, w, h })
    }

    pub fn x1(&self) -> f64 {
        self.x0 + self.w
    }

    pub fn y1(&self) -> f64 {
        self.y0 + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

/// Intersection over union of two normalized boxes.
pub fn iou(a: &NormBox, b: &NormBox) -> f64 {
    let iw = (a.x1().min(b.x1()) - a.x0().max(b.x0())).max(0.0);
    let ih = (a.y1().min(b.y1()) - a.y0().max(b.y0())).max(0.0);
    let inter = iw * ih;
    // Areas from the same corner arithmetic so that iou(a, a) is exactly 1.
    let area = |n: &NormBox| (n.x1() - n.x0()) * (n.y1() - n.y0());
    let union = area(a) + area(b) - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Clips the box corners to the unit square. `None` when nothing remains.
pub fn clip_unit(b: &NormBox) -> Option<NormBox> {
    let x0 = b.x0().max(0.0);
    let y0 = b.y0().max(0.0);
    let x1 = b.x1().min(1.0);
    let y1 = b.y1().min(1.0);
    if x1 <= x0 || y1 <= y0 {
        return None;
    }
    Some(from_corners(x0, y0, x1, y1))
}

pub(crate) fn from_corners(x0: f64, y0: f64, x1: f64, y1: f64) -> NormBox {
    NormBox {
        cx: (x0 + x1) / 2.0,
        cy: (y0 + y1) / 2.0,
        w: x1 - x0,
        h: y1 - y0,
    }
}

/// Maps a box from a `src_w x src_h` image into the crop window.
///
/// Returns `Ok(None)` when the box is dropped: nothing of it lies inside the
/// crop, or the visible part is less than `min_visible` of its area.
pub fn remap_crop(
    bbox: &NormBox,
    src_w: f64,
    src_h: f64,
    crop: &PixelRect,
    min_visible: f64,
) -> Result<Option<NormBox>> {
    if !(0.0..=1.0).contains(&min_visible) {
        return Err(Error::Argument(format!("min_visible {min_visible} outside [0,1]")));
    }
    if !(src_w > 0.0 && src_h > 0.0) {
        return Err(Error::Argument("source dimensions must be positive".into()));
    }
    if !(crop.w > 0.0 && crop.h > 0.0)
        || crop.x0 < 0.0
        || crop.y0 < 0.0
        || crop.x1() > src_w
        || crop.y1() > src_h
    {
        return Err(Error::Argument(format!(
            "crop ({}, {}, {}, {}) outside the {src_w}x{src_h} source",
            crop.x0, crop.y0, crop.w, crop.h
        )));
    }

    let bx0 = bbox.x0() * src_w;
    let by0 = bbox.y0() * src_h;
    let bx1 = bbox.x1() * src_w;
    let by1 = bbox.y1() * src_h;

    let ix0 = bx0.max(crop.x0);
    let iy0 = by0.max(crop.y0);
    let ix1 = bx1.min(crop.x1());
    let iy1 = by1.min(crop.y1());
    if ix1 <= ix0 || iy1 <= iy0 {
        return Ok(None);
    }
    let visible = (ix1 - ix0) * (iy1 - iy0) / ((bx1 - bx0) * (by1 - by0));
    if visible < min_visible {
        return Ok(None);
    }

    let x0 = ((ix0 - crop.x0) / crop.w).clamp(0.0, 1.0);
    let y0 = ((iy0 - crop.y0) / crop.h).clamp(0.0, 1.0);
    let x1 = ((ix1 - crop.x0) / crop.w).clamp(0.0, 1.0);
    let y1 = ((iy1 - crop.y0) / crop.h).clamp(0.0, 1.0);
    if x1 <= x0 || y1 <= y0 {
        return Ok(None);
    }
    Ok(Some(from_corners(x0, y0, x1, y1)))
}

/// Uniform resizing leaves normalized coordinates untouched. Pipelines call
/// this to record the resize step explicitly.
pub fn resize_invariance_check(bbox: NormBox) -> NormBox {
    bbox
}
