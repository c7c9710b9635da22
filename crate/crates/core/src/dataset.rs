//! YOLO/Darknet label files and the JSON dataset manifest.
//!
//! A label file holds one object per line, `class_id cx cy w h`, with the box
//! in normalized center format. The manifest lists image entries and points
//! each one at its label file.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalized center-format box. Stored exactly as parsed (corners are not
/// clipped).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl NormBox {
    /// Builds a box, rejecting values outside `0 <= cx,cy <= 1`, `0 < w,h <= 1`.
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        let b = Self { cx, cy, w, h };
        match b.violation() {
            None => Ok(b),
            Some(msg) => Err(Error::Validation(msg)),
        }
    }

    /// Describes the first broken invariant, if any.
    pub fn violation(&self) -> Option<String> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        let in_size = |v: f64| v > 0.0 && v <= 1.0;
        if !in_unit(self.cx) {
            Some(format!("cx={} outside [0,1]", self.cx))
        } else if !in_unit(self.cy) {
            Some(format!("cy={} outside [0,1]", self.cy))
        } else if !in_size(self.w) {
            Some(format!("w={} outside (0,1]", self.w))
        } else if !in_size(self.h) {
            Some(format!("h={} outside (0,1]", self.h))
        } else {
            None
        }
    }

    pub fn x0(&self) -> f64 {
        self.cx - self.w / 2.0
    }
    pub fn y0(&self) -> f64 {
        self.cy - self.h / 2.0
    }
    pub fn x1(&self) -> f64 {
        self.cx + self.w / 2.0
    }
    pub fn y1(&self) -> f64 {
        self.cy + self.h / 2.0
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub class_id: usize,
    pub bbox: NormBox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Real,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageEntry {
    pub id: String,
    pub width_px: u32,
    pub height_px: u32,
    pub provenance: Provenance,
    /// Label file reference as written in the manifest.
    pub label_file: String,
    pub annotations: Vec<Annotation>,
}

impl ImageEntry {
    pub fn contains_class(&self, class_id: usize) -> bool {
        self.annotations.iter().any(|a| a.class_id == class_id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub class_names: Vec<String>,
    pub entries: Vec<ImageEntry>,
}

/// On-disk manifest layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestDescriptor {
    pub class_names: Vec<String>,
    pub entries: Vec<EntryDescriptor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryDescriptor {
    pub id: String,
    pub width_px: u32,
    pub height_px: u32,
    pub provenance: Provenance,
    pub label_file: String,
}

/// Parses a label file. `source_name` only appears in error messages.
pub fn parse_label_file(text: &str, n_classes: usize) -> Result<Vec<Annotation>> {
    parse_label_file_named(text, n_classes, "<label>")
}

pub fn parse_label_file_named(
    text: &str,
    n_classes: usize,
    source_name: &str,
) -> Result<Vec<Annotation>> {
    if n_classes == 0 {
        return Err(Error::Argument("n_classes must be at least 1".into()));
    }
    let parse_err = |line: usize, message: String| Error::Parse {
        source_name: source_name.to_string(),
        line,
        message,
    };

    let mut out = Vec::new();
    // `lines` strips both LF and CRLF terminators.
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(parse_err(
                line_no,
                format!("{} fields, expected 5", fields.len()),
            ));
        }
        let class_id: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad class id `{}`", fields[0])))?;
        let mut coords = [0f64; 4];
        for (slot, tok) in coords.iter_mut().zip(&fields[1..]) {
            // str::parse<f64> is locale-independent and only accepts `.`.
            *slot = tok
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad number `{tok}`")))?;
        }
        if class_id >= n_classes {
            return Err(Error::Validation(format!(
                "{source_name}: line {line_no}: class id {class_id} >= {n_classes} classes"
            )));
        }
        let bbox = NormBox::new(coords[0], coords[1], coords[2], coords[3]).map_err(|e| {
            Error::Validation(format!("{source_name}: line {line_no}: {}", strip(e)))
        })?;
        out.push(Annotation { class_id, bbox });
    }
    Ok(out)
}

fn strip(e: Error) -> String {
    match e {
        Error::Validation(m) => m,
        other => other.to_string(),
    }
}

/// Writes annotations back in label-file form. Floats use the shortest
/// representation that parses back to the same value.
pub fn format_label_file(annotations: &[Annotation]) -> String {
    let mut s = String::new();
    for a in annotations {
        let b = &a.bbox;
        let _ = writeln!(s, "{} {:?} {:?} {:?} {:?}", a.class_id, b.cx, b.cy, b.w, b.h);
    }
    s
}

/// Loads a manifest, reading label files through `read_label`.
pub fn load_manifest_with<F>(descriptor: &str, mut read_label: F) -> Result<DatasetManifest>
where
    F: FnMut(&str) -> std::io::Result<String>,
{
    let desc: ManifestDescriptor = serde_json::from_str(descriptor)?;
    if desc.class_names.is_empty() {
        return Err(Error::Validation("class_names is empty".into()));
    }
    let n_classes = desc.class_names.len();
    let mut seen = HashSet::new();
    let mut entries = Vec::with_capacity(desc.entries.len());
    for e in desc.entries {
        if !seen.insert(e.id.clone()) {
            return Err(Error::DuplicateId(e.id));
        }
        if e.width_px == 0 || e.height_px == 0 {
            return Err(Error::Entry {
                id: e.id,
                message: "image dimensions must be positive".into(),
            });
        }
        let text = read_label(&e.label_file).map_err(|err| Error::Entry {
            id: e.id.clone(),
            message: format!("cannot read label file `{}`: {err}", e.label_file),
        })?;
        let annotations =
            parse_label_file_named(&text, n_classes, &e.label_file).map_err(|err| Error::Entry {
                id: e.id.clone(),
                message: err.to_string(),
            })?;
        entries.push(ImageEntry {
            id: e.id,
            width_px: e.width_px,
            height_px: e.height_px,
            provenance: e.provenance,
            label_file: e.label_file,
            annotations,
        });
    }
    Ok(DatasetManifest {
        class_names: desc.class_names,
        entries,
    })
}

/// Loads a manifest whose label paths are relative to `base_dir`.
pub fn load_manifest(descriptor: &str, base_dir: &Path) -> Result<DatasetManifest> {
    load_manifest_with(descriptor, |p| std::fs::read_to_string(base_dir.join(p)))
}

pub fn load_manifest_file(path: &Path) -> Result<DatasetManifest> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    load_manifest(&text, base)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub entry_id: Option<String>,
    pub annotation_index: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl DatasetManifest {
    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|n| n == name)
    }

    pub fn entry(&self, id: &str) -> Option<&ImageEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn to_descriptor(&self) -> ManifestDescriptor {
        ManifestDescriptor {
            class_names: self.class_names.clone(),
            entries: self
                .entries
                .iter()
                .map(|e| EntryDescriptor {
                    id: e.id.clone(),
                    width_px: e.width_px,
                    height_px: e.height_px,
                    provenance: e.provenance,
                    label_file: e.label_file.clone(),
                })
                .collect(),
        }
    }

    /// Manifest JSON. Label files are not written; see [`format_label_file`].
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_descriptor())?)
    }

    /// Checks every invariant and collects the violations.
    pub fn validate(&self) -> ValidationReport {
        validate_manifest(self)
    }
}

pub fn validate_manifest(m: &DatasetManifest) -> ValidationReport {
    let mut violations = Vec::new();
    if m.class_names.is_empty() {
        violations.push(Violation {
            entry_id: None,
            annotation_index: None,
            message: "class_names is empty".into(),
        });
    }
    let mut seen = HashSet::new();
    for e in &m.entries {
        if !seen.insert(e.id.as_str()) {
            violations.push(Violation {
                entry_id: Some(e.id.clone()),
                annotation_index: None,
                message: "duplicate id".into(),
            });
        }
        if e.width_px == 0 || e.height_px == 0 {
            violations.push(Violation {
                entry_id: Some(e.id.clone()),
                annotation_index: None,
                message: format!("non-positive dimensions {}x{}", e.width_px, e.height_px),
            });
        }
        for (i, a) in e.annotations.iter().enumerate() {
            if a.class_id >= m.class_names.len() {
                violations.push(Violation {
                    entry_id: Some(e.id.clone()),
                    annotation_index: Some(i),
                    message: format!(
                        "class id {} >= {} classes",
                        a.class_id,
                        m.class_names.len()
                    ),
                });
            }
            if let Some(msg) = a.bbox.violation() {
                violations.push(Violation {
                    entry_id: Some(e.id.clone()),
                    annotation_index: Some(i),
                    message: msg,
                });
            }
        }
    }
    ValidationReport { violations }
}
