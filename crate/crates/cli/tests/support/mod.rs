//! Fixture files on disk and helpers to drive the `longtail` binary.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use longtail_core::dataset::{format_label_file, DatasetManifest};

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_longtail"))
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn longtail")
}

/// Writes the manifest as `<dir>/<name>` with its label files beside it.
pub fn write_manifest(dir: &Path, name: &str, m: &DatasetManifest) -> PathBuf {
    for e in &m.entries {
        let p = dir.join(&e.label_file);
        std::fs::create_dir_all(p.parent().unwrap()).unwrap();
        std::fs::write(p, format_label_file(&e.annotations)).unwrap();
    }
    let path = dir.join(name);
    std::fs::write(&path, m.to_json().unwrap()).unwrap();
    path
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
