mod support;

use longtail_core::dataset::{Annotation, DatasetManifest, ImageEntry, NormBox, Provenance};
use serde_json::Value;
use support::*;

fn image(id: &str, classes: &[usize]) -> ImageEntry {
    ImageEntry {
        id: id.into(),
        width_px: 640,
        height_px: 480,
        provenance: Provenance::Real,
        label_file: format!("labels/{id}.txt"),
        annotations: classes
            .iter()
            .map(|&c| Annotation { class_id: c, bbox: NormBox::new(0.5, 0.5, 0.2, 0.2).unwrap() })
            .collect(),
    }
}

fn manifest(classes: usize, images: &[(&str, &[usize])]) -> DatasetManifest {
    DatasetManifest {
        class_names: (0..classes).map(|c| format!("class{c}")).collect(),
        entries: images.iter().map(|(id, c)| image(id, c)).collect(),
    }
}

fn small() -> DatasetManifest {
    manifest(2, &[("a", &[0]), ("b", &[0, 1]), ("c", &[1]), ("d", &[0])])
}

fn stderr_json(o: &std::process::Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("structured error on stderr")
}

#[test]
fn plan_cas_prints_plan() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), "m.json", &small());
    let o = run(&["plan", "--strategy", "cas", "--manifest", s(&m), "--batch", "64", "--seed", "7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["strategy"], "cas");
    assert_eq!(v["seed"], 7);
}

#[test]
fn cas_with_empty_class_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), "m.json", &manifest(3, &[("a", &[0]), ("b", &[1])]));
    let o = run(&["plan", "--strategy", "cas", "--manifest", s(&m), "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr_json(&o);
    assert!(err["error"]["message"].as_str().unwrap().contains("class2"), "{err}");
}

#[test]
fn unknown_command_is_usage_error() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn missing_required_flag_is_usage_error() {
    let o = run(&["plan", "--strategy", "rfs"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_json(&o)["error"]["message"].as_str().unwrap().contains("manifest"));
}

#[test]
fn invalid_manifest_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), "m.json", &small());
    std::fs::write(dir.path().join("labels/a.txt"), "0 0.5 0.5 0.2\n").unwrap();
    let o = run(&["analyze", "--manifest", s(&m)]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr_json(&o);
    assert!(err["error"]["message"].as_str().unwrap().contains("line 1"), "{err}");
}

#[test]
fn analyze_writes_report_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), "m.json", &small());
    let out = dir.path().join("report.json");
    let table = dir.path().join("report.txt");
    let o = run(&["analyze", "--manifest", s(&m), "--out", s(&out), "--table-out", s(&table)]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["report"]["total_images"], 4);
    assert_eq!(v["report"]["total_instances"], 5);
    assert_eq!(v["distribution"]["instance_counts"], serde_json::json!([3, 2]));
    assert!(std::fs::read_to_string(table).unwrap().contains("class0"));
}

#[test]
fn eval_det_report_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), "gt.json", &small());
    let dets = dir.path().join("dets.jsonl");
    std::fs::write(
        &dets,
        concat!(
            r#"{"image_id":"a","class_id":0,"cx":0.5,"cy":0.5,"w":0.2,"h":0.2,"conf":0.9}"#,
            "\n",
            r#"{"image_id":"c","class_id":1,"cx":0.5,"cy":0.5,"w":0.2,"h":0.2,"conf":0.8}"#,
            "\n"
        ),
    )
    .unwrap();
    let out = dir.path().join("eval.json");
    let table = dir.path().join("eval.txt");
    let o = run(&["eval-det", "--gt", s(&m), "--dets", s(&dets), "--out", s(&out), "--table-out", s(&table), "--percent"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["thresholds"].as_array().unwrap().len(), 10);
    // class0: 1 of 3 GT found, class1: 1 of 2.
    let map = v["map50_95"].as_f64().unwrap();
    assert!((map - (1.0 / 3.0 + 0.5) / 2.0).abs() < 0.01, "{map}");
    assert!(std::fs::read_to_string(table).unwrap().contains("All classes"));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(dir.path(), "m.json", &small());
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        serde_json::json!({"strategy": "baseline", "manifest": m, "batch": 2, "seed": 5}).to_string(),
    )
    .unwrap();
    let o = run(&["--config", s(&cfg), "plan", "--seed", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["strategy"], "baseline");
    assert_eq!(v["seed"], 9);
    assert_eq!(v["batch_size"], 2);

    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    assert_ne!(run(&["--config", s(&cfg), "plan"]).status.code(), Some(0));
}

#[test]
fn remap_crops_and_drops() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = small();
    m.entries[0].annotations.push(Annotation { class_id: 1, bbox: NormBox::new(0.05, 0.05, 0.1, 0.1).unwrap() });
    let mp = write_manifest(dir.path(), "m.json", &m);
    let crops = dir.path().join("crops.json");
    std::fs::write(&crops, r#"{"a": {"x0": 160, "y0": 120, "w": 320, "h": 240}}"#).unwrap();
    let out = dir.path().join("out/cropped.json");
    let o = run(&["remap", "--manifest", s(&mp), "--crops", s(&crops), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = longtail_core::dataset::load_manifest_file(&out).unwrap();
    let a = r.entry("a").unwrap();
    assert_eq!((a.width_px, a.height_px), (320, 240));
    assert_eq!(a.annotations.len(), 1);
    let b = a.annotations[0].bbox;
    assert!((b.cx - 0.5).abs() < 1e-12 && (b.w - 0.4).abs() < 1e-12);
    for (got, want) in r.entry("b").unwrap().annotations.iter().zip(&m.entries[1].annotations) {
        assert_eq!(got.class_id, want.class_id);
        assert!((got.bbox.w - want.bbox.w).abs() < 1e-12);
    }
}

#[test]
fn eval_gen_clip_only() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("img.csv");
    let txt = dir.path().join("txt.csv");
    std::fs::write(&img, "a,b\n1,0\n0,1\n").unwrap();
    std::fs::write(&txt, "a,b\n1,0\n1,0\n").unwrap();
    let o = run(&["eval-gen", "--img-emb", s(&img), "--txt-emb", s(&txt), "--clip-scale", "hessel_w"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["clip_score"].as_f64().unwrap() - 1.25).abs() < 1e-12);
    assert!(v.get("fid").is_none());
}
