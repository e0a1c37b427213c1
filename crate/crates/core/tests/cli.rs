//! End-to-end checks of the `fermicull` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fermicull(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fermicull")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn exit_codes() {
    assert_eq!(fermicull(&["--help"]).status.code(), Some(0));
    assert_eq!(fermicull(&["no-such-command"]).status.code(), Some(64));
    assert_eq!(fermicull(&["spectrum", "--z", "abc"]).status.code(), Some(64));
    let bad = fermicull(&["spectrum", "--z=-4", "--f", "0.5"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(!bad.stderr.is_empty());
    assert_eq!(fermicull(&["spectrum", "--z", "4.4", "--f", "0.5"]).status.code(), Some(0));
    assert_eq!(fermicull(&["--config", "/nonexistent/c.json", "dfg-estimates"]).status.code(), Some(2));
}

#[test]
fn spectrum_flags_two_peaks_for_a_two_level_trap() {
    let o = fermicull(&["spectrum", "--z", "4.4", "--f", "0.5"]);
    let text = stdout(&o);
    assert!(text.starts_with('#'));
    let flagged = rows(&text).iter().filter(|l| !l.rsplit(',').next().unwrap().trim().is_empty()).count();
    assert_eq!(flagged, 2, "{text}");
}

#[test]
fn resonances_json_lists_both_levels() {
    let o = fermicull(&["resonances", "--z", "4.4", "--f", "0.5", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let levels = v.as_array().unwrap();
    assert_eq!(levels.len(), 2);
    let g0 = levels[0]["gamma"].as_f64().unwrap();
    let g1 = levels[1]["gamma"].as_f64().unwrap();
    assert!(g0 > 0.0 && g1 > 10.0 * g0);
}

#[test]
fn fidelity_map_has_one_row_per_cell() {
    let o = fermicull(&["fidelity-map", "--zmin", "4.4", "--zmax", "4.8", "--fmin", "0.5", "--fmax", "0.6", "--nz", "2", "--nf", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with('#'));
    assert_eq!(lines.len(), 5);
}

#[test]
fn units_convert_reports_the_oscillator_length() {
    let o = fermicull(&["units-convert", "--omega-hz", "1000", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let x0_um = v["units"]["x0"].as_f64().unwrap() * 1e6;
    assert!((x0_um - 1.2966).abs() < 1e-3, "{text}");
}

#[test]
fn flags_override_config_and_manifest_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"z": 4.4, "f": 0.5, "points": 200}"#).unwrap();
    let out = dir.path().join("spec.csv");
    let o = fermicull(&["--config", cfg.to_str().unwrap(), "spectrum", "--f", "0.6", "--out", out.to_str().unwrap(), "--plot"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("spec.csv.manifest.json")).unwrap()).unwrap();
    let args = &manifest["command"]["spectrum"];
    assert_eq!(args["z"].as_f64(), Some(4.4));
    assert_eq!(args["f"].as_f64(), Some(0.6));
    assert_eq!(args["points"].as_u64(), Some(200));
    assert!(manifest["version"].is_string());
    assert!(manifest["timings"]["wall_seconds"].as_f64().unwrap() >= 0.0);
    assert!(fs::read_to_string(&out).unwrap().starts_with('#'));
    let gp = fs::read_to_string(dir.path().join("spec.csv.gp")).unwrap();
    assert!(gp.contains("spec.csv"));
}

#[test]
fn every_csv_output_starts_with_a_header() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 7] = [
        &["spectrum", "--z", "4.4", "--f", "0.5"],
        &["resonances", "--z", "4.4", "--f", "0.5"],
        &["survival", "--z", "4.4", "--f", "0.5", "--samples", "20"],
        &["fidelity-map", "--nz", "2", "--nf", "2"],
        &["dfg-estimates"],
        &["split-gap", "--nd", "3", "--nf", "2", "--spacing", "0.02"],
        &["units-convert", "--length", "2"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let out = dir.path().join(format!("r{i}.csv"));
        let mut full: Vec<&str> = args.to_vec();
        let out_s = out.to_str().unwrap().to_owned();
        full.extend(["--out", &out_s]);
        let o = fermicull(&full);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let text = fs::read_to_string(&out).unwrap();
        assert!(text.starts_with('#'), "{args:?}");
        assert!(Path::new(&format!("{out_s}.manifest.json")).exists());
    }
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let args = ["fidelity-map", "--nz", "3", "--nf", "3"];
    let one = fermicull(&[&["--threads", "1"], &args[..]].concat());
    let four = fermicull(&[&["--threads", "4"], &args[..]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(fermicull(&["--threads", "0", "dfg-estimates"]).status.code(), Some(2));
}
