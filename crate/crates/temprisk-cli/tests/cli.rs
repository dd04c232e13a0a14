//! End-to-end checks of the command-line surface: exit codes, output files,
//! and rerun determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_temprisk"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn temprisk")
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("temprisk-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn export_example1(dir: &Path) -> (PathBuf, PathBuf) {
    let out = run(&[
        "scenario",
        "--name",
        "example1",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (dir.join("signal.csv"), dir.join("constraint.spec"))
}

#[test]
fn eval_reproduces_worked_example() {
    let dir = tempdir("eval");
    let (signal, spec) = export_example1(&dir);
    let out = run(&[
        "eval",
        "--signal",
        signal.to_str().unwrap(),
        "--spec",
        spec.to_str().unwrap(),
        "--kind",
        "eta",
        "--r",
        "50",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["signed"], 12);
    assert_eq!(v["saturated"], false);
    assert!(v["checker_calls"].as_u64().unwrap() <= 101);

    let out = run(&[
        "eval",
        "--signal",
        signal.to_str().unwrap(),
        "--spec",
        spec.to_str().unwrap(),
        "--kind",
        "theta",
        "--r",
        "50",
        "--groups",
        "1;2",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["signed"], 3);
}

#[test]
fn missing_file_exits_3() {
    let out = run(&[
        "eval",
        "--signal",
        "/nonexistent/signal.csv",
        "--spec",
        "/nonexistent/spec.txt",
        "--kind",
        "eta",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bad_spec_exits_2() {
    let dir = tempdir("badspec");
    let spec = dir.join("bad.stl");
    std::fs::write(&spec, "G[2,1] pred{x[1]}\n").unwrap();
    let out = run(&["parse-check", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("reversed"), "stderr: {msg}");

    let truncated = dir.join("trunc.spec");
    std::fs::write(&truncated, "pred{x[1\n").unwrap();
    let out = run(&["parse-check", "--spec", truncated.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("column"), "stderr: {msg}");
}

#[test]
fn parse_check_is_canonicalizing() {
    let dir = tempdir("canon");
    let spec = dir.join("formula.stl");
    std::fs::write(
        &spec,
        "# sequencing\nF[0,1]( (pred{x[1] >= 0} | pred{x[2] >= 0}) & F[1,5] pred{x[1]} )\n",
    )
    .unwrap();
    let first = run(&["parse-check", "--spec", spec.to_str().unwrap(), "--dt", "0.1"]);
    assert!(first.status.success());
    let canonical = dir.join("canonical.stl");
    std::fs::write(&canonical, &first.stdout).unwrap();
    let second = run(&[
        "parse-check",
        "--spec",
        canonical.to_str().unwrap(),
        "--dt",
        "0.1",
    ]);
    assert!(second.status.success());
    assert_eq!(first.stdout, second.stdout, "canonical form must be stable");
}

#[test]
fn mc_outputs_are_deterministic_for_fixed_seed() {
    let dir = tempdir("mc-det");
    let args = [
        "mc",
        "--scenario",
        "tintersection:S2",
        "--d",
        "6",
        "--N",
        "300",
        "--seed",
        "9",
        "--beta",
        "0.9",
        "--delta",
        "0.05",
        "--out-dir",
    ];
    let mut argv: Vec<&str> = args.to_vec();
    let dir_str = dir.to_str().unwrap().to_string();
    argv.push(&dir_str);
    let out = run(&argv);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first: Vec<Vec<u8>> = ["report.json", "samples.csv", "hist.json"]
        .iter()
        .map(|f| std::fs::read(dir.join(f)).unwrap())
        .collect();
    let manifest_a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();

    let out = run(&argv);
    assert!(out.status.success());
    for (file, before) in ["report.json", "samples.csv", "hist.json"].iter().zip(&first) {
        let after = std::fs::read(dir.join(file)).unwrap();
        assert_eq!(&after, before, "{file} differs between identical runs");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(
        report["manifest"]["config_digest"].as_str().unwrap().len(),
        16
    );
    // manifest.json carries wall time and may differ between runs, but the
    // configuration digest must not
    let manifest_b: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest_a["config_digest"], manifest_b["config_digest"]);
}

#[test]
fn mc_insufficient_samples_exits_2_but_writes_samples() {
    let dir = tempdir("mc-short");
    let out = run(&[
        "mc",
        "--scenario",
        "tintersection:S1",
        "--d",
        "0",
        "--N",
        "10",
        "--beta",
        "0.98",
        "--delta",
        "0.01",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let samples = std::fs::read_to_string(dir.join("samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 11, "header plus ten costs");
    let report = std::fs::read_to_string(dir.join("report.json")).unwrap();
    assert!(report.contains("required_n"));
}

#[test]
fn custom_model_file_runs() {
    let dir = tempdir("model");
    let (signal, spec) = export_example1(&dir);
    let model = dir.join("model.json");
    std::fs::write(
        &model,
        serde_json::json!({
            "signal": signal,
            "spec": spec,
            "dt": 1.0,
            "groups": "1;2",
            "shifts": [
                {"uniform_int": {"d": 3}},
                {"poisson": {"lambda": 1.0}},
            ],
        })
        .to_string(),
    )
    .unwrap();
    let out = run(&[
        "mc",
        "--model",
        model.to_str().unwrap(),
        "--N",
        "200",
        "--r",
        "15",
        "--kind",
        "theta",
        "--beta",
        "0.9",
        "--delta",
        "0.1",
        "--out-dir",
        dir.join("out").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["n"], 200);
    assert_eq!(report["kind"], "theta");
}

#[test]
fn signal_json_and_csv_agree() {
    let dir = tempdir("sigjson");
    let (csv_path, spec) = export_example1(&dir);
    // convert the CSV to the JSON form through the library and evaluate both
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let signal = temprisk_json_roundtrip(&text);
    let json_path = dir.join("signal.json");
    std::fs::write(&json_path, signal).unwrap();
    let a = run(&[
        "eval",
        "--signal",
        csv_path.to_str().unwrap(),
        "--spec",
        spec.to_str().unwrap(),
        "--kind",
        "eta",
        "--r",
        "20",
    ]);
    let b = run(&[
        "eval",
        "--signal",
        json_path.to_str().unwrap(),
        "--spec",
        spec.to_str().unwrap(),
        "--kind",
        "eta",
        "--r",
        "20",
    ]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

fn temprisk_json_roundtrip(csv: &str) -> String {
    let s = temprisk::io::signal_from_csv(csv, 1.0).unwrap();
    temprisk::io::signal_to_json(&s)
}

#[test]
fn thread_cap_env_does_not_change_results() {
    let dir = tempdir("threads");
    let (signal, spec) = export_example1(&dir);
    let args = [
        "eval",
        "--signal",
        signal.to_str().unwrap(),
        "--spec",
        spec.to_str().unwrap(),
        "--kind",
        "theta",
        "--r",
        "30",
        "--groups",
        "1;2",
    ];
    let plain = run(&args);
    let capped = bin()
        .args(args)
        .env("TEMPRISK_THREADS", "1")
        .output()
        .unwrap();
    assert!(plain.status.success() && capped.status.success());
    assert_eq!(plain.stdout, capped.stdout);
}

#[test]
fn stl_eval_on_exported_servicing_scenario() {
    let dir = tempdir("servicing");
    let out = run(&[
        "scenario",
        "--name",
        "servicing",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = run(&[
        "eval",
        "--signal",
        dir.join("signal.csv").to_str().unwrap(),
        "--spec",
        dir.join("formula.stl").to_str().unwrap(),
        "--kind",
        "theta",
        "--r",
        "20",
        "--groups",
        "1,2,3,4;5,6,7,8",
        "--t",
        "0",
        "--dt",
        "0.1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["signed"], 5);
    assert_eq!(v["sign"], 1);
}
