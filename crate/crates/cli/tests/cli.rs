use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_axial-qcd"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn resources_closed_form_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["resources", "--nc", "3", "--nf", "2", "--l", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("closed form agrees: true"));
    assert_eq!(json(&dir.path().join("resources.json"))["agree"], true);
    let m = json(&dir.path().join("resources_manifest.json"));
    assert_eq!(m["command"], "resources");
}

#[test]
fn both_couplings_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["spectrum", "--nf", "1", "--g", "1", "--g2", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_state_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["evolve", "--nf", "1", "--source", "nowhere"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.csv");
    let out = run(dir.path(), &["mitigate", "--input", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn mitigation_at_the_floor_is_a_solver_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    std::fs::write(&input, "p_phys,p_mit\n0.3,0.125\n").unwrap();
    let out = run(dir.path(), &["mitigate", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn mitigate_writes_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    std::fs::write(&input, "t,p_phys,p_mit\n1.0,0.42,1.0\n2.0,0.3,0.5625\n").unwrap();
    let out = run(dir.path(), &["mitigate", "--input", input.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut r = csv::Reader::from_path(dir.path().join("mitigated.csv")).unwrap();
    let rows: Vec<Vec<f64>> = r.records().map(|rec| rec.unwrap().iter().map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2);
    assert!((rows[0][3] - 0.42).abs() < 1e-6);
    // lambda = 0.5: (0.3 - 0.0625) / 0.5
    assert!((rows[1][3] - 0.475).abs() < 1e-6);
}

#[test]
fn single_flavor_spectrum_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["spectrum", "--nf", "1", "--g", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("spectrum.json"));
    assert_eq!(report["params"]["nf"], 1);
    assert!(report["table"]["e_vac"].as_f64().unwrap() < 0.0);
    let m = json(&dir.path().join("spectrum_manifest.json"));
    assert_eq!(m["command"], "spectrum");
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
    assert!(dir.path().join("spectrum_states.csv").exists());
}

#[test]
fn config_file_with_unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("model.toml");
    std::fs::write(&cfg, "nc = 3\nnf = 1\nl = 1\nmasses = [1.0]\ng = 1.0\ncolour = 2\n").unwrap();
    let out = run(dir.path(), &["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exhaustive_anneal_on_single_flavor() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["anneal", "--nf", "1", "--g", "1", "--sampler", "exhaustive", "--bits", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = json(&dir.path().join("anneal_manifest.json"));
    assert_eq!(m["seeds"][0], 0);
}
