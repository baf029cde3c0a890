use super::*;

const SLAB: &str = r#"{
  "dim": 3,
  "bounds": {"min": [-1, -2, -2], "max": [10, 2, 2]},
  "medium1": {"kind": "minkowski"},
  "medium2": {"kind": "isotropic", "index": 1.5},
  "interface": {"kind": "plane", "normal": [0, 1, 0], "offset": 0},
  "rays": [{"start": [0, -1, -0.5], "direction": [0.8, 0.6]}],
  "step": 0.05
}"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn scene_errors_carry_the_json_path() {
    let bad = SLAB.replace("\"offset\": 0", "\"offset\": 0, \"tilt\": 1");
    match SceneFile::parse(&bad) {
        Err(Error::Schema { path, .. }) => assert_eq!(path, "interface"),
        other => panic!("{other:?}"),
    }
    let bad = SLAB.replace("[0.8, 0.6]", "[0.8]");
    match SceneFile::parse(&bad) {
        Err(Error::Schema { path, .. }) => assert_eq!(path, "rays[0].direction"),
        other => panic!("{other:?}"),
    }
    let bad = SLAB.replace("\"index\": 1.5", "\"index\": \"high\"");
    assert!(matches!(SceneFile::parse(&bad), Err(Error::Schema { .. })));
}

#[test]
fn trace_writes_report_and_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write(dir.path(), "slab.json", SLAB);
    let out = dir.path().join("out");
    let code = run(["conesnell", "trace", "--scene", scene.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let hash = sha256_hex(SLAB.as_bytes());
    assert_eq!(report["scene_sha256"], hash);
    let ev = &report["rays"][0][0]["events"][0];
    assert_eq!(ev["refraction_case"], "A_i");
    assert_eq!(ev["straight_oriented"], true);
    assert!(out.join("trajectories.json").exists());

    let code = run([
        "conesnell", "trace", "--scene", scene.to_str().unwrap(), "--out", out.to_str().unwrap(), "--format", "svg",
    ]);
    assert_eq!(code, 0);
    let svg = fs::read_to_string(out.join("trace.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(run(["conesnell", "trace", "--scene", missing.to_str().unwrap()]), 6);
    let bad = write(dir.path(), "bad.json", "{\"dim\": 3}");
    assert_eq!(run(["conesnell", "trace", "--scene", bad.to_str().unwrap()]), 2);
    let far = SLAB.replace("\"step\": 0.05", "\"step\": 0.05, \"receiver\": {\"kind\": \"line\", \"origin\": [0, 1, 1.9], \"velocity\": [1, 0, 0]}");
    let far = write(dir.path(), "far.json", &far);
    let out = dir.path().join("o");
    assert_eq!(run(["conesnell", "trace", "--scene", far.to_str().unwrap(), "--out", out.to_str().unwrap()]), 4);
    assert_eq!(exit_code(&Error::Trapped("x".into()).at_event(3)), 5);
    assert_eq!(exit_code(&Error::SolverFailure("x".into())), 3);
}

#[test]
fn verify_classical_passes() {
    let r = verify_classical(1.0, 1.5, 5.0).unwrap();
    assert_eq!(r["passed"], true, "{}", r["max_delta_deg"]);
    assert_eq!(r["sweep"].as_array().unwrap().len(), 17);
    let r = verify_classical(1.5, 1.0, 5.0).unwrap();
    assert_eq!(r["passed"], true, "{}", r["max_delta_deg"]);
    assert_eq!(r["critical_angle_deg"], 41.810315);
    assert_eq!(r["sweep"][5]["refraction_deg"], 48.590378);
}

#[test]
fn report_scene_echo_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write(dir.path(), "slab.json", SLAB);
    let out = dir.path().join("a");
    assert_eq!(run(["conesnell", "trace", "--scene", scene.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let first: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let echo = write(dir.path(), "echo.json", &serde_json::to_string(&first["scene"]).unwrap());
    let out2 = dir.path().join("b");
    assert_eq!(run(["conesnell", "trace", "--scene", echo.to_str().unwrap(), "--out", out2.to_str().unwrap()]), 0);
    let second: serde_json::Value = serde_json::from_str(&fs::read_to_string(out2.join("report.json")).unwrap()).unwrap();
    assert_eq!(first["rays"], second["rays"]);
    assert_eq!(first["scene"], second["scene"]);
}

#[test]
fn grid_command_runs_a_convergence_study() {
    let dir = tempfile::tempdir().unwrap();
    let text = SLAB.replace("\"index\": 1.5", "\"index\": 1.5").replace(
        "{\"kind\": \"minkowski\"}",
        "{\"kind\": \"isotropic\", \"index\": {\"linear\": {\"constant\": 1.0, \"gradient\": [0, 0.2, 0.1]}}}",
    );
    let scene = write(dir.path(), "g.json", &text);
    let out = dir.path().join("g");
    let code = run([
        "conesnell", "grid", "--scene", scene.to_str().unwrap(), "--resolution", "4,8", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["rays"][0]["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn classify_and_snell_commands() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write(dir.path(), "slab.json", SLAB);
    let s = scene.to_str().unwrap();
    assert_eq!(run(["conesnell", "classify", "--scene", s, "--point", "0,0,0", "--direction", "0.8,0.6"]), 0);
    assert_eq!(run(["conesnell", "classify", "--scene", s, "--point", "0,1,0"]), 2);
    assert_eq!(run(["conesnell", "snell", "--scene", s, "--point", "0,0,0", "--direction", "0.8,0.6", "--reflect"]), 0);
    assert_eq!(run(["conesnell", "snell", "--scene", s, "--point", "0,0,0", "--direction", "0.8,0.6"]), 0);
    assert_eq!(run(["conesnell", "snell", "--scene", s, "--point", "0,0"]), 2);
}
