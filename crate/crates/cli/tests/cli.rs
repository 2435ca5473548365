use std::process::{Command, Output};

fn chordal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chordal")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn enumerate_with_oracle_matches() {
    let o = chordal(&["enumerate", "--t", "2", "--k", "1", "--n-max", "8", "--oracle-check", "6"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,count,oracle_count,match"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[0], ["1", "1", "1", "true"]);
    assert_eq!(rows[3], ["4", "34", "34", "true"]);
    assert!(rows[..6].iter().all(|r| r[3] == "true"));
    assert_eq!(rows[7][2], "");
}

#[test]
fn enumerate_counts_labelled_trees() {
    let o = chordal(&["enumerate", "--t", "1", "--k", "1", "--n-max", "6"]);
    assert_eq!(stdout(&o), "n,count\n1,1\n2,1\n3,3\n4,16\n5,125\n6,1296\n");
}

#[test]
fn constants_are_json() {
    let o = chordal(&["constants", "--t", "1", "--k", "1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rho = v["rho"]["value"].as_f64().unwrap();
    assert!((rho - (-1.0f64).exp()).abs() < 1e-9);
}

#[test]
fn samples_follow_the_schema_and_are_reproducible() {
    let args = ["sample", "--t", "2", "--k", "1", "--n", "30", "--count", "3", "--seed", "9", "--deroot", "reweight"];
    let a = stdout(&chordal(&args));
    assert_eq!(a, stdout(&chordal(&args)));
    let records: Vec<serde_json::Value> = a.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 3);
    for (i, r) in records.iter().enumerate() {
        let keys: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["edges", "labels", "n", "root_clique", "seed"]);
        assert_eq!(r["n"], 31);
        assert_eq!(r["seed"], 9 + i as u64);
        assert!(r["root_clique"].is_null());
        let edges: Vec<(u32, u32)> = serde_json::from_value(r["edges"].clone()).unwrap();
        assert!(edges.windows(2).all(|w| w[0] < w[1]) && edges.iter().all(|e| e.0 < e.1));
    }
}

#[test]
fn rooted_samples_keep_the_root_clique() {
    let o = chordal(&["sample", "--t", "2", "--k", "2", "--n", "10", "--mode", "recursive-exact", "--seed", "4"]);
    let r: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(r["root_clique"], serde_json::json!([0, 1]));
    assert_eq!(r["n"], 12);
}

#[test]
fn dot_output_goes_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.dot");
    let o = chordal(&["sample", "--t", "1", "--k", "1", "--n", "5", "--format", "dot", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let dot = std::fs::read_to_string(path).unwrap();
    assert!(dot.starts_with("graph") && dot.matches("--").count() == 5);
}

#[test]
fn experiment_exit_code_reflects_tolerances() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.conf");
    let base = "t = 2\nk = 1\nn_grid = 50, 100\nreplicas = 8\n";
    std::fs::write(&cfg, format!("{base}tol.black_density = 0.5\n")).unwrap();
    let out = dir.path().join("out");
    std::fs::create_dir(&out).unwrap();
    let o = chordal(&["experiment", "profile", "--config", cfg.to_str().unwrap(), "--seed", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("profile.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 2);
    assert!(out.join("profile_samples.csv").exists());

    std::fs::write(&cfg, format!("{base}tol.black_density = 1e-9\n")).unwrap();
    let o = chordal(&["experiment", "profile", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL black_density"));
}

#[test]
fn bad_input_is_an_error() {
    assert_eq!(chordal(&["experiment", "profile", "--config", "/nonexistent.conf"]).status.code(), Some(2));
    assert_eq!(chordal(&["enumerate", "--t", "1", "--k", "1", "--n-max", "12", "--oracle-check", "12"]).status.code(), Some(2));
    assert!(!chordal(&["experiment", "bogus", "--config", "x"]).status.success());
}
