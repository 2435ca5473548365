use chordal_experiments::{run, Config, EXPERIMENTS};

fn config(text: &str) -> Config {
    text.parse().unwrap()
}

fn small(name: &str) -> Config {
    config(match name {
        "growth" => "t = 1\nk = 1\nn_grid = 20, 40, 80\nexponent_range = 40, 80\nsize_prob_range = 40, 80\ntol.inv_rho = 1e-3",
        "diameter" => "t = 1\nk = 1\nn_grid = 50, 100\nreplicas = 40\nseed = 3\ntol.tail_rate = 0",
        "clt" => "t = 2\nk = 1\nn_grid = 50, 100, 200\nreplicas = 20\nseed = 3",
        "local" => "t = 1\nk = 1\nn_grid = 100, 200\nreplicas = 20\nmarks = 2000\ntv_n = 200\nmax_size = 5\ntol.tv = 0.2",
        "distance" => "t = 1\nk = 1\nn_grid = 100, 200\nreplicas = 10\nspine_length = 30\nspine_replicas = 20\ntol.gamma_identity = 1e-12",
        "profile" => "t = 2\nk = 1\nn_grid = 100, 200\nreplicas = 10\nseed = 5",
        other => panic!("no config for {other}"),
    })
}

#[test]
fn every_experiment_runs_and_reports() {
    for name in EXPERIMENTS {
        let report = run(name, &small(name), None).unwrap();
        assert_eq!(report.experiment, name);
        assert!(!report.checks.is_empty(), "{name} has no checks");
        assert!(report.to_json().unwrap().ends_with('\n'));
    }
}

#[test]
fn trees_have_exact_identities() {
    let report = run("distance", &small("distance"), None).unwrap();
    for name in ["height_identity", "gamma_identity"] {
        let c = report.checks.iter().find(|c| c.name == name).unwrap();
        assert_eq!(c.passed, Some(true), "{name}");
    }
}

#[test]
fn sequential_and_parallel_reports_agree() {
    for name in ["profile", "diameter"] {
        let mut seq = small(name);
        seq.set("execution", "sequential");
        let mut par = small(name);
        par.set("execution", "parallel");
        let a = run(name, &seq, None).unwrap();
        let b = run(name, &par, None).unwrap();
        assert_eq!(a.summaries, b.summaries, "{name}");
        assert_eq!(a.checks, b.checks, "{name}");
    }
}

#[test]
fn reports_and_tables_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let report = run("profile", &small("profile"), Some(dir.path())).unwrap();
    let json = std::fs::read_to_string(dir.path().join("profile.json")).unwrap();
    assert_eq!(json, report.to_json().unwrap());
    let csv = std::fs::read_to_string(dir.path().join("profile_samples.csv")).unwrap();
    assert!(csv.starts_with("n,replica,black,max_white_degree,b_0"));
    assert_eq!(csv.lines().count(), 1 + 20);
}

#[test]
fn different_seeds_give_different_samples() {
    let a = run("profile", &small("profile"), None).unwrap();
    let mut cfg = small("profile");
    cfg.set("seed", 6);
    let b = run("profile", &cfg, None).unwrap();
    assert_ne!(a.summaries, b.summaries);
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(run("profile", &config("t = 2\nk = 1\nn_grid = 200, 100"), None).is_err());
    assert!(run("profile", &config("t = 2\nk = 1"), None).is_err());
    assert!(run("local", &config("t = 1\nk = 1\nn_grid = 100\ntv_n = 50"), None).is_err());
    assert!(run("nonexistent", &small("profile"), None).is_err());
}
