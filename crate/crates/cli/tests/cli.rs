use std::fs;
use std::process::{Command, Output};

fn pcosync(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcosync"))
        .args(args)
        .env_remove("PCOSYNC_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn simulate_writes_arc_json() {
    let dir = tempfile::tempdir().unwrap();
    let arc = dir.path().join("arc.json");
    let out = pcosync(&[
        "simulate", "--graph", "cycle:12", "--T", "1", "--rule", "binary", "--r", "uniform",
        "--trigger", "vertex:0.5", "--seed", "42", "--max-time", "500", "--out", arc.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("sync_time:") && stdout.contains("jumps:") && stdout.contains("final_V: 0"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(arc).unwrap()).unwrap();
    assert_eq!(json["config_echo"]["master_seed"], 42);
    assert_eq!(json["final_v"], 0.0);
    assert_eq!(json["terminated_by"], "synchronized");
    assert_eq!(json["events"].as_array().unwrap().len() as u64, json["jumps"].as_u64().unwrap());
    assert_eq!(json["config_echo"]["resolved"]["rule"]["r"].as_array().unwrap().len(), 12);
}

#[test]
fn validation_errors_exit_2() {
    assert_eq!(code(&pcosync(&["simulate", "--graph", "cycle:12", "--trigger", "vertex:1.0"])), 2);
    assert_eq!(code(&pcosync(&["montecarlo", "--graph", "cycle:6", "--runs", "0"])), 2);
    assert_eq!(code(&pcosync(&["compare", "--slope-sweep", "0:0.6:0.1", "--n", "10", "--runs", "1"])), 2);
    assert_eq!(code(&pcosync(&["compare", "--rules", "linear:0.3:0.7", "--n", "10", "--runs", "1"])), 2);
    assert_eq!(code(&pcosync(&["simulate", "--graph", "star:5"])), 2);
    assert_eq!(code(&pcosync(&["simulate", "--graph", "cycle:4", "--r", "0.1,0.2"])), 2);
    assert_eq!(code(&pcosync(&["simulate", "--bogus"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    fs::write(&g, "n 3\n1 2\n3 2\n").unwrap();
    let spec = format!("file:{}", g.display());
    assert_eq!(code(&pcosync(&["simulate", "--graph", &spec, "--require-rooted"])), 2);
    assert_eq!(code(&pcosync(&["string-check", "--graph", &spec])), 2);
    assert_eq!(code(&pcosync(&["bound", "--graph", &spec])), 2);
}

#[test]
fn runtime_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let masks = dir.path().join("m.txt");
    fs::write(&masks, "00\n").unwrap();
    let out = pcosync(&[
        "simulate", "--graph", "complete:2", "--init", "0.1,0.3",
        "--trigger", &format!("masks:{}", masks.display()),
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let out = pcosync(&[
        "simulate", "--graph", "complete:2", "--init", "0.1,0.3",
        "--trigger", &format!("masks:{}:repeat", masks.display()), "--max-time", "5",
    ]);
    assert_eq!(code(&out), 0);
}

#[test]
fn montecarlo_tail_has_bound_column() {
    let out = pcosync(&["montecarlo", "--graph", "random-rooted:12:0.2", "--runs", "200", "--bin", "5", "--seed", "7"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# {"));
    assert_eq!(lines.next().unwrap(), "n,threshold_time,empirical_tail,theorem3_bound");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "1");
    assert_eq!(first[1], "5");
    assert!(!first[3].is_empty());
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"runs": 3, "max_time": 50, "seed": 9}"#).unwrap();
    let out = pcosync(&["montecarlo", "--graph", "cycle:6", "--runs", "500", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let echo: serde_json::Value = serde_json::from_str(text.lines().next().unwrap().trim_start_matches("# ")).unwrap();
    let args = &echo["invocation"]["command"]["montecarlo"];
    assert_eq!(args["runs"], 3);
    assert_eq!(args["run"]["max_time"], 50.0);
    assert_eq!(echo["master_seed"], 9);

    fs::write(&cfg, "[1, 2]").unwrap();
    assert_eq!(code(&pcosync(&["montecarlo", "--graph", "cycle:6", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_pcosync"));
        cmd.args(["simulate", "--graph", "path:5"]).args(extra).env_remove("PCOSYNC_SEED");
        if let Some(s) = env {
            cmd.env("PCOSYNC_SEED", s);
        }
        cmd.output().unwrap().stdout
    };
    assert_eq!(run(Some("13"), &[]), run(None, &["--seed", "13"]));
    assert_ne!(run(Some("13"), &[]), run(None, &[]));
    assert_eq!(run(Some("13"), &["--seed", "2"]), run(None, &["--seed", "2"]));
}

#[test]
fn string_check_single_vertex_and_layered_four() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("one.txt");
    fs::write(&g, "n 1\n").unwrap();
    let out = pcosync(&["string-check", "--graph", &format!("file:{}", g.display())]);
    assert_eq!(code(&out), 0);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["l_star"], 0);
    assert_eq!(json["passed"], 1);

    fs::write(&g, "n 4\n1 2\n2 3\n3 2\n3 4\n").unwrap();
    let out = pcosync(&["string-check", "--graph", &format!("file:{}", g.display()), "--r", "0.125", "--runs", "5"]);
    assert_eq!(code(&out), 0);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!((json["ell_star"].as_u64(), json["l_star"].as_u64()), (Some(36), Some(108)));
    for r in json["results"].as_array().unwrap() {
        assert_eq!(r["report"]["layers"][2]["depth_at_end"], 3);
        assert!(r["report"]["sync_time"].as_f64().unwrap() <= 109.0);
    }
}

#[test]
fn compare_and_sweep_tables() {
    let out = pcosync(&["compare", "--families", "complete,cycle", "--n", "4:8:4", "--runs", "3", "--seed", "1"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 2 * 2 * 2);
    assert!(rows[0].starts_with("complete,4,binary,"));
    assert!(rows[1].starts_with("complete,4,linear:0.3261:0.46,"));

    let out = pcosync(&["compare", "--slope-sweep", "0:0.5:0.25", "--families", "path", "--n", "6", "--runs", "2"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), "family,n,m,mean_sync_time,runs,eps");
    assert_eq!(text.lines().count(), 2 + 3);
    assert_eq!(code(&pcosync(&["compare", "--slope-sweep", "0,0.5", "--n", "6,8", "--runs", "1"])), 2);
}

#[test]
fn bound_reports_constants() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    fs::write(&g, "n 4\n1 2\n2 3\n3 2\n3 4\n").unwrap();
    let out = pcosync(&["bound", "--graph", &format!("file:{}", g.display()), "--r", "0.125"]);
    assert_eq!(code(&out), 0);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["bound"]["ell_star"], 36);
    assert_eq!(json["bound"]["t_star"], 109.0);
    assert_eq!(json["tail"].as_array().unwrap().len(), 3);
    assert_eq!(code(&pcosync(&["bound", "--graph", "cycle:4", "--trigger", "edge:0.5"])), 2);
}
