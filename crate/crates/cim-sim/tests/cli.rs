use std::path::Path;
use std::process::{Command, Output};

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sim")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SHORT: &str = r#"{"schedule": {"t_p_ns": 40, "t_mid_ns": 5}, "problem": {"m": 4}, "physics": {"dt_ps": 2}}"#;

#[test]
fn oracle_prints_spectrum() {
    let out = sim(&["oracle", "--m", "8"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n_g"], 2);
    assert_eq!(v["gap"], 6);
    assert_eq!(v["n_1e"], 16);
    assert_eq!(v["n_2e"], 28);
    assert_eq!(v["ground_states"][0], serde_json::json!([1, 1, 1, 1, 1, 1, 1, 1]));

    let flipped = sim(&["oracle", "--m", "8", "--seed", "4", "--flip-edge", "3"]);
    let f: serde_json::Value = serde_json::from_slice(&flipped.stdout).unwrap();
    let plain = sim(&["oracle", "--m", "8", "--seed", "4"]);
    let p: serde_json::Value = serde_json::from_slice(&plain.stdout).unwrap();
    assert_eq!(f["ground_states"], p["ground_states"]);
    assert_eq!(f["gap"], 2);
}

#[test]
fn oracle_refuses_large_sizes_without_force() {
    let out = sim(&["oracle", "--m", "30"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("30"));
    let out = sim(&["oracle", "--m", "7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_exits_nonzero_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"physics": {"dt_ps": 50}}"#);
    let out = sim(&["run", "--config", &cfg, "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("physics.dt_ps"));

    let cfg = write(dir.path(), "broken.json", "{\n\"schedule\": {\n\"t_p_ns\": }\n}");
    let out = sim(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn run_echoes_config_and_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", SHORT);
    let traj = dir.path().join("traj.csv");
    let out = sim(&["run", "--config", &cfg, "--seed", "7", "--traj", traj.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["physics"]["omega_q"], 1e11);
    assert_eq!(v["config"]["schedule"]["scheme"], "gp");
    assert_eq!(v["result"]["seed"], 7);
    assert_eq!(v["problem"]["m"], 4);

    let text = std::fs::read_to_string(&traj).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t_ns,sigma_1,sigma_2,sigma_3,sigma_4,mean_nc");
    // 45 ns of run time plus 8 ns settling, sampled each ns
    assert_eq!(lines.count(), 54);

    let again = sim(&["run", "--config", &cfg, "--seed", "7"]);
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn run_accepts_a_problem_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", SHORT);
    let problem = write(
        dir.path(),
        "p.json",
        r#"{"m":4,"edges":[[0,1,1],[0,2,-1],[0,3,1],[1,2,1],[1,3,-1],[2,3,1]],"target":[1,-1,1,-1]}"#,
    );
    let out = sim(&["run", "--config", &cfg, "--problem", &problem]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["problem"]["target"], serde_json::json!([1, -1, 1, -1]));
}

#[test]
fn sweep_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", SHORT);
    let spec = write(
        dir.path(),
        "sweep.json",
        r#"{"variable": "alpha", "values": [0.01, 0.02], "trials_per_point": 2, "master_seed": 5}"#,
    );
    let out_csv = dir.path().join("res.csv");
    let out = sim(&["sweep", "--config", &cfg, "--sweep", &spec, "--out", out_csv.to_str().unwrap(), "--workers", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_csv).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(
        lines[0],
        "scheme,m,alpha_f,t_p_ns,pump_over_th,n_trials,n_success,success_prob,worst_time_ns,net_time_ns,master_seed"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("gp,4,0.01,40,3,2,"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("res.json")).unwrap()).unwrap();
    assert_eq!(json["points"][1]["trials"].as_array().unwrap().len(), 2);
    assert_eq!(json["points"][1]["config"]["schedule"]["alpha_final"], 0.02);
    assert!(json["points"][0]["trials"][0]["seed"].is_u64());
}

#[test]
fn scaling_rejects_unknown_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let out_csv = dir.path().join("s.csv");
    let out = sim(&["scaling", "--sizes", "4", "--schemes", "gp,slow", "--out", out_csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
