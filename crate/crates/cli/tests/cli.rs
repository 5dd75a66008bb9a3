use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BSC: &str = "rows = [[0.9, 0.1], [0.1, 0.9]]\nstar = 0\n";

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn asynch(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asynch"))
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .unwrap()
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_record(out: &Output) -> Value {
    assert!(!out.status.success());
    serde_json::from_slice(&out.stderr).unwrap()
}

#[test]
fn capacity_of_bsc_and_identity() {
    let dir = TempDir::new().unwrap();
    let bsc = write_config(&dir, "bsc.toml", BSC);
    let v = json_of(&asynch(&["capacity", "--bits"], &bsc));
    let c = v["capacity_nats"].as_f64().unwrap();
    assert!((c - 0.368_064_207_168_497_1).abs() < 1e-6);
    assert!((v["capacity_bits"].as_f64().unwrap() - c / 2f64.ln()).abs() < 1e-12);

    let id = write_config(
        &dir,
        "id.toml",
        "rows = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]\nstar = 0\n",
    );
    let v = json_of(&asynch(&["capacity"], &id));
    assert!((v["capacity_nats"].as_f64().unwrap() - 3f64.ln()).abs() < 1e-9);
}

#[test]
fn malformed_row_is_named() {
    let dir = TempDir::new().unwrap();
    let bad = write_config(
        &dir,
        "bad.toml",
        "rows = [[0.9, 0.1], [0.9, 0.6]]\nstar = 0\n",
    );
    let e = error_record(&asynch(&["capacity"], &bad));
    assert_eq!(e["error"], "invalid_row");
    assert!(e["message"].as_str().unwrap().starts_with("row 1"));
}

#[test]
fn missing_config_and_bad_output_dir_fail_up_front() {
    let dir = TempDir::new().unwrap();
    let e = error_record(&asynch(&["capacity"], &dir.path().join("nope.toml")));
    assert_eq!(e["error"], "io");
    let bsc = write_config(&dir, "bsc.toml", BSC);
    let out = dir.path().join("missing").join("out.json");
    let e = error_record(&asynch(&["capacity", "--out", out.to_str().unwrap()], &bsc));
    assert_eq!(e["error"], "io");
}

#[test]
fn curves_contrast_on_bsc() {
    let dir = TempDir::new().unwrap();
    let bsc = write_config(&dir, "bsc.toml", BSC);
    let out = asynch(&["curves", "--format", "csv"], &bsc);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# channel_digest="));
    assert_eq!(
        lines.next().unwrap(),
        "rate_nats,alpha_thm1,alpha_thm2_training"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][0], "0");
    let last = rows.last().unwrap();
    assert_eq!(last[0], "3.68064207168e-1");
    assert_eq!(last[2], "0");
    assert!(last[1].parse::<f64>().unwrap() > 0.1);

    let v = json_of(&asynch(&["curves"], &bsc));
    let rows = v["rows"].as_array().unwrap();
    let last = rows.last().unwrap();
    assert_eq!(last["alpha_thm2_training"].as_f64(), Some(0.0));
    assert_eq!(last["rate_nats"].as_f64(), v["capacity_nats"].as_f64());
}

#[test]
fn noise_at_capacity_output_kills_the_achievable_exponent() {
    // The capacity-achieving output law of the BSC rows is uniform, and so
    // is the noise row.
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "mid.toml",
        "rows = [[0.5, 0.5], [0.9, 0.1], [0.1, 0.9]]\nstar = 0\n",
    );
    let v = json_of(&asynch(&["curves"], &cfg));
    let last = v["rows"].as_array().unwrap().last().unwrap().clone();
    assert!(last["alpha_thm1"].as_f64().unwrap() <= 1e-6, "{last}");
}

#[test]
fn degenerate_training_constant_is_flagged() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "id.toml", "rows = [[1, 0], [0, 1]]\nstar = 0\n");
    let out = asynch(&["curves", "--format", "csv"], &cfg);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text
        .lines()
        .next()
        .unwrap()
        .contains("training_constant=inf degenerate=true"));
    let v = json_of(&asynch(&["bounds"], &cfg));
    assert_eq!(v["training_constant"], "inf");
    assert_eq!(v["degenerate"], true);
}

#[test]
fn simulate_is_reproducible_and_seed_sensitive() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "sim.toml",
        &format!("{BSC}n = 20\nalpha = 0.2\ntrials = 500\ndecoder = \"joint\"\nseed = 4\n"),
    );
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec!["simulate", "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        assert!(asynch(&args, &cfg).status.success());
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.json", &[]), run("b.json", &[]));
    assert_ne!(run("a.json", &[]), run("c.json", &["--seed", "5"]));
    let v: Value = serde_json::from_slice(&run("d.json", &["--trials", "50"])).unwrap();
    assert_eq!(v["trials"], 50);
}

#[test]
fn synchronized_noiseless_joint_decoding_is_exact() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "sync.toml",
        "rows = [[1, 0], [0, 1]]\nstar = 0\nn = 16\nalpha = 0.0\nmessages = 2\ntrials = 2000\ndecoder = \"joint\"\n",
    );
    let v = json_of(&asynch(&["simulate"], &cfg));
    assert_eq!(v["error_rate"].as_f64(), Some(0.0));
    let d = v["mean_delay"].as_f64().unwrap();
    assert!(d <= 16.0);
    assert!((v["rate_nats"].as_f64().unwrap() - 2f64.ln() / d).abs() < 1e-12);
}

#[test]
fn budget_rejection_happens_before_running() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "big.toml", &format!("{BSC}n = 200\nalpha = 0.2\n"));
    let e = error_record(&asynch(&["simulate"], &cfg));
    assert_eq!(e["error"], "budget_exceeded");
}

#[test]
fn delay_growth_refuses_outside_the_regime() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "g.toml",
        &format!("{BSC}eta = 0.2\nalpha = 0.05\nlengths = [10, 20]\ntrials = 50\n"),
    );
    let e = error_record(&asynch(&["delay-growth"], &cfg));
    assert_eq!(e["error"], "regime_violated");
    assert!(e["message"].as_str().unwrap().contains("0.10216"));
}

#[test]
fn delay_growth_table() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "g.toml",
        &format!("{BSC}eta = 0.2\nalpha = 0.15\nlengths = [10, 20]\ntrials = 50\n"),
    );
    let out = asynch(&["delay-growth", "--format", "csv"], &cfg);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("n,level,mean_delay,error_rate,rate_nats\n10,5,"));
}

#[test]
fn validate_oracles_pass_fail_and_skip() {
    let dir = TempDir::new().unwrap();
    let fast = "probes = 1000\nreplays = 1000\n";
    let bsc = write_config(&dir, "bsc.toml", &format!("{BSC}{fast}"));
    let v = json_of(&asynch(&["validate-oracles"], &bsc));
    assert_eq!(v["passed"], true);

    let broken = write_config(
        &dir,
        "broken.toml",
        &format!("{BSC}{fast}corrupt_reduction = true\n"),
    );
    let out = asynch(&["validate-oracles", "--format", "csv"], &broken);
    assert!(!out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("training_constant_vs_oracle,fail,"), "{text}");

    let wide = write_config(
        &dir,
        "wide.toml",
        &format!(
            "rows = [[0.5, 0.1, 0.1, 0.1, 0.1, 0.1], [0.1, 0.1, 0.1, 0.1, 0.1, 0.5]]\nstar = 0\n{fast}"
        ),
    );
    let v = json_of(&asynch(&["validate-oracles"], &wide));
    let status = |name: &str| {
        v["checks"]
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["name"] == name)
            .unwrap()["status"]
            .clone()
    };
    assert_eq!(status("minimax_vs_oracle"), "skipped");
    assert_eq!(status("training_constant_vs_oracle"), "skipped");
    assert_eq!(status("condition_i"), "pass");
}
