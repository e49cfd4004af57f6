//! End-to-end subcommand tests: exit codes, output schemas, and
//! (config, seed) determinism.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_cellfree")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cellfree-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Ring of APs with users near the center: near-equal link distances keep
/// the moment-matched closed form inside its accuracy regime.
fn ring_config(m: usize, k: usize, runs: u64) -> String {
    let aps: Vec<String> = (0..m)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
            format!("[{:.6}, {:.6}]", 12.0 * th.cos(), 12.0 * th.sin())
        })
        .collect();
    let users: Vec<String> = (0..k)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * (i as f64 + 0.3) / k as f64;
            format!("[{:.6}, {:.6}]", 0.4 * th.cos(), 0.4 * th.sin())
        })
        .collect();
    format!(
        r#"
seed = 7

[scenario]
num_aps = {m}
num_users = {k}
coverage_radius_m = 18.0
ap_positions = [{}]
user_positions = [{}]

[analysis]
runs = {runs}
threshold_points = 8
"#,
        aps.join(", "),
        users.join(", ")
    )
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("exp.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str], threads: &str) -> std::process::Output {
    Command::new(bin())
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .expect("binary runs")
}

#[test]
fn outage_ring_scenario_validates_and_is_deterministic() {
    let dir = temp_dir("outage");
    let cfg = write_config(&dir, &ring_config(8, 2, 20_000));
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    let r1 = run(&["--config", cfg.to_str().unwrap(), "--out", out_a.to_str().unwrap(), "outage"], "1");
    assert!(
        r1.status.success(),
        "expected exit 0: {}",
        String::from_utf8_lossy(&r1.stderr)
    );
    let r2 = run(&["--config", cfg.to_str().unwrap(), "--out", out_b.to_str().unwrap(), "outage"], "4");
    assert!(r2.status.success());
    let a = std::fs::read(out_a.join("outage.csv")).unwrap();
    let b = std::fs::read(out_b.join("outage.csv")).unwrap();
    assert_eq!(a, b, "outage bytes differ across worker counts");
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# cellfree v"));
    assert!(text.lines().nth(1).unwrap().starts_with("gamma_th_db,"));
}

#[test]
fn outage_with_empty_grid_is_a_config_error() {
    let dir = temp_dir("emptygrid");
    let mut cfg_text = ring_config(4, 2, 1000);
    cfg_text.push_str("threshold_points = 0\n");
    let cfg = write_config(&dir, &cfg_text);
    let r = run(&["--config", cfg.to_str().unwrap(), "outage"], "1");
    assert_eq!(r.status.code(), Some(1), "stderr: {}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn unknown_config_keys_are_rejected_with_location() {
    let dir = temp_dir("badkey");
    let cfg = write_config(&dir, "[scenario]\nnum_aps = 2\nnum_users = 1\nbogus_key = 3\n");
    let r = run(&["--config", cfg.to_str().unwrap(), "outage"], "1");
    assert_eq!(r.status.code(), Some(1));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("bogus_key") || err.contains("line"), "unhelpful error: {err}");
}

#[test]
fn cluster_enum_lists_partitions() {
    let dir = temp_dir("clusters");
    let cfg = write_config(
        &dir,
        "[scenario]\nnum_aps = 4\nnum_users = 2\n\n[detection]\nnum_clusters = 2\n",
    );
    let r = run(&["--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap(), "cluster-enum"], "1");
    assert!(r.status.success());
    let text = std::fs::read_to_string(dir.join("clusters.csv")).unwrap();
    // S(4,2) = 7 rows plus comment and header
    assert_eq!(text.lines().count(), 9);
    assert!(text.contains("\"0,0,0,1\""));
}

#[test]
fn pdf_check_passes_on_ring_scenario() {
    let dir = temp_dir("pdf");
    let cfg = write_config(&dir, &ring_config(8, 2, 1000));
    let r = run(&["--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap(), "pdf-check"], "1");
    assert!(r.status.success(), "stderr: {}", String::from_utf8_lossy(&r.stderr));
    let text = std::fs::read_to_string(dir.join("pdf_check.csv")).unwrap();
    // the zero-threshold row pins CDF(0) = 0
    assert!(text.lines().nth(2).unwrap().starts_with("0.0000000000e0,0.0000000000e0"));
}

#[test]
fn mc_estimands_emit_rows() {
    let dir = temp_dir("mc");
    let mut text = ring_config(4, 2, 4000);
    text.push_str("threshold_grid_db = [0.0]\n");
    let cfg = write_config(&dir, &text);
    for estimand in ["outage", "rate", "histogram"] {
        let out = dir.join(estimand);
        let r = run(
            &[
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "mc",
                "--estimand",
                estimand,
            ],
            "2",
        );
        assert!(r.status.success(), "{estimand}: {}", String::from_utf8_lossy(&r.stderr));
        let csv = std::fs::read_to_string(out.join("mc.csv")).unwrap();
        assert!(csv.lines().count() >= 3, "{estimand} produced no rows");
    }
}

fn tiny_train_config(dir: &Path, num_clusters: usize) -> PathBuf {
    let text = format!(
        r#"
seed = 3

[scenario]
num_aps = 4
num_users = 2
coverage_radius_m = 18.0

[detection]
num_clusters = {num_clusters}
combiner = "wiener-hopf"

[drl]
preset = "desk"
episodes = 3
steps_per_episode = 12
minibatch = 8
objective = "sum-rate"
"#
    );
    write_config(dir, &text)
}

#[test]
fn train_static_preset_omits_ddqn_columns() {
    let dir = temp_dir("trainstatic");
    // num_clusters = 0 resolves to M̃ = M: the static network
    let cfg = tiny_train_config(&dir, 0);
    let r = run(&["--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap(), "train"], "1");
    assert!(r.status.success(), "stderr: {}", String::from_utf8_lossy(&r.stderr));
    let log = std::fs::read_to_string(dir.join("train_maxsum.csv")).unwrap();
    let header = log.lines().nth(1).unwrap();
    assert!(!header.contains("ddqn_loss"));
    assert!(!header.contains("epsilon"));
    assert!(dir.join("checkpoint_maxsum.json").exists());
}

#[test]
fn train_is_reproducible_and_compare_oracle_is_unity() {
    let dir = temp_dir("trainrepro");
    let cfg = tiny_train_config(&dir, 2);
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out in [&out_a, &out_b] {
        let r = run(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "train"], "1");
        assert!(r.status.success(), "stderr: {}", String::from_utf8_lossy(&r.stderr));
    }
    let a = std::fs::read(out_a.join("train_maxsum.csv")).unwrap();
    let b = std::fs::read(out_b.join("train_maxsum.csv")).unwrap();
    assert_eq!(a, b, "training logs differ for identical (config, seed)");

    // compare with the oracle standing in for the agent: ratio exactly 1
    let mut text = std::fs::read_to_string(&cfg).unwrap();
    text.push_str("\n[analysis]\nheld_out = 3\n\n[solver]\nkind = \"exhaustive\"\ngrid_points = 5\n");
    let cfg2 = dir.join("cmp.toml");
    std::fs::write(&cfg2, text).unwrap();
    let r = run(
        &[
            "--config",
            cfg2.to_str().unwrap(),
            "--out",
            out_a.to_str().unwrap(),
            "compare",
            "--agent",
            "oracle",
        ],
        "1",
    );
    assert!(r.status.success(), "stderr: {}", String::from_utf8_lossy(&r.stderr));
    let csv = std::fs::read_to_string(out_a.join("compare.csv")).unwrap();
    for line in csv.lines().skip(2) {
        let ratio: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(ratio, 1.0);
    }
}

#[test]
fn compare_without_checkpoint_fails_cleanly() {
    let dir = temp_dir("nockpt");
    let cfg = tiny_train_config(&dir, 2);
    let r = run(&["--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap(), "compare"], "1");
    assert_ne!(r.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&r.stderr).contains("checkpoint"));
}
