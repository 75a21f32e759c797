use std::path::Path;
use std::process::{Command, Output};

fn inter_mdm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inter-mdm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().skip(1).collect()
}

#[test]
fn run_writes_one_detail_row_per_trial_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = inter_mdm(&[
        "run",
        "--variant",
        "t2t",
        "--method",
        "mh",
        "--condition",
        "2",
        "--trials",
        "2",
        "--iterations",
        "3",
        "--seed",
        "5",
        "--out",
        out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let detail = read(&dir.path().join("detail.csv"));
    assert!(!detail.contains('\r'));
    assert_eq!(
        detail.lines().next().unwrap(),
        "variant,method,condition,trial,iteration,ari_a,ari_b,kappa"
    );
    let rows = data_rows(&detail);
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.starts_with("t2t,mh,2,") && !r.ends_with(',')));

    let summary = read(&dir.path().join("summary.csv"));
    assert_eq!(
        summary.lines().next().unwrap(),
        "variant,method,condition,ari_a_mean,ari_a_sd,ari_b_mean,ari_b_sd,kappa_mean,kappa_sd"
    );
    assert_eq!(data_rows(&summary).len(), 1);
}

#[test]
fn gibbs_rows_leave_kappa_empty() {
    let dir = tempfile::tempdir().unwrap();
    let o = inter_mdm(&[
        "run",
        "--method",
        "gibbs",
        "--trials",
        "1",
        "--iterations",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let detail = read(&dir.path().join("detail.csv"));
    assert!(data_rows(&detail).iter().all(|r| r.ends_with(',')));
    let summary = read(&dir.path().join("summary.csv"));
    assert!(data_rows(&summary)[0].ends_with(",,"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"trials": 3, "iterations": 1, "method": "reject"}"#).unwrap();
    let out = dir.path().join("out");
    let o = inter_mdm(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--trials",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows_text = read(&out.join("detail.csv"));
    let rows = data_rows(&rows_text);
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r.starts_with("h2h,reject,1,")));
}

#[test]
fn bad_condition_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    for bad in ["5", "0", "-1"] {
        let o = inter_mdm(&["run", "--condition", bad, "--out", dir.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "condition {bad}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("condition"));
    }
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"hyperparams": {"delta": 1.0}}"#).unwrap();
    let o = inter_mdm(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("hyperparams.delta"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "not a directory").unwrap();
    let out = blocker.join("results");
    let o = inter_mdm(&[
        "run",
        "--trials",
        "1",
        "--iterations",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));

    let o = inter_mdm(&["compare", "--in", dir.path().join("missing").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn same_seed_gives_identical_bytes_for_any_job_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, jobs: &str| {
        let out = dir.path().join(name);
        let o = inter_mdm(&[
            "run",
            "--condition",
            "4",
            "--trials",
            "3",
            "--iterations",
            "4",
            "--seed",
            "11",
            "--jobs",
            jobs,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        std::fs::read(out.join("detail.csv")).unwrap()
    };
    let first = run("a", "1");
    assert_eq!(first, run("b", "1"));
    assert_eq!(first, run("c", "0"));
}

#[test]
fn full_grid_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = inter_mdm(&[
        "full",
        "--seed",
        "3",
        "--trials",
        "1",
        "--iterations",
        "2",
        "--out",
        out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let summary = read(&dir.path().join("summary.csv"));
    let rows = data_rows(&summary);
    assert_eq!(rows.len(), 24);
    assert_eq!(rows.iter().filter(|r| r.ends_with(",,")).count(), 8);
    assert_eq!(data_rows(&read(&dir.path().join("detail.csv"))).len(), 24 * 2);

    let o = inter_mdm(&["compare", "--in", out]);
    assert!(o.status.success());
    let report = String::from_utf8(o.stdout).unwrap();
    assert!(dir.path().join("comparison.md").exists());
    assert!(report.contains("0.881"), "reference values listed");
}
