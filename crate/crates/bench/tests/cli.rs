use std::path::Path;
use std::process::{Command, Output};

fn pikan(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pikan"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn paper_check_reports_zero_mismatches() {
    let dir = tempfile::tempdir().unwrap();
    let o = pikan(&["paper-check"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("60 rows checked, 0 mismatches"));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["run", "--hidden", "1", "--width", "7"];
    for extra in [
        &["--problem", "schrodinger", "--method", "kan"][..],
        &["--problem", "logistic", "--method", "transformer"],
        &["--problem", "logistic", "--method", "mlp", "--grid", "4"],
    ] {
        let args: Vec<&str> = base.iter().chain(extra).copied().collect();
        let o = pikan(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(pikan(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(pikan(&["report"], dir.path()).status.code(), Some(2));
}

#[test]
fn paper_mode_rejects_untabulated_architecture() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["run", "--paper", "--problem", "logistic", "--method", "pinn", "--hidden", "1", "--width", "41"];
    let o = pikan(&args, dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not a tabulated architecture"));
}

#[test]
fn run_writes_record_checkpoint_and_results() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["run", "--problem", "heat", "--method", "pikan", "--hidden", "1", "--width", "23"];
    let o = pikan(&[&args[..], &["--seed", "4", "--iterations", "3", "--collocation", "25"]].concat(), dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("rel_l2_pct"));
    let run_dir = dir.path().join("runs/heat/kan_H1_W23_G5_k3");
    assert!(run_dir.join("seed_4.json").exists());
    assert!(run_dir.join("seed_4.ckpt").exists());
    let results: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("results.json")).unwrap()).unwrap();
    let rec = &results[0];
    assert_eq!(rec["problem"], "heat");
    assert_eq!(rec["method"], "kan");
    assert_eq!(rec["params"], 690);
    assert_eq!(rec["seeds"][0]["seed"], 4);
    assert!(rec["runtime_s"].is_null());
    assert!(rec["aggregate"]["grad_rel_l2_pct"]["mean"].is_number());
    assert!(dir.path().join("summary.csv").exists());
    assert!(dir.path().join("tables/table_8_heat.csv").exists());
}

#[test]
fn suite_resumes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("desk.cfg");
    std::fs::write(
        &cfg,
        "# tiny sweep\nmode = desk\nproblems = burgers\nseeds = 2\niterations = 4\ncollocation = 16\n\
         rows.burgers = pinn:1:60, pikan:1:8\n",
    )
    .unwrap();
    let cfg_arg = cfg.to_str().unwrap();
    let first = pikan(&["suite", "--config", cfg_arg, "--threads", "2"], dir.path());
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert!(stdout(&first).contains("4 runs, 2 architectures"));
    let results = std::fs::read(dir.path().join("results.json")).unwrap();

    let second = pikan(&["suite", "--config", cfg_arg], dir.path());
    assert!(second.status.success());
    assert_eq!(std::fs::read(dir.path().join("results.json")).unwrap(), results);

    std::fs::remove_file(dir.path().join("results.json")).unwrap();
    assert!(pikan(&["report"], dir.path()).status.success());
    assert_eq!(std::fs::read(dir.path().join("results.json")).unwrap(), results);

    let table = std::fs::read_to_string(dir.path().join("tables/table_10_burgers.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "method,H,W,params,rel_l2_pct,linf,grad_rel_l2_pct,grad_linf");
    assert!(lines[1].starts_with("PINN,1,60,241,") && lines[1].ends_with(",,"));
    assert!(lines[2].starts_with("PIKAN,1,8,240,"));

    let curves = pikan(&["curves", "--alpha", "1"], dir.path());
    assert!(curves.status.success());
    let csv = std::fs::read_to_string(dir.path().join("curves/burgers/mlp_H1_W60.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(dir.path().join("curves/burgers/kan_H1_W8_G5_k3.svg").exists());
}

#[test]
fn aborted_runs_persist_and_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["run", "--problem", "logistic", "--method", "kan", "--hidden", "1", "--width", "7"];
    let o = pikan(&[&args[..], &["--iterations", "5", "--lr", "1e300"]].concat(), dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let record: serde_json::Value = serde_json::from_slice(
        &std::fs::read(dir.path().join("runs/logistic/kan_H1_W7_G3_k3/seed_0.json")).unwrap(),
    )
    .unwrap();
    assert!(record["aborted"].is_string());
    assert!(dir.path().join("results.json").exists());
}
