use std::path::Path;
use std::process::{Command, Output};

fn qnnl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnnl"))
        .current_dir(dir)
        .env_remove("QNNL_OUTPUT_DIR")
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn field<'a>(line: &'a str, key: &str) -> &'a str {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in {line:?}"))
}

fn check_spectrum_files(dir: &Path, stem: &str, m: usize) {
    let csv = read(dir.join(format!("{stem}.csv")));
    assert!(csv.starts_with("index,eigenvalue\n"));
    assert_eq!(csv.lines().count(), m + 1);
    let json: serde_json::Value = serde_json::from_str(&read(dir.join(format!("{stem}.json")))).unwrap();
    assert!(json["rank"].as_u64().unwrap() as usize <= m);
    let dump = read(dir.join(format!("{stem}_matrix.csv")));
    assert_eq!(dump.lines().count(), m);
    assert!(dump.lines().all(|l| l.split(',').count() == m));
    let side: serde_json::Value = serde_json::from_str(&read(dir.join(format!("{stem}_matrix.json")))).unwrap();
    assert_eq!(side["M"].as_u64().unwrap() as usize, m);
}

#[test]
fn dla_open_and_closed() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnnl(dir.path(), &["dla", "--family", "hva_tfim", "--n", "6", "--boundary", "open"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("dim=36\n"));

    let o = qnnl(dir.path(), &["dla", "--n", "6", "--boundary", "closed", "--dump", "basis.txt"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("dim=9\n"));
    let closure = field(out.lines().nth(1).unwrap(), "closure_dim");
    let basis = read(dir.path().join("basis.txt"));
    assert_eq!(basis.lines().next().unwrap(), format!("n=6 dim={closure}"));

    let o = qnnl(dir.path(), &["dla", "--family", "hea", "--n", "2", "--L", "1"]);
    assert!(stdout(&o).starts_with("dim=15\n"));
}

#[test]
fn train_writes_record_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnnl(dir.path(), &["train", "--task", "vqe", "--n", "2", "--L", "3", "--seed", "1", "--output-dir", "out"]);
    assert!(o.status.success());
    let line = stdout(&o);
    assert_eq!(field(&line, "M"), "6");
    let out = dir.path().join("out");
    let run = read(out.join("run.csv"));
    let mut rows = run.lines();
    assert_eq!(rows.next().unwrap(), "seed,M,final_loss,gap,iterations,success,status,wall_time");
    let row: Vec<&str> = rows.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 8);
    let iters: usize = row[4].parse().unwrap();
    let trace = read(out.join("trace.csv"));
    assert!(trace.starts_with("iteration,loss\n"));
    assert_eq!(trace.lines().count(), iters + 2);
    let rec: serde_json::Value = serde_json::from_str(&read(out.join("run.json"))).unwrap();
    assert_eq!(rec["loss_trace"].as_array().unwrap().len(), iters + 1);
    let e: f64 = row[2].parse().unwrap();
    assert!(e >= -(5f64.sqrt()) - 1e-9);
    if row[5] == "true" {
        assert!((e + 5f64.sqrt()).abs() < 1e-7);
    }
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qnnl"))
        .current_dir(dir.path())
        .env("QNNL_OUTPUT_DIR", "envout")
        .args(["train", "--task", "compile", "--n", "2", "--L", "1", "--max-iters", "20"])
        .output()
        .unwrap();
    assert!(o.status.success());
    for f in ["run.csv", "trace.csv", "run.json"] {
        assert!(dir.path().join("envout").join(f).exists(), "{f}");
    }
}

#[test]
fn sweep_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let cfg = format!(
        r#"{{"task": "vqe", "n": 2, "depth_list": [1, 3], "seeds_per_point": 3,
            "rank_scan": {{"points_per_depth": 2, "at_optima": true}}, "max_optima_per_depth": 1,
            "output_dir": "{}", "master_seed": 4}}"#,
        out.display()
    );
    std::fs::write(dir.path().join("cfg.json"), cfg).unwrap();
    let o = qnnl(dir.path(), &["--jobs", "1", "sweep", "--config", "cfg.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 2);

    let runs = read(out.join("runs.csv"));
    assert!(runs.starts_with("task,n,boundary,depth,M,seed,final_loss,gap,iterations,success\n"));
    assert_eq!(runs.lines().count(), 1 + 2 * 3);
    let success = read(out.join("success.csv"));
    assert!(success.starts_with("depth,M,success_probability,n_runs\n1,2,"));
    for row in success.lines().skip(1) {
        let p: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&p));
    }
    let ranks = read(out.join("ranks.csv"));
    assert!(ranks.starts_with("depth,M,point_kind,matrix,rank,gap,lambda_max\n"));
    for row in ranks.lines().skip(1) {
        let cols: Vec<&str> = row.split(',').collect();
        let m: usize = cols[1].parse().unwrap();
        assert!(cols[4].parse::<usize>().unwrap() <= m);
        assert!(["random", "optimum"].contains(&cols[2]));
        assert!(["qfim", "hessian"].contains(&cols[3]));
    }
}

#[test]
fn qfim_at_supplied_and_random_points() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnnl(dir.path(), &["qfim", "--family", "hva_tfim", "--n", "2", "--L", "1", "--theta", "0,0"]);
    assert!(o.status.success());
    assert_eq!(field(&stdout(&o), "rank"), "1");
    check_spectrum_files(dir.path(), "spectrum_qfim", 2);

    let o = qnnl(dir.path(), &["qfim", "--family", "hea", "--n", "2", "--L", "1", "--seed", "3", "--unitary", "--output-dir", "u"]);
    assert!(o.status.success());
    let rank: usize = field(&stdout(&o), "rank").parse().unwrap();
    assert!(rank <= 8);
    check_spectrum_files(&dir.path().join("u"), "spectrum_qfim", 8);
}

#[test]
fn hessian_at_random_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnnl(dir.path(), &["hessian", "--task", "vqe", "--n", "2", "--L", "2", "--output-dir", "h"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let e: f64 = field(out.lines().next().unwrap(), "loss").parse().unwrap();
    assert!(e >= -(5f64.sqrt()) - 1e-12);
    check_spectrum_files(&dir.path().join("h"), "spectrum_hessian", 4);
    let side: serde_json::Value = serde_json::from_str(&read(dir.path().join("h/spectrum_hessian_matrix.json"))).unwrap();
    assert_eq!(side["loss_kind"], "vqe_energy");

    let o = qnnl(dir.path(), &["hessian", "--task", "vqe", "--n", "2", "--L", "1", "--theta", "-0.5,1.25", "--output-dir", "h1"]);
    assert!(o.status.success());
}

#[test]
fn rank_scan_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"task": "vqe", "n": 4, "depth_list": [2], "rank_scan": {"points_per_depth": 3}, "output_dir": "ignored"}"#,
    )
    .unwrap();
    let o = qnnl(dir.path(), &["rank-scan", "--config", "cfg.json", "--depth", "2", "--output-dir", "scan"]);
    assert!(o.status.success());
    assert_eq!(field(&stdout(&o), "saturated"), "true");
    let table = read(dir.path().join("scan/rank_scan_2.csv"));
    let mut rows = table.lines();
    assert_eq!(rows.next().unwrap(), "depth,M,point,rank,gap,lambda_max");
    let rows: Vec<&str> = rows.collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.starts_with("2,4,") && r.split(',').nth(3) == Some("4")));
    assert!(dir.path().join("scan/spectrum_random_qfim_2_0.csv").exists());
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn haar_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnnl(dir.path(), &["haar-check", "--d", "2", "--samples", "20000", "--seed", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().last() == Some("haar-check: pass"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| qnnl(dir.path(), args).status.code();
    assert_eq!(code(&["bogus"]), Some(1));
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["qfim", "--n", "2", "--L", "1", "--theta", "0"]), Some(1));
    assert_eq!(code(&["qfim", "--n", "2", "--L", "1", "--theta", "0,abc"]), Some(1));
    assert_eq!(code(&["dla", "--n", "2", "--boundary", "closed"]), Some(1));
    assert_eq!(code(&["train", "--task", "vqe", "--n", "2", "--L", "1", "--learning-rate", "-1"]), Some(1));
    assert_eq!(code(&["sweep", "--config", "missing.json"]), Some(1));
    assert_eq!(code(&["haar-check", "--d", "0"]), Some(1));

    std::fs::write(dir.path().join("file"), "").unwrap();
    assert_eq!(code(&["qfim", "--n", "2", "--L", "1", "--output-dir", "file/x"]), Some(2));
    assert_eq!(
        code(&["train", "--task", "vqe", "--n", "2", "--L", "1", "--max-iters", "5", "--output-dir", "file/x"]),
        Some(2)
    );
}
