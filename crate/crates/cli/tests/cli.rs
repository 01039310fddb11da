use std::path::Path;
use std::process::{Command, Output};

fn khintype(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_khintype"));
    cmd.args(args);
    match threads {
        Some(n) => cmd.env("KHINTYPE_THREADS", n),
        None => cmd.env_remove("KHINTYPE_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn bare_invocation_prints_usage() {
    let o = khintype(&[], None);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("Usage: khintype"));
    for sub in ["count", "expsum", "nondegen", "typicality", "series", "catalog"] {
        assert!(text.contains(sub), "usage lists {sub}");
    }
}

#[test]
fn series_reports_the_case() {
    let o = khintype(&["series", "--d", "4", "--m", "1", "--k", "1", "--s", "5"], None);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["applicability"]["summary"], "Case 1 applies; CONVERGES");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Case 1 applies; CONVERGES"));
}

#[test]
fn catalog_lists_known_verdicts() {
    let text = stdout(&khintype(&["catalog"], None));
    assert!(text.contains("veronese5: surjective=yes det1=no rank2=no"));
    assert!(text.contains("tracefree2: rank2=yes drv=no"));
    assert!(text.contains("shear:"));
}

#[test]
fn count_csv_has_stamp_and_header() {
    let o = khintype(
        &["count", "--manifold", "parabola", "--q", "8..32x2", "--kappa", "1/4,phi", "--theta", "0;1/3,1/2"],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with(&format!("# khintype {} count\n# config_hash: ", env!("CARGO_PKG_VERSION"))));
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "q,kappa_num,kappa_den,theta_id,A,envelope,ratio");
    // 3 q × 2 θ × 2 κ
    assert_eq!(data.len(), 1 + 12);
    let first: Vec<&str> = data[1].split(',').collect();
    assert_eq!(&first[..4], &["8", "1", "4", "0"]);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[count]\nmanifold = \"parabola\"\nq = \"16\"\nkappa = \"1/4\"\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = stdout(&khintype(&["--config", cfg, "count"], None));
    let overridden = stdout(&khintype(&["--config", cfg, "count", "--q", "20"], None));
    let rows = |t: &str| t.lines().filter(|l| !l.starts_with('#')).skip(1).map(String::from).collect::<Vec<_>>();
    assert!(rows(&from_file)[0].starts_with("16,"));
    assert!(rows(&overridden)[0].starts_with("20,"));
    let hash = |t: &str| t.lines().nth(1).unwrap().to_string();
    assert_ne!(hash(&from_file), hash(&overridden));
}

#[test]
fn bad_input_exits_with_one() {
    assert_eq!(khintype(&["count", "--manifold", "nope"], None).status.code(), Some(1));
    assert_eq!(khintype(&["count", "--manifold", "parabola", "--q", "0"], None).status.code(), Some(1));
    assert_eq!(khintype(&["count", "--grid", "3"], None).status.code(), Some(1));
    assert_eq!(khintype(&["count", "--manifold", "parabola"], Some("zero")).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[count]\nmanifold = \"parabola\"\nunknown_key = 1\n").unwrap();
    let o = khintype(&["--config", cfg.to_str().unwrap(), "count"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown_key"));
}

#[test]
fn mostly_inconclusive_run_exits_with_two() {
    // the second eigenvalue of the Hessian sits a few thresholds above zero
    let o = khintype(
        &["nondegen", "--source", "a1^2 + 1/20000000*a2^2", "--d", "2", "--m", "1", "--samples", "2"],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["summary"][3]["verdict"], "INCONCLUSIVE");
}

#[test]
fn nondegen_reports_each_condition() {
    let o = khintype(&["nondegen", "--manifold", "veronese5", "--samples", "2"], None);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let summary: Vec<(String, String)> = v["result"]["summary"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| (g["name"].as_str().unwrap().into(), g["verdict"].as_str().unwrap().into()))
        .collect();
    let get = |n: &str| summary.iter().find(|(k, _)| k == n).unwrap().1.clone();
    assert_eq!(get("surjective"), "PASS");
    assert_eq!(get("det1"), "FAIL");
    assert_eq!(get("rank2"), "FAIL");
}

#[test]
fn output_file_gets_data_and_stdout_gets_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let o = khintype(
        &["typicality", "--d", "2", "--m", "1", "--n", "50", "--seed", "7", "--output", out.to_str().unwrap()],
        None,
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("d=2 m=1"));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["result"]["cells"][0]["freq_U"], 1.0);
    assert_eq!(v["result"]["all_agree"], true);
}

fn run_to(dir: &Path, name: &str, args: &[&str], threads: Option<&str>) -> Vec<u8> {
    let path = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    full.push("--output");
    full.push(&p);
    let o = khintype(&full, threads);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(&path).unwrap()
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let runs: &[&[&str]] = &[
        &["count", "--manifold", "tracefree2", "--q", "32..128x2", "--kappa", "1/4,phi/4", "--theta", "0;3/10,7/10,1/10,9/10"],
        &["expsum", "--manifold", "tracefree2", "--q", "256,512", "--delta", "0.1", "--grid", "16"],
        &["nondegen", "--manifold", "tracefree2", "--samples", "3", "--seed", "5"],
        &["typicality", "--d", "2", "--m", "2", "--n", "60", "--seed", "9"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let a = run_to(dir.path(), &format!("{i}a"), args, Some("1"));
        let b = run_to(dir.path(), &format!("{i}b"), args, Some("3"));
        let c = run_to(dir.path(), &format!("{i}c"), args, None);
        assert_eq!(a, b, "{args:?}");
        assert_eq!(a, c, "{args:?}");
    }
}
