use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_oval-lab"));
    c.env_remove("OVAL_LAB_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect()
}

#[test]
fn constants_grid_has_ten_rows() {
    let o = run(&["constants", "--gamma-grid", "0.6:1.5:0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# oval-lab "));
    assert!(text.contains("# config: gamma-grid = 0.6:1.5:0.1"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 10);
    assert!(rows[4].starts_with("1,0.24503506"));
}

#[test]
fn circle_eigenvalues() {
    let o = run(&["curve-eig", "--curve", "circle", "--g", "1", "--k", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let vals: Vec<f64> = data_rows(&text)
        .iter()
        .map(|r| r.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    for (v, e) in vals.iter().zip([1.0, 2.0, 2.0]) {
        assert!((v - e).abs() < 1e-10, "{vals:?}");
    }
}

#[test]
fn single_bound_state_is_numerical_failure() {
    let o = run(&[
        "lt-ratio",
        "--potential",
        "poschl_teller:a=2",
        "--gamma",
        "1",
        "--states",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("insufficient bound states"), "{err}");
}

#[test]
fn eps_scan_has_seventeen_rows() {
    let o = run(&["sweep", "--axis", "eps", "--eps-grid", "0:0.8:0.05"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 17);
    assert!(rows[0].starts_with("0,"));
}

#[test]
fn output_is_independent_of_parallelism() {
    for args in [
        vec!["sweep", "--axis", "gamma"],
        vec!["sweep", "--count", "12", "--seed", "3"],
        vec![
            "optimize",
            "--restarts",
            "3",
            "--max-evals",
            "200",
            "--g",
            "0.25",
        ],
    ] {
        let one = run(&[args.as_slice(), &["--parallelism", "1"]].concat());
        let many = run(&[args.as_slice(), &["--parallelism", "8"]].concat());
        assert_eq!(one.status.code(), Some(0));
        assert_eq!(one.stdout, many.stdout, "{args:?}");
    }
}

#[test]
fn invalid_input_exits_one() {
    for args in [
        vec!["curve-eig", "--curve", "blob"],
        vec!["curve-eig", "--curve", "harm:n=2,a=0,b=0.6"],
        vec!["constants", "--gamma-grid", "1:0:0.1"],
        vec!["curve-eig", "--nonsense", "1"],
        vec!["curve-eig", "--format", "xml"],
        vec!["optimize", "--sense", "sideways"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_layering() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "g = -1\nk = 2\n").unwrap();
    let c = conf.to_str().unwrap();
    let o = run(&["curve-eig", "--config", c, "--k", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("# config: g = -1"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 1);
    let l1: f64 = rows[0].split(',').nth(1).unwrap().parse().unwrap();
    assert!((l1 + 1.0).abs() < 1e-10);

    std::fs::write(&conf, "gg = 1\n").unwrap();
    let o = run(&["curve-eig", "--config", c]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("`gg`"));
}

#[test]
fn seed_from_environment_and_flag() {
    let env = bin()
        .args(["sweep", "--count", "2"])
        .env("OVAL_LAB_SEED", "41")
        .output()
        .unwrap();
    let text = stdout(&env);
    assert!(text.contains("# seed: 41"));
    assert!(data_rows(&text)[0].starts_with("41,"));
    let flag = bin()
        .args(["sweep", "--count", "2", "--seed", "7"])
        .env("OVAL_LAB_SEED", "41")
        .output()
        .unwrap();
    assert!(stdout(&flag).contains("# seed: 7"));
}

#[test]
fn bridge_json_report() {
    let o = run(&["bridge"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["metadata"]["subcommand"], "bridge");
    assert_eq!(v["metadata"]["config"]["potential"], "poschl_teller:a=6");
    let r34 = v["result"]["bridge"]["ratio_34"].as_f64().unwrap();
    let r311 = v["result"]["bridge"]["ratio_311"].as_f64().unwrap();
    assert!((r34 - r311).abs() < 1e-5);
}

#[test]
fn optimize_writes_trace_and_history() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.json");
    let hist = dir.path().join("history.csv");
    let o = run(&[
        "optimize",
        "--restarts",
        "2",
        "--max-evals",
        "150",
        "--resolution",
        "16",
        "-o",
        out.to_str().unwrap(),
        "--history",
        hist.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["result"]["certificate"].is_object());
    assert!(v["result"]["best_value"].as_f64().unwrap() >= 1.0 - 1e-6);
    let h = std::fs::read_to_string(&hist).unwrap();
    assert!(h.starts_with("# oval-lab"));
    assert!(h.contains("\neval,value\n"));
    assert!(!Path::new(dir.path()).join("counterexample").exists());
}

#[test]
fn maximize_at_positive_coupling_warns() {
    let o = run(&[
        "optimize",
        "--sense",
        "maximize",
        "--restarts",
        "1",
        "--max-evals",
        "60",
        "--resolution",
        "16",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8(o.stderr).unwrap().contains("warning:"));
}

#[test]
fn pair_sweep_reports_minimum() {
    let o = run(&["sweep", "--target", "pairs", "--count", "20"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let min: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# summary: min_ratio = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(min >= 1.0 - 1e-6);
    assert_eq!(data_rows(&text).len(), 20);
}
