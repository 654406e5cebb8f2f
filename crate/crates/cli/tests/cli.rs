use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn balred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_balred")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn metric(dir: &Path, name: &str) -> f64 {
    csv_rows(&dir.join("errors.csv"))
        .iter()
        .find(|row| row[0] == name)
        .unwrap_or_else(|| panic!("metric {name} missing"))[1]
        .parse()
        .unwrap()
}

#[test]
fn dense_bt_on_the_illustrative_model_reports_the_tabulated_values() {
    let tmp = TempDir::new().unwrap();
    let cfg =
        write_config(tmp.path(), "c.toml", "task = \"dense-bt\"\n[model]\nkind = \"illustrative4\"\n[params]\nr = 2\n");
    let out = tmp.path().join("out");
    let res = balred(&["--output-dir", out.to_str().unwrap(), "run", &cfg]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = csv_rows(&out.join("hsv.csv"));
    assert_eq!(rows[0], ["index", "value"]);
    assert_eq!(rows.len(), 3);
    let hsv: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!((hsv[0] - 73.1370).abs() < 5e-4, "{hsv:?}");
    assert!((hsv[1] - 7.2831).abs() < 5e-4, "{hsv:?}");
    for name in ["errors.csv", "history.csv", "run.json"] {
        assert!(out.join(name).exists(), "{name}");
    }
}

#[test]
fn solve_lyap_on_the_heat_rod_meets_the_gramian_tolerance() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "task = \"solve-lyap\"\noutput_dir = \"res\"\n[model]\nkind = \"heat_rod\"\nn = 1000\n[params]\ntol = 1e-6\n",
    );
    let res = balred(&["run", &cfg]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let out = tmp.path().join("res");
    let err = metric(&out, "gramian_rel_error");
    assert!(err <= 1e-5, "gramian_rel_error {err:e}");
    let history = csv_rows(&out.join("history.csv"));
    assert_eq!(&history[0][..3], ["k", "i", "r"]);
    assert!(history.len() > 1);
}

#[test]
fn malformed_config_exits_one_with_location_and_writes_nothing() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let cases = [
        ("syntax.toml", "task = \"tcr\"\n[model\nkind = \"illustrative4\"\n", 2),
        ("unknown.toml", "task = \"tcr\"\n[model]\nkind = \"illustrative4\"\n[params]\nr = 2\nfoo = 1\n", 6),
        ("unused.toml", "task = \"dense-bt\"\n[model]\nkind = \"illustrative4\"\n[params]\nr = 2\ntol = 1e-3\n", 6),
        ("order.toml", "task = \"tor\"\n[model]\nkind = \"illustrative4\"\n[params]\nr = 9\n", 5),
    ];
    for (name, body, line) in cases {
        let cfg = write_config(tmp.path(), name, body);
        let res = balred(&["--output-dir", out.to_str().unwrap(), "run", &cfg]);
        let stderr = String::from_utf8_lossy(&res.stderr);
        assert_eq!(res.status.code(), Some(1), "{name}: {stderr}");
        assert!(stderr.contains(&format!("{name}:{line}:")), "{name}: {stderr}");
        assert!(!out.exists(), "{name} wrote output");
    }
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(balred(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(balred(&["run"]).status.code(), Some(1));
    assert_eq!(balred(&["--help"]).status.code(), Some(0));
    assert_eq!(balred(&["--version"]).status.code(), Some(0));
    assert_eq!(balred(&["run", "/nonexistent/config.toml"]).status.code(), Some(1));
}

#[test]
fn compare_writes_one_row_per_tolerance() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "[model]\nkind = \"random_stable\"\nn = 40\nm = 2\np = 2\n[params]\ntols = [1e-2, 1e-4]\n",
    );
    let out = tmp.path().join("out");
    let res = balred(&["--seed", "3", "--output-dir", out.to_str().unwrap(), "compare", &cfg]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = csv_rows(&out.join("compare.csv"));
    assert_eq!(rows[0], ["tol", "r_selected", "atia_hinf_ratio", "bt_hinf_ratio", "converged"]);
    assert_eq!(rows.len(), 3);
    let orders: Vec<usize> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(orders[0] <= orders[1], "{orders:?}");
    for row in &rows[1..] {
        let atia: f64 = row[2].parse().unwrap();
        let bt: f64 = row[3].parse().unwrap();
        assert!(atia.is_finite() && bt.is_finite() && atia >= 0.0 && bt >= 0.0);
        assert_eq!(row[4], "true");
    }
}

#[test]
fn compare_refuses_a_config_for_another_task() {
    let tmp = TempDir::new().unwrap();
    let cfg =
        write_config(tmp.path(), "c.toml", "task = \"tcr\"\n[model]\nkind = \"illustrative4\"\n[params]\nr = 2\n");
    let res = balred(&["compare", &cfg]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("c.toml:1:"));
}

#[test]
fn exhausted_iteration_budget_exits_two_and_still_writes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "[model]\nkind = \"random_stable\"\nn = 40\nm = 2\np = 2\n[params]\ntols = [1e-6]\nk_max = 2\n",
    );
    let out = tmp.path().join("out");
    let res = balred(&["--output-dir", out.to_str().unwrap(), "compare", &cfg]);
    assert_eq!(res.status.code(), Some(2), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = csv_rows(&out.join("compare.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][4], "false");
    let run: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["converged"], false);
}

#[test]
fn deterministic_reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "task = \"atia-bt\"\nseed = 11\n[model]\nkind = \"random_stable\"\nn = 50\nm = 2\np = 1\n",
    );
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        let res = balred(&["--deterministic", "--output-dir", out.to_str().unwrap(), "run", &cfg]);
        assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
        outputs.push(out);
    }
    for name in ["hsv.csv", "errors.csv", "history.csv"] {
        assert_eq!(fs::read(outputs[0].join(name)).unwrap(), fs::read(outputs[1].join(name)).unwrap(), "{name}");
    }
    let run: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(outputs[0].join("run.json")).unwrap()).unwrap();
    assert_eq!(run["deterministic"], true);
    assert_eq!(run["threads"], 1);
}

#[test]
fn run_record_holds_the_effective_seed_and_configuration() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "task = \"tsia\"\nseed = 5\n[model]\nkind = \"random_stable\"\nn = 20\nm = 1\np = 1\n[params]\nr = 3\n",
    );
    let out = tmp.path().join("out");
    let res = balred(&["--seed", "8", "--output-dir", out.to_str().unwrap(), "run", &cfg]);
    assert!(matches!(res.status.code(), Some(0 | 2)), "{}", String::from_utf8_lossy(&res.stderr));
    let run: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["seed"], 8);
    assert_eq!(run["config"]["task"], "tsia");
    assert_eq!(run["config"]["r"], 3);
    assert!(run["config"]["tsia"]["max_iter"].as_u64().unwrap() >= 1);
    assert!(run["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn matrix_market_paths_are_relative_to_the_config() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    fs::create_dir(&data).unwrap();
    fs::write(
        data.join("a.mtx"),
        "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 -1.0\n2 2 -2.0\n1 2 0.5\n",
    )
    .unwrap();
    fs::write(data.join("b.mtx"), "%%MatrixMarket matrix array real general\n2 1\n1.0\n1.0\n").unwrap();
    fs::write(data.join("c.mtx"), "%%MatrixMarket matrix array real general\n1 2\n1.0\n0.5\n").unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "task = \"dense-bt\"\n[model]\nkind = \"matrix_market\"\na = \"data/a.mtx\"\nb = \"data/b.mtx\"\nc = \"data/c.mtx\"\n[params]\nr = 1\n",
    );
    let out = tmp.path().join("out");
    let res = balred(&["--output-dir", out.to_str().unwrap(), "run", &cfg]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(csv_rows(&out.join("hsv.csv")).len(), 2);
}
