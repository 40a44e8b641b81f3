use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn mlncc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlncc"))
        .args(args)
        .env_remove("MLN_CC_THREADS")
        .output()
        .expect("spawn mlncc")
}

fn ok(args: &[&str]) -> Output {
    let out = mlncc(args);
    assert!(
        out.status.success(),
        "mlncc {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(args: &[&str]) -> i32 {
    mlncc(args).status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn ids(v: &serde_json::Value) -> Vec<u64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect()
}

const SMALL_SPEC: &str = "n = 400\nbase_edges = 1600\nsplit = [70, 30]\nseed = 3\n";

/// Generates, analyzes and ground-truths a small two-layer network.
struct Pipeline {
    dir: TempDir,
}

impl Pipeline {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        let spec = write(dir.path(), "spec.toml", SMALL_SPEC);
        let data = dir.path().join("data");
        ok(&["--quiet", "generate", "--spec", s(&spec), "--out", s(&data)]);
        let sums = dir.path().join("sums");
        ok(&[
            "--quiet",
            "analyze",
            s(&data.join("L1.edges")),
            s(&data.join("L2.edges")),
            "--out",
            s(&sums),
        ]);
        Self { dir }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }
}

#[test]
fn generate_overlay_only_writes_path_layers() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        dir.path(),
        "spec.toml",
        "n = 4\nbase_edges = 0\nsplit = [50, 50]\n",
    );
    let out = dir.path().join("gen");
    let stdout = ok(&["generate", "--spec", s(&spec), "--out", s(&out)]).stdout;
    assert_eq!(
        String::from_utf8(stdout).unwrap().trim(),
        s(&out.join("manifest.json"))
    );
    for layer in ["L1.edges", "L2.edges"] {
        let text = fs::read_to_string(out.join(layer)).unwrap();
        assert_eq!(text, "# n=4\n0\t1\n1\t2\n2\t3\n");
    }
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["n"], 4);
    assert_eq!(
        manifest["layers"],
        serde_json::json!(["L1.edges", "L2.edges"])
    );
    assert_eq!(manifest["seed"], 0);
    assert_eq!(manifest["spec"]["split"], serde_json::json!([50, 50]));
}

#[test]
fn generate_accepts_json_specs() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"n": 4, "base_edges": 0, "split": [50, 50]}"#,
    );
    ok(&[
        "--quiet",
        "generate",
        "--spec",
        s(&spec),
        "--out",
        s(&dir.path().join("g")),
    ]);
    assert!(dir.path().join("g/L2.edges").exists());
}

#[test]
fn generate_rejects_bad_split() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        dir.path(),
        "spec.toml",
        "n = 10\nbase_edges = 10\nsplit = [70, 40]\n",
    );
    let out = mlncc(&[
        "generate",
        "--spec",
        s(&spec),
        "--out",
        s(&dir.path().join("g")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("split"));
}

#[test]
fn generate_reference_network_sizes() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        dir.path(),
        "spec.toml",
        "n = 50000\nbase_edges = 250000\nsplit = [70, 30]\nseed = 1\n",
    );
    let out = dir.path().join("g");
    ok(&["--quiet", "generate", "--spec", s(&spec), "--out", s(&out)]);
    for (layer, target) in [("L1.edges", 224_976.0), ("L2.edges", 124_988.0)] {
        let text = fs::read_to_string(out.join(layer)).unwrap();
        let m = text.lines().filter(|l| !l.starts_with('#')).count() as f64;
        assert!(
            (m - target).abs() / target <= 0.01,
            "{layer}: {m} vs {target}"
        );
    }
}

#[test]
fn analyze_path_graph() {
    let dir = TempDir::new().unwrap();
    let layer = write(dir.path(), "p3.edges", "0 1\n1 2\n");
    let out = dir.path().join("s");
    ok(&["--quiet", "analyze", s(&layer), "--out", s(&out)]);
    let summary = json(&out.join("p3.summary.json"));
    assert_eq!(ids(&summary["cc_nodes"]), [1]);
    assert_eq!(ids(&summary["sum_dist"]), [3, 2, 3]);
    let timing = json(&out.join("timing.json"));
    assert_eq!(timing["layers"][0]["summary"], "p3.summary.json");
    assert!(timing["layers"][0]["t_psi"].as_f64().unwrap() >= 0.0);
}

#[test]
fn analyze_is_byte_identical_across_runs_and_thread_counts() {
    let p = Pipeline::new();
    let layers = [p.path("data/L1.edges"), p.path("data/L2.edges")];
    let first = [
        fs::read(p.path("sums/L1.summary.json")).unwrap(),
        fs::read(p.path("sums/L2.summary.json")).unwrap(),
    ];
    for threads in ["1", "3"] {
        let out = p.path(&format!("again{threads}"));
        ok(&[
            "--quiet",
            "--threads",
            threads,
            "analyze",
            s(&layers[0]),
            s(&layers[1]),
            "--out",
            s(&out),
        ]);
        assert_eq!(fs::read(out.join("L1.summary.json")).unwrap(), first[0]);
        assert_eq!(fs::read(out.join("L2.summary.json")).unwrap(), first[1]);
    }
}

#[test]
fn threads_env_fallback_and_validation() {
    let dir = TempDir::new().unwrap();
    let layer = write(dir.path(), "p3.edges", "0 1\n1 2\n");
    let out = Command::new(env!("CARGO_BIN_EXE_mlncc"))
        .args([
            "--quiet",
            "analyze",
            s(&layer),
            "--out",
            s(&dir.path().join("s")),
        ])
        .env("MLN_CC_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        code(&[
            "--threads",
            "0",
            "analyze",
            s(&layer),
            "--out",
            s(&dir.path().join("t"))
        ]),
        2
    );
}

#[test]
fn analyze_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let empty = write(dir.path(), "empty.edges", "");
    let out = dir.path().join("s");
    assert_eq!(code(&["analyze", s(&empty), "--out", s(&out)]), 2);
    let garbage = write(dir.path(), "bad.edges", "0 1\nzero one\n");
    assert_eq!(code(&["analyze", s(&garbage), "--out", s(&out)]), 2);
    assert_eq!(
        code(&[
            "analyze",
            s(&dir.path().join("missing.edges")),
            "--out",
            s(&out)
        ]),
        2
    );
}

#[test]
fn compose_identical_summaries_cc2_is_identity() {
    let p = Pipeline::new();
    let l1 = p.path("sums/L1.summary.json");
    let res = p.path("res.json");
    ok(&[
        "--quiet",
        "compose",
        s(&l1),
        s(&l1),
        "--method",
        "cc2",
        "--out",
        s(&res),
    ]);
    assert_eq!(json(&res)["est_cc_nodes"], json(&l1)["cc_nodes"]);
}

#[test]
fn compose_naive_disjoint_hubs_is_empty() {
    let dir = TempDir::new().unwrap();
    // Star centred on 0 and star centred on 4: hub sets {0} and {4}.
    let a = write(dir.path(), "a.edges", "0 1\n0 2\n0 3\n0 4\n");
    let b = write(dir.path(), "b.edges", "4 0\n4 1\n4 2\n4 3\n");
    let sums = dir.path().join("s");
    ok(&["--quiet", "analyze", s(&a), s(&b), "--out", s(&sums)]);
    let res = dir.path().join("res.json");
    ok(&[
        "--quiet",
        "compose",
        s(&sums.join("a.summary.json")),
        s(&sums.join("b.summary.json")),
        "--method",
        "naive",
        "--out",
        s(&res),
    ]);
    assert_eq!(ids(&json(&res)["est_cc_nodes"]), Vec::<u64>::new());
}

#[test]
fn compose_top_k_returns_k() {
    let p = Pipeline::new();
    let res = p.path("top.json");
    ok(&[
        "--quiet",
        "compose",
        s(&p.path("sums/L1.summary.json")),
        s(&p.path("sums/L2.summary.json")),
        "--method",
        "cc2",
        "--selection",
        "top-k",
        "--k",
        "10",
        "--out",
        s(&res),
    ]);
    let doc = json(&res);
    assert_eq!(ids(&doc["est_cc_nodes"]).len(), 10);
    assert_eq!(doc["selection"], "top-k");
    assert_eq!(doc["k"], 10);
}

#[test]
fn compose_errors() {
    let p = Pipeline::new();
    let l1 = p.path("sums/L1.summary.json");
    let l2 = p.path("sums/L2.summary.json");
    let res = p.path("res.json");

    let out = mlncc(&[
        "compose",
        s(&l1),
        s(&l2),
        s(&l1),
        "--method",
        "cc1",
        "--out",
        s(&res),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unsupported"));

    let sums = p.path("other");
    let small = write(p.dir.path(), "small.edges", "0 1\n1 2\n");
    ok(&["--quiet", "analyze", s(&small), "--out", s(&sums)]);
    let mismatch = sums.join("small.summary.json");
    assert_eq!(
        code(&[
            "compose",
            s(&l1),
            s(&mismatch),
            "--method",
            "cc2",
            "--out",
            s(&res)
        ]),
        2
    );

    assert_eq!(
        code(&[
            "compose",
            s(&l1),
            s(&l2),
            "--method",
            "cc2",
            "--selection",
            "top-k",
            "--out",
            s(&res)
        ]),
        2
    );
    assert_eq!(
        code(&[
            "compose",
            s(&l1),
            s(&p.path("nope.json")),
            "--method",
            "cc2",
            "--out",
            s(&res)
        ]),
        2
    );
    let tampered = write(p.dir.path(), "t.json", "{\"version\": 1}");
    assert_eq!(
        code(&[
            "compose",
            s(&l1),
            s(&tampered),
            "--method",
            "cc2",
            "--out",
            s(&res)
        ]),
        2
    );
    assert!(!res.exists());
}

#[test]
fn ground_truth_and_evaluate_identical_layers() {
    let p = Pipeline::new();
    let l1 = p.path("data/L1.edges");
    let sum = p.path("sums/L1.summary.json");
    let gt = p.path("gt.json");
    ok(&["--quiet", "ground-truth", s(&l1), s(&l1), "--out", s(&gt)]);
    let truth = json(&gt);
    assert_eq!(truth["cc_nodes"], json(&sum)["cc_nodes"]);
    assert!(truth["timing"]["t_gt"].as_f64().unwrap() >= 0.0);

    let res = p.path("res.json");
    ok(&[
        "--quiet",
        "compose",
        s(&sum),
        s(&sum),
        "--method",
        "cc2",
        "--out",
        s(&res),
    ]);
    let report = ok(&[
        "evaluate",
        "--result",
        s(&res),
        "--gt",
        s(&gt),
        "--timing",
        s(&p.path("sums/timing.json")),
    ]);
    let report: serde_json::Value = serde_json::from_slice(&report.stdout).unwrap();
    assert_eq!(report["jaccard"], 1.0);
    assert_eq!(report["f1"], 1.0);
    let t = &report["timing"];
    let psi: Vec<f64> = t["t_psi"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(psi.len(), 2);
    let expect = psi.iter().cloned().fold(f64::MIN, f64::max) + t["t_theta"].as_f64().unwrap();
    assert!((t["t_decoupled"].as_f64().unwrap() - expect).abs() < 1e-12);
}

#[test]
fn evaluate_csv_output_and_missing_files() {
    let p = Pipeline::new();
    let gt = p.path("gt.json");
    ok(&[
        "--quiet",
        "ground-truth",
        s(&p.path("data/L1.edges")),
        s(&p.path("data/L2.edges")),
        "--out",
        s(&gt),
    ]);
    let res = p.path("res.json");
    ok(&[
        "--quiet",
        "compose",
        s(&p.path("sums/L1.summary.json")),
        s(&p.path("sums/L2.summary.json")),
        "--method",
        "cc1",
        "--out",
        s(&res),
    ]);
    let csv_out = p.path("eval.csv");
    ok(&[
        "--output",
        "csv",
        "evaluate",
        "--result",
        s(&res),
        "--gt",
        s(&gt),
        "--out",
        s(&csv_out),
    ]);
    let text = fs::read_to_string(&csv_out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("instance,method,jaccard"));
    assert!(lines.next().unwrap().contains(",cc1,"));

    assert_eq!(
        code(&[
            "evaluate",
            "--result",
            s(&p.path("none.json")),
            "--gt",
            s(&gt)
        ]),
        2
    );
    assert_eq!(
        code(&[
            "ground-truth",
            s(&p.path("none.edges")),
            s(&p.path("none.edges")),
            "--out",
            s(&gt)
        ]),
        2
    );
    assert_eq!(
        code(&[
            "bench",
            "--spec",
            s(&p.path("none.toml")),
            "--out",
            s(&p.path("b.csv"))
        ]),
        2
    );
}

#[test]
fn bench_reports_every_method() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        dir.path(),
        "spec.toml",
        "n = 200\nbase_edges = 800\nsplit = [70, 30]\n",
    );
    let out = dir.path().join("bench.csv");
    let stdout = ok(&[
        "--quiet",
        "bench",
        "--spec",
        s(&spec),
        "--seeds",
        "20",
        "--out",
        s(&out),
    ])
    .stdout;
    let rows: Vec<serde_json::Value> = String::from_utf8(stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let methods: Vec<&str> = rows.iter().map(|r| r["method"].as_str().unwrap()).collect();
    assert_eq!(methods, ["naive", "cc1", "cc2"]);
    for r in &rows {
        assert_eq!(r["instances"], 20);
        let j = r["jaccard"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&j));
    }

    let mut reader = csv::Reader::from_path(&out).unwrap();
    let header = reader.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (psi, theta, dec) = (col("t_psi_max"), col("t_theta"), col("t_decoupled"));
    let mut count = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        let f = |i: usize| rec[i].parse::<f64>().unwrap();
        assert!((f(dec) - (f(psi) + f(theta))).abs() <= 1e-9 * f(dec).max(1.0));
        count += 1;
    }
    assert_eq!(count, 60);

    let means = fs::read_to_string(dir.path().join("bench.means.csv")).unwrap();
    assert_eq!(means.lines().count(), 4);
}

#[test]
fn bench_is_thread_count_invariant() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        dir.path(),
        "spec.toml",
        "n = 150\nbase_edges = 600\nsplit = [60, 40]\n",
    );
    let mut accuracy = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("b{threads}.csv"));
        ok(&[
            "--quiet",
            "--threads",
            threads,
            "bench",
            "--spec",
            s(&spec),
            "--seeds",
            "4",
            "--out",
            s(&out),
        ]);
        let mut reader = csv::Reader::from_path(&out).unwrap();
        let rows: Vec<Vec<String>> = reader
            .records()
            .map(|r| r.unwrap().iter().take(9).map(str::to_owned).collect())
            .collect();
        accuracy.push(rows);
    }
    assert_eq!(accuracy[0], accuracy[1]);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&[]), 2);
    assert_eq!(code(&["compose", "--method", "cc9", "--out", "x"]), 2);
    assert_eq!(code(&["--output", "xml", "bench"]), 2);
    assert_eq!(code(&["--help"]), 0);
}
