use std::fs;
use std::io::{BufReader, Cursor};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hpmetric::graph::io::read_dense_csv;
use serde_json::Value;

fn hpmetric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hpmetric"))
        .args(args)
        .env_remove("HPMETRIC_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

const K3: &str = "a,b\nb,c\nc,a\na,c\nb,a\nc,b\n";

fn glued(dir: &Path) -> PathBuf {
    let out = dir.join("glued.csv");
    let o = hpmetric(&["generate", "--model", "glued", "--nb", "3", "--nc", "4", "--C", "2", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

#[test]
fn verify_glued_identity_and_metric() {
    let o = hpmetric(&["verify", "--model", "glued", "--nb", "3", "--nc", "4", "--C", "2", "--levels", "identity,metric"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["pass"], true);
}

#[test]
fn verify_quotient_level_on_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = glued(dir.path());
    let o = hpmetric(&["verify", "--in", path_str(&g), "--levels", "quotient"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["quotient"]["states"], 3);
}

#[test]
fn verify_reducible_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "red.csv", "a,b\nb,a\nc,a\n");
    assert_eq!(code(&hpmetric(&["verify", "--in", path_str(&g)])), 2);
    // The same graph passes once trimmed to its largest component.
    assert_eq!(code(&hpmetric(&["verify", "--in", path_str(&g), "--largest-scc"])), 0);
}

#[test]
fn verify_oracle_on_k3() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "k3.csv", K3);
    let o = hpmetric(&["verify", "--in", path_str(&g), "--levels", "oracle", "--walks", "100000", "--seed", "7"]);
    assert_eq!(code(&o), 0);
    for c in json(&o)["oracle"]["checks"].as_array().unwrap() {
        if c["quantity"] == "hit_before_return" {
            let (est, se) = (c["estimate"].as_f64().unwrap(), c["std_err"].as_f64().unwrap());
            assert!((est - 0.75).abs() <= 4.0 * se);
        }
    }
}

#[test]
fn verify_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "k3.csv", K3);
    // Two walks cannot estimate 3/4 within four standard errors.
    let o = hpmetric(&["verify", "--in", path_str(&g), "--levels", "oracle", "--walks", "2", "--seed", "0"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn bad_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let neg = write(dir.path(), "neg.csv", "a,b,-1\nb,a\n");
    assert_eq!(code(&hpmetric(&["stationary", "--in", path_str(&neg)])), 2);
    assert_eq!(code(&hpmetric(&["stationary", "--in", "/nonexistent/g.csv"])), 2);
    assert_eq!(code(&hpmetric(&["metric", "--bogus"])), 2);
    let g = write(dir.path(), "k3.csv", K3);
    assert_eq!(code(&hpmetric(&["metric", "--in", path_str(&g), "--beta", "0.2"])), 2);
}

#[test]
fn metric_round_trips_and_writes_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "k3.csv", K3);
    let d = dir.path().join("d.csv");
    let a = dir.path().join("a.csv");
    let o = hpmetric(&["metric", "--in", path_str(&g), "--beta", "0.5", "--out", path_str(&d), "--similarity", path_str(&a)]);
    assert_eq!(code(&o), 0);
    let (labels, m) = read_dense_csv(BufReader::new(fs::File::open(&d).unwrap())).unwrap();
    assert_eq!(labels, ["a", "b", "c"]);
    assert_eq!(m[(0, 1)], -(0.75f64.ln()));
    // Reading and rewriting reproduces the file byte for byte.
    let mut again = Vec::new();
    hpmetric::graph::io::write_dense_csv(&mut again, &labels, m.as_ref()).unwrap();
    assert_eq!(again, fs::read(&d).unwrap());
    let meta: Value = serde_json::from_slice(&fs::read(dir.path().join("d.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "metric");
    assert_eq!(meta["parameters"]["beta"], 0.5);
    assert!(meta["elapsed_seconds"].as_f64().unwrap() >= 0.0);
    assert!(dir.path().join("a.meta.json").exists());
}

#[test]
fn single_thread_output_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("er.csv");
    let o = hpmetric(&["generate", "--model", "er-cycle", "--seed", "3", "--out", path_str(&g)]);
    assert_eq!(code(&o), 0);
    for cmd in [
        vec!["metric", "--beta", "0.75"],
        vec!["hitprob"],
        vec!["fiedler", "--method", "hp"],
        vec!["cluster", "--method", "pca-kmeans-d12", "--k", "2", "--seed", "4"],
    ] {
        let run = |threads: &str| {
            let mut args = cmd.clone();
            args.extend(["--in", path_str(&g), "--threads", threads]);
            let o = hpmetric(&args);
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
            o.stdout
        };
        assert_eq!(run("1"), run("3"), "{cmd:?}");
    }
}

#[test]
fn threads_env_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "k3.csv", K3);
    let out = dir.path().join("phi.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_hpmetric"))
        .args(["stationary", "--in", path_str(&g), "--out", path_str(&out)])
        .env("HPMETRIC_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let meta: Value = serde_json::from_slice(&fs::read(dir.path().join("phi.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["threads"], 2);
    let bad = Command::new(env!("CARGO_BIN_EXE_hpmetric"))
        .args(["stationary", "--in", path_str(&g)])
        .env("HPMETRIC_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn stationary_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "two.csv", "a,b,1\nb,a,1\nb,b,1\n");
    let o = hpmetric(&["stationary", "--in", path_str(&g)]);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "label,phi");
    let phi_b: f64 = rows[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!((phi_b - 2.0 / 3.0).abs() < 1e-14);
    let o = hpmetric(&["stationary", "--in", path_str(&g), "--drop-self-loops"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("b,5.0000000000000000e-1"));
}

#[test]
fn matrix_market_and_dense_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = write(
        dir.path(),
        "c.mtx",
        "%%MatrixMarket matrix coordinate pattern general\n3 3 3\n1 2\n2 3\n3 1\n",
    );
    let o = hpmetric(&["quotient", "--in", path_str(&mtx)]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("label,1+2+3\n"));
    let dense = write(dir.path(), "p.csv", "label,x,y\nx,0,1\ny,1,0\n");
    let o = hpmetric(&["hitprob", "--in", path_str(&dense), "--reference"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().contains("x,0.0000000000000000e0,1.0000000000000000e0"));
}

#[test]
fn hitprob_modes_agree() {
    let dir = tempfile::tempdir().unwrap();
    let g = glued(dir.path());
    let read = |args: &[&str]| {
        let mut all = vec!["hitprob", "--in", path_str(&g)];
        all.extend(args);
        let o = hpmetric(&all);
        read_dense_csv(Cursor::new(o.stdout)).unwrap().1
    };
    let (f, r) = (read(&["--fast"]), read(&["--reference"]));
    for i in 0..f.nrows() {
        for j in 0..f.ncols() {
            assert!((f[(i, j)] - r[(i, j)]).abs() < 1e-12);
        }
    }
    assert_eq!(code(&hpmetric(&["hitprob", "--in", path_str(&g), "--fast", "--reference"])), 2);
    let o = hpmetric(&["hitprob", "--in", path_str(&g), "--mc", "b1", "c1_1", "--walks", "20000", "--seed", "5"]);
    let r = json(&o);
    assert_eq!(r["exact"], 0.5);
    assert_eq!(r["seed"], 5);
    let est = r["estimate"].as_f64().unwrap();
    assert!((est - 0.5).abs() <= 4.0 * r["std_err"].as_f64().unwrap());
}

#[test]
fn quotient_writes_map() {
    let dir = tempfile::tempdir().unwrap();
    let g = glued(dir.path());
    let (pq, map) = (dir.path().join("pq.csv"), dir.path().join("map.csv"));
    let o = hpmetric(&["quotient", "--in", path_str(&g), "--out", path_str(&pq), "--map", path_str(&map)]);
    assert_eq!(code(&o), 0);
    let map = fs::read_to_string(map).unwrap();
    assert!(map.starts_with("node,class\nb1,b1+b2+b3\n"));
    let (labels, p) = read_dense_csv(BufReader::new(fs::File::open(&pq).unwrap())).unwrap();
    assert_eq!(labels.len(), 3);
    assert!((p[(1, 0)] - 0.25).abs() < 1e-14);
    let meta: Value = serde_json::from_slice(&fs::read(dir.path().join("pq.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["results"]["bounds_ok"], true);
}

#[test]
fn symmetrize_and_fiedler() {
    let dir = tempfile::tempdir().unwrap();
    let g = glued(dir.path());
    let o = hpmetric(&["symmetrize", "--in", path_str(&g), "--method", "max"]);
    let (_, m) = read_dense_csv(Cursor::new(o.stdout)).unwrap();
    assert_eq!(m[(0, 1)], 1.0);
    assert_eq!(code(&hpmetric(&["symmetrize", "--in", path_str(&g), "--method", "chung", "--beta", "1"])), 2);
    let o = hpmetric(&["fiedler", "--in", path_str(&g), "--method", "hp", "--beta", "1"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 11);
    assert!(rows[..3].iter().all(|r| r[2] == "0"));
    assert_eq!(rows[3][2], "1");
    assert_eq!(rows[4][2], "-1");
}

#[test]
fn generate_cluster_with_truth() {
    let dir = tempfile::tempdir().unwrap();
    let (g, t) = (dir.path().join("pp.csv"), dir.path().join("truth.csv"));
    let o = hpmetric(&[
        "generate", "--model", "planted", "--n", "60", "--k", "2", "--rho", "0.3", "--delta", "0.4", "--seed", "2",
        "--out", path_str(&g), "--truth", path_str(&t),
    ]);
    assert_eq!(code(&o), 0);
    let meta: Value = serde_json::from_slice(&fs::read(dir.path().join("pp.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 2);
    let o = hpmetric(&[
        "cluster", "--in", path_str(&g), "--method", "kmedoids-d12", "--k", "2", "--truth", path_str(&t),
        "--trials", "500", "--seed", "1",
    ]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["labels"].as_array().unwrap().len(), 60);
    assert!(r["accuracy"].as_f64().unwrap() > 0.9);
    assert!(r["p_value"].as_f64().unwrap() < 0.01);
    assert_eq!(r["seed"], 1);
}

#[test]
fn generate_geometric_coords_and_embed() {
    let dir = tempfile::tempdir().unwrap();
    let (g, c) = (dir.path().join("circle.csv"), dir.path().join("xy.csv"));
    let o = hpmetric(&[
        "generate", "--model", "geometric", "--domain", "circle", "--n", "40", "--seed", "1", "--out", path_str(&g),
        "--coords", path_str(&c),
    ]);
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(&c).unwrap().starts_with("label,x1,x2\n"));
    let no_truth = dir.path().join("t.csv");
    let o = hpmetric(&["generate", "--model", "geometric", "--n", "10", "--truth", path_str(&no_truth)]);
    assert_eq!(code(&o), 2);
    for m in ["d12", "d1", "A"] {
        let out = dir.path().join(format!("emb_{m}.csv"));
        let o = hpmetric(&["embed", "--in", path_str(&g), "--matrix", m, "--dims", "2", "--out", path_str(&out)]);
        assert_eq!(code(&o), 0, "{m}");
        assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 41);
    }
    assert_eq!(code(&hpmetric(&["embed", "--in", path_str(&g), "--matrix", "A", "--dims", "99"])), 2);
}

#[test]
fn bench_reports_growth() {
    let o = hpmetric(&["bench", "--sizes", "20,40", "--seed", "1"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["points"].as_array().unwrap().len(), 2);
    assert_eq!(r["growth"].as_array().unwrap().len(), 1);
}
