use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn mrc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrc"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn blobs(dir: &TempDir, n: usize, seed: u64) -> PathBuf {
    let path = dir.path().join(format!("blobs{seed}.csv"));
    let o = mrc(
        &[
            "gen-data",
            "--n-samples",
            &n.to_string(),
            "--n-classes",
            "3",
            "--n-features",
            "2",
            "--seed",
            &seed.to_string(),
            "--out",
            path.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    path
}

/// The JSON line closing a report.
fn report(o: &Output) -> serde_json::Value {
    let text = stdout(o);
    let line = text.lines().last().expect("report has lines");
    serde_json::from_str(line).unwrap()
}

#[test]
fn train_writes_model_with_bracketed_bounds() {
    let dir = TempDir::new().unwrap();
    blobs(&dir, 150, 1);
    let o = mrc(
        &[
            "train", "--data", "blobs1.csv", "--label", "label", "--variant", "mrc", "--loss", "0-1", "--phi",
            "fourier", "--n-components", "200", "--s", "0.3", "--seed", "7", "--max-iters", "3000", "--out", "m.mrc",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("m.mrc").exists());
    let r = report(&o);
    let (lower, upper) = (r["lower_bound"].as_f64().unwrap(), r["upper_bound"].as_f64().unwrap());
    assert!(lower <= upper, "{lower} > {upper}");
    assert_eq!(r["upper_bound_is_risk_bound"], true);
    assert_eq!(r["d_out"], 201);
    assert_eq!(r["m"], 603);
    assert!(stdout(&o).contains("upper bound:"));
}

#[test]
fn cmrc_objective_is_not_called_a_bound() {
    let dir = TempDir::new().unwrap();
    blobs(&dir, 90, 2);
    let o = mrc(
        &[
            "train", "--data", "blobs2.csv", "--label", "label", "--variant", "cmrc", "--loss", "log", "--phi",
            "linear", "--s", "0", "--max-iters", "1000",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("not a risk bound"));
    assert!(!text.contains("upper bound:"));
    let r = report(&o);
    assert_eq!(r["upper_bound_is_risk_bound"], false);
    assert!(r["lower_bound"].is_null());
}

#[test]
fn predict_is_repeatable_and_well_formed() {
    let dir = TempDir::new().unwrap();
    blobs(&dir, 90, 3);
    let o = mrc(
        &["train", "--data", "blobs3.csv", "--label", "label", "--loss", "log", "--max-iters", "500", "--out", "m.mrc"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first = mrc(&["predict", "--model", "m.mrc", "--data", "blobs3.csv"], dir.path());
    let second = mrc(&["predict", "--model", "m.mrc", "--data", "blobs3.csv"], dir.path());
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    assert_eq!(first.stdout, second.stdout);

    let text = stdout(&first);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("row,label,p_class0,p_class1,p_class2"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 90);
    for (i, line) in rows.iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[0], i.to_string());
        let p: Vec<f64> = cells[2..].iter().map(|c| c.parse().unwrap()).collect();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let best = (0..3).fold(0, |b, j| if p[j] > p[b] { j } else { b });
        assert_eq!(cells[1], format!("class{best}"));
    }

    let out = mrc(&["predict", "--model", "m.mrc", "--data", "blobs3.csv", "--out", "p.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("p.csv")).unwrap(), first.stdout);
}

#[test]
fn eval_and_bounds_read_the_model() {
    let dir = TempDir::new().unwrap();
    blobs(&dir, 60, 4);
    let o = mrc(
        &["train", "--data", "blobs4.csv", "--label", "label", "--solver", "exact", "--out", "m.mrc"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let trained = report(&o);

    let e = mrc(&["eval", "--model", "m.mrc", "--data", "blobs4.csv"], dir.path());
    assert_eq!(e.status.code(), Some(0), "{}", stderr(&e));
    let r = report(&e);
    assert_eq!(r["n"], 60);
    assert!(r["error_rate"].as_f64().unwrap() <= 1.0);

    let b = mrc(&["bounds", "--model", "m.mrc", "--data", "blobs4.csv"], dir.path());
    assert_eq!(b.status.code(), Some(0), "{}", stderr(&b));
    let r = report(&b);
    assert_eq!(r["upper_bound"], trained["upper_bound"]);
    assert_eq!(r["lower_bound"], trained["lower_bound"]);
    // same data, same moments: the recomputation reproduces the stored values
    let up = r["recomputed"]["upper_bound"].as_f64().unwrap();
    let low = r["recomputed"]["lower_bound"].as_f64().unwrap();
    assert!((up - trained["upper_bound"].as_f64().unwrap()).abs() < 1e-12);
    assert!((low - trained["lower_bound"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn benchmark_rows_are_sorted_and_repeatable() {
    let dir = TempDir::new().unwrap();
    blobs(&dir, 60, 5);
    blobs(&dir, 60, 6);
    let args = [
        "benchmark", "--data", "blobs5.csv", "--data", "blobs6.csv", "--label", "label", "--variant", "cmrc,mrc",
        "--loss", "log,0-1", "--s", "1,0", "--seed", "3,1", "--max-iters", "200", "--out",
    ];
    let run = |out: &str| {
        let mut a = args.to_vec();
        a.push(out);
        let o = mrc(&a, dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        std::fs::read_to_string(dir.path().join(out)).unwrap()
    };
    let (a, b) = (run("r1.csv"), run("r2.csv"));
    assert_eq!(a, b);
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 2 * 2 * 2 * 2);
    assert!(lines[1].starts_with("blobs5.csv,mrc,0-1,linear,0.0,1,"), "{}", lines[1]);
    assert!(lines[32].starts_with("blobs6.csv,cmrc,log,linear,1.0,3,"), "{}", lines[32]);
}

#[test]
fn failures_map_to_exit_codes() {
    let dir = TempDir::new().unwrap();
    blobs(&dir, 30, 7);
    std::fs::write(dir.path().join("bad.csv"), "x,label\n1,a\nfoo,b\n").unwrap();
    std::fs::write(dir.path().join("one.csv"), "x,label\n1,a\n2,a\n").unwrap();
    std::fs::write(dir.path().join("junk.mrc"), "{\"format\": \"mrc-model\", \"format_").unwrap();
    std::fs::write(
        dir.path().join("v99.mrc"),
        "{\"format\": \"mrc-model\", \"format_version\": 99}\n",
    )
    .unwrap();

    let cases: &[(&[&str], i32, &str)] = &[
        (&["--help"], 0, ""),
        (&["train", "--data", "blobs7.csv"], 1, "--label"),
        (&["train", "--data", "blobs7.csv", "--label", "label", "--loss", "hinge"], 1, "hinge"),
        (&["frobnicate"], 1, "frobnicate"),
        (&["train", "--data", "blobs7.csv", "--label", "label", "--sigma", "-2"], 1, "sigma"),
        (&["train", "--data", "blobs7.csv", "--label", "label", "--solver", "exact", "--loss", "log"], 1, "0-1"),
        (&["train", "--data", "blobs7.csv", "--label", "label", "--s", "-1"], 1, "--s"),
        (&["train", "--data", "missing.csv", "--label", "label"], 2, "missing.csv"),
        (&["train", "--data", "blobs7.csv", "--label", "y"], 2, "'y'"),
        (&["train", "--data", "bad.csv", "--label", "label"], 2, "foo"),
        (&["train", "--data", "one.csv", "--label", "label"], 2, "fewer than two classes"),
        (&["predict", "--model", "junk.mrc", "--data", "blobs7.csv"], 2, "not a model file"),
        (&["predict", "--model", "v99.mrc", "--data", "blobs7.csv"], 2, "version 99"),
        (&["predict", "--model", "nope.mrc", "--data", "blobs7.csv"], 2, "nope.mrc"),
        (&["gen-data", "--n-classes", "1", "--out", "g.csv"], 1, "classes"),
    ];
    for (args, code, needle) in cases {
        let o = mrc(args, dir.path());
        assert_eq!(o.status.code(), Some(*code), "{args:?}: {}", stderr(&o));
        let err = stderr(&o);
        if *code == 0 {
            assert!(err.is_empty());
        } else {
            assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
            assert!(err.contains(needle), "{args:?}: {err}");
            assert!(!err.contains("panicked"));
        }
    }
}

#[test]
fn eval_rejects_unseen_labels() {
    let dir = TempDir::new().unwrap();
    blobs(&dir, 30, 8);
    let o = mrc(&["train", "--data", "blobs8.csv", "--label", "label", "--max-iters", "100", "--out", "m.mrc"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(dir.path().join("t.csv"), "x0,x1,label\n0,0,class0\n1,1,class9\n").unwrap();
    let e = mrc(&["eval", "--model", "m.mrc", "--data", "t.csv"], dir.path());
    assert_eq!(e.status.code(), Some(2));
    assert!(stderr(&e).contains("class9"));
    // a single known class is fine for evaluation
    std::fs::write(dir.path().join("t.csv"), "label,x1,x0\nclass1,0,0\n").unwrap();
    let e = mrc(&["eval", "--model", "m.mrc", "--data", "t.csv"], dir.path());
    assert_eq!(e.status.code(), Some(0), "{}", stderr(&e));
}
