use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use randmix::experiments::ResultTable;
use randmix::{kl_divergence, seeded_rng, target_f1, Domain, QuadratureConfig};
use randmix_cli::ModelDocument;
use tempfile::TempDir;

fn randmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randmix"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_target_sample(path: &Path, size: usize, seed: u64) {
    let sample = target_f1().sample(&mut seeded_rng(seed), size);
    let text: String = sample.iter().map(|x| format!("{x}\n")).collect();
    fs::write(path, text).unwrap();
}

#[test]
fn benchmark_prints_json() {
    let out = randmix(&["benchmark"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let kl = v["kl"].as_f64().unwrap();
    assert!((kl - 1.976).abs() < 2e-3);
    assert!((v["l2"].as_f64().unwrap() - 10.502).abs() < 1e-2);

    let loose = randmix(&["benchmark", "--tol", "1e-6"]);
    assert_eq!(code(&loose), 0);
    let w: serde_json::Value = serde_json::from_slice(&loose.stdout).unwrap();
    assert!((w["kl"].as_f64().unwrap() - kl).abs() < 1e-5);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["benchmark", "--tol=-1"][..],
        &["benchmark", "--tol", "abc"],
        &["benchmark", "--tol", "0"],
        &["frobnicate"],
        &["sim1", "--scheme", "bootstrap", "--n", "10", "--omega", "5", "--out", "x.csv"],
        &["sim1", "--scheme", "target", "--n", "0", "--omega", "5", "--out", "x.csv"],
        &["sim2", "--scheme", "uniform", "--n", "10", "--N", "0", "--out", "x.csv"],
        &[
            "fit",
            "--data",
            "d.csv",
            "--n",
            "0",
            "--omega",
            "50",
            "--scheme",
            "bootstrap",
            "--model-out",
            "m.json",
        ],
        &[
            "fit",
            "--data",
            "d.csv",
            "--n",
            "5",
            "--omega",
            "50",
            "--scheme",
            "target",
            "--model-out",
            "m.json",
        ],
        &["approx", "--scheme", "target", "--n", "5", "--omega", "-3", "--out", "a.csv"],
    ] {
        let out = randmix(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn sim1_writes_one_row_per_cell_deterministically() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = randmix(&[
            "sim1",
            "--scheme",
            "target",
            "--n",
            "100",
            "--omega",
            "50",
            "--reps",
            "5",
            "--seed",
            "7",
            "--out",
            path_str(p),
        ]);
        assert_eq!(code(&out), 0);
        assert!(String::from_utf8_lossy(&out.stdout).contains("target"));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let table = ResultTable::from_csv(&text).unwrap();
    assert_eq!(table.cells.len(), 1);
    assert_eq!((table.cells[0].n, table.cells[0].param, table.cells[0].reps), (100, 50.0, 5));
    assert_eq!(table.to_csv(), text);
}

#[test]
fn sim2_grid_rows() {
    let dir = TempDir::new().unwrap();
    let s = dir.path().join("s.csv");
    let out = randmix(&[
        "sim2",
        "--scheme",
        "bootstrap",
        "--n",
        "100,500",
        "--N",
        "1000",
        "--reps",
        "2",
        "--seed",
        "7",
        "--out",
        path_str(&s),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = ResultTable::from_csv(&fs::read_to_string(&s).unwrap()).unwrap();
    assert_eq!(table.cells.iter().map(|c| c.n).collect::<Vec<_>>(), vec![100, 500]);
    assert!(table.cells.iter().all(|c| c.mean_kl.is_finite() && c.nonfinite == 0));
}

#[test]
fn unwritable_output_exits_1() {
    let out = randmix(&[
        "sim1",
        "--scheme",
        "uniform",
        "--n",
        "10",
        "--omega",
        "5",
        "--reps",
        "1",
        "--out",
        "/nonexistent-dir/t.csv",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn fit_recovers_target_and_round_trips() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("d.csv");
    write_target_sample(&data, 10_000, 11);
    let model_path = dir.path().join("m.json");
    let curve_path = dir.path().join("c.csv");
    let out = randmix(&[
        "fit",
        "--data",
        path_str(&data),
        "--n",
        "500",
        "--omega",
        "200",
        "--scheme",
        "bootstrap",
        "--seed",
        "3",
        "--model-out",
        path_str(&model_path),
        "--curve-out",
        path_str(&curve_path),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let json = fs::read_to_string(&model_path).unwrap();
    let doc = ModelDocument::from_json(&json).unwrap();
    assert_eq!(doc.to_json(), json);
    assert_eq!(doc.atoms.len(), 500);
    assert_eq!(doc.seed, 3);
    assert!(doc.converged.is_some());
    let model = doc.to_model().unwrap();
    assert_eq!(ModelDocument::from_model(&model, doc.seed, None).alpha, doc.alpha);

    let f1 = target_f1();
    let kl = kl_divergence(
        |x| f1.log_density(x),
        |x| model.log_density_1d(x),
        &Domain::unit(1),
        &QuadratureConfig::default(),
    )
    .unwrap();
    assert!(kl < 0.02, "KL = {kl}");

    let curve = fs::read_to_string(&curve_path).unwrap();
    let mut lines = curve.lines();
    assert_eq!(lines.next(), Some("x,density"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (x, y) = l.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 1001);
    let (lo, hi) = doc.domain[0].into();
    let pad = 0.05 * (hi - lo);
    assert!((rows[0].0 - (lo - pad)).abs() < 1e-12 && (rows[1000].0 - (hi + pad)).abs() < 1e-12);
    for &(x, y) in rows.iter().step_by(97) {
        assert!((y - model.log_density_1d(x).exp()).abs() <= 1e-12 * (1.0 + y));
    }

    let again = dir.path().join("m2.json");
    let out = randmix(&[
        "fit",
        "--data",
        path_str(&data),
        "--n",
        "500",
        "--omega",
        "200",
        "--scheme",
        "bootstrap",
        "--seed",
        "3",
        "--model-out",
        path_str(&again),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read_to_string(&again).unwrap(), json);
}

#[test]
fn fit_single_point_dataset() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("one.csv");
    fs::write(&data, "0.4\n").unwrap();
    let model_path = dir.path().join("m.json");
    let out = randmix(&[
        "fit",
        "--data",
        path_str(&data),
        "--n",
        "7",
        "--omega",
        "50",
        "--scheme",
        "bootstrap",
        "--model-out",
        path_str(&model_path),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = ModelDocument::from_json(&fs::read_to_string(&model_path).unwrap()).unwrap();
    assert!(doc.atoms.iter().all(|a| a.y == [0.4]));
    assert!((doc.alpha.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    doc.to_model().unwrap();
}

#[test]
fn fit_uniform_scheme_stays_in_padded_range() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("d.csv");
    write_target_sample(&data, 300, 5);
    let model_path = dir.path().join("m.json");
    let out = randmix(&[
        "fit",
        "--data",
        path_str(&data),
        "--n",
        "40",
        "--omega",
        "100",
        "--scheme",
        "uniform",
        "--model-out",
        path_str(&model_path),
    ]);
    assert_eq!(code(&out), 0);
    let doc = ModelDocument::from_json(&fs::read_to_string(&model_path).unwrap()).unwrap();
    assert_eq!(doc.scheme, "uniform");
    let [lo, hi] = doc.domain[0];
    assert!(doc.atoms.iter().all(|a| (lo..=hi).contains(&a.y[0])));
}

#[test]
fn fit_bad_data_exits_1() {
    let dir = TempDir::new().unwrap();
    let model = dir.path().join("m.json");
    let cases = [
        ("empty.csv", ""),
        ("text.csv", "0.1\nabc\n"),
        ("wide.csv", "0.1,0.2\n"),
        ("nan.csv", "NaN\n"),
    ];
    for (name, contents) in cases {
        let p = dir.path().join(name);
        fs::write(&p, contents).unwrap();
        let out = randmix(&[
            "fit",
            "--data",
            path_str(&p),
            "--n",
            "3",
            "--omega",
            "10",
            "--scheme",
            "bootstrap",
            "--model-out",
            path_str(&model),
        ]);
        assert_eq!(code(&out), 1, "{name}");
    }
    let out = randmix(&[
        "fit",
        "--data",
        "/no/such/file.csv",
        "--n",
        "3",
        "--omega",
        "10",
        "--scheme",
        "uniform",
        "--model-out",
        path_str(&model),
    ]);
    assert_eq!(code(&out), 1);
    assert!(!model.exists());
}

#[test]
fn approx_writes_curve_against_target() {
    let dir = TempDir::new().unwrap();
    for scheme in ["target", "uniform"] {
        let a = dir.path().join(format!("{scheme}.csv"));
        let out = randmix(&[
            "approx",
            "--scheme",
            scheme,
            "--n",
            "2000",
            "--omega",
            "100",
            "--seed",
            "4",
            "--out",
            path_str(&a),
        ]);
        assert_eq!(code(&out), 0);
        let text = fs::read_to_string(&a).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,density,target"));
        let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
        assert_eq!(rows.len(), 1001);
        assert_eq!((rows[0][0], rows[1000][0]), (0.0, 1.0));
        let f1 = target_f1();
        assert!(rows.iter().all(|r| r[2] == f1.density(r[0]) && r[1] >= 0.0));
        let peak = rows.iter().max_by(|p, q| p[1].total_cmp(&q[1])).unwrap()[0];
        assert!((peak - 0.5).abs() < 0.02, "{scheme} peak at {peak}");
    }
}
