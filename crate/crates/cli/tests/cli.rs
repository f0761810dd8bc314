use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use deconv_sax::data::load_split;
use deconv_sax::net::Checkpoint;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_deconv-sax"));
    c.env_remove("DECONV_SAX_OUT_DIR").env("RUST_LOG", "warn");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Two-channel toy series: class +1 oscillates slowly, class -1 fast.
fn write_toy(dir: &Path, train: usize, test: usize) {
    let mut manifest = String::new();
    for i in 0..train + test {
        let label = if i % 2 == 0 { 1 } else { -1 };
        let freq = if label == 1 { 0.2 } else { 0.9 };
        let len = 36 + (i % 3) * 2;
        let text: String = (0..len)
            .map(|t| {
                let x = (t as f64 * freq + i as f64).sin();
                format!("{x} {}\n", 0.5 * x + 0.01 * t as f64)
            })
            .collect();
        let name = format!("s{i:02}.txt");
        fs::write(dir.join(&name), text).unwrap();
        let split = if i < train { "train" } else { "test" };
        manifest.push_str(&format!("{name}\t{label}\t{split}\n"));
    }
    fs::write(dir.join("manifest.tsv"), manifest).unwrap();
}

struct Fixture {
    _tmp: tempfile::TempDir,
    root: PathBuf,
    split: PathBuf,
    model: PathBuf,
    config: PathBuf,
}

fn fixture() -> Fixture {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().to_path_buf();
    let data = root.join("data");
    fs::create_dir(&data).unwrap();
    write_toy(&data, 12, 6);
    let config = root.join("run.cfg");
    fs::write(
        &config,
        "# toy run\nepochs=4\nbatch_size=4\nfilters1=3\nfilters2=2\n\
         grid_n=8,16\ngrid_w=2,4\ngrid_a=3,4\ngrid_c=0.1,1\nsvm_epochs=10\nq=6\n",
    )
    .unwrap();
    let split = root.join("toy.split");
    ok(&["prep", s(&data), "--out", s(&split)]);
    let model = root.join("toy.model");
    ok(&["train-ae", s(&split), "--config", s(&config), "--seed", "3", "--out", s(&model)]);
    Fixture {
        _tmp: tmp,
        root,
        split,
        model,
        config,
    }
}

#[test]
fn prep_writes_padded_split() {
    let f = fixture();
    let ds = load_split(&f.split).unwrap();
    assert_eq!((ds.train.len(), ds.test.len()), (12, 6));
    assert_eq!((ds.channels, ds.padded_length), (2, 40));
    assert!(ds.standardization.is_some());
}

#[test]
fn prep_missing_dir_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["prep", s(&tmp.path().join("nope")), "--out", s(&tmp.path().join("x"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
    assert!(!tmp.path().join("x").exists());
}

#[test]
fn training_is_deterministic_and_logs_losses() {
    let f = fixture();
    let again = f.root.join("again.model");
    ok(&["train-ae", s(&f.split), "--config", s(&f.config), "--seed", "3", "--out", s(&again)]);
    assert_eq!(fs::read(&f.model).unwrap(), fs::read(&again).unwrap());

    let log = fs::read_to_string(f.root.join("toy.model.loss.tsv")).unwrap();
    let lines: Vec<&str> = log.lines().collect();
    assert_eq!(lines[0], "epoch\tloss");
    assert_eq!(lines.len(), 1 + 1 + 4);

    let ckpt = Checkpoint::load(&f.model).unwrap();
    assert_eq!(ckpt.train.seed, 3);
    assert_eq!(ckpt.params.config.filters1, 3);
}

#[test]
fn flags_override_config_file() {
    let f = fixture();
    let m = f.root.join("zero.model");
    ok(&[
        "train-ae", s(&f.split), "--config", s(&f.config), "--epochs", "0", "--set", "filters2=4",
        "--out", s(&m),
    ]);
    let ckpt = Checkpoint::load(&m).unwrap();
    assert_eq!(ckpt.train.epochs, 0);
    assert_eq!(ckpt.params.config.filters2, 4);
    let log = fs::read_to_string(f.root.join("zero.model.loss.tsv")).unwrap();
    assert_eq!(log.lines().count(), 2);

    let bad = run(&["train-ae", s(&f.split), "--set", "filtres=4", "--out", s(&m)]);
    assert!(!bad.status.success());
}

#[test]
fn vector_features_have_code_dimension() {
    let f = fixture();
    let feats = f.root.join("vec.tsv");
    ok(&["featurize", s(&f.split), s(&f.model), "--mode", "vector", "--out", s(&feats)]);
    let text = fs::read_to_string(&feats).unwrap();
    let body = text.split_once("\n\n").unwrap().1;
    let rows: Vec<&str> = body.lines().collect();
    assert_eq!(rows.len(), 18);
    for r in rows {
        let values = r.split('\t').nth(3).unwrap().split_whitespace().count();
        // filters2 · channels · ceil(length / pool_w)
        assert_eq!(values, 2 * 2 * 20);
    }
    let report = f.root.join("vec.report");
    ok(&["classify", s(&feats), "--config", s(&f.config), "--out", s(&report)]);
    let r = fs::read_to_string(&report).unwrap();
    assert!(r.starts_with("dataset\tfeature\tsax\tC\ttrain_cv_error\ttest_error\n"));
    assert_eq!(r.lines().nth(1).unwrap().split('\t').nth(1), Some("vector"));
}

#[test]
fn sax_grid_emits_full_cv_table_and_is_idempotent() {
    let f = fixture();
    let a = f.root.join("sax_a.tsv");
    let b = f.root.join("sax_b.tsv");
    for out in [&a, &b] {
        ok(&[
            "featurize", s(&f.split), s(&f.model), "--mode", "sax", "--config", s(&f.config),
            "--out", s(out),
        ]);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let table = fs::read_to_string(f.root.join("sax_a.tsv.cv.tsv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 2 * 2 * 2 * 2);
    assert_eq!(table, fs::read_to_string(f.root.join("sax_b.tsv.cv.tsv")).unwrap());

    let report = f.root.join("sax.report");
    ok(&["classify", s(&a), "--out", s(&report)]);
    let line = fs::read_to_string(&report).unwrap().lines().nth(1).unwrap().to_string();
    let cols: Vec<&str> = line.split('\t').collect();
    assert_eq!(cols[1], "sax");
    let err: f64 = cols[5].parse().unwrap();
    assert!((0.0..=1.0).contains(&err));
}

#[test]
fn fixed_sax_parameters() {
    let f = fixture();
    let out = f.root.join("fixed.tsv");
    ok(&[
        "featurize", s(&f.split), s(&f.model), "--mode", "sax", "--sax", "8,4,3", "--config",
        s(&f.config), "--out", s(&out),
    ]);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("sax=8,4,3\n"));
    let table = fs::read_to_string(f.root.join("fixed.tsv.cv.tsv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 2);
}

#[test]
fn unknown_mode_is_a_usage_error() {
    let f = fixture();
    let out = f.root.join("x.tsv");
    let r = run(&["featurize", s(&f.split), s(&f.model), "--mode", "pixels", "--out", s(&out)]);
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("pixels"));
    assert!(!out.exists());
}

#[test]
fn mismatched_feature_file_rejected() {
    let f = fixture();
    let bad = f.root.join("bad.tsv");
    fs::write(&bad, "mode=vector\n\ntrain\ta\t1\t1 2 3\ntrain\tb\t-1\t1 2\n").unwrap();
    let report = f.root.join("r.tsv");
    assert!(!run(&["classify", s(&bad), "--out", s(&report)]).status.success());
    assert!(!report.exists());
}

#[test]
fn graph_outputs_per_sample_per_map() {
    let f = fixture();
    let dir = f.root.join("graphs_q2");
    ok(&["graph", s(&f.split), s(&f.model), "--Q", "2", "--config", s(&f.config), "--out-dir", s(&dir)]);
    let files: Vec<_> = fs::read_dir(dir.join("graphs")).unwrap().map(|e| e.unwrap().path()).collect();
    // 18 samples × 2 code maps × 2 formats
    assert_eq!(files.len(), 18 * 2 * 2);
    for p in files.iter().filter(|p| p.extension().unwrap() == "dot") {
        let arcs = fs::read_to_string(p).unwrap().matches("->").count();
        assert!(arcs <= 4, "{}", p.display());
    }
    let stats = fs::read_to_string(dir.join("stats.tsv")).unwrap();
    let rows: Vec<&str> = stats.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("normal\t9\t"));
    assert!(rows[2].starts_with("abnormal\t9\t"));
    assert!(rows[3].starts_with("p_value\t"));
}

#[test]
fn graph_into_unwritable_dir_fails() {
    let f = fixture();
    let blocker = f.root.join("file");
    fs::write(&blocker, "x").unwrap();
    let r = run(&["graph", s(&f.split), s(&f.model), "--Q", "4", "--out-dir", s(&blocker.join("sub"))]);
    assert!(!r.status.success());
}

#[test]
fn output_dir_from_environment() {
    let f = fixture();
    let out_dir = f.root.join("envout");
    fs::create_dir(&out_dir).unwrap();
    let r = bin()
        .env("DECONV_SAX_OUT_DIR", &out_dir)
        .args(["featurize", s(&f.split), s(&f.model), "--mode", "vector", "--out", "v.tsv"])
        .output()
        .unwrap();
    assert!(r.status.success());
    assert!(out_dir.join("v.tsv").exists());
}
