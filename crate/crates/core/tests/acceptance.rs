//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.
//!
//! Criteria 5–9 need the ECG and wafer data sets. They are looked up under
//! `$DECONV_SAX_DATA/{ecg,wafer}` or `<workspace>/data/{ecg,wafer}`, in the
//! native layout (`manifest.tsv`) or as `samples.csv`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use deconv_sax::data::{load_dataset, DataFormat, Dataset};
use deconv_sax::graph::{pagerank, transition_matrix, PAGERANK_DAMPING, PAGERANK_TOL};
use deconv_sax::net::ModelParams;
use deconv_sax::numerics::{conv2d_same, conv2d_transpose_same};
use deconv_sax::pipeline::{
    classify, featurize_sax, featurize_vector, graph_study, reconstruction_summary,
    train_autoencoder, ClassifyReport, PipelineConfig,
};
use deconv_sax::sax::{breakpoints, sax_transform, SaxParams};
use deconv_sax::Tensor;

type Outcome = Result<String, String>;

fn uniform(rng: &mut ChaCha8Rng, shape: Vec<usize>) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn gradients() -> Outcome {
    let start = Instant::now();
    let configs = 25;
    let mut worst: f64 = 0.0;
    for seed in 0..configs {
        let (params, x) = common::random_network(1000 + seed);
        worst = worst.max(common::gradient_error(&params, &x));
    }
    let took = start.elapsed();
    let msg = format!("{configs} configurations, max relative error {worst:.2e}, {took:.1?}");
    if worst < 1e-4 && took < Duration::from_secs(60) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn adjointness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (cin, cout) = (rng.gen_range(1..4), rng.gen_range(1..4));
        let (h, w) = (rng.gen_range(1..6), rng.gen_range(1..9));
        let (kh, kw) = ([1, 3, 5][rng.gen_range(0..3)], [1, 3, 5][rng.gen_range(0..3)]);
        let x = uniform(&mut rng, vec![cin, h, w]);
        let y = uniform(&mut rng, vec![cout, h, w]);
        let f = uniform(&mut rng, vec![cout, cin, kh, kw]);
        let lhs = conv2d_same(&x, &f, &vec![0.0; cout]).unwrap().dot(&y).unwrap();
        let rhs = x.dot(&conv2d_transpose_same(&y, &f, &vec![0.0; cin]).unwrap()).unwrap();
        worst = worst.max((lhs - rhs).abs());
    }
    let msg = format!("100 cases, max |<Kx,y> - <x,K'y>| = {worst:.2e}");
    if worst < 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn sax_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let len = rng.gen_range(20..=200);
        let mut level = 0.0;
        let x: Vec<f64> = (0..len)
            .map(|_| {
                let s: f64 = rng.gen_range(-1.0..1.0);
                level += s;
                level + 0.3 * s
            })
            .collect();
        let n = rng.gen_range(2..=len.min(64));
        // w = 1 reduces every window to its mean, zero up to rounding
        let w = rng.gen_range(2..=n.min(12));
        let a = rng.gen_range(2..=26);
        let p = SaxParams::new(n, w, a).unwrap();
        if sax_transform(&x, &p).unwrap() != common::brute_sax(&x, n, w, &breakpoints(a).unwrap()) {
            mismatches += 1;
        }
    }
    let msg = format!("1000 draws, {mismatches} mismatches");
    if mismatches == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn stochasticity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut row_dev, mut pr_dev): (f64, f64) = (0.0, 0.0);
    for _ in 0..500 {
        let q = rng.gen_range(1..=60);
        let len = rng.gen_range(2..400);
        let bins: Vec<usize> = (0..len).map(|_| rng.gen_range(0..q)).collect();
        let g = transition_matrix(&bins, q).unwrap();
        for i in 0..q {
            let s: f64 = g.row(i).iter().sum();
            if s != 0.0 {
                row_dev = row_dev.max((s - 1.0).abs());
            }
        }
        let pr = pagerank(&g, PAGERANK_DAMPING, PAGERANK_TOL);
        pr_dev = pr_dev.max((pr.iter().sum::<f64>() - 1.0).abs());
    }
    let msg = format!("500 graphs, max row deviation {row_dev:.1e}, max PageRank deviation {pr_dev:.1e}");
    if row_dev <= 1e-9 && pr_dev <= 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn data_root() -> PathBuf {
    std::env::var_os("DECONV_SAX_DATA")
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            let core = Path::new(env!("CARGO_MANIFEST_DIR"));
            core.ancestors().nth(2).unwrap_or(core).join("data")
        })
}

fn load(name: &str) -> Result<Dataset, String> {
    let dir = data_root().join(name);
    let format = if dir.join("manifest.tsv").is_file() {
        DataFormat::Native
    } else if dir.join("samples.csv").is_file() {
        DataFormat::CsvManifest
    } else {
        return Err(format!(
            "BLOCKED: no data set at {} (set DECONV_SAX_DATA)",
            dir.display()
        ));
    };
    load_dataset(&dir, format).map_err(|e| format!("cannot load {}: {e}", dir.display()))
}

fn check_dims(ds: &Dataset, dims: (usize, usize, usize, usize)) -> Result<(), String> {
    let got = (ds.channels, ds.padded_length, ds.train.len(), ds.test.len());
    if got == dims {
        Ok(())
    } else {
        Err(format!("{}: (channels, length, train, test) = {got:?}, expected {dims:?}", ds.name))
    }
}

struct Run {
    ds: Dataset,
    params: ModelParams,
    sax: ClassifyReport,
    took: Duration,
}

/// Default configuration and grid, seed 0: autoencoder, SAX search, SVM.
fn run_sax(ds: Dataset) -> Result<Run, String> {
    let start = Instant::now();
    let cfg = PipelineConfig::default();
    let (params, _) = train_autoencoder(&ds, &cfg).map_err(|e| e.to_string())?;
    let (fs, _) = featurize_sax(&ds, &params, &cfg).map_err(|e| e.to_string())?;
    let sax = classify(&fs, &cfg.grid.c, &cfg.svm).map_err(|e| e.to_string())?;
    Ok(Run {
        ds,
        params,
        sax,
        took: start.elapsed(),
    })
}

fn classification(run: &Result<Run, String>, max_error: f64, budget: Duration) -> Outcome {
    let run = run.as_ref().map_err(Clone::clone)?;
    let msg = format!(
        "{}: sax {} C {} test error {:.4} (limit {max_error}), {:.1?} (limit {budget:?})",
        run.ds.name, run.sax.sax.map_or("-".into(), |p| p.to_string()), run.sax.c, run.sax.test_error, run.took
    );
    if run.sax.test_error <= max_error && run.took <= budget {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn vector_vs_sax(run: &Result<Run, String>) -> Outcome {
    let run = run.as_ref().map_err(Clone::clone)?;
    let cfg = PipelineConfig::default();
    let fs = featurize_vector(&run.ds, &run.params).map_err(|e| e.to_string())?;
    let vector = classify(&fs, &cfg.grid.c, &cfg.svm).map_err(|e| e.to_string())?;
    let msg = format!("sax {:.4} vs vector {:.4}", run.sax.test_error, vector.test_error);
    if run.sax.test_error <= vector.test_error {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn path_length_direction(run: &Result<Run, String>) -> Outcome {
    let run = run.as_ref().map_err(Clone::clone)?;
    let q = PipelineConfig::default().quantizer;
    let study = graph_study(&run.ds, &run.params, &q, None).map_err(|e| e.to_string())?;
    let [normal, abnormal] = &study.class_means;
    let p = study.p_values.as_ref().map(|p| p.avg_path_length);
    let msg = format!(
        "Q={}: avg path length normal {:.4} vs abnormal {:.4}, p = {}",
        q.bins,
        normal.avg_path_length,
        abnormal.avg_path_length,
        p.map_or("NA".into(), |p| format!("{p:.3e}"))
    );
    match p {
        Some(p) if normal.avg_path_length > abnormal.avg_path_length && p < 0.05 => Ok(msg),
        _ => Err(msg),
    }
}

fn reconstruction(run: &Result<Run, String>) -> Outcome {
    let run = run.as_ref().map_err(Clone::clone)?;
    let (mse, var) = reconstruction_summary(&run.params, &run.ds.train).map_err(|e| e.to_string())?;
    let msg = format!("train MSE {mse:.4} vs 0.1 x variance {:.4}", 0.1 * var);
    if mse < 0.1 * var {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn guarded<T>(f: impl FnOnce() -> Result<T, String>) -> Result<T, String> {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let what = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {what}"))
    })
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: u32, title: &str, outcome: Outcome| match outcome {
        Ok(msg) => println!("criterion {id}: PASS {title}: {msg}"),
        Err(msg) => {
            failed += 1;
            println!("criterion {id}: FAIL {title}: {msg}");
        }
    };
    report(1, "gradient check", guarded(gradients));
    report(2, "adjointness", guarded(adjointness));
    report(3, "SAX oracle", guarded(sax_oracle));
    report(4, "stochasticity", guarded(stochasticity));

    let ecg = guarded(|| {
        let ds = load("ecg")?;
        check_dims(&ds, (2, 153, 100, 100))?;
        run_sax(ds)
    });
    report(5, "ECG classification", guarded(|| classification(&ecg, 0.18, Duration::from_secs(600))));
    let wafer = guarded(|| {
        let ds = load("wafer")?;
        check_dims(&ds, (6, 199, 896, 298))?;
        run_sax(ds)
    });
    report(6, "wafer classification", guarded(|| classification(&wafer, 0.05, Duration::from_secs(1200))));
    drop(wafer);
    report(7, "SAX not worse than vector on ECG", guarded(|| vector_vs_sax(&ecg)));
    report(8, "ECG path length direction", guarded(|| path_length_direction(&ecg)));
    report(9, "ECG reconstruction", guarded(|| reconstruction(&ecg)));

    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
