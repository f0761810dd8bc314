use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use deconv_sax::data::{load_dataset, load_split, split_to_bytes, DataFormat};
use deconv_sax::net::{Checkpoint, ModelParams};
use deconv_sax::pipeline::{
    classify, featurize_sax, featurize_vector, graph_study, loss_log_tsv, train_autoencoder,
    FeatureMode, FeatureSet, PipelineConfig,
};
use deconv_sax::KeyValues;

/// Relative output paths are resolved against this directory when set.
const OUT_DIR_ENV: &str = "DECONV_SAX_OUT_DIR";

#[derive(Parser)]
#[command(name = "deconv-sax", version, about = "Deconvolutional autoencoder + SAX pipeline for multivariate time series")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key; repeatable, wins over --config
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Load, standardize and pad a data set into a split file
    Prep {
        data_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// native or csv
        #[arg(long, default_value = "native")]
        format: String,
    },
    /// Train the autoencoder on the training split
    TrainAe {
        split: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        /// Per-epoch loss log; defaults to <out>.loss.tsv
        #[arg(long)]
        loss_log: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Turn code maps into vector or bag-of-SAX-words features
    Featurize {
        split: PathBuf,
        model: PathBuf,
        /// vector or sax
        #[arg(long)]
        mode: String,
        /// Fixed SAX parameters n,w,a
        #[arg(long, conflicts_with = "search")]
        sax: Option<String>,
        /// grid or random:K
        #[arg(long)]
        search: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Cross-validation table; defaults to <out>.cv.tsv in sax mode
        #[arg(long)]
        cv_table: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Train the final SVM and report train CV and test error
    Classify {
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Build Markov transition graphs of the code maps and their statistics
    Graph {
        split: PathBuf,
        model: PathBuf,
        #[arg(long = "Q", alias = "q")]
        q: Option<usize>,
        /// Defaults to $DECONV_SAX_OUT_DIR
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

fn output_path(p: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if p.is_relative() => PathBuf::from(dir).join(p),
        _ => p.to_path_buf(),
    }
}

/// Writes through a sibling temporary file so a failed run leaves no partial
/// artifact behind.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot write into {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn load_config(args: &ConfigArgs, extra: &[(&str, Option<String>)]) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        cfg.apply(&KeyValues::parse(&text)?)
            .with_context(|| format!("in {}", path.display()))?;
    }
    let mut kv = KeyValues::default();
    for s in &args.set {
        let Some((k, v)) = s.split_once('=') else {
            bail!("--set expects KEY=VALUE, got {s:?}");
        };
        kv.set(k.trim(), v.trim());
    }
    if let Some(seed) = args.seed {
        kv.set("seed", seed);
    }
    for (k, v) in extra {
        if let Some(v) = v {
            kv.set(k, v);
        }
    }
    cfg.apply(&kv)?;
    Ok(cfg)
}

fn load_model(path: &Path) -> Result<ModelParams> {
    Ok(Checkpoint::load(path)
        .with_context(|| format!("cannot load model {}", path.display()))?
        .params)
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Command::Prep {
            data_dir,
            out,
            format,
        } => {
            let format: DataFormat = format.parse()?;
            let ds = load_dataset(&data_dir, format)
                .with_context(|| format!("cannot load {}", data_dir.display()))?;
            info!(
                "{}: {} channels, length {}, {} train, {} test",
                ds.name,
                ds.channels,
                ds.padded_length,
                ds.train.len(),
                ds.test.len()
            );
            write_atomic(&output_path(&out), &split_to_bytes(&ds))?;
        }
        Command::TrainAe {
            split,
            out,
            epochs,
            loss_log,
            cfg,
        } => {
            let cfg = load_config(&cfg, &[("epochs", epochs.map(|e| e.to_string()))])?;
            let ds = load_split(&split)?;
            let (params, report) = train_autoencoder(&ds, &cfg)?;
            if let Some(last) = report.epoch_losses.last() {
                info!("loss {} -> {last}", report.initial_loss);
            }
            let out = output_path(&out);
            let log_path = loss_log.map_or_else(|| with_suffix(&out, ".loss.tsv"), |p| output_path(&p));
            write_atomic(&log_path, loss_log_tsv(&report).as_bytes())?;
            let ckpt = Checkpoint {
                params,
                train: cfg.train,
            };
            write_atomic(&out, &ckpt.to_bytes())?;
        }
        Command::Featurize {
            split,
            model,
            mode,
            sax,
            search,
            out,
            cv_table,
            cfg,
        } => {
            let mode: FeatureMode = mode.parse()?;
            let cfg = load_config(&cfg, &[("sax", sax), ("search", search)])?;
            let ds = load_split(&split)?;
            let params = load_model(&model)?;
            let out = output_path(&out);
            let features = match mode {
                FeatureMode::Vector => featurize_vector(&ds, &params)?,
                FeatureMode::Sax => {
                    let (fs, grid) = featurize_sax(&ds, &params, &cfg)?;
                    let best = grid.best_row();
                    info!(
                        "selected sax {} C {} (LOO error {:?})",
                        best.point.sax(),
                        best.point.c,
                        best.cv_error
                    );
                    let table = cv_table.map_or_else(|| with_suffix(&out, ".cv.tsv"), |p| output_path(&p));
                    write_atomic(&table, grid.to_tsv().as_bytes())?;
                    fs
                }
            };
            write_atomic(&out, features.to_text().as_bytes())?;
        }
        Command::Classify { features, out, cfg } => {
            let cfg = load_config(&cfg, &[])?;
            let fs = FeatureSet::load(&features)?;
            let report = classify(&fs, &cfg.grid.c, &cfg.svm)?;
            info!("test error {}", report.test_error);
            write_atomic(&output_path(&out), report.to_tsv().as_bytes())?;
        }
        Command::Graph {
            split,
            model,
            q,
            out_dir,
            cfg,
        } => {
            let cfg = load_config(&cfg, &[("q", q.map(|q| q.to_string()))])?;
            let dir = match out_dir {
                Some(d) => output_path(&d),
                None => match std::env::var_os(OUT_DIR_ENV) {
                    Some(d) => PathBuf::from(d),
                    None => bail!("--out-dir is required unless {OUT_DIR_ENV} is set"),
                },
            };
            let ds = load_split(&split)?;
            let params = load_model(&model)?;
            let graphs = dir.join("graphs");
            let study = graph_study(&ds, &params, &cfg.quantizer, Some(&graphs))?;
            write_atomic(&dir.join("samples.tsv"), study.samples_tsv().as_bytes())?;
            write_atomic(&dir.join("stats.tsv"), study.to_tsv().as_bytes())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
