//! End-to-end orchestration: configuration, feature files and reports.
//!
//! # Configuration file
//!
//! Plain `key=value` lines, `#` comments. Every key is optional:
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `filters1`, `filters2` | 8, 5 | feature maps per layer |
//! | `kernel` | `3x3` | kernel extent (channels × time), odd |
//! | `pool_w` | 2 | pooling width along time |
//! | `tie_weights` | true | decoder reuses encoder filters |
//! | `final_activation` | linear | `linear` or `relu` |
//! | `learning_rate`, `rho`, `epsilon` | 0.1, 0.95, 1e-6 | Adadelta |
//! | `epochs`, `batch_size` | 200, 16 | training schedule |
//! | `seed` | 0 | network init, shuffling, SVM and random search |
//! | `sax` | unset | fixed `n,w,a`; disables the search |
//! | `search` | `grid` | `grid` or `random:K` |
//! | `grid_n`, `grid_w`, `grid_a`, `grid_c` | see [`GridSpace`] | comma lists |
//! | `l1_normalize` | true | scale word counts to sum 1 |
//! | `normalize_windows` | true | z-normalize each SAX window |
//! | `numerosity_reduction` | false | drop repeated consecutive words |
//! | `svm_epochs` | 1000 | most SVM passes over the data |
//! | `svm_tol` | 0.1 | SVM stopping tolerance |
//! | `q` | 60 | graph bins |
//! | `quantizer` | gaussian | `gaussian` or `quantile` |
//!
//! Unknown keys are rejected so typos do not silently fall back to defaults.
//!
//! # Feature file
//!
//! Text. A `key=value` header (`dataset`, `mode`, and for SAX features
//! `sax`, `C`, `cv_error`), an empty line, then one line per sample:
//! `split<TAB>id<TAB>label<TAB>features`. Vector features are
//! space-separated numbers; bag features are space-separated `word=count`.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use log::{info, warn};
use rayon::prelude::*;

use crate::classify::{
    grid_search, select_c, train_svm, BagOptions, Encoding, FeatureMatrix, GridResult, GridSpace,
    SvmConfig, Vocabulary,
};
use crate::codec::KeyValues;
use crate::data::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::graph::{
    export_graph, graph_stats, sequence_graph, significance, GraphFormat, GraphStats,
    QuantizerConfig, QuantizerMode,
};
use crate::net::{
    encode_features, mean_loss, train, FinalActivation, ModelParams, NetworkConfig, TrainConfig,
    TrainReport,
};
use crate::sax::{SaxParams, WordHistogram};

/// How SAX parameters are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum SaxSearch {
    Fixed(SaxParams),
    Grid,
    /// `k` points drawn from the grid.
    Random(usize),
}

impl FromStr for SaxSearch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "grid" {
            return Ok(SaxSearch::Grid);
        }
        if let Some(k) = s.strip_prefix("random:") {
            let k = k
                .parse()
                .map_err(|_| Error::arg(format!("bad random search size in {s:?}")))?;
            return Ok(SaxSearch::Random(k));
        }
        Err(Error::arg(format!("unknown search {s:?} (expected grid or random:K)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub filters1: usize,
    pub filters2: usize,
    pub kernel: (usize, usize),
    pub pool_w: usize,
    pub tie_weights: bool,
    pub final_activation: FinalActivation,
    pub train: TrainConfig,
    pub search: SaxSearch,
    pub grid: GridSpace,
    pub bag: BagOptions,
    pub svm: SvmConfig,
    pub quantizer: QuantizerConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let net = NetworkConfig::new(1, 1);
        PipelineConfig {
            filters1: net.filters1,
            filters2: net.filters2,
            kernel: net.kernel,
            pool_w: net.pool_w,
            tie_weights: net.tie_weights,
            final_activation: net.final_activation,
            train: TrainConfig::default(),
            search: SaxSearch::Grid,
            grid: GridSpace::default(),
            bag: BagOptions::default(),
            svm: SvmConfig::default(),
            quantizer: QuantizerConfig {
                bins: 60,
                mode: QuantizerMode::Gaussian,
            },
        }
    }
}

const KEYS: &[&str] = &[
    "filters1",
    "filters2",
    "kernel",
    "pool_w",
    "tie_weights",
    "final_activation",
    "learning_rate",
    "rho",
    "epsilon",
    "epochs",
    "batch_size",
    "seed",
    "sax",
    "search",
    "grid_n",
    "grid_w",
    "grid_a",
    "grid_c",
    "l1_normalize",
    "normalize_windows",
    "numerosity_reduction",
    "svm_epochs",
    "svm_tol",
    "q",
    "quantizer",
];

fn parse_list<T: FromStr>(key: &str, s: &str) -> Result<Vec<T>> {
    let v = s
        .split(',')
        .map(|p| p.trim().parse::<T>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::arg(format!("{key}: cannot parse list {s:?}")))?;
    if v.is_empty() {
        return Err(Error::arg(format!("{key}: empty list")));
    }
    Ok(v)
}

fn parse_kernel(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::arg(format!("kernel: expected HxW, got {s:?}"));
    let (h, w) = s.split_once('x').ok_or_else(bad)?;
    Ok((h.trim().parse().map_err(|_| bad())?, w.trim().parse().map_err(|_| bad())?))
}

impl PipelineConfig {
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let mut c = PipelineConfig::default();
        c.apply(kv)?;
        Ok(c)
    }

    /// Overwrites every field named in `kv`.
    pub fn apply(&mut self, kv: &KeyValues) -> Result<()> {
        if let Some(k) = kv.keys().find(|k| !KEYS.contains(k)) {
            return Err(Error::arg(format!("unknown configuration key {k:?}")));
        }
        macro_rules! set {
            ($key:literal, $field:expr) => {
                if let Some(v) = kv.get($key)? {
                    $field = v;
                }
            };
        }
        set!("filters1", self.filters1);
        set!("filters2", self.filters2);
        set!("pool_w", self.pool_w);
        set!("tie_weights", self.tie_weights);
        set!("final_activation", self.final_activation);
        set!("learning_rate", self.train.learning_rate);
        set!("rho", self.train.rho);
        set!("epsilon", self.train.epsilon);
        set!("epochs", self.train.epochs);
        set!("batch_size", self.train.batch_size);
        set!("l1_normalize", self.bag.l1_normalize);
        set!("normalize_windows", self.bag.sax.normalize_windows);
        set!("numerosity_reduction", self.bag.sax.numerosity_reduction);
        set!("svm_epochs", self.svm.epochs);
        set!("svm_tol", self.svm.tol);
        set!("q", self.quantizer.bins);
        set!("quantizer", self.quantizer.mode);
        if let Some(seed) = kv.get::<u64>("seed")? {
            self.train.seed = seed;
            self.svm.seed = seed;
        }
        if let Some(k) = kv.get_str("kernel") {
            self.kernel = parse_kernel(k)?;
        }
        if let Some(s) = kv.get_str("search") {
            self.search = s.parse()?;
        }
        if let Some(p) = kv.get::<SaxParams>("sax")? {
            self.search = SaxSearch::Fixed(p);
        }
        if let Some(s) = kv.get_str("grid_n") {
            self.grid.n = parse_list("grid_n", s)?;
        }
        if let Some(s) = kv.get_str("grid_w") {
            self.grid.w = parse_list("grid_w", s)?;
        }
        if let Some(s) = kv.get_str("grid_a") {
            self.grid.a = parse_list("grid_a", s)?;
        }
        if let Some(s) = kv.get_str("grid_c") {
            self.grid.c = parse_list("grid_c", s)?;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        self.network(1, 1).validate()?;
        self.train.validate()?;
        QuantizerConfig::new(self.quantizer.bins, self.quantizer.mode)?;
        if let SaxSearch::Fixed(p) = &self.search {
            p.validate()?;
        }
        if self.svm.epochs == 0 || !(self.svm.tol > 0.0) {
            return Err(Error::arg("svm_epochs and svm_tol must be positive"));
        }
        if self.grid.c.iter().any(|&c| !(c > 0.0)) {
            return Err(Error::arg("every C must be positive"));
        }
        Ok(())
    }

    /// Architecture for inputs of `channels × length`.
    pub fn network(&self, channels: usize, length: usize) -> NetworkConfig {
        NetworkConfig {
            channels,
            length,
            filters1: self.filters1,
            filters2: self.filters2,
            kernel: self.kernel,
            pool_w: self.pool_w,
            tie_weights: self.tie_weights,
            final_activation: self.final_activation,
        }
    }

    pub fn search_points(&self) -> Vec<crate::classify::GridPoint> {
        match &self.search {
            SaxSearch::Fixed(p) => self
                .grid
                .c
                .iter()
                .map(|&c| crate::classify::GridPoint { n: p.n, w: p.w, a: p.a, c })
                .collect(),
            SaxSearch::Grid => self.grid.points(),
            SaxSearch::Random(k) => self.grid.random_points(*k, self.svm.seed),
        }
    }
}

/// Trains the autoencoder on the training split.
pub fn train_autoencoder(ds: &Dataset, cfg: &PipelineConfig) -> Result<(ModelParams, TrainReport)> {
    let inputs = ds.train_inputs()?;
    train(&inputs, cfg.network(ds.channels, ds.padded_length), &cfg.train)
}

/// `epoch<TAB>loss` with epoch 0 holding the loss before training.
pub fn loss_log_tsv(r: &TrainReport) -> String {
    let mut s = format!("epoch\tloss\n0\t{}\n", r.initial_loss);
    for (i, l) in r.epoch_losses.iter().enumerate() {
        s.push_str(&format!("{}\t{l}\n", i + 1));
    }
    s
}

/// Mean per-sample reconstruction MSE and mean per-sample signal variance.
pub fn reconstruction_summary(params: &ModelParams, samples: &[Sample]) -> Result<(f64, f64)> {
    let inputs = samples.iter().map(Sample::to_input).collect::<Result<Vec<_>>>()?;
    let mse = mean_loss(params, &inputs)?;
    let var = inputs
        .iter()
        .map(|x| {
            let d = x.data();
            let m = d.iter().sum::<f64>() / d.len() as f64;
            d.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / d.len() as f64
        })
        .sum::<f64>()
        / inputs.len().max(1) as f64;
    Ok((mse, var))
}

fn check_model(ds: &Dataset, params: &ModelParams) -> Result<()> {
    let c = &params.config;
    if c.channels != ds.channels || c.length != ds.padded_length {
        return Err(Error::dim(format!(
            "model expects {}x{} inputs, data set has {}x{}",
            c.channels, c.length, ds.channels, ds.padded_length
        )));
    }
    Ok(())
}

/// Code maps of every sample, one vector per map.
pub fn code_maps(params: &ModelParams, samples: &[Sample]) -> Result<Vec<Vec<Vec<f64>>>> {
    samples
        .par_iter()
        .map(|s| Ok(encode_features(params, &s.to_input()?)?.maps))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    Vector,
    Sax,
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureMode::Vector => "vector",
            FeatureMode::Sax => "sax",
        })
    }
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vector" => Ok(FeatureMode::Vector),
            "sax" => Ok(FeatureMode::Sax),
            _ => Err(Error::arg(format!("unknown feature mode {s:?} (expected vector or sax)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowData {
    Dense(Vec<f64>),
    Bag(WordHistogram),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub id: String,
    pub label: i8,
    pub data: RowData,
}

/// Features of both splits plus what was selected while producing them.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub dataset: String,
    pub mode: FeatureMode,
    pub sax: Option<SaxParams>,
    pub c: Option<f64>,
    pub cv_error: Option<f64>,
    pub l1_normalize: bool,
    pub train: Vec<FeatureRow>,
    pub test: Vec<FeatureRow>,
}

/// Concatenated code maps as dense vectors.
pub fn featurize_vector(ds: &Dataset, params: &ModelParams) -> Result<FeatureSet> {
    check_model(ds, params)?;
    let rows = |samples: &[Sample]| -> Result<Vec<FeatureRow>> {
        Ok(code_maps(params, samples)?
            .into_iter()
            .zip(samples)
            .map(|(maps, s)| FeatureRow {
                id: s.id.clone(),
                label: s.label,
                data: RowData::Dense(maps.concat()),
            })
            .collect())
    };
    Ok(FeatureSet {
        dataset: ds.name.clone(),
        mode: FeatureMode::Vector,
        sax: None,
        c: None,
        cv_error: None,
        l1_normalize: false,
        train: rows(&ds.train)?,
        test: rows(&ds.test)?,
    })
}

/// Bags of SAX words over the code maps; SAX parameters and `C` are picked
/// by leave-one-out search on the training split.
pub fn featurize_sax(
    ds: &Dataset,
    params: &ModelParams,
    cfg: &PipelineConfig,
) -> Result<(FeatureSet, GridResult)> {
    check_model(ds, params)?;
    let train_maps = code_maps(params, &ds.train)?;
    let labels: Vec<i8> = ds.train.iter().map(|s| s.label).collect();
    let points = cfg.search_points();
    info!("searching {} grid points over {} training samples", points.len(), labels.len());
    let grid = grid_search(&points, &train_maps, &labels, cfg.bag, &cfg.svm)?;
    let best = grid.best_row().clone();
    let p = best.point.sax();
    let bag = |maps: &[Vec<f64>]| crate::classify::sax_bag(maps, &p, cfg.bag.sax);
    let train = train_maps
        .iter()
        .zip(&ds.train)
        .map(|(maps, s)| {
            Ok(FeatureRow {
                id: s.id.clone(),
                label: s.label,
                data: RowData::Bag(bag(maps)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let test = code_maps(params, &ds.test)?
        .iter()
        .zip(&ds.test)
        .map(|(maps, s)| {
            Ok(FeatureRow {
                id: s.id.clone(),
                label: s.label,
                data: RowData::Bag(bag(maps)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fs = FeatureSet {
        dataset: ds.name.clone(),
        mode: FeatureMode::Sax,
        sax: Some(p),
        c: Some(best.point.c),
        cv_error: best.cv_error,
        l1_normalize: cfg.bag.l1_normalize,
        train,
        test,
    };
    Ok((fs, grid))
}

fn row_line(split: &str, r: &FeatureRow) -> String {
    let body = match &r.data {
        RowData::Dense(v) => v.iter().map(f64::to_string).collect::<Vec<_>>().join(" "),
        RowData::Bag(h) => h
            .counts
            .iter()
            .map(|(w, c)| format!("{w}={c}"))
            .collect::<Vec<_>>()
            .join(" "),
    };
    format!("{split}\t{}\t{}\t{body}\n", r.id, r.label)
}

impl FeatureSet {
    pub fn to_text(&self) -> String {
        let mut kv = KeyValues::default();
        kv.set("dataset", &self.dataset);
        kv.set("mode", self.mode);
        kv.set("l1_normalize", self.l1_normalize);
        if let Some(p) = self.sax {
            kv.set("sax", p);
        }
        if let Some(c) = self.c {
            kv.set("C", c);
        }
        if let Some(e) = self.cv_error {
            kv.set("cv_error", e);
        }
        let mut s = kv.to_text();
        s.push('\n');
        for r in &self.train {
            s.push_str(&row_line("train", r));
        }
        for r in &self.test {
            s.push_str(&row_line("test", r));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (head, body) = text
            .split_once("\n\n")
            .ok_or_else(|| Error::arg("feature file lacks the blank line after its header"))?;
        let kv = KeyValues::parse(head)?;
        let mode: FeatureMode = kv.require("mode")?;
        let mut fs = FeatureSet {
            dataset: kv.get_str("dataset").unwrap_or("").to_string(),
            mode,
            sax: kv.get("sax")?,
            c: kv.get("C")?,
            cv_error: kv.get("cv_error")?,
            l1_normalize: kv.get("l1_normalize")?.unwrap_or(false),
            train: Vec::new(),
            test: Vec::new(),
        };
        let header_lines = head.lines().count() + 1;
        for (n, line) in body.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let bad = |m: &str| Error::arg(format!("feature file line {}: {m}", header_lines + n + 1));
            let f: Vec<&str> = line.splitn(4, '\t').collect();
            let [split, id, label, feats] = f.as_slice() else {
                return Err(bad("expected split, id, label and features"));
            };
            let label: i8 = match *label {
                "1" => 1,
                "-1" => -1,
                _ => return Err(bad("label must be 1 or -1")),
            };
            let data = match mode {
                FeatureMode::Vector => RowData::Dense(
                    feats
                        .split_whitespace()
                        .map(str::parse)
                        .collect::<std::result::Result<Vec<f64>, _>>()
                        .map_err(|_| bad("non-numeric feature"))?,
                ),
                FeatureMode::Sax => {
                    let mut h = WordHistogram::default();
                    for tok in feats.split_whitespace() {
                        let (w, c) = tok.rsplit_once('=').ok_or_else(|| bad("expected word=count"))?;
                        h.add(w, c.parse().map_err(|_| bad("bad count"))?);
                    }
                    RowData::Bag(h)
                }
            };
            let row = FeatureRow {
                id: id.to_string(),
                label,
                data,
            };
            match *split {
                "train" => fs.train.push(row),
                "test" => fs.test.push(row),
                _ => return Err(bad("split must be train or test")),
            }
        }
        Ok(fs)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// Training and test matrices. Bag vocabularies come from the training
    /// rows only; unseen test words are dropped.
    pub fn matrices(&self) -> Result<(FeatureMatrix, FeatureMatrix)> {
        let labels = |rows: &[FeatureRow]| rows.iter().map(|r| r.label).collect::<Vec<_>>();
        match self.mode {
            FeatureMode::Vector => {
                let dense = |rows: &[FeatureRow]| -> Result<Vec<Vec<f64>>> {
                    rows.iter()
                        .map(|r| match &r.data {
                            RowData::Dense(v) => Ok(v.clone()),
                            RowData::Bag(_) => Err(Error::arg("bag row in a vector feature set")),
                        })
                        .collect()
                };
                let (tr, te) = (dense(&self.train)?, dense(&self.test)?);
                let dims: HashSet<usize> = tr.iter().chain(&te).map(Vec::len).collect();
                if dims.len() > 1 {
                    return Err(Error::dim(format!("feature rows differ in length: {dims:?}")));
                }
                Ok((
                    FeatureMatrix::dense(&tr, labels(&self.train))?,
                    FeatureMatrix::dense(&te, labels(&self.test))?,
                ))
            }
            FeatureMode::Sax => {
                let bags = |rows: &[FeatureRow]| -> Result<Vec<WordHistogram>> {
                    rows.iter()
                        .map(|r| match &r.data {
                            RowData::Bag(h) => Ok(h.clone()),
                            RowData::Dense(_) => Err(Error::arg("dense row in a bag feature set")),
                        })
                        .collect()
                };
                let (tr, te) = (bags(&self.train)?, bags(&self.test)?);
                let vocab = Vocabulary::fit(&tr);
                let enc = |hs: &[WordHistogram], rows: &[FeatureRow]| {
                    FeatureMatrix::new(
                        hs.iter().map(|h| vocab.transform(h, self.l1_normalize)).collect(),
                        labels(rows),
                        vocab.len(),
                        Encoding::Bag,
                    )
                };
                Ok((enc(&tr, &self.train)?, enc(&te, &self.test)?))
            }
        }
    }
}

/// One line of the classification report.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyReport {
    pub dataset: String,
    pub mode: FeatureMode,
    pub sax: Option<SaxParams>,
    pub c: f64,
    pub cv_error: f64,
    pub test_error: f64,
}

impl ClassifyReport {
    pub fn to_tsv(&self) -> String {
        let sax = self.sax.map_or_else(|| "-".to_string(), |p| p.to_string());
        format!(
            "dataset\tfeature\tsax\tC\ttrain_cv_error\ttest_error\n{}\t{}\t{sax}\t{}\t{}\t{}\n",
            self.dataset, self.mode, self.c, self.cv_error, self.test_error
        )
    }
}

/// Trains the final SVM on the training rows and scores the test rows.
///
/// `C` comes from the feature set when it was selected during featurization,
/// otherwise from a leave-one-out search over `cs`.
pub fn classify(fs: &FeatureSet, cs: &[f64], svm: &SvmConfig) -> Result<ClassifyReport> {
    let (train_x, test_x) = fs.matrices()?;
    let (c, cv_error) = match (fs.c, fs.cv_error) {
        (Some(c), Some(e)) => (c, e),
        (Some(c), None) => (c, crate::classify::loo_cv(&train_x, c, svm)?),
        _ => {
            let r = select_c(&train_x, cs, svm)?;
            let b = r.best_row();
            (b.point.c, b.cv_error.unwrap_or(f64::NAN))
        }
    };
    let model = train_svm(&train_x, c, svm)?;
    let test_error = if test_x.is_empty() {
        warn!("no test samples; reporting test error 0");
        0.0
    } else {
        model.error_rate(&test_x)?
    };
    Ok(ClassifyReport {
        dataset: fs.dataset.clone(),
        mode: fs.mode,
        sax: fs.sax,
        c,
        cv_error,
        test_error,
    })
}

/// Graph statistics of one sample, averaged over its code maps.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGraphStats {
    pub id: String,
    pub label: i8,
    pub stats: GraphStats,
}

/// Per-class means and Welch p-values of the four statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphStudy {
    pub samples: Vec<SampleGraphStats>,
    /// `[normal, abnormal]` class means.
    pub class_means: [GraphStats; 2],
    pub class_sizes: [usize; 2],
    /// `None` when a class has fewer than two samples.
    pub p_values: Option<GraphStats>,
}

fn stat_columns(s: &GraphStats) -> [f64; 4] {
    [s.avg_degree, s.modularity, s.pagerank_max, s.avg_path_length]
}

fn from_columns(c: [f64; 4]) -> GraphStats {
    GraphStats {
        avg_degree: c[0],
        modularity: c[1],
        pagerank_max: c[2],
        avg_path_length: c[3],
    }
}

fn mean_stats(all: &[&GraphStats]) -> GraphStats {
    let mut acc = [0.0; 4];
    for s in all {
        for (a, v) in acc.iter_mut().zip(stat_columns(s)) {
            *a += v;
        }
    }
    from_columns(acc.map(|a| a / all.len().max(1) as f64))
}

impl GraphStudy {
    /// Table with one row per class and a p-value row.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("class\tsamples\tavg_degree\tmodularity\tpagerank\tavg_path_length\n");
        for (name, m, n) in [
            ("normal", &self.class_means[0], self.class_sizes[0]),
            ("abnormal", &self.class_means[1], self.class_sizes[1]),
        ] {
            let c = stat_columns(m);
            s.push_str(&format!("{name}\t{n}\t{}\t{}\t{}\t{}\n", c[0], c[1], c[2], c[3]));
        }
        match &self.p_values {
            Some(p) => {
                let c = stat_columns(p);
                s.push_str(&format!("p_value\t-\t{}\t{}\t{}\t{}\n", c[0], c[1], c[2], c[3]));
            }
            None => s.push_str("p_value\t-\tNA\tNA\tNA\tNA\n"),
        }
        s
    }

    /// One row per sample.
    pub fn samples_tsv(&self) -> String {
        let mut s = String::from("id\tlabel\tavg_degree\tmodularity\tpagerank\tavg_path_length\n");
        for r in &self.samples {
            let c = stat_columns(&r.stats);
            s.push_str(&format!("{}\t{}\t{}\t{}\t{}\t{}\n", r.id, r.label, c[0], c[1], c[2], c[3]));
        }
        s
    }
}

fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Builds a transition graph per code map of every sample in both splits,
/// optionally exporting each as GraphML and DOT under `export_dir`.
pub fn graph_study(
    ds: &Dataset,
    params: &ModelParams,
    q: &QuantizerConfig,
    export_dir: Option<&Path>,
) -> Result<GraphStudy> {
    check_model(ds, params)?;
    let samples: Vec<&Sample> = ds.train.iter().chain(&ds.test).collect();
    if let Some(dir) = export_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let rows = samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let maps = encode_features(params, &s.to_input()?)?.maps;
            let mut stats = Vec::with_capacity(maps.len());
            for (m, map) in maps.iter().enumerate() {
                let g = sequence_graph(map, q)?;
                if let Some(dir) = export_dir {
                    let stem = format!("{i:04}_{}_m{m}", file_stem(&s.id));
                    for f in [GraphFormat::GraphMl, GraphFormat::Dot] {
                        export_graph(&g, &dir.join(format!("{stem}.{}", f.extension())), f)?;
                    }
                }
                stats.push(graph_stats(&g));
            }
            Ok(SampleGraphStats {
                id: s.id.clone(),
                label: s.label,
                stats: mean_stats(&stats.iter().collect::<Vec<_>>()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let class = |l: i8| rows.iter().filter(move |r| r.label == l).map(|r| &r.stats);
    let normal: Vec<&GraphStats> = class(1).collect();
    let abnormal: Vec<&GraphStats> = class(-1).collect();
    let p_values = if normal.len() >= 2 && abnormal.len() >= 2 {
        let mut p = [0.0; 4];
        for (k, pk) in p.iter_mut().enumerate() {
            let a: Vec<f64> = normal.iter().map(|s| stat_columns(s)[k]).collect();
            let b: Vec<f64> = abnormal.iter().map(|s| stat_columns(s)[k]).collect();
            *pk = significance(&a, &b)?;
        }
        Some(from_columns(p))
    } else {
        warn!("a class has fewer than two samples; p-values omitted");
        None
    };
    Ok(GraphStudy {
        class_means: [mean_stats(&normal), mean_stats(&abnormal)],
        class_sizes: [normal.len(), abnormal.len()],
        p_values,
        samples: rows,
    })
}
