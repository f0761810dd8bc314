//! Leave-one-out cross-validation and hyperparameter search.

use std::cmp::Ordering;
use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::classify::svm::{canonical_order, solve_dual};
use crate::classify::{Encoding, FeatureMatrix, SvmConfig, Vocabulary};
use crate::error::{Error, Result};
use crate::sax::{bin_index, breakpoints, merge, window_paa, SaxOptions, SaxParams, WordHistogram};

/// Majority label of `labels`, ties to `+1`.
fn majority(labels: &[i8]) -> i8 {
    let pos = labels.iter().filter(|&&l| l == 1).count();
    if 2 * pos >= labels.len() {
        1
    } else {
        -1
    }
}

/// Mean leave-one-out error of the linear SVM.
///
/// For bag-of-words features each fold's vocabulary is the set of words seen
/// in its N−1 training rows: a held-out row loses every column no other row
/// uses. A fold whose training rows hold a single class predicts that class.
///
/// Each fold starts from the dual solution on all N rows with the held-out
/// multiplier dropped, which is usually a few passes from its own optimum.
pub fn loo_cv(x: &FeatureMatrix, c: f64, cfg: &SvmConfig) -> Result<f64> {
    let n = x.len();
    if n < 2 {
        return Err(Error::arg("leave-one-out needs at least two samples"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::arg(format!("C must be positive, got {c}")));
    }
    let both = x.labels.contains(&1) && x.labels.contains(&-1);
    let order = canonical_order(x);
    let full_alpha = if both {
        solve_dual(x, c, cfg, vec![0.0; n], order.clone()).1
    } else {
        vec![0.0; n]
    };
    let doc_freq = (x.encoding == Encoding::Bag).then(|| {
        let mut df = vec![0u32; x.dim];
        for r in &x.rows {
            for &i in &r.indices {
                df[i as usize] += 1;
            }
        }
        df
    });
    let wrong = (0..n)
        .into_par_iter()
        .map(|k| {
            let held = match &doc_freq {
                // the held-out row contributes exactly 1 to df of its own columns
                Some(df) => x.rows[k].filtered(|i| df[i] > 1),
                None => x.rows[k].clone(),
            };
            let other = x.labels[if k == 0 { 1 } else { 0 }];
            let pred = if (0..n).all(|i| i == k || x.labels[i] == other) {
                other
            } else {
                let mut alpha = full_alpha.clone();
                alpha[k] = 0.0;
                let fold_order = order.iter().copied().filter(|&i| i != k).collect();
                solve_dual(x, c, cfg, alpha, fold_order).0.predict(&held)
            };
            Ok(usize::from(pred != x.labels[k]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(wrong.iter().sum::<usize>() as f64 / n as f64)
}

/// LOO error of always predicting the majority of the other N−1 labels.
pub fn majority_loo_error(labels: &[i8]) -> f64 {
    let n = labels.len();
    let wrong = (0..n)
        .filter(|&k| {
            let rest: Vec<i8> = (0..n).filter(|&i| i != k).map(|i| labels[i]).collect();
            majority(&rest) != labels[k]
        })
        .count();
    wrong as f64 / n as f64
}

/// Candidate values per hyperparameter.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpace {
    pub n: Vec<usize>,
    pub w: Vec<usize>,
    pub a: Vec<usize>,
    pub c: Vec<f64>,
}

impl Default for GridSpace {
    fn default() -> Self {
        GridSpace {
            n: vec![8, 16, 32, 64],
            w: vec![2, 4, 8],
            a: vec![3, 4, 5, 6, 7],
            c: vec![0.01, 0.1, 1.0, 10.0],
        }
    }
}

/// One point of the search space; `n, w, a` may be invalid for the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub n: usize,
    pub w: usize,
    pub a: usize,
    pub c: f64,
}

impl GridPoint {
    pub fn sax(&self) -> SaxParams {
        SaxParams {
            n: self.n,
            w: self.w,
            a: self.a,
        }
    }

    fn is_valid(&self, series_len: usize) -> bool {
        self.sax().validate().is_ok() && self.n <= series_len && self.c > 0.0
    }

    /// Parsimony order used to break ties: smaller `a`, then `w`, `n`, `C`.
    fn parsimony_cmp(&self, other: &GridPoint) -> Ordering {
        (self.a, self.w, self.n)
            .cmp(&(other.a, other.w, other.n))
            .then(self.c.total_cmp(&other.c))
    }
}

impl GridSpace {
    /// Every combination, `n` outermost and `C` innermost.
    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &w in &self.w {
                for &a in &self.a {
                    for &c in &self.c {
                        out.push(GridPoint { n, w, a, c });
                    }
                }
            }
        }
        out
    }

    /// Uniform random subset of `k` grid points, kept in grid order.
    pub fn random_points(&self, k: usize, seed: u64) -> Vec<GridPoint> {
        let all = self.points();
        let mut idx: Vec<usize> = (0..all.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        idx.truncate(k);
        idx.sort_unstable();
        idx.into_iter().map(|i| all[i]).collect()
    }
}

/// One evaluated grid point; `cv_error` is `None` when the point is invalid
/// for the data (e.g. window longer than the series).
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub point: GridPoint,
    pub cv_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub rows: Vec<GridRow>,
    pub best: usize,
}

impl GridResult {
    pub fn best_row(&self) -> &GridRow {
        &self.rows[self.best]
    }

    /// `n<TAB>w<TAB>a<TAB>C<TAB>cv_error` rows after a header line.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("n\tw\ta\tC\tcv_error\n");
        for r in &self.rows {
            let e = r.cv_error.map_or_else(|| "invalid".to_string(), |e| e.to_string());
            let p = r.point;
            s.push_str(&format!("{}\t{}\t{}\t{}\t{e}\n", p.n, p.w, p.a, p.c));
        }
        s
    }
}

fn select_best(rows: &[GridRow]) -> Result<usize> {
    rows.iter()
        .enumerate()
        .filter_map(|(i, r)| r.cv_error.map(|e| (i, e, r.point)))
        .min_by(|x, y| x.1.total_cmp(&y.1).then(x.2.parsimony_cmp(&y.2)))
        .map(|(i, _, _)| i)
        .ok_or_else(|| Error::arg("no valid point in the search space"))
}

/// Bag of SAX words over several sequences, keys prefixed with the sequence
/// index (`m0:abba`, `m1:...`).
pub fn sax_bag(maps: &[Vec<f64>], p: &SaxParams, opts: SaxOptions) -> Result<WordHistogram> {
    let mut h = WordHistogram::default();
    for (k, m) in maps.iter().enumerate() {
        let words = crate::sax::sax_transform_with(m, p, opts)?;
        h = merge(&h, &crate::sax::bag_of_words(&words).prefixed(&format!("m{k}:")));
    }
    Ok(h)
}

/// How bag features are scaled before the SVM.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BagOptions {
    pub sax: SaxOptions,
    /// Divide counts by the number of windows of the sample.
    pub l1_normalize: bool,
}

impl Default for BagOptions {
    fn default() -> Self {
        BagOptions {
            sax: SaxOptions::default(),
            l1_normalize: true,
        }
    }
}

/// Bag features of every sample for every `(n, w, a)` in `points`.
///
/// PAA windows are shared across alphabet sizes.
fn bags_for_points(
    samples: &[Vec<Vec<f64>>],
    points: &[GridPoint],
    opts: SaxOptions,
) -> Result<HashMap<SaxParams, Vec<WordHistogram>>> {
    let mut by_window: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    let mut seen = std::collections::HashSet::new();
    for p in points {
        if seen.insert((p.n, p.w, p.a)) {
            by_window.entry((p.n, p.w)).or_default().push(p.a);
        }
    }
    let mut keys: Vec<_> = by_window.into_iter().collect();
    keys.sort_unstable();
    let computed = keys
        .par_iter()
        .map(|((n, w), alphabets)| {
            let tables = alphabets
                .iter()
                .map(|&a| breakpoints(a))
                .collect::<Result<Vec<_>>>()?;
            let mut hists = vec![Vec::with_capacity(samples.len()); alphabets.len()];
            for maps in samples {
                let mut per_a = vec![WordHistogram::default(); alphabets.len()];
                for (m, series) in maps.iter().enumerate() {
                    let segs = window_paa(series, *n, *w, opts.normalize_windows)?;
                    for (h, bps) in per_a.iter_mut().zip(&tables) {
                        let mut last: Option<String> = None;
                        for means in &segs {
                            let mut word = format!("m{m}:");
                            word.extend(means.iter().map(|&v| (b'a' + bin_index(v, bps) as u8) as char));
                            if opts.numerosity_reduction && last.as_ref() == Some(&word) {
                                continue;
                            }
                            h.add(&word, 1);
                            last = Some(word);
                        }
                    }
                }
                for (dst, h) in hists.iter_mut().zip(per_a) {
                    dst.push(h);
                }
            }
            Ok(alphabets
                .iter()
                .zip(hists)
                .map(|(&a, h)| (SaxParams { n: *n, w: *w, a }, h))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(computed.into_iter().flatten().collect())
}

/// Exhaustive LOO search over SAX parameters and `C` on bag-of-words features.
///
/// `samples[i]` holds the sequences (code maps) of sample `i`. Results are
/// reported in the order of `points`; the best point minimizes the LOO error
/// with ties broken toward smaller `(a, w, n, C)`.
pub fn grid_search(
    points: &[GridPoint],
    samples: &[Vec<Vec<f64>>],
    labels: &[i8],
    opts: BagOptions,
    svm: &SvmConfig,
) -> Result<GridResult> {
    if points.is_empty() {
        return Err(Error::arg("empty search space"));
    }
    if samples.len() != labels.len() {
        return Err(Error::dim("samples and labels differ in count"));
    }
    let series_len = samples
        .iter()
        .flat_map(|maps| maps.iter().map(Vec::len))
        .min()
        .unwrap_or(0);
    let valid: Vec<GridPoint> = points
        .iter()
        .copied()
        .filter(|p| p.is_valid(series_len))
        .collect();
    let bags = bags_for_points(samples, &valid, opts.sax)?;
    let mut encoded: HashMap<SaxParams, FeatureMatrix> = HashMap::new();
    for (p, hists) in &bags {
        let vocab = Vocabulary::fit(hists);
        let rows = hists
            .iter()
            .map(|h| vocab.transform(h, opts.l1_normalize))
            .collect();
        encoded.insert(
            *p,
            FeatureMatrix::new(rows, labels.to_vec(), vocab.len(), Encoding::Bag)?,
        );
    }
    let rows = points
        .par_iter()
        .map(|p| {
            if !p.is_valid(series_len) {
                return Ok(GridRow {
                    point: *p,
                    cv_error: None,
                });
            }
            let x = &encoded[&p.sax()];
            Ok(GridRow {
                point: *p,
                cv_error: Some(loo_cv(x, p.c, svm)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = select_best(&rows)?;
    Ok(GridResult { rows, best })
}

/// LOO search over `C` alone for fixed features. The table carries `n = w =
/// a = 0`.
pub fn select_c(x: &FeatureMatrix, cs: &[f64], svm: &SvmConfig) -> Result<GridResult> {
    if cs.is_empty() {
        return Err(Error::arg("empty C list"));
    }
    let rows = cs
        .par_iter()
        .map(|&c| {
            let point = GridPoint { n: 0, w: 0, a: 0, c };
            let cv_error = if c > 0.0 { Some(loo_cv(x, c, svm)?) } else { None };
            Ok(GridRow { point, cv_error })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = select_best(&rows)?;
    Ok(GridResult { rows, best })
}
