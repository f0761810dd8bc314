//! Linear soft-margin SVM solved by dual coordinate descent.
//!
//! Minimizes `½(‖w‖² + b²) + C · Σ_i max(0, 1 - y_i (w·x_i + b))`. The bias is
//! a weight on a constant feature and is regularized with the rest.
//! [`svm_objective`] reports the same objective divided by `C·N`.

use log::debug;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classify::{FeatureMatrix, SparseVec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
}

/// Solver settings besides `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig {
    /// Upper bound on passes over the data.
    pub epochs: usize,
    /// Stop once the projected dual gradient spans less than this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            epochs: 1000,
            tol: 0.1,
            seed: 0,
        }
    }
}

/// Soft-margin objective of `(w, b)` on `x` for trade-off `c`, divided by `c·N`.
pub fn svm_objective(x: &FeatureMatrix, weights: &[f64], bias: f64, c: f64) -> f64 {
    let n = x.len() as f64;
    let lambda = 1.0 / (c * n);
    let reg: f64 = weights.iter().map(|w| w * w).sum::<f64>() + bias * bias;
    let hinge: f64 = x
        .rows
        .iter()
        .zip(&x.labels)
        .map(|(r, &y)| (1.0 - y as f64 * (r.dot_dense(weights) + bias)).max(0.0))
        .sum();
    0.5 * lambda * reg + hinge / n
}

/// Row indices sorted by label then feature content.
pub(crate) fn canonical_order(x: &FeatureMatrix) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&x.rows[a], &x.rows[b]);
        x.labels[a].cmp(&x.labels[b]).then_with(|| {
            ra.iter()
                .zip(rb.iter())
                .map(|((i, u), (j, v))| i.cmp(&j).then(u.total_cmp(&v)))
                .find(|o| o.is_ne())
                .unwrap_or_else(|| ra.nnz().cmp(&rb.nnz()))
        })
    });
    order
}

fn check_inputs(x: &FeatureMatrix, c: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::arg(format!("C must be positive, got {c}")));
    }
    if !(x.labels.contains(&1) && x.labels.contains(&-1)) {
        return Err(Error::arg("SVM training needs samples from both classes"));
    }
    Ok(())
}

/// Trains on `x`.
///
/// Rows are visited in a seeded shuffle of their canonical order, so the
/// model does not depend on the order rows are stored in.
pub fn train_svm(x: &FeatureMatrix, c: f64, cfg: &SvmConfig) -> Result<SvmModel> {
    check_inputs(x, c)?;
    Ok(solve_dual(x, c, cfg, vec![0.0; x.len()], canonical_order(x)).0)
}

/// Dual coordinate descent over the rows listed in `order`, starting from the
/// multipliers `alpha` (one per row of `x`, each in `[0, c]`, zero for rows
/// left out). Returns the model and the final multipliers.
pub(crate) fn solve_dual(
    x: &FeatureMatrix,
    c: f64,
    cfg: &SvmConfig,
    mut alpha: Vec<f64>,
    mut order: Vec<usize>,
) -> (SvmModel, Vec<f64>) {
    let mut w = vec![0.0; x.dim];
    let mut b = 0.0;
    for ((r, &y), &a) in x.rows.iter().zip(&x.labels).zip(&alpha) {
        if a != 0.0 {
            let k = a * y as f64;
            for (i, v) in r.iter() {
                w[i] += k * v;
            }
            b += k;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut converged = false;

    for epoch in 0..cfg.epochs.max(1) {
        order.shuffle(&mut rng);
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        for &i in &order {
            let y = x.labels[i] as f64;
            let g = y * (x.rows[i].dot_dense(&w) + b) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= c {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / (x.rows[i].norm_sq() + 1.0)).clamp(0.0, c);
                let k = (alpha[i] - old) * y;
                for (j, v) in x.rows[i].iter() {
                    w[j] += k * v;
                }
                b += k;
            }
        }
        if pg_max - pg_min <= cfg.tol {
            debug!("svm C={c}: converged after {} passes", epoch + 1);
            converged = true;
            break;
        }
    }
    if !converged {
        debug!("svm C={c}: stopped after {} passes", cfg.epochs.max(1));
    }
    (SvmModel { weights: w, bias: b, c }, alpha)
}

impl SvmModel {
    pub fn decision(&self, x: &SparseVec) -> f64 {
        x.iter()
            .filter(|&(i, _)| i < self.weights.len())
            .map(|(i, v)| self.weights[i] * v)
            .sum::<f64>()
            + self.bias
    }

    /// `sign(w·x + b)`, with 0 mapped to `+1`.
    pub fn predict(&self, x: &SparseVec) -> i8 {
        if self.decision(x) >= 0.0 {
            1
        } else {
            -1
        }
    }

    pub fn predict_dense(&self, x: &[f64]) -> Result<i8> {
        if x.len() != self.weights.len() {
            return Err(Error::arg(format!(
                "model has {} weights, sample has {} features",
                self.weights.len(),
                x.len()
            )));
        }
        Ok(self.predict(&SparseVec::from_dense(x)))
    }

    /// Fraction of rows of `x` misclassified.
    pub fn error_rate(&self, x: &FeatureMatrix) -> Result<f64> {
        if x.dim != self.weights.len() {
            return Err(Error::arg(format!(
                "model has {} weights, features have {} columns",
                self.weights.len(),
                x.dim
            )));
        }
        if x.is_empty() {
            return Ok(0.0);
        }
        let wrong = x
            .rows
            .iter()
            .zip(&x.labels)
            .filter(|(r, &y)| self.predict(r) != y)
            .count();
        Ok(wrong as f64 / x.len() as f64)
    }
}
