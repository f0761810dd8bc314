use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::sax::{bin_index, gaussian_breakpoints, znormalize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuantizerMode {
    /// Z-normalize, then equiprobable N(0, 1) bins.
    #[default]
    Gaussian,
    /// Empirical quantile bins of the sequence itself.
    Quantile,
}

impl fmt::Display for QuantizerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuantizerMode::Gaussian => "gaussian",
            QuantizerMode::Quantile => "quantile",
        })
    }
}

impl FromStr for QuantizerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(QuantizerMode::Gaussian),
            "quantile" => Ok(QuantizerMode::Quantile),
            _ => Err(Error::arg(format!("unknown quantizer mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantizerConfig {
    pub bins: usize,
    pub mode: QuantizerMode,
}

impl QuantizerConfig {
    pub fn new(bins: usize, mode: QuantizerMode) -> Result<Self> {
        if bins < 2 {
            return Err(Error::arg(format!("need at least 2 bins, got {bins}")));
        }
        Ok(QuantizerConfig { bins, mode })
    }
}

/// Maps every value of `x` to a bin in `0..cfg.bins`.
pub fn discretize(x: &[f64], cfg: &QuantizerConfig) -> Result<Vec<usize>> {
    if x.len() < 2 {
        return Err(Error::arg("discretize needs at least 2 values"));
    }
    let thresholds = match cfg.mode {
        QuantizerMode::Gaussian => {
            let z = znormalize(x)?;
            let bps = gaussian_breakpoints(cfg.bins)?;
            return Ok(z.iter().map(|&v| bin_index(v, &bps)).collect());
        }
        QuantizerMode::Quantile => quantile_thresholds(x, cfg.bins),
    };
    Ok(x.iter().map(|&v| bin_index(v, &thresholds)).collect())
}

/// `t_k = sorted[floor(k·m / q)]` for `k = 1..q`.
fn quantile_thresholds(x: &[f64], q: usize) -> Vec<f64> {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    (1..q).map(|k| sorted[(k * m / q).min(m - 1)]).collect()
}
