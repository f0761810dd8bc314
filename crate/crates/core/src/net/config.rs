use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Activation applied to the reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FinalActivation {
    /// Identity; needed for z-normalized inputs, which go negative.
    #[default]
    Linear,
    Relu,
}

impl fmt::Display for FinalActivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FinalActivation::Linear => "linear",
            FinalActivation::Relu => "relu",
        })
    }
}

impl FromStr for FinalActivation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(FinalActivation::Linear),
            "relu" => Ok(FinalActivation::Relu),
            _ => Err(Error::arg(format!(
                "unknown final activation {s:?} (expected linear or relu)"
            ))),
        }
    }
}

/// Architecture of the two-layer convolutional / deconvolutional autoencoder.
///
/// The input is a single-plane image of `channels × length`; kernels span
/// neighbouring channels and time steps, pooling runs along time only.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub channels: usize,
    pub length: usize,
    pub filters1: usize,
    pub filters2: usize,
    pub kernel: (usize, usize),
    pub pool_w: usize,
    pub tie_weights: bool,
    pub final_activation: FinalActivation,
}

impl NetworkConfig {
    /// Default architecture for inputs of the given extent.
    pub fn new(channels: usize, length: usize) -> Self {
        NetworkConfig {
            channels,
            length,
            filters1: 8,
            filters2: 5,
            kernel: (3, 3),
            pool_w: 2,
            tie_weights: true,
            final_activation: FinalActivation::Linear,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels == 0 || self.length == 0 {
            return Err(Error::arg("channels and length must be positive"));
        }
        if self.filters1 == 0 || self.filters2 == 0 {
            return Err(Error::arg("filter counts must be positive"));
        }
        if self.pool_w == 0 {
            return Err(Error::arg("pool width must be at least 1"));
        }
        let (kh, kw) = self.kernel;
        if kh % 2 == 0 || kw % 2 == 0 {
            return Err(Error::arg(format!("kernel {kh}x{kw} must have odd extents")));
        }
        Ok(())
    }

    /// Time extent after pooling.
    pub fn pooled_length(&self) -> usize {
        self.length.div_ceil(self.pool_w)
    }

    /// Length of one flattened code map.
    pub fn code_map_len(&self) -> usize {
        self.channels * self.pooled_length()
    }

    pub fn input_shape(&self) -> [usize; 3] {
        [1, self.channels, self.length]
    }

    pub fn code_shape(&self) -> [usize; 3] {
        [self.filters2, self.channels, self.pooled_length()]
    }
}

/// Adadelta and mini-batch settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            rho: 0.95,
            epsilon: 1e-6,
            epochs: 200,
            batch_size: 16,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::arg(format!("rho must lie in (0, 1), got {}", self.rho)));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::arg("learning rate must be positive"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::arg("epsilon must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::arg("batch size must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        NetworkConfig::new(2, 153).validate().unwrap();
        TrainConfig::default().validate().unwrap();
        assert_eq!(NetworkConfig::new(2, 153).pooled_length(), 77);
        assert_eq!(NetworkConfig::new(6, 199).code_map_len(), 600);
    }

    #[test]
    fn invalid_values_rejected() {
        let mut c = NetworkConfig::new(2, 10);
        c.kernel = (2, 3);
        assert!(c.validate().is_err());
        let t = TrainConfig {
            rho: 1.0,
            ..TrainConfig::default()
        };
        assert!(t.validate().is_err());
        assert!("tanh".parse::<FinalActivation>().is_err());
    }
}
