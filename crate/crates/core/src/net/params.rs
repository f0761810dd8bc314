use rand::Rng;

use crate::error::{Error, Result};
use crate::net::NetworkConfig;
use crate::numerics::Tensor;

/// Weights and biases of the autoencoder, or gradients shaped like them.
///
/// With tied weights the decoder filters are `None` and both decoder layers
/// run the encoder filters in transpose mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    /// Encoder conv 1, `[filters1 × 1 × kh × kw]`.
    pub w1: Tensor,
    pub b1: Tensor,
    /// Encoder conv 2, `[filters2 × filters1 × kh × kw]`.
    pub w2: Tensor,
    pub b2: Tensor,
    /// Decoder deconv 2 filters (same shape as `w2`) when untied.
    pub dec_w2: Option<Tensor>,
    pub c2: Tensor,
    /// Decoder deconv 1 filters (same shape as `w1`) when untied.
    pub dec_w1: Option<Tensor>,
    pub c1: Tensor,
}

impl ParamSet {
    pub fn zeros(cfg: &NetworkConfig) -> Self {
        let (kh, kw) = cfg.kernel;
        let w1 = Tensor::zeros(&[cfg.filters1, 1, kh, kw]);
        let w2 = Tensor::zeros(&[cfg.filters2, cfg.filters1, kh, kw]);
        ParamSet {
            dec_w1: (!cfg.tie_weights).then(|| w1.clone()),
            dec_w2: (!cfg.tie_weights).then(|| w2.clone()),
            w1,
            b1: Tensor::zeros(&[cfg.filters1]),
            w2,
            b2: Tensor::zeros(&[cfg.filters2]),
            c2: Tensor::zeros(&[cfg.filters1]),
            c1: Tensor::zeros(&[1]),
        }
    }

    /// Glorot-uniform filters, zero biases.
    pub fn glorot<R: Rng>(cfg: &NetworkConfig, rng: &mut R) -> Self {
        let mut p = Self::zeros(cfg);
        for (name, t) in p.named_mut() {
            if name.starts_with('b') || name.starts_with('c') {
                continue;
            }
            let s = t.shape();
            let receptive = s[2] * s[3];
            let limit = (6.0 / ((s[0] + s[1]) * receptive) as f64).sqrt();
            for v in t.data_mut() {
                *v = rng.gen_range(-limit..limit);
            }
        }
        p
    }

    pub fn tied(&self) -> bool {
        self.dec_w1.is_none()
    }

    /// Filters used by decoder layer 2 (the deeper one).
    pub fn decoder_w2(&self) -> &Tensor {
        self.dec_w2.as_ref().unwrap_or(&self.w2)
    }

    pub fn decoder_w1(&self) -> &Tensor {
        self.dec_w1.as_ref().unwrap_or(&self.w1)
    }

    /// Every stored tensor in a fixed order, with a stable name.
    pub fn named(&self) -> Vec<(&'static str, &Tensor)> {
        let mut out = vec![
            ("w1", &self.w1),
            ("b1", &self.b1),
            ("w2", &self.w2),
            ("b2", &self.b2),
        ];
        if let Some(t) = &self.dec_w2 {
            out.push(("dec_w2", t));
        }
        out.push(("c2", &self.c2));
        if let Some(t) = &self.dec_w1 {
            out.push(("dec_w1", t));
        }
        out.push(("c1", &self.c1));
        out
    }

    pub fn named_mut(&mut self) -> Vec<(&'static str, &mut Tensor)> {
        let mut out = vec![
            ("w1", &mut self.w1),
            ("b1", &mut self.b1),
            ("w2", &mut self.w2),
            ("b2", &mut self.b2),
        ];
        if let Some(t) = &mut self.dec_w2 {
            out.push(("dec_w2", t));
        }
        out.push(("c2", &mut self.c2));
        if let Some(t) = &mut self.dec_w1 {
            out.push(("dec_w1", t));
        }
        out.push(("c1", &mut self.c1));
        out
    }

    /// `self += k * other`, tensor by tensor.
    pub fn axpy(&mut self, k: f64, other: &ParamSet) -> Result<()> {
        if self.tied() != other.tied() {
            return Err(Error::dim("tied and untied parameter sets mixed"));
        }
        for ((_, a), (_, b)) in self.named_mut().into_iter().zip(other.named()) {
            a.axpy(k, b)?;
        }
        Ok(())
    }

    pub fn num_values(&self) -> usize {
        self.named().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.named().iter().all(|(_, t)| t.is_finite())
    }

    /// Checks every tensor against the shapes implied by `cfg`.
    pub fn check_shapes(&self, cfg: &NetworkConfig) -> Result<()> {
        let expect = ParamSet::zeros(cfg);
        let (a, b) = (self.named(), expect.named());
        if a.len() != b.len() {
            return Err(Error::dim("parameter set does not match the weight tying mode"));
        }
        for ((name, got), (_, want)) in a.iter().zip(&b) {
            if got.shape() != want.shape() {
                return Err(Error::dim(format!(
                    "{name}: shape {:?}, config implies {:?}",
                    got.shape(),
                    want.shape()
                )));
            }
        }
        Ok(())
    }
}

/// A trained (or freshly initialized) autoencoder.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: NetworkConfig,
    pub weights: ParamSet,
}

impl ModelParams {
    pub fn new(config: NetworkConfig, weights: ParamSet) -> Result<Self> {
        config.validate()?;
        weights.check_shapes(&config)?;
        Ok(ModelParams { config, weights })
    }

    pub fn init<R: Rng>(config: NetworkConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let weights = ParamSet::glorot(&config, rng);
        Ok(ModelParams { config, weights })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn glorot_bounds_and_zero_biases() {
        let cfg = NetworkConfig::new(2, 12);
        let p = ParamSet::glorot(&cfg, &mut ChaCha8Rng::seed_from_u64(0));
        let lim1 = (6.0f64 / ((8 + 1) * 9) as f64).sqrt();
        assert!(p.w1.data().iter().all(|v| v.abs() < lim1));
        assert!(p.b1.data().iter().all(|&v| v == 0.0));
        assert!(p.tied());
        assert_eq!(p.named().len(), 6);
    }

    #[test]
    fn untied_has_decoder_filters() {
        let mut cfg = NetworkConfig::new(2, 12);
        cfg.tie_weights = false;
        let p = ParamSet::zeros(&cfg);
        assert_eq!(p.named().len(), 8);
        assert!(p.check_shapes(&cfg).is_ok());
        cfg.tie_weights = true;
        assert!(p.check_shapes(&cfg).is_err());
    }
}
