//! Model checkpoint files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic          8 bytes  "DSAXCKPT"
//! version        u32      1
//! header         u32 length + UTF-8 `key=value` lines (architecture,
//!                training settings and seed)
//! tensor count   u32
//! per tensor     u16 name length, name, u8 rank, rank × u32 extents,
//!                extents-product × f64 values
//! ```

use std::fs;
use std::path::Path;

use crate::codec::{KeyValues, Reader, Writer};
use crate::error::{Error, Result};
use crate::net::{FinalActivation, ModelParams, NetworkConfig, ParamSet, TrainConfig};
use crate::numerics::Tensor;

const MAGIC: &[u8; 8] = b"DSAXCKPT";
const VERSION: u32 = 1;

/// Everything needed to reproduce or reuse a trained model.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub train: TrainConfig,
}

pub(crate) fn network_to_kv(c: &NetworkConfig, kv: &mut KeyValues) {
    kv.set("channels", c.channels);
    kv.set("length", c.length);
    kv.set("filters1", c.filters1);
    kv.set("filters2", c.filters2);
    kv.set("kernel_h", c.kernel.0);
    kv.set("kernel_w", c.kernel.1);
    kv.set("pool_w", c.pool_w);
    kv.set("tie_weights", c.tie_weights);
    kv.set("final_activation", c.final_activation);
}

pub(crate) fn train_to_kv(t: &TrainConfig, kv: &mut KeyValues) {
    kv.set("learning_rate", t.learning_rate);
    kv.set("rho", t.rho);
    kv.set("epsilon", t.epsilon);
    kv.set("epochs", t.epochs);
    kv.set("batch_size", t.batch_size);
    kv.set("seed", t.seed);
}

fn network_from_kv(kv: &KeyValues) -> Result<NetworkConfig> {
    Ok(NetworkConfig {
        channels: kv.require("channels")?,
        length: kv.require("length")?,
        filters1: kv.require("filters1")?,
        filters2: kv.require("filters2")?,
        kernel: (kv.require("kernel_h")?, kv.require("kernel_w")?),
        pool_w: kv.require("pool_w")?,
        tie_weights: kv.require("tie_weights")?,
        final_activation: kv.require::<FinalActivation>("final_activation")?,
    })
}

fn train_from_kv(kv: &KeyValues) -> Result<TrainConfig> {
    Ok(TrainConfig {
        learning_rate: kv.require("learning_rate")?,
        rho: kv.require("rho")?,
        epsilon: kv.require("epsilon")?,
        epochs: kv.require("epochs")?,
        batch_size: kv.require("batch_size")?,
        seed: kv.require("seed")?,
    })
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut kv = KeyValues::default();
        network_to_kv(&self.params.config, &mut kv);
        train_to_kv(&self.train, &mut kv);

        let mut w = Writer::default();
        w.bytes(MAGIC);
        w.u32(VERSION);
        w.str(&kv.to_text());
        let tensors = self.params.weights.named();
        w.u32(tensors.len() as u32);
        for (name, t) in tensors {
            w.u16(name.len() as u16);
            w.bytes(name.as_bytes());
            w.u8(t.ndim() as u8);
            for &d in t.shape() {
                w.u32(d as u32);
            }
            w.f64s(t.data());
        }
        w.buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, "checkpoint");
        if r.take(8)? != MAGIC {
            return Err(r.corrupt("bad magic"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Version {
                what: "checkpoint",
                found: version,
                expected: VERSION,
            });
        }
        let kv = KeyValues::parse(&r.str()?)?;
        let config = network_from_kv(&kv)?;
        let train = train_from_kv(&kv)?;
        config.validate()?;

        let mut weights = ParamSet::zeros(&config);
        let expected = weights.named().len();
        let count = r.u32()? as usize;
        if count != expected {
            return Err(r.corrupt(format!("{count} tensors, configuration implies {expected}")));
        }
        for (name, slot) in weights.named_mut() {
            let len = r.u16()? as usize;
            let got = String::from_utf8_lossy(r.take(len)?).into_owned();
            if got != name {
                return Err(r.corrupt(format!("expected tensor {name}, found {got}")));
            }
            let rank = r.u8()? as usize;
            let shape = (0..rank)
                .map(|_| r.u32().map(|d| d as usize))
                .collect::<Result<Vec<_>>>()?;
            if shape != slot.shape() {
                return Err(r.corrupt(format!(
                    "{name}: stored shape {shape:?}, configuration implies {:?}",
                    slot.shape()
                )));
            }
            *slot = Tensor::new(shape, r.f64s(slot.len())?)?;
        }
        r.finish()?;
        Ok(Checkpoint {
            params: ModelParams::new(config, weights)?,
            train,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample(tied: bool) -> Checkpoint {
        let mut cfg = NetworkConfig::new(3, 11);
        cfg.tie_weights = tied;
        cfg.final_activation = FinalActivation::Relu;
        Checkpoint {
            params: ModelParams::init(cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap(),
            train: TrainConfig {
                seed: 42,
                epochs: 3,
                ..TrainConfig::default()
            },
        }
    }

    #[test]
    fn round_trip_is_exact() {
        for tied in [true, false] {
            let c = sample(tied);
            assert_eq!(Checkpoint::from_bytes(&c.to_bytes()).unwrap(), c);
        }
    }

    #[test]
    fn corruption_is_rejected() {
        let bytes = sample(true).to_bytes();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Checkpoint::from_bytes(&bad).is_err());
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut v2 = bytes.clone();
        v2[8] = 2;
        assert!(matches!(
            Checkpoint::from_bytes(&v2),
            Err(Error::Version { found: 2, .. })
        ));
    }
}
