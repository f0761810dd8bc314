//! Convolutional encoder / deconvolutional decoder trained on reconstruction.

mod adadelta;
mod checkpoint;
mod config;
mod model;
mod params;
mod train;

pub use adadelta::{adadelta_step, adadelta_update, Accumulator, AdadeltaState};
pub use checkpoint::Checkpoint;
pub use config::{FinalActivation, NetworkConfig, TrainConfig};
pub use model::{
    backward, encode_features, forward_decode, forward_encode, reconstruct, reconstruction_loss,
    Code, Features,
};
pub use params::{ModelParams, ParamSet};
pub use train::{mean_loss, train, train_from, TrainReport};
