//! Representation learning for multivariate time series.
//!
//! A small convolutional autoencoder with max-pool switches and transposed
//! convolutions learns code maps from unlabeled series. The code maps are then
//! either classified directly, turned into bags of SAX words for a linear SVM,
//! or quantized into Markov transition graphs whose network statistics
//! separate the classes.

pub mod classify;
mod codec;
pub mod data;
pub mod error;
pub mod graph;
pub mod net;
pub mod numerics;
pub mod pipeline;
pub mod sax;

pub use codec::KeyValues;
pub use error::{Error, Result};
pub use numerics::Tensor;
