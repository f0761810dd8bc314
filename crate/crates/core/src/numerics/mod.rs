//! Dense tensors and the differentiable building blocks of the autoencoder.

mod activation;
mod conv;
mod gradcheck;
mod pool;
mod tensor;

pub use activation::{relu, relu_backward};
pub use conv::{channel_sums, conv2d_filter_grad, conv2d_same, conv2d_transpose_same};
pub use gradcheck::{finite_diff_grad, max_relative_error};
pub use pool::{maxpool_time, unpool_time, unpool_time_backward, PoolIndices};
pub use tensor::Tensor;
