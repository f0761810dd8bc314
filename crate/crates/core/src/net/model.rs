//! Forward and backward passes of the autoencoder.
//!
//! ```text
//! encoder:  x ─conv1─ relu ─maxpool(time)─ conv2 ─ relu ─> code
//! decoder:  code ─deconv2─ relu ─unpool(switches)─ deconv1 ─ final ─> y
//! ```

use crate::error::{Error, Result};
use crate::net::{FinalActivation, ModelParams, ParamSet};
use crate::numerics::{
    channel_sums, conv2d_filter_grad, conv2d_same, conv2d_transpose_same, maxpool_time, relu,
    relu_backward, unpool_time, unpool_time_backward, PoolIndices, Tensor,
};

/// Output of the encoder: the code maps plus the pooling switches the decoder
/// needs to unpool.
#[derive(Debug, Clone, PartialEq)]
pub struct Code {
    pub maps: Tensor,
    pub pool_indices: PoolIndices,
}

impl Code {
    /// One flattened vector per code map.
    pub fn map_vectors(&self) -> Vec<Vec<f64>> {
        let per = self.maps.len() / self.maps.shape()[0];
        self.maps.data().chunks_exact(per).map(<[f64]>::to_vec).collect()
    }
}

/// Intermediate activations kept for backprop.
struct Trace {
    z1: Tensor,
    pooled: Tensor,
    z2: Tensor,
    code: Code,
    d2: Tensor,
    unpooled: Tensor,
    d1: Tensor,
    y: Tensor,
}

fn check_input(params: &ModelParams, x: &Tensor) -> Result<()> {
    let want = params.config.input_shape();
    if x.shape() != want {
        return Err(Error::dim(format!(
            "input shape {:?}, network expects {want:?}",
            x.shape()
        )));
    }
    Ok(())
}

fn encode_traced(w: &ParamSet, x: &Tensor, pool_w: usize) -> Result<(Tensor, Tensor, Tensor, Code)> {
    let z1 = conv2d_same(x, &w.w1, w.b1.data())?;
    let (pooled, pool_indices) = maxpool_time(&relu(&z1), pool_w)?;
    let z2 = conv2d_same(&pooled, &w.w2, w.b2.data())?;
    let maps = relu(&z2);
    Ok((
        z1,
        pooled,
        z2,
        Code {
            maps,
            pool_indices,
        },
    ))
}

fn decode_traced(params: &ModelParams, code: &Code) -> Result<(Tensor, Tensor, Tensor, Tensor)> {
    let cfg = &params.config;
    let w = &params.weights;
    if code.maps.shape() != cfg.code_shape() {
        return Err(Error::dim(format!(
            "code shape {:?}, network expects {:?}",
            code.maps.shape(),
            cfg.code_shape()
        )));
    }
    let d2 = conv2d_transpose_same(&code.maps, w.decoder_w2(), w.c2.data())?;
    let unpooled = unpool_time(&relu(&d2), &code.pool_indices, cfg.length)?;
    let d1 = conv2d_transpose_same(&unpooled, w.decoder_w1(), w.c1.data())?;
    let y = match cfg.final_activation {
        FinalActivation::Linear => d1.clone(),
        FinalActivation::Relu => relu(&d1),
    };
    Ok((d2, unpooled, d1, y))
}

fn trace(params: &ModelParams, x: &Tensor) -> Result<Trace> {
    check_input(params, x)?;
    let (z1, pooled, z2, code) = encode_traced(&params.weights, x, params.config.pool_w)?;
    let (d2, unpooled, d1, y) = decode_traced(params, &code)?;
    Ok(Trace {
        z1,
        pooled,
        z2,
        code,
        d2,
        unpooled,
        d1,
        y,
    })
}

/// Runs the encoder on one `[1 × C × L]` sample.
pub fn forward_encode(params: &ModelParams, x: &Tensor) -> Result<Code> {
    check_input(params, x)?;
    Ok(encode_traced(&params.weights, x, params.config.pool_w)?.3)
}

/// Reconstructs a `[1 × C × L]` sample from its code.
pub fn forward_decode(params: &ModelParams, code: &Code) -> Result<Tensor> {
    Ok(decode_traced(params, code)?.3)
}

/// Encode then decode.
pub fn reconstruct(params: &ModelParams, x: &Tensor) -> Result<Tensor> {
    forward_decode(params, &forward_encode(params, x)?)
}

/// Mean squared error over all elements.
pub fn reconstruction_loss(x: &Tensor, y: &Tensor) -> Result<f64> {
    x.check_same_shape(y, "reconstruction_loss")?;
    let sse: f64 = x
        .data()
        .iter()
        .zip(y.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sse / x.len() as f64)
}

/// Loss of one sample and the exact gradient of that loss with respect to
/// every parameter.
pub fn backward(params: &ModelParams, x: &Tensor) -> Result<(f64, ParamSet)> {
    let cfg = &params.config;
    let w = &params.weights;
    let (kh, kw) = cfg.kernel;
    let t = trace(params, x)?;
    let loss = reconstruction_loss(x, &t.y)?;
    if !loss.is_finite() {
        return Err(Error::Numeric("reconstruction loss overflowed".into()));
    }

    let n = x.len() as f64;
    let dy = Tensor::new(
        x.shape().to_vec(),
        t.y.data()
            .iter()
            .zip(x.data())
            .map(|(y, x)| 2.0 * (y - x) / n)
            .collect(),
    )?;
    let dd1 = match cfg.final_activation {
        FinalActivation::Linear => dy,
        FinalActivation::Relu => relu_backward(&t.d1, &dy)?,
    };

    // deconv 1: y = T(u, Ŵ1) + c1
    let g_dec_w1 = conv2d_filter_grad(&dd1, &t.unpooled, kh, kw)?;
    let g_c1 = channel_sums(&dd1)?;
    let du = conv2d_same(&dd1, w.decoder_w1(), &vec![0.0; cfg.filters1])?;

    // unpool, then inner decoder ReLU
    let da2 = unpool_time_backward(&du, &t.code.pool_indices)?;
    let dd2 = relu_backward(&t.d2, &da2)?;

    // deconv 2: d2 = T(code, Ŵ2) + c2
    let g_dec_w2 = conv2d_filter_grad(&dd2, &t.code.maps, kh, kw)?;
    let g_c2 = channel_sums(&dd2)?;
    let dcode = conv2d_same(&dd2, w.decoder_w2(), &vec![0.0; cfg.filters2])?;

    // encoder conv 2
    let dz2 = relu_backward(&t.z2, &dcode)?;
    let mut g_w2 = conv2d_filter_grad(&t.pooled, &dz2, kh, kw)?;
    let g_b2 = channel_sums(&dz2)?;
    let dpooled = conv2d_transpose_same(&dz2, &w.w2, &vec![0.0; cfg.filters1])?;

    // max pool routes the gradient to the switch positions
    let dh1 = unpool_time(&dpooled, &t.code.pool_indices, cfg.length)?;
    let dz1 = relu_backward(&t.z1, &dh1)?;
    let mut g_w1 = conv2d_filter_grad(x, &dz1, kh, kw)?;
    let g_b1 = channel_sums(&dz1)?;

    let (dec_w1, dec_w2) = if w.tied() {
        g_w1.axpy(1.0, &g_dec_w1)?;
        g_w2.axpy(1.0, &g_dec_w2)?;
        (None, None)
    } else {
        (Some(g_dec_w1), Some(g_dec_w2))
    };
    let grads = ParamSet {
        w1: g_w1,
        b1: Tensor::from_vec(g_b1),
        w2: g_w2,
        b2: Tensor::from_vec(g_b2),
        dec_w2,
        c2: Tensor::from_vec(g_c2),
        dec_w1,
        c1: Tensor::from_vec(g_c1),
    };
    Ok((loss, grads))
}

/// Flattened code maps of one sample: one vector per map of length
/// `C · ceil(L / pool_w)`, plus their concatenation.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    pub maps: Vec<Vec<f64>>,
    pub concatenated: Vec<f64>,
}

pub fn encode_features(params: &ModelParams, x: &Tensor) -> Result<Features> {
    let code = forward_encode(params, x)?;
    Ok(Features {
        maps: code.map_vectors(),
        concatenated: code.maps.into_data(),
    })
}
