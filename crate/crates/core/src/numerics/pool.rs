//! Max pooling along the last (time) axis and its switch-based inverse.

use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// Argmax offsets recorded by [`maxpool_time`], one per pooled element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolIndices {
    shape: Vec<usize>,
    offsets: Vec<usize>,
    pool_w: usize,
}

impl PoolIndices {
    /// Shape of the pooled tensor these switches belong to.
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Offset of the maximum within its window, row-major over `shape`.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn pool_w(&self) -> usize {
        self.pool_w
    }
}

fn pooled_width(w: usize, pool_w: usize) -> usize {
    w.div_ceil(pool_w)
}

/// Non-overlapping max pooling with window `1 × pool_w` on the last axis.
///
/// A trailing partial window is pooled over the elements it has. Ties keep the
/// first maximum.
pub fn maxpool_time(input: &Tensor, pool_w: usize) -> Result<(Tensor, PoolIndices)> {
    if pool_w < 1 {
        return Err(Error::arg("pool width must be at least 1"));
    }
    let w = *input
        .shape()
        .last()
        .ok_or_else(|| Error::dim("maxpool_time on a 0-d tensor"))?;
    let wp = pooled_width(w, pool_w);
    let rows = input.len() / w;
    let mut values = Vec::with_capacity(rows * wp);
    let mut offsets = Vec::with_capacity(rows * wp);
    for row in input.data().chunks_exact(w) {
        for window in row.chunks(pool_w) {
            let mut best = 0;
            for (k, &v) in window.iter().enumerate().skip(1) {
                if v > window[best] {
                    best = k;
                }
            }
            values.push(window[best]);
            offsets.push(best);
        }
    }
    let mut shape = input.shape().to_vec();
    *shape.last_mut().unwrap() = wp;
    let pooled = Tensor::new(shape.clone(), values)?;
    Ok((
        pooled,
        PoolIndices {
            shape,
            offsets,
            pool_w,
        },
    ))
}

fn check_unpool(pooled_shape: &[usize], indices: &PoolIndices, out_w: usize) -> Result<()> {
    if pooled_shape != indices.shape.as_slice() {
        return Err(Error::dim(format!(
            "unpool: pooled shape {pooled_shape:?} vs switch shape {:?}",
            indices.shape
        )));
    }
    let wp = *pooled_shape.last().unwrap();
    if out_w == 0 || pooled_width(out_w, indices.pool_w) != wp {
        return Err(Error::dim(format!(
            "unpool: width {out_w} does not pool to {wp} with window {}",
            indices.pool_w
        )));
    }
    Ok(())
}

/// Places every pooled value back at its recorded argmax; zeros elsewhere.
pub fn unpool_time(pooled: &Tensor, indices: &PoolIndices, out_w: usize) -> Result<Tensor> {
    check_unpool(pooled.shape(), indices, out_w)?;
    let wp = *pooled.shape().last().unwrap();
    let pw = indices.pool_w;
    let rows = pooled.len() / wp;
    let mut out = vec![0.0; rows * out_w];
    for (r, (vals, offs)) in pooled
        .data()
        .chunks_exact(wp)
        .zip(indices.offsets.chunks_exact(wp))
        .enumerate()
    {
        for (k, (&v, &off)) in vals.iter().zip(offs).enumerate() {
            let pos = k * pw + off;
            if pos >= out_w {
                return Err(Error::dim(format!(
                    "unpool: switch offset {off} of window {k} falls outside width {out_w}"
                )));
            }
            out[r * out_w + pos] = v;
        }
    }
    let mut shape = pooled.shape().to_vec();
    *shape.last_mut().unwrap() = out_w;
    Tensor::new(shape, out)
}

/// Adjoint of [`unpool_time`]: gathers the upstream values at the switch
/// positions back into the pooled shape.
pub fn unpool_time_backward(upstream: &Tensor, indices: &PoolIndices) -> Result<Tensor> {
    let out_w = *upstream
        .shape()
        .last()
        .ok_or_else(|| Error::dim("unpool backward on a 0-d tensor"))?;
    let mut pooled_shape = upstream.shape().to_vec();
    *pooled_shape.last_mut().unwrap() = pooled_width(out_w, indices.pool_w);
    check_unpool(&pooled_shape, indices, out_w)?;
    let wp = *pooled_shape.last().unwrap();
    let pw = indices.pool_w;
    let mut out = Vec::with_capacity(indices.offsets.len());
    for (row, offs) in upstream
        .data()
        .chunks_exact(out_w)
        .zip(indices.offsets.chunks_exact(wp))
    {
        for (k, &off) in offs.iter().enumerate() {
            out.push(row[k * pw + off]);
        }
    }
    Tensor::new(pooled_shape, out)
}
