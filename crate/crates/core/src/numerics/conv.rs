//! Stride-1 "same" convolution and its transpose.
//!
//! Convolution here is cross-correlation over a zero-padded input:
//!
//! ```text
//! out[o, r, c] = bias[o] + Σ_{i,u,v} W[o, i, u, v] · x[i, r + u - kh/2, c + v - kw/2]
//! ```
//!
//! with out-of-range input positions read as zero. The transpose scatters every
//! input activation through the same filters and crops the enlarged map back to
//! `H × W`, which makes it the exact linear adjoint of the forward pass.

use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// Index range `[lo, hi)` of output positions whose shifted source `p + off`
/// stays inside `0..extent`.
#[inline]
fn valid_range(extent: usize, off: isize) -> (usize, usize) {
    let lo = (-off).max(0) as usize;
    let hi = (extent as isize - off).clamp(0, extent as isize) as usize;
    (lo.min(hi), hi)
}

fn check_kernel(kh: usize, kw: usize) -> Result<()> {
    if kh % 2 == 0 || kw % 2 == 0 {
        return Err(Error::arg(format!(
            "same-padding needs odd kernel extents, got {kh}x{kw}"
        )));
    }
    Ok(())
}

/// `out[o] += w * shift(x, du, dv)` over a single `h × w` plane.
#[inline]
fn accumulate_shifted(
    out: &mut [f64],
    src: &[f64],
    h: usize,
    w: usize,
    du: isize,
    dv: isize,
    weight: f64,
) {
    if weight == 0.0 {
        return;
    }
    let (r0, r1) = valid_range(h, du);
    let (c0, c1) = valid_range(w, dv);
    if c0 >= c1 {
        return;
    }
    for r in r0..r1 {
        let sr = (r as isize + du) as usize;
        let dst = &mut out[r * w + c0..r * w + c1];
        let s0 = (c0 as isize + dv) as usize;
        let s = &src[sr * w + s0..sr * w + s0 + (c1 - c0)];
        for (d, v) in dst.iter_mut().zip(s) {
            *d += weight * v;
        }
    }
}

/// `Σ_{r,c} a[r, c] · b[r + du, c + dv]` over the overlapping region.
#[inline]
fn shifted_dot(a: &[f64], b: &[f64], h: usize, w: usize, du: isize, dv: isize) -> f64 {
    let (r0, r1) = valid_range(h, du);
    let (c0, c1) = valid_range(w, dv);
    if c0 >= c1 {
        return 0.0;
    }
    let mut acc = 0.0;
    for r in r0..r1 {
        let sr = (r as isize + du) as usize;
        let s0 = (c0 as isize + dv) as usize;
        let ra = &a[r * w + c0..r * w + c1];
        let rb = &b[sr * w + s0..sr * w + s0 + (c1 - c0)];
        acc += ra.iter().zip(rb).map(|(x, y)| x * y).sum::<f64>();
    }
    acc
}

/// Same-padded convolution: `[Cin×H×W] * [Cout×Cin×kh×kw] + bias[Cout] -> [Cout×H×W]`.
pub fn conv2d_same(input: &Tensor, filters: &Tensor, bias: &[f64]) -> Result<Tensor> {
    let (cin, h, w) = input.dims3("conv2d_same input")?;
    let (cout, fcin, kh, kw) = filters.dims4("conv2d_same filters")?;
    check_kernel(kh, kw)?;
    if fcin != cin {
        return Err(Error::dim(format!(
            "conv2d_same: input has {cin} channels, filters expect {fcin}"
        )));
    }
    if bias.len() != cout {
        return Err(Error::dim(format!(
            "conv2d_same: {cout} filters but {} biases",
            bias.len()
        )));
    }
    let (ph, pw) = ((kh / 2) as isize, (kw / 2) as isize);
    let plane = h * w;
    let x = input.data();
    let f = filters.data();
    let mut out = vec![0.0; cout * plane];
    for (o, dst) in out.chunks_exact_mut(plane).enumerate() {
        dst.fill(bias[o]);
        for i in 0..cin {
            let src = &x[i * plane..(i + 1) * plane];
            for u in 0..kh {
                for v in 0..kw {
                    let wt = f[((o * cin + i) * kh + u) * kw + v];
                    accumulate_shifted(dst, src, h, w, u as isize - ph, v as isize - pw, wt);
                }
            }
        }
    }
    Tensor::new(vec![cout, h, w], out)
}

/// Transposed same-padded convolution: `[Cout×H×W]` through `[Cout×Cin×kh×kw]`
/// plus `bias[Cin]`, cropped to `[Cin×H×W]`.
pub fn conv2d_transpose_same(input: &Tensor, filters: &Tensor, bias: &[f64]) -> Result<Tensor> {
    let (cout, h, w) = input.dims3("conv2d_transpose_same input")?;
    let (fcout, cin, kh, kw) = filters.dims4("conv2d_transpose_same filters")?;
    check_kernel(kh, kw)?;
    if fcout != cout {
        return Err(Error::dim(format!(
            "conv2d_transpose_same: input has {cout} channels, filters expect {fcout}"
        )));
    }
    if bias.len() != cin {
        return Err(Error::dim(format!(
            "conv2d_transpose_same: {cin} output channels but {} biases",
            bias.len()
        )));
    }
    let (ph, pw) = ((kh / 2) as isize, (kw / 2) as isize);
    let plane = h * w;
    let y = input.data();
    let f = filters.data();
    let mut out = vec![0.0; cin * plane];
    for (i, dst) in out.chunks_exact_mut(plane).enumerate() {
        dst.fill(bias[i]);
        for o in 0..cout {
            let src = &y[o * plane..(o + 1) * plane];
            for u in 0..kh {
                for v in 0..kw {
                    let wt = f[((o * cin + i) * kh + u) * kw + v];
                    // out[r', c'] gathers y[r' - (u - ph), c' - (v - pw)]
                    accumulate_shifted(dst, src, h, w, ph - u as isize, pw - v as isize, wt);
                }
            }
        }
    }
    Tensor::new(vec![cin, h, w], out)
}

/// Gradient of `Σ upstream · conv2d_same(input, W)` with respect to `W`.
///
/// Because the transpose is the adjoint, the same routine yields the filter
/// gradient of a transposed layer with the roles of its arguments swapped.
pub fn conv2d_filter_grad(
    input: &Tensor,
    upstream: &Tensor,
    kh: usize,
    kw: usize,
) -> Result<Tensor> {
    let (cin, h, w) = input.dims3("conv2d_filter_grad input")?;
    let (cout, uh, uw) = upstream.dims3("conv2d_filter_grad upstream")?;
    check_kernel(kh, kw)?;
    if (uh, uw) != (h, w) {
        return Err(Error::dim(format!(
            "conv2d_filter_grad: input plane {h}x{w} vs upstream plane {uh}x{uw}"
        )));
    }
    let (ph, pw) = ((kh / 2) as isize, (kw / 2) as isize);
    let plane = h * w;
    let x = input.data();
    let g = upstream.data();
    let mut out = vec![0.0; cout * cin * kh * kw];
    for o in 0..cout {
        let go = &g[o * plane..(o + 1) * plane];
        for i in 0..cin {
            let xi = &x[i * plane..(i + 1) * plane];
            for u in 0..kh {
                for v in 0..kw {
                    out[((o * cin + i) * kh + u) * kw + v] =
                        shifted_dot(go, xi, h, w, u as isize - ph, v as isize - pw);
                }
            }
        }
    }
    Tensor::new(vec![cout, cin, kh, kw], out)
}

/// Per-channel sum of a `[C×H×W]` tensor (the bias gradient).
pub fn channel_sums(t: &Tensor) -> Result<Vec<f64>> {
    let (c, h, w) = t.dims3("channel_sums")?;
    Ok(t.data()
        .chunks_exact(h * w)
        .take(c)
        .map(|p| p.iter().sum())
        .collect())
}
