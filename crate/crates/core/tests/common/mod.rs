#![allow(dead_code)]

use deconv_sax::net::{backward, reconstruct, reconstruction_loss, FinalActivation, ModelParams, NetworkConfig, ParamSet};
use deconv_sax::numerics::{finite_diff_grad, max_relative_error};
use deconv_sax::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// SAX words written from the textbook definition: each window is
/// z-normalized with a two-pass population deviation, stretched by repeating
/// every point `w` times, then averaged in blocks of `n`.
pub fn brute_sax(x: &[f64], n: usize, w: usize, breakpoints: &[f64]) -> Vec<String> {
    let mut words = Vec::new();
    for start in 0..=x.len() - n {
        let win = &x[start..start + n];
        let mean = win.iter().sum::<f64>() / n as f64;
        let sd = (win.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        let z: Vec<f64> = if sd < 1e-8 {
            vec![0.0; n]
        } else {
            win.iter().map(|v| (v - mean) / sd).collect()
        };
        let stretched: Vec<f64> = z.iter().flat_map(|&v| std::iter::repeat(v).take(w)).collect();
        let word: String = stretched
            .chunks(n)
            .map(|block| {
                let m = block.iter().sum::<f64>() / n as f64;
                let below = breakpoints.iter().filter(|&&b| b <= m).count();
                (b'a' + below as u8) as char
            })
            .collect();
        words.push(word);
    }
    words
}

/// Random small architecture with perturbed weights and non-zero biases.
pub fn random_network(seed: u64) -> (ModelParams, Tensor) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kernels = [(1, 1), (3, 3), (1, 3), (3, 1), (3, 5)];
    let cfg = NetworkConfig {
        channels: rng.gen_range(1..=3),
        length: rng.gen_range(3..=9),
        filters1: rng.gen_range(1..=3),
        filters2: rng.gen_range(1..=3),
        kernel: kernels[rng.gen_range(0..kernels.len())],
        pool_w: rng.gen_range(1..=3),
        tie_weights: rng.gen_bool(0.5),
        final_activation: if rng.gen_bool(0.3) {
            FinalActivation::Relu
        } else {
            FinalActivation::Linear
        },
    };
    let mut p = ParamSet::glorot(&cfg, &mut rng);
    for (_, t) in p.named_mut() {
        for v in t.data_mut() {
            *v = 2.0 * *v + rng.gen_range(-0.3..0.3);
        }
    }
    let x: Vec<f64> = (0..cfg.channels * cfg.length).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let x = Tensor::new(vec![1, cfg.channels, cfg.length], x).unwrap();
    (ModelParams::new(cfg, p).unwrap(), x)
}

pub const GRAD_EPS: f64 = 1e-5;
/// Gradients smaller than this are compared in absolute terms.
pub const GRAD_FLOOR: f64 = 1e-6;

/// Largest relative error between backprop and central differences over every
/// parameter tensor.
pub fn gradient_error(params: &ModelParams, x: &Tensor) -> f64 {
    let (_, grads) = backward(params, x).unwrap();
    let analytic: Vec<(&str, Tensor)> = grads.named().into_iter().map(|(n, t)| (n, t.clone())).collect();
    let mut worst: f64 = 0.0;
    for (k, (name, g)) in analytic.iter().enumerate() {
        let base = params.weights.named()[k].1.clone();
        let numeric = finite_diff_grad(
            |probe| {
                let mut p = params.clone();
                *p.weights.named_mut()[k].1 = probe.clone();
                reconstruction_loss(x, &reconstruct(&p, x).unwrap()).unwrap()
            },
            &base,
            GRAD_EPS,
        )
        .unwrap();
        let e = max_relative_error(g.data(), numeric.data(), GRAD_FLOOR);
        assert!(e.is_finite(), "{name}");
        worst = worst.max(e);
    }
    worst
}
