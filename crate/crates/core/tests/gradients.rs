mod common;

use common::{gradient_error, random_network, GRAD_EPS, GRAD_FLOOR};
use deconv_sax::numerics::{
    conv2d_filter_grad, conv2d_same, conv2d_transpose_same, finite_diff_grad, max_relative_error,
    maxpool_time, relu, relu_backward, unpool_time, unpool_time_backward,
};
use deconv_sax::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn check(analytic: &Tensor, numeric: &Tensor, what: &str) {
    let e = max_relative_error(analytic.data(), numeric.data(), GRAD_FLOOR);
    assert!(e < 1e-4, "{what}: relative error {e:e}");
}

#[test]
fn autoencoder_backprop_matches_finite_differences() {
    for seed in 0..30 {
        let (params, x) = random_network(seed);
        let e = gradient_error(&params, &x);
        assert!(e < 1e-4, "seed {seed} {:?}: {e:e}", params.config);
    }
}

#[test]
fn convolution_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = random(&mut rng, &[2, 4, 5]);
    let f = random(&mut rng, &[3, 2, 3, 3]);
    let up = random(&mut rng, &[3, 4, 5]);
    let bias = [0.1, -0.2, 0.3];
    let objective = |x: &Tensor, f: &Tensor| conv2d_same(x, f, &bias).unwrap().dot(&up).unwrap();

    let dx = conv2d_transpose_same(&up, &f, &[0.0, 0.0]).unwrap();
    check(&dx, &finite_diff_grad(|p| objective(p, &f), &x, GRAD_EPS).unwrap(), "conv input");

    let df = conv2d_filter_grad(&x, &up, 3, 3).unwrap();
    check(&df, &finite_diff_grad(|p| objective(&x, p), &f, GRAD_EPS).unwrap(), "conv filter");
}

#[test]
fn transposed_convolution_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let y = random(&mut rng, &[3, 4, 6]);
    let f = random(&mut rng, &[3, 2, 1, 3]);
    let up = random(&mut rng, &[2, 4, 6]);
    let objective = |y: &Tensor, f: &Tensor| {
        conv2d_transpose_same(y, f, &[0.5, -0.5]).unwrap().dot(&up).unwrap()
    };

    let dy = conv2d_same(&up, &f, &[0.0; 3]).unwrap();
    check(&dy, &finite_diff_grad(|p| objective(p, &f), &y, GRAD_EPS).unwrap(), "transpose input");

    // roles swapped: the transposed layer's input plays the upstream
    let df = conv2d_filter_grad(&up, &y, 1, 3).unwrap();
    check(&df, &finite_diff_grad(|p| objective(&y, p), &f, GRAD_EPS).unwrap(), "transpose filter");
}

#[test]
fn pooling_and_activation_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = random(&mut rng, &[2, 3, 7]);
    let (pooled, idx) = maxpool_time(&x, 3).unwrap();
    let up = random(&mut rng, pooled.shape());

    // max pooling routes the upstream to the switches
    let dx = unpool_time(&up, &idx, 7).unwrap();
    let numeric = finite_diff_grad(|p| maxpool_time(p, 3).unwrap().0.dot(&up).unwrap(), &x, GRAD_EPS).unwrap();
    check(&dx, &numeric, "maxpool");

    let up_full = random(&mut rng, &[2, 3, 7]);
    let dp = unpool_time_backward(&up_full, &idx).unwrap();
    let numeric = finite_diff_grad(|p| unpool_time(p, &idx, 7).unwrap().dot(&up_full).unwrap(), &pooled, GRAD_EPS)
        .unwrap();
    check(&dp, &numeric, "unpool");

    let dr = relu_backward(&x, &up_full).unwrap();
    let numeric = finite_diff_grad(|p| relu(p).dot(&up_full).unwrap(), &x, GRAD_EPS).unwrap();
    check(&dr, &numeric, "relu");
}
