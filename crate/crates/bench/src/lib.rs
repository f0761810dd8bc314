//! Deterministic inputs for the benchmarks.

use deconv_sax::classify::FeatureMatrix;
use deconv_sax::Tensor;

/// A chirp with a channel-dependent phase, `channels × length`.
pub fn series(channels: usize, length: usize) -> Vec<Vec<f64>> {
    (0..channels)
        .map(|c| {
            (0..length)
                .map(|t| {
                    let t = t as f64;
                    (0.05 * t + 0.002 * t * t + c as f64).sin() + 0.1 * (1.7 * t).cos()
                })
                .collect()
        })
        .collect()
}

/// `[1 × C × L]` network input built from [`series`].
pub fn input(channels: usize, length: usize) -> Tensor {
    Tensor::new(vec![1, channels, length], series(channels, length).concat()).unwrap()
}

/// `n` rows of `dim` dense features; the label is the sign of a fixed
/// linear score.
pub fn features(n: usize, dim: usize) -> FeatureMatrix {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..dim).map(|j| ((i * 31 + j * 17) as f64 * 0.37).sin()).collect())
        .collect();
    let labels = rows
        .iter()
        .map(|r| if r.iter().step_by(3).sum::<f64>() > 0.0 { 1 } else { -1 })
        .collect();
    FeatureMatrix::dense(&rows, labels).unwrap()
}
