use log::debug;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::net::{
    adadelta_step, backward, reconstruct, reconstruction_loss, AdadeltaState, ModelParams,
    NetworkConfig, ParamSet, TrainConfig,
};
use crate::numerics::Tensor;

/// Loss history of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean loss over the data set before the first update.
    pub initial_loss: f64,
    /// Mean per-sample loss observed during each epoch.
    pub epoch_losses: Vec<f64>,
}

/// Mean reconstruction loss over `inputs`.
pub fn mean_loss(params: &ModelParams, inputs: &[Tensor]) -> Result<f64> {
    let losses = inputs
        .par_iter()
        .map(|x| reconstruction_loss(x, &reconstruct(params, x)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(losses.iter().sum::<f64>() / losses.len().max(1) as f64)
}

/// Initializes from `tc.seed` and trains.
pub fn train(
    inputs: &[Tensor],
    net: NetworkConfig,
    tc: &TrainConfig,
) -> Result<(ModelParams, TrainReport)> {
    tc.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(tc.seed);
    let params = ModelParams::init(net, &mut rng)?;
    train_from(params, inputs, tc, &mut rng)
}

/// Trains `params` for `tc.epochs` passes of shuffled mini-batches, averaging
/// per-sample gradients within a batch.
pub fn train_from(
    mut params: ModelParams,
    inputs: &[Tensor],
    tc: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(ModelParams, TrainReport)> {
    tc.validate()?;
    if inputs.is_empty() {
        return Err(Error::arg("cannot train on an empty data set"));
    }
    let initial_loss = mean_loss(&params, inputs)?;
    let mut state = AdadeltaState::new(&params.weights);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut epoch_losses = Vec::with_capacity(tc.epochs);

    for epoch in 0..tc.epochs {
        order.shuffle(rng);
        let mut total = 0.0;
        for batch in order.chunks(tc.batch_size) {
            let per_sample = batch
                .par_iter()
                .map(|&i| backward(&params, &inputs[i]))
                .collect::<Result<Vec<_>>>()?;
            let mut grad = ParamSet::zeros(&params.config);
            let k = 1.0 / batch.len() as f64;
            for (loss, g) in &per_sample {
                total += loss;
                grad.axpy(k, g)?;
            }
            adadelta_step(&mut params.weights, &grad, &mut state, tc)?;
        }
        if !params.weights.is_finite() {
            return Err(Error::Numeric(format!("parameters diverged in epoch {epoch}")));
        }
        let mean = total / inputs.len() as f64;
        debug!("epoch {epoch}: loss {mean:.6}");
        epoch_losses.push(mean);
    }
    Ok((
        params,
        TrainReport {
            initial_loss,
            epoch_losses,
        },
    ))
}
