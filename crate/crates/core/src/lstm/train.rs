//! Mini-batch training loop: seeded shuffling, global-norm gradient
//! clipping and Adam updates over the flattened parameter vector.

use ndarray::{ArrayView1, ArrayView3, Axis};
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{backward, LstmModel};
use crate::error::{Error, Result};

/// Gradients are rescaled whenever their global L2 norm exceeds this;
/// relu cells can otherwise explode early in training.
pub const GRAD_CLIP_NORM: f64 = 5.0;

/// Training hyperparameters. The defaults are the ones every experiment
/// run uses: 100 epochs of batch-5 Adam at learning rate 0.001.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            epochs: 100,
            batch_size: 5,
            learning_rate: 0.001,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be positive".to_string()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".to_string()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".to_string()));
        }
        Ok(())
    }
}

/// First/second-moment state of the Adam optimizer over a flat parameter
/// vector.
#[derive(Debug, Clone)]
pub struct AdamState {
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl AdamState {
    pub fn new(param_count: usize, learning_rate: f64) -> AdamState {
        AdamState {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            step: 0,
        }
    }

    /// One bias-corrected update of `params` in place.
    pub fn update(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len(), "parameter count is fixed at construction");
        assert_eq!(grads.len(), self.m.len(), "gradient vector must match");
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for k in 0..params.len() {
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * grads[k];
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * grads[k] * grads[k];
            let m_hat = self.m[k] / bc1;
            let v_hat = self.v[k] / bc2;
            params[k] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

/// Rescale `grads` in place so its global L2 norm is at most `max_norm`.
pub fn clip_global_norm(grads: &mut [f64], max_norm: f64) {
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let scale = max_norm / norm;
        for g in grads.iter_mut() {
            *g *= scale;
        }
    }
}

/// Fit the model on the given samples.
///
/// Each epoch shuffles the sample order with a generator seeded from the
/// config, walks it in `batch_size` chunks (the trailing short batch
/// included), and applies one clipped Adam update per batch. Returns the
/// per-epoch loss history — total squared error over the epoch divided by
/// the sample count — whose length always equals `config.epochs`. The whole
/// procedure is a deterministic function of (initial model, data, config).
pub fn train(
    model: &mut LstmModel,
    inputs: ArrayView3<'_, f64>,
    targets: ArrayView1<'_, f64>,
    config: &TrainConfig,
) -> Result<Vec<f64>> {
    config.validate()?;
    let samples = inputs.len_of(Axis(0));
    if samples == 0 {
        return Err(Error::Shape("no training samples".to_string()));
    }
    if targets.len() != samples {
        return Err(Error::Shape(format!(
            "{samples} windows but {} targets",
            targets.len()
        )));
    }

    let mut params = model.flatten_params();
    let mut adam = AdamState::new(params.len(), config.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..samples).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_sq_error = 0.0;
        for batch in order.chunks(config.batch_size) {
            let batch_inputs = inputs.select(Axis(0), batch);
            let batch_targets = targets.select(Axis(0), batch);
            let (grads, batch_loss) =
                backward(model, batch_inputs.view(), batch_targets.view())?;
            epoch_sq_error += batch_loss * batch.len() as f64;

            let mut flat = grads.flatten();
            clip_global_norm(&mut flat, GRAD_CLIP_NORM);
            adam.update(&mut params, &flat);
            model.set_params(&params)?;
        }
        let epoch_loss = epoch_sq_error / samples as f64;
        if !epoch_loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, value: epoch_loss });
        }
        history.push(epoch_loss);
    }
    Ok(history)
}
