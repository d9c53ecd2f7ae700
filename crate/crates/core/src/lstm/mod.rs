//! From-scratch stacked LSTM regressor in double precision.
//!
//! The network is three recurrent layers of 10, 5 and 5 units feeding a
//! one-unit linear head. Gates use the logistic sigmoid; the cell candidate
//! and the cell output use relu. The first two layers hand their full
//! hidden sequence to the next layer, the third contributes only its final
//! hidden state to the head. Training ([`train`]) and exact
//! backpropagation through time ([`backward`]) live in submodules.

mod backprop;
mod train;

pub use backprop::{backward, LstmGradients};
pub use train::{train, AdamState, TrainConfig, GRAD_CLIP_NORM};

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::ScalerParams;
use crate::error::{Error, Result};

/// Units per recurrent layer, input layer first.
pub const LAYER_UNITS: [usize; 3] = [10, 5, 5];

/// Weights of one gate: `w` mixes the layer input, `u` the previous hidden
/// state, `b` is the bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    pub w: Array2<f64>,
    pub u: Array2<f64>,
    pub b: Array1<f64>,
}

impl GateParams {
    /// Pre-activation for one timestep: w·x + u·h_prev + b.
    fn preactivation(&self, x: &Array1<f64>, h_prev: &Array1<f64>) -> Array1<f64> {
        self.w.dot(x) + self.u.dot(h_prev) + &self.b
    }
}

/// One recurrent layer: input, forget and output gates plus the cell
/// candidate, in that order everywhere parameters are enumerated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmLayerParams {
    pub input: GateParams,
    pub forget: GateParams,
    pub output: GateParams,
    pub candidate: GateParams,
    pub units: usize,
    pub in_dim: usize,
}

impl LstmLayerParams {
    fn gates(&self) -> [&GateParams; 4] {
        [&self.input, &self.forget, &self.output, &self.candidate]
    }

    fn gates_mut(&mut self) -> [&mut GateParams; 4] {
        [
            &mut self.input,
            &mut self.forget,
            &mut self.output,
            &mut self.candidate,
        ]
    }
}

/// The full network: recurrent stack plus linear head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmModel {
    pub layers: Vec<LstmLayerParams>,
    pub head_w: Array1<f64>,
    pub head_b: f64,
    pub seed: u64,
}

/// Logistic sigmoid.
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Rectifier; exactly 0 at and below 0.
fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Rectifier subgradient, defined as 0 at the kink.
fn relu_prime(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Build the standard 10/5/5 network for `feature_count` inputs.
pub fn init_model(feature_count: usize, seed: u64) -> LstmModel {
    init_with_units(feature_count, &LAYER_UNITS, seed)
}

/// Build a network with arbitrary layer sizes (used by the verification
/// tests, which probe tiny models).
///
/// Weights draw from uniform(−limit, limit) with limit = √(6 / (fan_in +
/// fan_out)) per matrix; biases start at 0 except the forget gate's, which
/// starts at 1 so early training does not erase the cell state. Draw order
/// is layers outside-in, gates in input/forget/output/candidate order, `w`
/// then `u` row-major, finally the head — fixed so a seed always produces
/// the same bytes.
pub fn init_with_units(feature_count: usize, units: &[usize], seed: u64) -> LstmModel {
    assert!(feature_count >= 1, "need at least one input feature");
    assert!(!units.is_empty(), "need at least one recurrent layer");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample_matrix = |rows: usize, cols: usize, fan_in: usize, fan_out: usize| {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-limit..limit))
    };

    let mut layers = Vec::with_capacity(units.len());
    let mut in_dim = feature_count;
    for &n in units {
        let gate = |forget: bool, sampler: &mut dyn FnMut(usize, usize, usize, usize) -> Array2<f64>| {
            GateParams {
                w: sampler(n, in_dim, in_dim, n),
                u: sampler(n, n, n, n),
                b: if forget { Array1::ones(n) } else { Array1::zeros(n) },
            }
        };
        layers.push(LstmLayerParams {
            input: gate(false, &mut sample_matrix),
            forget: gate(true, &mut sample_matrix),
            output: gate(false, &mut sample_matrix),
            candidate: gate(false, &mut sample_matrix),
            units: n,
            in_dim,
        });
        in_dim = n;
    }

    let last = *units.last().expect("non-empty layer list");
    let head_limit = (6.0 / (last + 1) as f64).sqrt();
    let head_w = Array1::from_shape_fn(last, |_| rng.gen_range(-head_limit..head_limit));
    LstmModel { layers, head_w, head_b: 0.0, seed }
}

impl LstmModel {
    pub fn feature_count(&self) -> usize {
        self.layers[0].in_dim
    }

    /// Every parameter, flattened in the fixed enumeration order (layers,
    /// then gates input/forget/output/candidate, each as w row-major, u
    /// row-major, b; head weights and bias last). [`LstmGradients::flatten`]
    /// uses the same order.
    pub fn flatten_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            for gate in layer.gates() {
                out.extend(gate.w.iter());
                out.extend(gate.u.iter());
                out.extend(gate.b.iter());
            }
        }
        out.extend(self.head_w.iter());
        out.push(self.head_b);
        out
    }

    /// Overwrite every parameter from a flat slice in enumeration order.
    pub fn set_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                values.len()
            )));
        }
        let mut iter = values.iter().copied();
        for layer in &mut self.layers {
            for gate in layer.gates_mut() {
                for v in gate.w.iter_mut() {
                    *v = iter.next().expect("length checked");
                }
                for v in gate.u.iter_mut() {
                    *v = iter.next().expect("length checked");
                }
                for v in gate.b.iter_mut() {
                    *v = iter.next().expect("length checked");
                }
            }
        }
        for v in self.head_w.iter_mut() {
            *v = iter.next().expect("length checked");
        }
        self.head_b = iter.next().expect("length checked");
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        let mut n = 0;
        for layer in &self.layers {
            n += 4 * (layer.units * layer.in_dim + layer.units * layer.units + layer.units);
        }
        n + self.head_w.len() + 1
    }

    /// Check internal shape consistency; used after deserializing.
    fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Shape("model has no layers".to_string()));
        }
        let mut in_dim = self.layers[0].in_dim;
        for (i, layer) in self.layers.iter().enumerate() {
            if layer.in_dim != in_dim {
                return Err(Error::Shape(format!(
                    "layer {i} expects {} inputs but receives {in_dim}",
                    layer.in_dim
                )));
            }
            for gate in layer.gates() {
                if gate.w.dim() != (layer.units, layer.in_dim)
                    || gate.u.dim() != (layer.units, layer.units)
                    || gate.b.len() != layer.units
                {
                    return Err(Error::Shape(format!("layer {i} gate shapes inconsistent")));
                }
            }
            in_dim = layer.units;
        }
        if self.head_w.len() != in_dim {
            return Err(Error::Shape(format!(
                "head expects {} inputs but receives {in_dim}",
                self.head_w.len()
            )));
        }
        if self.flatten_params().iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("model contains non-finite weights".to_string()));
        }
        Ok(())
    }
}

/// Cached activations of one timestep, kept for backpropagation.
#[derive(Debug, Clone)]
pub(crate) struct StepCache {
    pub x: Array1<f64>,
    pub i: Array1<f64>,
    pub f: Array1<f64>,
    pub o: Array1<f64>,
    /// Candidate pre-activation (needed for the relu subgradient).
    pub g_pre: Array1<f64>,
    pub g: Array1<f64>,
    pub c_prev: Array1<f64>,
    pub c: Array1<f64>,
    pub h: Array1<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct ForwardCache {
    /// layers × timesteps.
    pub steps: Vec<Vec<StepCache>>,
    pub prediction: f64,
}

/// Run the recurrence over one window, keeping per-step activations.
pub(crate) fn forward_cached(model: &LstmModel, window: ArrayView2<'_, f64>) -> Result<ForwardCache> {
    let (lookback, features) = window.dim();
    if features != model.feature_count() {
        return Err(Error::Shape(format!(
            "window has {features} features, model expects {}",
            model.feature_count()
        )));
    }
    if lookback == 0 {
        return Err(Error::Shape("window has no timesteps".to_string()));
    }

    let mut sequence: Vec<Array1<f64>> = window.rows().into_iter().map(|r| r.to_owned()).collect();
    let mut steps = Vec::with_capacity(model.layers.len());
    for layer in &model.layers {
        let mut layer_steps = Vec::with_capacity(sequence.len());
        let mut h = Array1::zeros(layer.units);
        let mut c = Array1::zeros(layer.units);
        let mut next_sequence = Vec::with_capacity(sequence.len());
        for x in sequence {
            let i = layer.input.preactivation(&x, &h).mapv(sigmoid);
            let f = layer.forget.preactivation(&x, &h).mapv(sigmoid);
            let o = layer.output.preactivation(&x, &h).mapv(sigmoid);
            let g_pre = layer.candidate.preactivation(&x, &h);
            let g = g_pre.mapv(relu);
            let c_prev = c;
            c = &f * &c_prev + &i * &g;
            let h_new = &o * &c.mapv(relu);
            layer_steps.push(StepCache {
                x,
                i,
                f,
                o,
                g_pre,
                g,
                c_prev,
                c: c.clone(),
                h: h_new.clone(),
            });
            h = h_new.clone();
            next_sequence.push(h_new);
        }
        steps.push(layer_steps);
        sequence = next_sequence;
    }

    let final_h = sequence.last().expect("at least one timestep");
    let prediction = model.head_w.dot(final_h) + model.head_b;
    Ok(ForwardCache { steps, prediction })
}

/// Predict the scaled next-day close for one lookback window.
pub fn forward(model: &LstmModel, window: ArrayView2<'_, f64>) -> Result<f64> {
    Ok(forward_cached(model, window)?.prediction)
}

/// Forecast `horizon` days ahead by iterating one-step predictions.
///
/// Each predicted close is written into a fresh row appended to the window;
/// the other features stay at their last observed values, since the model
/// has no way to forecast them. Predictions come back in price units via
/// the scaler's close range.
pub fn predict_horizon(
    model: &LstmModel,
    last_window: ArrayView2<'_, f64>,
    scaler: &ScalerParams,
    horizon: usize,
) -> Result<Vec<f64>> {
    let mut window = last_window.to_owned();
    let lookback = window.nrows();
    let base_row = window.row(lookback - 1).to_owned();
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let scaled = forward(model, window.view())?;
        out.push(scaler.invert_close(scaled)?);
        let mut next_row = base_row.clone();
        next_row[0] = scaled;
        // Shift the window one day forward.
        for t in 0..lookback - 1 {
            let row = window.row(t + 1).to_owned();
            window.row_mut(t).assign(&row);
        }
        window.row_mut(lookback - 1).assign(&next_row);
    }
    Ok(out)
}

/// Smallest absolute value any relu argument (candidate pre-activation or
/// cell state) takes while running these windows.
///
/// Finite-difference gradient verification is only well-conditioned when
/// this distance comfortably exceeds the probe step: a parameter nudge that
/// crosses the kink changes the subgradient discontinuously.
pub fn kink_distance(model: &LstmModel, windows: &[ArrayView2<'_, f64>]) -> Result<f64> {
    let mut min = f64::INFINITY;
    for window in windows {
        let cache = forward_cached(model, *window)?;
        for layer in &cache.steps {
            for step in layer {
                for v in step.g_pre.iter().chain(step.c.iter()) {
                    min = min.min(v.abs());
                }
            }
        }
    }
    Ok(min)
}

const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    version: u32,
    model: LstmModel,
}

/// Persist the model as a versioned JSON blob.
pub fn save_checkpoint(model: &LstmModel, path: &Path) -> Result<()> {
    let blob = serde_json::to_string(&Checkpoint {
        version: CHECKPOINT_VERSION,
        model: model.clone(),
    })?;
    std::fs::write(path, blob).map_err(|e| Error::write(path, e))
}

/// Load a checkpoint, rejecting unknown versions and inconsistent shapes.
pub fn load_checkpoint(path: &Path) -> Result<LstmModel> {
    let blob = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let checkpoint: Checkpoint = serde_json::from_str(&blob)?;
    if checkpoint.version != CHECKPOINT_VERSION {
        return Err(Error::Parse(format!(
            "unsupported checkpoint version {} in {}",
            checkpoint.version,
            path.display()
        )));
    }
    checkpoint.model.validate()?;
    Ok(checkpoint.model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn same_seed_same_parameters() {
        let a = init_model(5, 7);
        let b = init_model(5, 7);
        assert_eq!(a.flatten_params(), b.flatten_params());
        let c = init_model(5, 8);
        assert_ne!(a.flatten_params(), c.flatten_params());
    }

    #[test]
    fn standard_shapes() {
        let model = init_model(5, 1);
        assert_eq!(model.layers.len(), 3);
        assert_eq!(model.layers[0].input.w.dim(), (10, 5));
        assert_eq!(model.layers[1].input.w.dim(), (5, 10));
        assert_eq!(model.layers[2].input.w.dim(), (5, 5));
        assert_eq!(model.head_w.len(), 5);
        assert!(model.validate().is_ok());
    }

    #[test]
    fn forget_bias_starts_at_one_others_zero() {
        let model = init_model(3, 42);
        for layer in &model.layers {
            assert!(layer.forget.b.iter().all(|&b| b == 1.0));
            assert!(layer.input.b.iter().all(|&b| b == 0.0));
            assert!(layer.output.b.iter().all(|&b| b == 0.0));
            assert!(layer.candidate.b.iter().all(|&b| b == 0.0));
        }
        assert_eq!(model.head_b, 0.0);
    }

    #[test]
    fn init_weights_within_fan_limit() {
        let model = init_model(5, 3);
        let layer = &model.layers[0];
        let limit = (6.0 / (5 + 10) as f64).sqrt();
        assert!(layer.input.w.iter().all(|w| w.abs() < limit));
        let u_limit = (6.0 / 20.0_f64).sqrt();
        assert!(layer.input.u.iter().all(|w| w.abs() < u_limit));
    }

    #[test]
    fn zero_network_predicts_zero() {
        let mut model = init_model(2, 0);
        let zeros = vec![0.0; model.param_count()];
        model.set_params(&zeros).unwrap();
        let window = Array2::from_elem((4, 2), 0.9);
        assert_eq!(forward(&model, window.view()).unwrap(), 0.0);
    }

    #[test]
    fn forward_rejects_wrong_feature_count() {
        let model = init_model(5, 0);
        let window = Array2::zeros((10, 4));
        assert!(matches!(
            forward(&model, window.view()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn two_step_single_unit_matches_hand_arithmetic() {
        // One 1-unit layer and the head, unrolled by hand with plain
        // scalar arithmetic.
        let mut model = init_with_units(1, &[1], 0);
        let (w_i, u_i, b_i) = (0.1, 0.2, 0.05);
        let (w_f, u_f, b_f) = (0.3, 0.1, 1.0);
        let (w_o, u_o, b_o) = (0.2, 0.3, 0.0);
        let (w_g, u_g, b_g) = (0.5, 0.4, 0.1);
        let (head_w, head_b) = (1.2, 0.05);
        model
            .set_params(&[
                w_i, u_i, b_i, w_f, u_f, b_f, w_o, u_o, b_o, w_g, u_g, b_g, head_w, head_b,
            ])
            .unwrap();

        let (x1, x2) = (0.5, -0.3);
        let sig = |z: f64| 1.0 / (1.0 + (-z).exp());
        let rl = |z: f64| if z > 0.0 { z } else { 0.0 };

        let i1 = sig(w_i * x1 + b_i);
        let f1 = sig(w_f * x1 + b_f);
        let o1 = sig(w_o * x1 + b_o);
        let g1 = rl(w_g * x1 + b_g);
        let c1 = f1 * 0.0 + i1 * g1;
        let h1 = o1 * rl(c1);

        let i2 = sig(w_i * x2 + u_i * h1 + b_i);
        let f2 = sig(w_f * x2 + u_f * h1 + b_f);
        let o2 = sig(w_o * x2 + u_o * h1 + b_o);
        let g2 = rl(w_g * x2 + u_g * h1 + b_g);
        let c2 = f2 * c1 + i2 * g2;
        let h2 = o2 * rl(c2);
        let expected = head_w * h2 + head_b;

        let window = array![[x1], [x2]];
        let got = forward(&model, window.view()).unwrap();
        assert!(
            (got - expected).abs() < 1e-12,
            "forward {got} vs hand {expected}"
        );
    }

    #[test]
    fn single_timestep_window_is_one_cell_step() {
        let model = init_with_units(2, &[2], 9);
        let window = array![[0.4, -0.2]];
        let pred = forward(&model, window.view()).unwrap();
        assert!(pred.is_finite());
        // With h0 = c0 = 0, only the first recurrence step contributes.
        let cache = forward_cached(&model, window.view()).unwrap();
        assert_eq!(cache.steps[0].len(), 1);
    }

    #[test]
    fn flatten_set_round_trip() {
        let model = init_model(6, 11);
        let params = model.flatten_params();
        assert_eq!(params.len(), model.param_count());
        let mut copy = init_model(6, 99);
        copy.set_params(&params).unwrap();
        assert_eq!(copy.flatten_params(), params);
        assert!(copy.set_params(&params[..10]).is_err());
    }

    #[test]
    fn predict_horizon_lengths_and_base_case() {
        let model = init_model(1, 5);
        let window = Array2::from_shape_fn((10, 1), |(t, _)| 0.3 + 0.01 * t as f64);
        let matrix = crate::dataset::FeatureMatrix {
            ticker: "T".into(),
            dates: vec![],
            columns: vec!["close".into()],
            values: Array2::from_shape_vec((2, 1), vec![10.0, 30.0]).unwrap(),
        };
        let scaler = crate::dataset::fit_scaler(&matrix, 2);
        let five = predict_horizon(&model, window.view(), &scaler, 5).unwrap();
        assert_eq!(five.len(), 5);
        let one = predict_horizon(&model, window.view(), &scaler, 1).unwrap();
        let direct = scaler
            .invert_close(forward(&model, window.view()).unwrap())
            .unwrap();
        assert_eq!(one[0], direct);
    }

    #[test]
    fn checkpoint_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let model = init_model(7, 123);
        save_checkpoint(&model, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded, model);
    }

    #[test]
    fn checkpoint_rejects_future_version() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let model = init_model(2, 1);
        let blob = serde_json::to_string(&Checkpoint { version: 99, model }).unwrap();
        std::fs::write(&path, blob).unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::Parse(_))));
    }

    #[test]
    fn kink_distance_is_positive_for_generic_weights() {
        let model = init_model(2, 21);
        let window = Array2::from_shape_fn((5, 2), |(t, j)| 0.1 + 0.07 * t as f64 + 0.03 * j as f64);
        let d = kink_distance(&model, &[window.view()]).unwrap();
        assert!(d.is_finite());
        assert!(d >= 0.0);
    }
}
