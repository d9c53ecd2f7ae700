//! Exact gradients of the batch mean-squared error via backpropagation
//! through time.
//!
//! The backward pass mirrors the forward recurrence step by step: the head
//! residual flows into the top layer's final hidden state, each layer walks
//! its timesteps in reverse threading the recurrent hidden/cell gradients,
//! and the gradient with respect to a layer's input sequence becomes the
//! hidden-state gradient of the layer below. Relu subgradients are 0 at the
//! kink, matching the forward definition.

use ndarray::{Array1, Array2, ArrayView1, ArrayView3};

use super::{forward_cached, relu, relu_prime, GateParams, LstmModel};
use crate::error::{Error, Result};

/// Gradient of one gate's parameters, same shapes as [`GateParams`].
#[derive(Debug, Clone)]
pub struct GateGradients {
    pub w: Array2<f64>,
    pub u: Array2<f64>,
    pub b: Array1<f64>,
}

impl GateGradients {
    fn zeros(units: usize, in_dim: usize) -> GateGradients {
        GateGradients {
            w: Array2::zeros((units, in_dim)),
            u: Array2::zeros((units, units)),
            b: Array1::zeros(units),
        }
    }

    /// grads.w += d ⊗ x, grads.u += d ⊗ h_prev, grads.b += d.
    fn accumulate(&mut self, d: &Array1<f64>, x: &Array1<f64>, h_prev: &Array1<f64>) {
        for (r, &dv) in d.iter().enumerate() {
            if dv != 0.0 {
                self.w.row_mut(r).scaled_add(dv, x);
                self.u.row_mut(r).scaled_add(dv, h_prev);
            }
        }
        self.b += d;
    }
}

/// Gradients of one layer, gates in the model's enumeration order.
#[derive(Debug, Clone)]
pub struct LayerGradients {
    pub input: GateGradients,
    pub forget: GateGradients,
    pub output: GateGradients,
    pub candidate: GateGradients,
}

/// Full-model gradients; flattens in the same order as
/// [`LstmModel::flatten_params`].
#[derive(Debug, Clone)]
pub struct LstmGradients {
    pub layers: Vec<LayerGradients>,
    pub head_w: Array1<f64>,
    pub head_b: f64,
}

impl LstmGradients {
    pub fn zeros_like(model: &LstmModel) -> LstmGradients {
        LstmGradients {
            layers: model
                .layers
                .iter()
                .map(|l| LayerGradients {
                    input: GateGradients::zeros(l.units, l.in_dim),
                    forget: GateGradients::zeros(l.units, l.in_dim),
                    output: GateGradients::zeros(l.units, l.in_dim),
                    candidate: GateGradients::zeros(l.units, l.in_dim),
                })
                .collect(),
            head_w: Array1::zeros(model.head_w.len()),
            head_b: 0.0,
        }
    }

    /// Flatten in parameter enumeration order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in &self.layers {
            for gate in [&layer.input, &layer.forget, &layer.output, &layer.candidate] {
                out.extend(gate.w.iter());
                out.extend(gate.u.iter());
                out.extend(gate.b.iter());
            }
        }
        out.extend(self.head_w.iter());
        out.push(self.head_b);
        out
    }
}

/// Gradient of a gate's sigmoid pre-activation given its post-activation.
fn sigmoid_backward(d_post: &Array1<f64>, post: &Array1<f64>) -> Array1<f64> {
    d_post * post * &post.mapv(|s| 1.0 - s)
}

/// Compute exact MSE gradients over a batch, returning them with the batch
/// loss. Loss is the mean over the batch of (prediction − target)², so a
/// batch whose predictions already equal its targets yields all-zero
/// gradients.
pub fn backward(
    model: &LstmModel,
    inputs: ArrayView3<'_, f64>,
    targets: ArrayView1<'_, f64>,
) -> Result<(LstmGradients, f64)> {
    let batch = inputs.len_of(ndarray::Axis(0));
    if batch == 0 {
        return Err(Error::Shape("empty batch".to_string()));
    }
    if targets.len() != batch {
        return Err(Error::Shape(format!(
            "{batch} windows but {} targets",
            targets.len()
        )));
    }

    let mut grads = LstmGradients::zeros_like(model);
    let mut loss = 0.0;
    for (window, &target) in inputs.outer_iter().zip(targets.iter()) {
        let cache = forward_cached(model, window)?;
        let residual = cache.prediction - target;
        loss += residual * residual;
        // d loss / d prediction for the batch-mean MSE.
        let dpred = 2.0 * residual / batch as f64;

        let top = cache.steps.last().expect("at least one layer");
        let final_h = &top.last().expect("at least one step").h;
        grads.head_w.scaled_add(dpred, final_h);
        grads.head_b += dpred;

        // Gradient flowing into each timestep's hidden state from above;
        // for the top layer only the final state feeds the head.
        let lookback = top.len();
        let mut dh_seq: Vec<Array1<f64>> = (0..lookback)
            .map(|t| {
                if t == lookback - 1 {
                    model.head_w.mapv(|w| w * dpred)
                } else {
                    Array1::zeros(model.head_w.len())
                }
            })
            .collect();

        for li in (0..model.layers.len()).rev() {
            let layer = &model.layers[li];
            let steps = &cache.steps[li];
            let layer_grads = &mut grads.layers[li];
            let mut dx_seq: Vec<Array1<f64>> = vec![Array1::zeros(layer.in_dim); steps.len()];
            let mut dh_rec = Array1::zeros(layer.units);
            let mut dc_rec = Array1::zeros(layer.units);
            for t in (0..steps.len()).rev() {
                let step = &steps[t];
                let dh = &dh_seq[t] + &dh_rec;
                let relu_c = step.c.mapv(relu);
                let do_post = &dh * &relu_c;
                let dc = &dc_rec + &(&dh * &step.o * &step.c.mapv(relu_prime));
                let df_post = &dc * &step.c_prev;
                let di_post = &dc * &step.g;
                let dg_post = &dc * &step.i;

                let di_pre = sigmoid_backward(&di_post, &step.i);
                let df_pre = sigmoid_backward(&df_post, &step.f);
                let do_pre = sigmoid_backward(&do_post, &step.o);
                let dg_pre = &dg_post * &step.g_pre.mapv(relu_prime);

                let h_prev = if t == 0 {
                    Array1::zeros(layer.units)
                } else {
                    steps[t - 1].h.clone()
                };

                layer_grads.input.accumulate(&di_pre, &step.x, &h_prev);
                layer_grads.forget.accumulate(&df_pre, &step.x, &h_prev);
                layer_grads.output.accumulate(&do_pre, &step.x, &h_prev);
                layer_grads.candidate.accumulate(&dg_pre, &step.x, &h_prev);

                let mut dx = Array1::zeros(layer.in_dim);
                let mut dh_prev = Array1::zeros(layer.units);
                for (gate, d_pre) in gate_grad_pairs(layer, [&di_pre, &df_pre, &do_pre, &dg_pre])
                {
                    dx += &gate.w.t().dot(d_pre);
                    dh_prev += &gate.u.t().dot(d_pre);
                }
                dx_seq[t] = dx;
                dh_rec = dh_prev;
                dc_rec = &dc * &step.f;
            }
            dh_seq = dx_seq;
        }
    }

    Ok((grads, loss / batch as f64))
}

fn gate_grad_pairs<'a>(
    layer: &'a super::LstmLayerParams,
    d_pres: [&'a Array1<f64>; 4],
) -> impl Iterator<Item = (&'a GateParams, &'a Array1<f64>)> {
    [
        (&layer.input, d_pres[0]),
        (&layer.forget, d_pres[1]),
        (&layer.output, d_pres[2]),
        (&layer.candidate, d_pres[3]),
    ]
    .into_iter()
}
