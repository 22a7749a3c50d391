//! Fixed-architecture multilayer perceptron with exact reverse-mode
//! gradients for the affine/activation chain. Batches are row-major
//! [N x d]; weights are [out x in].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::tensor::Tensor2D;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed in terms of the pre-activation z.
    fn derivative(&self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Architecture description: layer widths input -> hidden... -> output and
/// one activation per hidden layer. The final layer is always Identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    layer_dims: Vec<usize>,
    hidden_activations: Vec<Activation>,
}

impl MlpSpec {
    pub fn new(layer_dims: Vec<usize>, hidden_activations: Vec<Activation>) -> Result<Self> {
        if layer_dims.len() < 2 {
            return Err(Error::Input(format!(
                "MlpSpec needs at least 2 layer dims, got {}",
                layer_dims.len()
            )));
        }
        if layer_dims.contains(&0) {
            return Err(Error::Input("MlpSpec layer dims must be > 0".into()));
        }
        let hidden = layer_dims.len() - 2;
        if hidden_activations.len() != hidden {
            return Err(Error::Input(format!(
                "MlpSpec with {} layers needs {} hidden activations, got {}",
                layer_dims.len() - 1,
                hidden,
                hidden_activations.len()
            )));
        }
        Ok(MlpSpec {
            layer_dims,
            hidden_activations,
        })
    }

    /// All hidden layers share one activation.
    pub fn uniform(layer_dims: Vec<usize>, activation: Activation) -> Result<Self> {
        let hidden = layer_dims.len().saturating_sub(2);
        MlpSpec::new(layer_dims, vec![activation; hidden])
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.layer_dims.len() - 1
    }

    /// Activation applied after layer `l` (Identity for the final layer).
    pub fn activation(&self, l: usize) -> Activation {
        if l + 1 == self.num_layers() {
            Activation::Identity
        } else {
            self.hidden_activations[l]
        }
    }

    /// Trainable scalar count: weights plus biases.
    pub fn num_params(&self) -> usize {
        (0..self.num_layers())
            .map(|l| self.layer_dims[l] * self.layer_dims[l + 1] + self.layer_dims[l + 1])
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// [out x in]
    pub weight: Tensor2D,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layers: Vec<DenseLayer>,
}

impl MlpParams {
    /// Seeded init: weights ~ N(0, 1/in), biases zero.
    pub fn init(spec: &MlpSpec, seed: u64) -> Self {
        let mut rng = Rng::stream(seed, &[0x6d6c_7069]);
        let layers = (0..spec.num_layers())
            .map(|l| {
                let (d_in, d_out) = (spec.layer_dims[l], spec.layer_dims[l + 1]);
                DenseLayer {
                    weight: Tensor2D::randn(d_out, d_in, 1.0 / (d_in as f64).sqrt(), &mut rng),
                    bias: vec![0.0; d_out],
                }
            })
            .collect();
        MlpParams { layers }
    }

    pub fn zeros(spec: &MlpSpec) -> Self {
        let layers = (0..spec.num_layers())
            .map(|l| DenseLayer {
                weight: Tensor2D::zeros(spec.layer_dims[l + 1], spec.layer_dims[l]),
                bias: vec![0.0; spec.layer_dims[l + 1]],
            })
            .collect();
        MlpParams { layers }
    }

    pub fn matches(&self, spec: &MlpSpec) -> bool {
        self.layers.len() == spec.num_layers()
            && self.layers.iter().enumerate().all(|(l, layer)| {
                layer.weight.rows() == spec.layer_dims[l + 1]
                    && layer.weight.cols() == spec.layer_dims[l]
                    && layer.bias.len() == spec.layer_dims[l + 1]
            })
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.data().len() + l.bias.len())
            .sum()
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for layer in &self.layers {
            out.extend_from_slice(layer.weight.data());
            out.extend_from_slice(&layer.bias);
        }
        out
    }

    /// Overwrites the parameters from a flat vector laid out like `flatten`.
    pub fn assign_from_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::dimension(
                "assign_from_flat",
                format!("expected {} values, got {}", self.num_params(), flat.len()),
            ));
        }
        let mut offset = 0;
        for layer in &mut self.layers {
            let w = layer.weight.data_mut();
            w.copy_from_slice(&flat[offset..offset + w.len()]);
            offset += w.len();
            let blen = layer.bias.len();
            layer.bias.copy_from_slice(&flat[offset..offset + blen]);
            offset += blen;
        }
        Ok(())
    }

    pub fn add_scaled(&mut self, other: &MlpParams, scale: f64) -> Result<()> {
        if self.layers.len() != other.layers.len() {
            return Err(Error::dimension("add_scaled", "layer count mismatch"));
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.weight.data_mut().iter_mut().zip(b.weight.data()) {
                *x += scale * y;
            }
            for (x, y) in a.bias.iter_mut().zip(&b.bias) {
                *x += scale * y;
            }
        }
        Ok(())
    }

    pub fn check_finite(&self, context: &str) -> Result<()> {
        for (l, layer) in self.layers.iter().enumerate() {
            layer
                .weight
                .check_finite(&format!("{context} layer {l} weight"))?;
            if layer.bias.iter().any(|v| !v.is_finite()) {
                return Err(Error::numeric(
                    context,
                    format!("layer {l} bias non-finite"),
                ));
            }
        }
        Ok(())
    }
}

/// Per-layer intermediates kept for the backward pass.
#[derive(Debug, Clone)]
pub struct MlpCache {
    /// Input to each layer (cache.inputs[0] is the batch).
    inputs: Vec<Tensor2D>,
    /// Pre-activation of each layer.
    pre_activations: Vec<Tensor2D>,
}

impl MlpCache {
    pub fn output(&self) -> &Tensor2D {
        self.inputs.last().unwrap()
    }
}

fn check_shapes(spec: &MlpSpec, params: &MlpParams, batch: &Tensor2D) -> Result<()> {
    if !params.matches(spec) {
        return Err(Error::dimension("mlp", "params do not match spec shapes"));
    }
    if batch.cols() != spec.input_dim() {
        return Err(Error::dimension(
            "mlp layer 0",
            format!(
                "batch has {} columns but layer 0 expects {}",
                batch.cols(),
                spec.input_dim()
            ),
        ));
    }
    Ok(())
}

/// Forward pass keeping the intermediates needed by the backward pass.
pub fn mlp_forward_cached(
    spec: &MlpSpec,
    params: &MlpParams,
    batch: &Tensor2D,
) -> Result<MlpCache> {
    check_shapes(spec, params, batch)?;
    let mut inputs = Vec::with_capacity(spec.num_layers() + 1);
    let mut pre_activations = Vec::with_capacity(spec.num_layers());
    inputs.push(batch.clone());
    for l in 0..spec.num_layers() {
        let layer = &params.layers[l];
        // One transpose per layer call keeps the product on the faster
        // row-major kernel.
        let mut z = inputs[l].matmul(&layer.weight.transpose()).map_err(|_| {
            Error::dimension(
                format!("mlp layer {l}"),
                format!(
                    "input width {} does not match weight [{}x{}]",
                    inputs[l].cols(),
                    layer.weight.rows(),
                    layer.weight.cols()
                ),
            )
        })?;
        for r in 0..z.rows() {
            for (v, b) in z.row_mut(r).iter_mut().zip(&layer.bias) {
                *v += b;
            }
        }
        let act = spec.activation(l);
        let mut a = z.clone();
        if act != Activation::Identity {
            for v in a.data_mut() {
                *v = act.apply(*v);
            }
        }
        pre_activations.push(z);
        inputs.push(a);
    }
    Ok(MlpCache {
        inputs,
        pre_activations,
    })
}

/// Deterministic forward pass: [N x d_in] -> [N x d_out].
pub fn mlp_forward(spec: &MlpSpec, params: &MlpParams, batch: &Tensor2D) -> Result<Tensor2D> {
    Ok(mlp_forward_cached(spec, params, batch)?.output().clone())
}

/// Backward pass from cached intermediates. Returns parameter gradients
/// (MlpParams-shaped) and the gradient with respect to the batch.
pub fn mlp_backward_cached(
    spec: &MlpSpec,
    params: &MlpParams,
    cache: &MlpCache,
    upstream: &Tensor2D,
) -> Result<(MlpParams, Tensor2D)> {
    let out = cache.output();
    if upstream.rows() != out.rows() || upstream.cols() != out.cols() {
        return Err(Error::dimension(
            "mlp_backward",
            format!(
                "upstream {}x{} does not match output {}x{}",
                upstream.rows(),
                upstream.cols(),
                out.rows(),
                out.cols()
            ),
        ));
    }
    let mut grads = MlpParams::zeros(spec);
    let mut grad_out = upstream.clone();
    for l in (0..spec.num_layers()).rev() {
        let act = spec.activation(l);
        // dL/dz = dL/da * act'(z)
        let mut grad_z = grad_out;
        if act != Activation::Identity {
            let z = &cache.pre_activations[l];
            for (g, &zv) in grad_z.data_mut().iter_mut().zip(z.data()) {
                *g *= act.derivative(zv);
            }
        }
        // dW = grad_z^T * input, db = column sums of grad_z.
        let layer_grad = grad_z.matmul_transpose_a(&cache.inputs[l])?;
        grads.layers[l].weight = layer_grad;
        let mut db = vec![0.0; grad_z.cols()];
        for r in 0..grad_z.rows() {
            for (d, &g) in db.iter_mut().zip(grad_z.row(r)) {
                *d += g;
            }
        }
        grads.layers[l].bias = db;
        // dL/d input = grad_z * W.
        grad_out = grad_z.matmul(&params.layers[l].weight)?;
    }
    Ok((grads, grad_out))
}

/// Reverse-mode gradients of the affine/activation chain given the upstream
/// gradient of the output. Recomputes the forward intermediates.
pub fn mlp_backward(
    spec: &MlpSpec,
    params: &MlpParams,
    batch: &Tensor2D,
    upstream: &Tensor2D,
) -> Result<(MlpParams, Tensor2D)> {
    let cache = mlp_forward_cached(spec, params, batch)?;
    mlp_backward_cached(spec, params, &cache, upstream)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_net_is_identity() {
        let spec = MlpSpec::uniform(vec![2, 2], Activation::Identity).unwrap();
        let mut params = MlpParams::zeros(&spec);
        params.layers[0].weight = Tensor2D::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let batch = Tensor2D::new(1, 2, vec![3.0, -1.0]).unwrap();
        let out = mlp_forward(&spec, &params, &batch).unwrap();
        assert_eq!(out.data(), &[3.0, -1.0]);
    }

    #[test]
    fn single_layer_matches_hand_multiply() {
        let spec = MlpSpec::uniform(vec![2, 2], Activation::Relu).unwrap();
        let mut params = MlpParams::zeros(&spec);
        params.layers[0].weight = Tensor2D::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let batch = Tensor2D::new(1, 2, vec![1.0, 1.0]).unwrap();
        let out = mlp_forward(&spec, &params, &batch).unwrap();
        assert_eq!(out.data(), &[3.0, 7.0]);
    }

    #[test]
    fn zero_weights_surface_the_bias() {
        let spec = MlpSpec::uniform(vec![3, 2], Activation::Identity).unwrap();
        let mut params = MlpParams::zeros(&spec);
        params.layers[0].bias = vec![0.5, -2.0];
        let batch = Tensor2D::new(4, 3, vec![1.0; 12]).unwrap();
        let out = mlp_forward(&spec, &params, &batch).unwrap();
        for r in 0..4 {
            assert_eq!(out.row(r), &[0.5, -2.0]);
        }
    }

    #[test]
    fn forward_rejects_width_mismatch_naming_layer() {
        let spec = MlpSpec::uniform(vec![3, 2], Activation::Identity).unwrap();
        let params = MlpParams::init(&spec, 0);
        let batch = Tensor2D::new(1, 2, vec![1.0, 1.0]).unwrap();
        let err = mlp_forward(&spec, &params, &batch).unwrap_err();
        assert!(err.to_string().contains("layer 0"), "{err}");
    }

    #[test]
    fn linear_layer_backward_matches_calculus() {
        // Single identity layer: dW = G^T * batch, d input = G * W.
        let spec = MlpSpec::uniform(vec![3, 2], Activation::Identity).unwrap();
        let mut rng = Rng::new(2);
        let params = MlpParams::init(&spec, 1);
        let batch = Tensor2D::randn(4, 3, 1.0, &mut rng);
        let upstream = Tensor2D::randn(4, 2, 1.0, &mut rng);
        let (grads, input_grad) = mlp_backward(&spec, &params, &batch, &upstream).unwrap();

        let expected_w = upstream.matmul_transpose_a(&batch).unwrap();
        for (a, b) in grads.layers[0].weight.data().iter().zip(expected_w.data()) {
            assert!((a - b).abs() < 1e-12);
        }
        let expected_in = upstream.matmul(&params.layers[0].weight).unwrap();
        for (a, b) in input_grad.data().iter().zip(expected_in.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn relu_blocks_gradient_at_negative_preactivation() {
        let spec = MlpSpec::uniform(vec![1, 1, 1], Activation::Relu).unwrap();
        let mut params = MlpParams::zeros(&spec);
        params.layers[0].weight = Tensor2D::new(1, 1, vec![1.0]).unwrap();
        params.layers[0].bias = vec![-5.0]; // pre-activation -4 for input 1
        params.layers[1].weight = Tensor2D::new(1, 1, vec![1.0]).unwrap();
        let batch = Tensor2D::new(1, 1, vec![1.0]).unwrap();
        let upstream = Tensor2D::new(1, 1, vec![1.0]).unwrap();
        let (grads, input_grad) = mlp_backward(&spec, &params, &batch, &upstream).unwrap();
        assert_eq!(grads.layers[0].weight.data(), &[0.0]);
        assert_eq!(input_grad.data(), &[0.0]);
    }

    #[test]
    fn flatten_assign_round_trip() {
        let spec = MlpSpec::uniform(vec![3, 5, 2], Activation::Tanh).unwrap();
        let params = MlpParams::init(&spec, 42);
        let flat = params.flatten();
        assert_eq!(flat.len(), spec.num_params());
        let mut other = MlpParams::zeros(&spec);
        other.assign_from_flat(&flat).unwrap();
        assert_eq!(other, params);
    }
}
