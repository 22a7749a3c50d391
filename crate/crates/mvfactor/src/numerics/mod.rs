//! Deterministic dense-matrix math, a fixed-architecture MLP with exact
//! reverse-mode gradients, the Adam optimizer, and a finite-difference
//! gradient checker. Everything is double precision and single threaded;
//! identical inputs produce bit-identical outputs.

mod adam;
mod gradcheck;
mod mlp;
mod tensor;

pub use adam::{adam_step, AdamHyper, AdamState};
pub use gradcheck::{grad_check, grad_check_flat};
pub use mlp::{
    mlp_backward, mlp_backward_cached, mlp_forward, mlp_forward_cached, Activation, DenseLayer,
    MlpCache, MlpParams, MlpSpec,
};
pub use tensor::{cholesky, dot, log_det_spd, log_sum_exp, solve_spd, Tensor2D};
