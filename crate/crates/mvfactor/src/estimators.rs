//! Trainable mutual-information bound estimators.
//!
//! Two families, each backed by a critic MLP that scores concatenated
//! embeddings:
//!
//! - A noise-contrastive lower bound: in-batch positives on the diagonal,
//!   the other rows as negatives,
//!   `(1/N) sum_i [ f(a_i, b_i) - log((1/N) sum_j exp f(a_i, b_j)) ]`.
//!   Its algebraic ceiling is `ln N`.
//! - A score-difference upper bound: positive pairs minus shuffled
//!   negatives, `(1/N) sum_i f(a_i, b_i) - (1/N) sum_i f(a_i, b_pi(i))`
//!   with `pi` a seeded derangement (one sampled negative per anchor). A
//!   full-pairwise negative average is available for sensitivity checks.
//!
//! The conditional variants concatenate a conditioning vector taken from
//! the anchor row; negatives reuse the anchor's conditioning. All
//! estimators are differentiable: the `*_with_grads` forms return exact
//! reverse-mode gradients with respect to the critic parameters and every
//! input embedding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    log_sum_exp, mlp_backward_cached, mlp_forward, mlp_forward_cached, Activation, MlpParams,
    MlpSpec, Tensor2D,
};
use crate::rng::Rng;

/// Scalar scoring function over concatenated embeddings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Critic {
    pub spec: MlpSpec,
    pub params: MlpParams,
}

impl Critic {
    pub fn new(spec: MlpSpec, params: MlpParams) -> Result<Self> {
        if spec.output_dim() != 1 {
            return Err(Error::Input(format!(
                "critic output width must be 1, got {}",
                spec.output_dim()
            )));
        }
        if !params.matches(&spec) {
            return Err(Error::dimension("Critic::new", "params do not match spec"));
        }
        Ok(Critic { spec, params })
    }

    /// Default architecture: 2-layer MLP, hidden width 4x the input, ReLU.
    pub fn with_default_arch(input_width: usize, seed: u64) -> Result<Self> {
        Critic::with_hidden(input_width, 4 * input_width, seed)
    }

    pub fn with_hidden(input_width: usize, hidden: usize, seed: u64) -> Result<Self> {
        let spec = MlpSpec::uniform(vec![input_width, hidden, 1], Activation::Relu)?;
        let params = MlpParams::init(&spec, seed);
        Critic::new(spec, params)
    }

    /// Critic that scores every input as the constant `c`.
    pub fn constant(input_width: usize, c: f64) -> Result<Self> {
        let spec = MlpSpec::uniform(vec![input_width, 1], Activation::Identity)?;
        let mut params = MlpParams::zeros(&spec);
        params.layers[0].bias = vec![c];
        Critic::new(spec, params)
    }

    pub fn input_width(&self) -> usize {
        self.spec.input_dim()
    }

    pub fn num_params(&self) -> usize {
        self.spec.num_params()
    }

    /// Scores one row batch: [R x input_width] -> R scores.
    pub fn score_batch(&self, rows: &Tensor2D) -> Result<Vec<f64>> {
        let out = mlp_forward(&self.spec, &self.params, rows)?;
        Ok(out.data().to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateKind {
    NceLower,
    ClubUpper,
}

/// One estimator evaluation, in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    pub value: f64,
    pub kind: EstimateKind,
    pub batch_size: usize,
}

impl MiEstimate {
    fn nce(value: f64, batch_size: usize) -> Self {
        // Hard algebraic bound of the log-softmax form.
        let ceiling = (batch_size as f64).ln();
        assert!(
            value <= ceiling + 1e-9,
            "noise-contrastive estimate {value} exceeds its ln N ceiling {ceiling}"
        );
        MiEstimate {
            value,
            kind: EstimateKind::NceLower,
            batch_size,
        }
    }

    fn club(value: f64, batch_size: usize) -> Self {
        MiEstimate {
            value,
            kind: EstimateKind::ClubUpper,
            batch_size,
        }
    }
}

/// Gradients of an estimate with respect to the critic parameters and each
/// input block.
#[derive(Debug, Clone)]
pub struct EstimatorGrads {
    pub critic: MlpParams,
    pub z_a: Tensor2D,
    pub z_b: Tensor2D,
    pub cond: Option<Tensor2D>,
}

/// Negative-pairing policy for the upper-bound estimator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum NegativeShuffle {
    /// Seeded derangement of 0..N.
    Seeded(u64),
    /// Explicit permutation; must be fixed-point free.
    Explicit(Vec<usize>),
}

impl NegativeShuffle {
    pub fn permutation(&self, n: usize) -> Result<Vec<usize>> {
        match self {
            NegativeShuffle::Seeded(seed) => Rng::stream(*seed, &[0x7368_7566]).derangement(n),
            NegativeShuffle::Explicit(p) => {
                if p.len() != n {
                    return Err(Error::Input(format!(
                        "explicit shuffle has length {}, batch has {n}",
                        p.len()
                    )));
                }
                let mut seen = vec![false; n];
                for (i, &pi) in p.iter().enumerate() {
                    if pi >= n || seen[pi] {
                        return Err(Error::Input("explicit shuffle is not a permutation".into()));
                    }
                    if pi == i {
                        return Err(Error::Input(format!(
                            "explicit shuffle has a fixed point at {i}"
                        )));
                    }
                    seen[pi] = true;
                }
                Ok(p.clone())
            }
        }
    }
}

struct PairLayout {
    n: usize,
    dim_a: usize,
    dim_b: usize,
    dim_cond: usize,
}

fn check_inputs(
    z_a: &Tensor2D,
    z_b: &Tensor2D,
    cond: Option<&Tensor2D>,
    critic: &Critic,
    op: &str,
) -> Result<PairLayout> {
    let n = z_a.rows();
    if n < 2 {
        return Err(Error::Estimator(format!(
            "{op} needs a batch of at least 2 rows (no negatives otherwise), got {n}"
        )));
    }
    if z_b.rows() != n || cond.is_some_and(|c| c.rows() != n) {
        return Err(Error::dimension(
            op,
            "inputs must share the batch dimension",
        ));
    }
    let dim_cond = cond.map_or(0, Tensor2D::cols);
    let width = z_a.cols() + z_b.cols() + dim_cond;
    if critic.input_width() != width {
        return Err(Error::dimension(
            op,
            format!(
                "critic expects width {}, inputs concatenate to {width}",
                critic.input_width()
            ),
        ));
    }
    Ok(PairLayout {
        n,
        dim_a: z_a.cols(),
        dim_b: z_b.cols(),
        dim_cond,
    })
}

/// Rows (i, j) for i in 0..n, j in 0..n: [a_i | b_j | cond_i].
fn build_full_pair_batch(
    z_a: &Tensor2D,
    z_b: &Tensor2D,
    cond: Option<&Tensor2D>,
    layout: &PairLayout,
) -> Tensor2D {
    let width = layout.dim_a + layout.dim_b + layout.dim_cond;
    let mut batch = Tensor2D::zeros(layout.n * layout.n, width);
    for i in 0..layout.n {
        for j in 0..layout.n {
            let row = batch.row_mut(i * layout.n + j);
            row[..layout.dim_a].copy_from_slice(z_a.row(i));
            row[layout.dim_a..layout.dim_a + layout.dim_b].copy_from_slice(z_b.row(j));
            if let Some(c) = cond {
                row[layout.dim_a + layout.dim_b..].copy_from_slice(c.row(i));
            }
        }
    }
    batch
}

/// Rows [a_i | b_pairing(i) | cond_i] for one pairing per anchor.
fn build_paired_batch(
    z_a: &Tensor2D,
    z_b: &Tensor2D,
    cond: Option<&Tensor2D>,
    layout: &PairLayout,
    pairing: impl Fn(usize) -> usize,
) -> Tensor2D {
    let width = layout.dim_a + layout.dim_b + layout.dim_cond;
    let mut batch = Tensor2D::zeros(layout.n, width);
    for i in 0..layout.n {
        let row = batch.row_mut(i);
        row[..layout.dim_a].copy_from_slice(z_a.row(i));
        row[layout.dim_a..layout.dim_a + layout.dim_b].copy_from_slice(z_b.row(pairing(i)));
        if let Some(c) = cond {
            row[layout.dim_a + layout.dim_b..].copy_from_slice(c.row(i));
        }
    }
    batch
}

fn nce_core(
    z_a: &Tensor2D,
    z_b: &Tensor2D,
    cond: Option<&Tensor2D>,
    critic: &Critic,
    want_grads: bool,
    op: &str,
) -> Result<(MiEstimate, Option<EstimatorGrads>)> {
    let layout = check_inputs(z_a, z_b, cond, critic, op)?;
    let n = layout.n;
    let batch = build_full_pair_batch(z_a, z_b, cond, &layout);
    let cache = mlp_forward_cached(&critic.spec, &critic.params, &batch)?;
    let scores = cache.output();

    let ln_n = (n as f64).ln();
    let mut value = 0.0;
    let mut row_lse = vec![0.0; n];
    for i in 0..n {
        let row: Vec<f64> = (0..n).map(|j| scores.get(i * n + j, 0)).collect();
        let lse = log_sum_exp(&row);
        row_lse[i] = lse;
        value += row[i] - lse;
    }
    value = value / n as f64 + ln_n;
    let estimate = MiEstimate::nce(value, n);

    if !want_grads {
        return Ok((estimate, None));
    }

    // dE/dS_ij = (1/N) (delta_ij - softmax_j(S_i.)).
    let mut upstream = Tensor2D::zeros(n * n, 1);
    let inv_n = 1.0 / n as f64;
    for i in 0..n {
        for j in 0..n {
            let p = (scores.get(i * n + j, 0) - row_lse[i]).exp();
            let delta = if i == j { 1.0 } else { 0.0 };
            upstream.set(i * n + j, 0, inv_n * (delta - p));
        }
    }
    let (critic_grads, input_grad) =
        mlp_backward_cached(&critic.spec, &critic.params, &cache, &upstream)?;
    let mut g_a = Tensor2D::zeros(n, layout.dim_a);
    let mut g_b = Tensor2D::zeros(n, layout.dim_b);
    let mut g_c = cond.map(|c| Tensor2D::zeros(n, c.cols()));
    for i in 0..n {
        for j in 0..n {
            let row = input_grad.row(i * n + j);
            for (g, &v) in g_a.row_mut(i).iter_mut().zip(&row[..layout.dim_a]) {
                *g += v;
            }
            for (g, &v) in g_b
                .row_mut(j)
                .iter_mut()
                .zip(&row[layout.dim_a..layout.dim_a + layout.dim_b])
            {
                *g += v;
            }
            if let Some(gc) = g_c.as_mut() {
                for (g, &v) in gc
                    .row_mut(i)
                    .iter_mut()
                    .zip(&row[layout.dim_a + layout.dim_b..])
                {
                    *g += v;
                }
            }
        }
    }
    Ok((
        estimate,
        Some(EstimatorGrads {
            critic: critic_grads,
            z_a: g_a,
            z_b: g_b,
            cond: g_c,
        }),
    ))
}

fn club_core(
    z_a: &Tensor2D,
    z_b: &Tensor2D,
    cond: Option<&Tensor2D>,
    critic: &Critic,
    shuffle: &NegativeShuffle,
    want_grads: bool,
    op: &str,
) -> Result<(MiEstimate, Option<EstimatorGrads>)> {
    let layout = check_inputs(z_a, z_b, cond, critic, op)?;
    let n = layout.n;
    let pi = shuffle.permutation(n)?;
    // First n rows positives (i, i), last n rows negatives (i, pi(i)).
    let pos = build_paired_batch(z_a, z_b, cond, &layout, |i| i);
    let neg = build_paired_batch(z_a, z_b, cond, &layout, |i| pi[i]);
    let mut rows = Vec::with_capacity(2 * n);
    for i in 0..n {
        rows.push(pos.row(i).to_vec());
    }
    for i in 0..n {
        rows.push(neg.row(i).to_vec());
    }
    let batch = Tensor2D::from_rows(&rows)?;
    let cache = mlp_forward_cached(&critic.spec, &critic.params, &batch)?;
    let scores = cache.output();

    let inv_n = 1.0 / n as f64;
    let mut value = 0.0;
    for i in 0..n {
        value += scores.get(i, 0) - scores.get(n + i, 0);
    }
    value *= inv_n;
    let estimate = MiEstimate::club(value, n);

    if !want_grads {
        return Ok((estimate, None));
    }

    let mut upstream = Tensor2D::zeros(2 * n, 1);
    for i in 0..n {
        upstream.set(i, 0, inv_n);
        upstream.set(n + i, 0, -inv_n);
    }
    let (critic_grads, input_grad) =
        mlp_backward_cached(&critic.spec, &critic.params, &cache, &upstream)?;
    let mut g_a = Tensor2D::zeros(n, layout.dim_a);
    let mut g_b = Tensor2D::zeros(n, layout.dim_b);
    let mut g_c = cond.map(|c| Tensor2D::zeros(n, c.cols()));
    for i in 0..n {
        for (row_idx, b_target) in [(i, i), (n + i, pi[i])] {
            let row = input_grad.row(row_idx);
            for (g, &v) in g_a.row_mut(i).iter_mut().zip(&row[..layout.dim_a]) {
                *g += v;
            }
            for (g, &v) in g_b
                .row_mut(b_target)
                .iter_mut()
                .zip(&row[layout.dim_a..layout.dim_a + layout.dim_b])
            {
                *g += v;
            }
            if let Some(gc) = g_c.as_mut() {
                for (g, &v) in gc
                    .row_mut(i)
                    .iter_mut()
                    .zip(&row[layout.dim_a + layout.dim_b..])
                {
                    *g += v;
                }
            }
        }
    }
    Ok((
        estimate,
        Some(EstimatorGrads {
            critic: critic_grads,
            z_a: g_a,
            z_b: g_b,
            cond: g_c,
        }),
    ))
}

/// Noise-contrastive lower-bound estimate with in-batch negatives.
pub fn info_nce(z_a: &Tensor2D, z_b: &Tensor2D, critic: &Critic) -> Result<MiEstimate> {
    nce_core(z_a, z_b, None, critic, false, "info_nce").map(|(e, _)| e)
}

pub fn info_nce_with_grads(
    z_a: &Tensor2D,
    z_b: &Tensor2D,
    critic: &Critic,
) -> Result<(MiEstimate, EstimatorGrads)> {
    nce_core(z_a, z_b, None, critic, true, "info_nce").map(|(e, g)| (e, g.unwrap()))
}

/// Conditional lower bound: scores f(a_i, b_j, cond_i); negatives reuse the
/// anchor's conditioning row.
pub fn conditional_info_nce(
    z_a: &Tensor2D,
    z_b: &Tensor2D,
    cond: &Tensor2D,
    critic: &Critic,
) -> Result<MiEstimate> {
    nce_core(z_a, z_b, Some(cond), critic, false, "conditional_info_nce").map(|(e, _)| e)
}

pub fn conditional_info_nce_with_grads(
    z_a: &Tensor2D,
    z_b: &Tensor2D,
    cond: &Tensor2D,
    critic: &Critic,
) -> Result<(MiEstimate, EstimatorGrads)> {
    nce_core(z_a, z_b, Some(cond), critic, true, "conditional_info_nce")
        .map(|(e, g)| (e, g.unwrap()))
}

/// Score-difference upper-bound estimate with one shuffled negative per
/// anchor.
pub fn club(
    z_a: &Tensor2D,
    z_b: &Tensor2D,
    critic: &Critic,
    shuffle: &NegativeShuffle,
) -> Result<MiEstimate> {
    club_core(z_a, z_b, None, critic, shuffle, false, "club").map(|(e, _)| e)
}

pub fn club_with_grads(
    z_a: &Tensor2D,
    z_b: &Tensor2D,
    critic: &Critic,
    shuffle: &NegativeShuffle,
) -> Result<(MiEstimate, EstimatorGrads)> {
    club_core(z_a, z_b, None, critic, shuffle, true, "club").map(|(e, g)| (e, g.unwrap()))
}

/// Conditional upper bound: the positive term scores (a_i, b_i, cond_i);
/// the negative term shuffles only b while keeping (a_i, cond_i).
pub fn conditional_club(
    z_a: &Tensor2D,
    z_b: &Tensor2D,
    cond: &Tensor2D,
    critic: &Critic,
    shuffle: &NegativeShuffle,
) -> Result<MiEstimate> {
    club_core(
        z_a,
        z_b,
        Some(cond),
        critic,
        shuffle,
        false,
        "conditional_club",
    )
    .map(|(e, _)| e)
}

pub fn conditional_club_with_grads(
    z_a: &Tensor2D,
    z_b: &Tensor2D,
    cond: &Tensor2D,
    critic: &Critic,
    shuffle: &NegativeShuffle,
) -> Result<(MiEstimate, EstimatorGrads)> {
    club_core(
        z_a,
        z_b,
        Some(cond),
        critic,
        shuffle,
        true,
        "conditional_club",
    )
    .map(|(e, g)| (e, g.unwrap()))
}

fn club_full_core(
    z_a: &Tensor2D,
    z_b: &Tensor2D,
    cond: Option<&Tensor2D>,
    critic: &Critic,
    want_grads: bool,
) -> Result<(MiEstimate, Option<EstimatorGrads>)> {
    let layout = check_inputs(z_a, z_b, cond, critic, "club_full")?;
    let n = layout.n;
    let batch = build_full_pair_batch(z_a, z_b, cond, &layout);
    let cache = mlp_forward_cached(&critic.spec, &critic.params, &batch)?;
    let scores = cache.output();
    let mut pos = 0.0;
    let mut neg = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                pos += scores.get(i * n + j, 0);
            } else {
                neg += scores.get(i * n + j, 0);
            }
        }
    }
    pos /= n as f64;
    neg /= (n * (n - 1)) as f64;
    let estimate = MiEstimate::club(pos - neg, n);
    if !want_grads {
        return Ok((estimate, None));
    }

    let w_pos = 1.0 / n as f64;
    let w_neg = -1.0 / (n * (n - 1)) as f64;
    let mut upstream = Tensor2D::zeros(n * n, 1);
    for i in 0..n {
        for j in 0..n {
            upstream.set(i * n + j, 0, if i == j { w_pos } else { w_neg });
        }
    }
    let (critic_grads, input_grad) =
        mlp_backward_cached(&critic.spec, &critic.params, &cache, &upstream)?;
    let mut g_a = Tensor2D::zeros(n, layout.dim_a);
    let mut g_b = Tensor2D::zeros(n, layout.dim_b);
    let mut g_c = cond.map(|c| Tensor2D::zeros(n, c.cols()));
    for i in 0..n {
        for j in 0..n {
            let row = input_grad.row(i * n + j);
            for (g, &v) in g_a.row_mut(i).iter_mut().zip(&row[..layout.dim_a]) {
                *g += v;
            }
            for (g, &v) in g_b
                .row_mut(j)
                .iter_mut()
                .zip(&row[layout.dim_a..layout.dim_a + layout.dim_b])
            {
                *g += v;
            }
            if let Some(gc) = g_c.as_mut() {
                for (g, &v) in gc
                    .row_mut(i)
                    .iter_mut()
                    .zip(&row[layout.dim_a + layout.dim_b..])
                {
                    *g += v;
                }
            }
        }
    }
    Ok((
        estimate,
        Some(EstimatorGrads {
            critic: critic_grads,
            z_a: g_a,
            z_b: g_b,
            cond: g_c,
        }),
    ))
}

/// Full-pairwise variant of the upper bound: the negative term averages the
/// critic over all off-diagonal pairs instead of one sampled negative per
/// anchor. Exposed for sensitivity checks against the sampled form.
pub fn club_full(z_a: &Tensor2D, z_b: &Tensor2D, critic: &Critic) -> Result<MiEstimate> {
    club_full_core(z_a, z_b, None, critic, false).map(|(e, _)| e)
}

pub fn club_full_with_grads(
    z_a: &Tensor2D,
    z_b: &Tensor2D,
    critic: &Critic,
) -> Result<(MiEstimate, EstimatorGrads)> {
    club_full_core(z_a, z_b, None, critic, true).map(|(e, g)| (e, g.unwrap()))
}

pub fn conditional_club_full(
    z_a: &Tensor2D,
    z_b: &Tensor2D,
    cond: &Tensor2D,
    critic: &Critic,
) -> Result<MiEstimate> {
    club_full_core(z_a, z_b, Some(cond), critic, false).map(|(e, _)| e)
}

pub fn conditional_club_full_with_grads(
    z_a: &Tensor2D,
    z_b: &Tensor2D,
    cond: &Tensor2D,
    critic: &Critic,
) -> Result<(MiEstimate, EstimatorGrads)> {
    club_full_core(z_a, z_b, Some(cond), critic, true).map(|(e, g)| (e, g.unwrap()))
}

/// Negative-sampling policy for the upper-bound estimator inside training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClubMode {
    /// One seeded-derangement negative per anchor.
    #[default]
    Sampled,
    /// Average over all off-diagonal pairs.
    FullPairwise,
}

/// Trains a critic to maximize the noise-contrastive bound with Adam,
/// drawing a fresh batch from `sampler` each step. `sampler(step)` returns
/// (z_a, z_b, optional conditioning).
pub fn fit_critic_nce<S>(critic: &mut Critic, mut sampler: S, steps: usize, lr: f64) -> Result<()>
where
    S: FnMut(usize) -> Result<(Tensor2D, Tensor2D, Option<Tensor2D>)>,
{
    use crate::numerics::{adam_step, AdamHyper, AdamState};
    let mut state = AdamState::new(&critic.spec, AdamHyper::with_lr(lr));
    for step in 0..steps {
        let (z_a, z_b, cond) = sampler(step)?;
        let (_, grads) = match cond.as_ref() {
            None => info_nce_with_grads(&z_a, &z_b, critic)?,
            Some(c) => conditional_info_nce_with_grads(&z_a, &z_b, c, critic)?,
        };
        // Maximize the bound: descend on its negation.
        let mut neg = grads.critic;
        for layer in &mut neg.layers {
            layer.weight.scale_in_place(-1.0);
            for b in &mut layer.bias {
                *b = -*b;
            }
        }
        adam_step(&mut critic.params, &neg, &mut state)?;
    }
    Ok(())
}
