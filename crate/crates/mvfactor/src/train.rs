//! Two-stage training: intra-view pretraining per modality, then joint
//! inter-view training under a chosen objective scheme.
//!
//! The joint stage minimizes `alpha * L_intra - sum_o V_o` where each `V_o`
//! is an objective's information value; a single optimizer with one
//! learning rate updates every encoder and critic together. Per-objective
//! loss contributions are logged each epoch. Everything is seeded: the same
//! dataset and config reproduce a bit-identical model, traces, and
//! embeddings.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::augment::{augment_counts, augment_features, AugmentSpec};
use crate::error::{Error, Result};
use crate::estimators::{ClubMode, Critic};
use crate::numerics::{
    adam_step, mlp_backward_cached, mlp_forward, mlp_forward_cached, Activation, AdamHyper,
    AdamState, MlpParams, MlpSpec, Tensor2D,
};
use crate::objectives::{
    assemble, evaluate_objective_terms, instantiate_critics, intra_loss_with_grads, AssemblyGrads,
    ObjectiveLossTerms, Scheme, SchemeAssembly,
};
use crate::rng::{mix, Rng};
use crate::synth::{matrix_from_csv, matrix_to_csv, SyntheticRegionDataset};

const ENCODER_INIT: u64 = 0x656e_6300;
const CRITIC_INIT: u64 = 0x6372_6900;
const PRETRAIN_SHUFFLE: u64 = 0x7072_6500;
const JOINT_SHUFFLE: u64 = 0x6a6e_7400;
const AUG_TAG: u64 = 0x6175_6700;
const CLUB_TAG: u64 = 0x636c_7500;

/// Standard deviation of the feature-noise augmentation applied to
/// real-valued modalities during training.
const TRAIN_FEATURE_SIGMA: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub scheme: Scheme,
    #[serde(default = "default_embed_dim")]
    pub embed_dim: usize,
    /// Hidden widths shared by every modality encoder
    /// (input -> hidden... -> embed_dim).
    #[serde(default = "default_encoder_hidden")]
    pub encoder_hidden: Vec<usize>,
    #[serde(default = "default_encoder_activation")]
    pub encoder_activation: Activation,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_pretrain_epochs")]
    pub pretrain_epochs: usize,
    #[serde(default = "default_joint_epochs")]
    pub joint_epochs: usize,
    /// Scale on the intra-view loss inside the joint objective.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Intra-view softmax temperature.
    #[serde(default = "default_tau")]
    pub tau: f64,
    pub seed: u64,
    /// Removes intra-view learning entirely (no pretraining, no joint
    /// intra term).
    #[serde(default)]
    pub disable_intra: bool,
    /// Removes the unique objectives from the joint stage.
    #[serde(default)]
    pub disable_unique: bool,
    #[serde(default)]
    pub club_mode: ClubMode,
    /// Overrides the critics' default 4x-input hidden width.
    #[serde(default)]
    pub critic_hidden: Option<usize>,
}

fn default_embed_dim() -> usize {
    32
}

fn default_encoder_hidden() -> Vec<usize> {
    vec![64]
}

fn default_encoder_activation() -> Activation {
    Activation::Relu
}

fn default_lr() -> f64 {
    1e-4
}

fn default_batch_size() -> usize {
    128
}

fn default_pretrain_epochs() -> usize {
    100
}

fn default_joint_epochs() -> usize {
    200
}

fn default_alpha() -> f64 {
    1.0
}

fn default_tau() -> f64 {
    0.07
}

impl TrainConfig {
    pub fn desk_default(scheme: Scheme, seed: u64) -> Self {
        TrainConfig {
            scheme,
            embed_dim: default_embed_dim(),
            encoder_hidden: default_encoder_hidden(),
            encoder_activation: default_encoder_activation(),
            lr: default_lr(),
            batch_size: default_batch_size(),
            pretrain_epochs: default_pretrain_epochs(),
            joint_epochs: default_joint_epochs(),
            alpha: default_alpha(),
            tau: default_tau(),
            seed,
            disable_intra: false,
            disable_unique: false,
            club_mode: ClubMode::Sampled,
            critic_hidden: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lr <= 0.0 {
            return Err(Error::Config(format!("lr must be > 0, got {}", self.lr)));
        }
        if self.embed_dim == 0 {
            return Err(Error::Config("embed_dim must be > 0".into()));
        }
        if self.batch_size < 2 {
            return Err(Error::Config("batch_size must be >= 2".into()));
        }
        if self.tau <= 0.0 {
            return Err(Error::Config(format!("tau must be > 0, got {}", self.tau)));
        }
        if self.alpha < 0.0 {
            return Err(Error::Config(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<TrainConfig> {
        let text = fs::read_to_string(path)?;
        let config: TrainConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    fn encoder_spec(&self, input_dim: usize) -> Result<MlpSpec> {
        let mut dims = vec![input_dim];
        dims.extend_from_slice(&self.encoder_hidden);
        dims.push(self.embed_dim);
        MlpSpec::uniform(dims, self.encoder_activation)
    }
}

/// Per-modality encoders.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderSet {
    pub specs: Vec<MlpSpec>,
    pub params: Vec<MlpParams>,
}

impl EncoderSet {
    fn seeded_init(dataset: &SyntheticRegionDataset, config: &TrainConfig) -> Result<EncoderSet> {
        let specs: Vec<MlpSpec> = dataset
            .modalities
            .iter()
            .map(|m| config.encoder_spec(m.cols()))
            .collect::<Result<_>>()?;
        let params = specs
            .iter()
            .enumerate()
            .map(|(i, spec)| MlpParams::init(spec, mix(config.seed, ENCODER_INIT ^ i as u64)))
            .collect();
        Ok(EncoderSet { specs, params })
    }
}

/// Pretraining result: encoders plus the per-modality mean intra loss per
/// epoch.
#[derive(Debug, Clone)]
pub struct PretrainOutcome {
    pub encoders: EncoderSet,
    pub loss_history: Vec<Vec<f64>>,
}

fn augment_row(features: &[f64], is_count: bool, seed: u64) -> Result<Vec<f64>> {
    if is_count {
        let counts: Vec<u64> = features
            .iter()
            .map(|&v| {
                if v < 0.0 || v.fract() != 0.0 {
                    return Err(Error::Input(format!(
                        "count modality holds non-count value {v}"
                    )));
                }
                Ok(v as u64)
            })
            .collect::<Result<_>>()?;
        let out = augment_counts(&counts, &AugmentSpec::count_perturb(seed))?;
        Ok(out.into_iter().map(|c| c as f64).collect())
    } else {
        augment_features(
            features,
            &AugmentSpec::feature_noise(TRAIN_FEATURE_SIGMA, seed),
        )
    }
}

/// Augmented copies of the selected rows of one modality.
fn augmented_batch(
    dataset: &SyntheticRegionDataset,
    modality: usize,
    rows: &[usize],
    phase: u64,
    epoch: usize,
    step: usize,
    seed: u64,
) -> Result<Tensor2D> {
    let source = &dataset.modalities[modality];
    let is_count = dataset.count_modality == Some(modality);
    let mut out = Tensor2D::zeros(rows.len(), source.cols());
    for (r, &idx) in rows.iter().enumerate() {
        let row_seed = [
            phase,
            modality as u64,
            epoch as u64,
            step as u64,
            idx as u64,
        ]
        .iter()
        .fold(mix(seed, AUG_TAG), |acc, &t| mix(acc, t));
        let augmented = augment_row(source.row(idx), is_count, row_seed)?;
        out.row_mut(r).copy_from_slice(&augmented);
    }
    Ok(out)
}

fn epoch_batches(
    n: usize,
    batch_size: usize,
    seed: u64,
    tag: u64,
    epoch: usize,
) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = Rng::stream(seed, &[tag, epoch as u64]);
    rng.shuffle(&mut order);
    // Last partial batch dropped for shape stability.
    order
        .chunks_exact(batch_size)
        .map(<[usize]>::to_vec)
        .collect()
}

/// Intra-view contrastive pretraining of each modality encoder
/// independently. With `disable_intra` or zero epochs this returns the
/// seeded random initialization unchanged.
pub fn pretrain_intra(
    dataset: &SyntheticRegionDataset,
    config: &TrainConfig,
) -> Result<PretrainOutcome> {
    config.validate()?;
    let n = dataset.num_regions();
    if n == 0 {
        return Err(Error::Input("pretrain on empty dataset".into()));
    }
    if config.batch_size > n {
        return Err(Error::Input(format!(
            "batch size {} exceeds dataset size {n}",
            config.batch_size
        )));
    }
    let mut encoders = EncoderSet::seeded_init(dataset, config)?;
    let m = dataset.num_modalities();
    let mut loss_history = vec![Vec::new(); m];
    if config.disable_intra || config.pretrain_epochs == 0 {
        return Ok(PretrainOutcome {
            encoders,
            loss_history,
        });
    }
    for i in 0..m {
        let spec = encoders.specs[i].clone();
        let mut state = AdamState::new(&spec, AdamHyper::with_lr(config.lr));
        for epoch in 0..config.pretrain_epochs {
            let batches = epoch_batches(
                n,
                config.batch_size,
                config.seed,
                PRETRAIN_SHUFFLE ^ i as u64,
                epoch,
            );
            let mut epoch_loss = 0.0;
            for (step, rows) in batches.iter().enumerate() {
                let x = dataset.modalities[i].select_rows(rows)?;
                let x_aug = augmented_batch(dataset, i, rows, 1, epoch, step, config.seed)?;
                let cache = mlp_forward_cached(&spec, &encoders.params[i], &x)?;
                let cache_aug = mlp_forward_cached(&spec, &encoders.params[i], &x_aug)?;
                let (loss, gz, gpos) =
                    intra_loss_with_grads(cache.output(), cache_aug.output(), config.tau)?;
                epoch_loss += loss;
                let (mut grads, _) = mlp_backward_cached(&spec, &encoders.params[i], &cache, &gz)?;
                let (grads_aug, _) =
                    mlp_backward_cached(&spec, &encoders.params[i], &cache_aug, &gpos)?;
                grads.add_scaled(&grads_aug, 1.0)?;
                adam_step(&mut encoders.params[i], &grads, &mut state)?;
            }
            loss_history[i].push(epoch_loss / batches.len().max(1) as f64);
        }
    }
    Ok(PretrainOutcome {
        encoders,
        loss_history,
    })
}

/// One epoch/objective loss reading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub epoch: usize,
    pub objective: String,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub config: TrainConfig,
    pub encoder_specs: Vec<MlpSpec>,
    pub encoders: Vec<MlpParams>,
    pub assembly: SchemeAssembly,
    pub critics: Vec<Critic>,
    pub traces: Vec<TraceRow>,
}

impl TrainedModel {
    pub fn objective_labels(&self) -> Vec<String> {
        self.assembly
            .objectives
            .iter()
            .map(|o| o.objective.label())
            .collect()
    }
}

fn abort_on_non_finite(
    value: f64,
    epoch: usize,
    objective: &ObjectiveLossTerms,
    term_label: &str,
) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NumericAbort {
            epoch,
            objective: objective.objective.label(),
            term: term_label.to_string(),
        })
    }
}

/// Joint inter-view training: minimizes the negated objective sum (plus
/// `alpha * L_intra` unless intra is disabled) with one Adam instance over
/// all encoders and critics. The unique objectives are removed when
/// `disable_unique` is set.
pub fn train_inter(
    encoders: EncoderSet,
    dataset: &SyntheticRegionDataset,
    config: &TrainConfig,
) -> Result<TrainedModel> {
    config.validate()?;
    let m = dataset.num_modalities();
    if encoders.specs.len() != m {
        return Err(Error::dimension(
            "train_inter",
            format!("{} encoders for {m} modalities", encoders.specs.len()),
        ));
    }
    let n = dataset.num_regions();
    if config.batch_size > n {
        return Err(Error::Input(format!(
            "batch size {} exceeds dataset size {n}",
            config.batch_size
        )));
    }
    let mut assembly = assemble(m, config.scheme)?;
    if config.disable_unique {
        assembly = assembly.without_unique();
    }
    let mut critics = instantiate_critics(
        &assembly,
        config.embed_dim,
        config.critic_hidden,
        mix(config.seed, CRITIC_INIT),
    )?;

    let mut encoders = encoders;
    let mut encoder_states: Vec<AdamState> = encoders
        .specs
        .iter()
        .map(|s| AdamState::new(s, AdamHyper::with_lr(config.lr)))
        .collect();
    let mut critic_states: Vec<AdamState> = critics
        .iter()
        .map(|c| AdamState::new(&c.spec, AdamHyper::with_lr(config.lr)))
        .collect();

    let mut traces = Vec::new();
    for epoch in 0..config.joint_epochs {
        let batches = epoch_batches(n, config.batch_size, config.seed, JOINT_SHUFFLE, epoch);
        let mut objective_loss_sums = vec![0.0; assembly.objectives.len()];
        for (step, rows) in batches.iter().enumerate() {
            // Forward both views of every modality, keeping caches. A
            // divergence here (overflowing activations) is a numeric abort.
            let mut raw_caches = Vec::with_capacity(m);
            let mut aug_caches = Vec::with_capacity(m);
            for i in 0..m {
                let abort = |e: Error| match e {
                    Error::Numeric { context, .. } => Error::NumericAbort {
                        epoch,
                        objective: format!("(encoder {i})"),
                        term: context,
                    },
                    other => other,
                };
                let x = dataset.modalities[i].select_rows(rows)?;
                let x_aug = augmented_batch(dataset, i, rows, 2, epoch, step, config.seed)?;
                raw_caches.push(
                    mlp_forward_cached(&encoders.specs[i], &encoders.params[i], &x)
                        .map_err(abort)?,
                );
                aug_caches.push(
                    mlp_forward_cached(&encoders.specs[i], &encoders.params[i], &x_aug)
                        .map_err(abort)?,
                );
            }
            let embeds: Vec<Tensor2D> = raw_caches.iter().map(|c| c.output().clone()).collect();
            let augs: Vec<Tensor2D> = aug_caches.iter().map(|c| c.output().clone()).collect();

            let mut grads = AssemblyGrads {
                embeds: embeds
                    .iter()
                    .map(|e| Tensor2D::zeros(e.rows(), e.cols()))
                    .collect(),
                augs: augs
                    .iter()
                    .map(|a| Tensor2D::zeros(a.rows(), a.cols()))
                    .collect(),
                critics: critics.iter().map(|c| MlpParams::zeros(&c.spec)).collect(),
            };

            // Objective values (information quantities to maximize).
            let shuffle_seed = mix(
                mix(config.seed, CLUB_TAG),
                (epoch * 1_000_003 + step) as u64,
            );
            for (oi, objective) in assembly.objectives.iter().enumerate() {
                let value = evaluate_objective_terms(
                    objective,
                    &critics,
                    &embeds,
                    &augs,
                    shuffle_seed,
                    config.club_mode,
                    Some(&mut grads),
                )
                .map_err(|e| match e {
                    Error::NumericAbort { .. } => e,
                    other => Error::NumericAbort {
                        epoch,
                        objective: objective.objective.label(),
                        term: other.to_string(),
                    },
                })?;
                let value = abort_on_non_finite(value, epoch, objective, "objective value")?;
                objective_loss_sums[oi] += -value;
            }

            // Encoder upstreams: -dV/dz plus the intra term when enabled.
            let mut upstream_raw: Vec<Tensor2D> = grads
                .embeds
                .iter()
                .map(|g| {
                    let mut u = g.clone();
                    u.scale_in_place(-1.0);
                    u
                })
                .collect();
            let mut upstream_aug: Vec<Tensor2D> = grads
                .augs
                .iter()
                .map(|g| {
                    let mut u = g.clone();
                    u.scale_in_place(-1.0);
                    u
                })
                .collect();
            if !config.disable_intra && config.alpha > 0.0 {
                for i in 0..m {
                    let (_, mut gz, mut gpos) =
                        intra_loss_with_grads(&embeds[i], &augs[i], config.tau)?;
                    gz.scale_in_place(config.alpha);
                    gpos.scale_in_place(config.alpha);
                    upstream_raw[i].add_assign(&gz)?;
                    upstream_aug[i].add_assign(&gpos)?;
                }
            }

            // Parameter updates: encoders accumulate through both views.
            for i in 0..m {
                let (mut enc_grads, _) = mlp_backward_cached(
                    &encoders.specs[i],
                    &encoders.params[i],
                    &raw_caches[i],
                    &upstream_raw[i],
                )?;
                let (aug_grads, _) = mlp_backward_cached(
                    &encoders.specs[i],
                    &encoders.params[i],
                    &aug_caches[i],
                    &upstream_aug[i],
                )?;
                enc_grads.add_scaled(&aug_grads, 1.0)?;
                adam_step(&mut encoders.params[i], &enc_grads, &mut encoder_states[i])?;
            }
            for (ci, critic) in critics.iter_mut().enumerate() {
                let mut g = grads.critics[ci].clone();
                // Loss is the negated objective sum.
                for layer in &mut g.layers {
                    layer.weight.scale_in_place(-1.0);
                    for b in &mut layer.bias {
                        *b = -*b;
                    }
                }
                adam_step(&mut critic.params, &g, &mut critic_states[ci])?;
            }
        }
        let steps = batches.len().max(1) as f64;
        for (oi, objective) in assembly.objectives.iter().enumerate() {
            traces.push(TraceRow {
                epoch,
                objective: objective.objective.label(),
                value: objective_loss_sums[oi] / steps,
            });
        }
    }

    Ok(TrainedModel {
        config: config.clone(),
        encoder_specs: encoders.specs,
        encoders: encoders.params,
        assembly,
        critics,
        traces,
    })
}

/// Pretraining followed by joint training.
pub fn run_training(
    dataset: &SyntheticRegionDataset,
    config: &TrainConfig,
) -> Result<TrainedModel> {
    let pretrained = pretrain_intra(dataset, config)?;
    train_inter(pretrained.encoders, dataset, config)
}

/// Concatenates every modality encoder's output in fixed modality order:
/// [n x (m * embed_dim)].
pub fn export_embeddings(
    model: &TrainedModel,
    dataset: &SyntheticRegionDataset,
) -> Result<Tensor2D> {
    if dataset.num_modalities() != model.encoders.len() {
        return Err(Error::dimension(
            "export_embeddings",
            format!(
                "model has {} encoders, dataset has {} modalities",
                model.encoders.len(),
                dataset.num_modalities()
            ),
        ));
    }
    let outputs: Vec<Tensor2D> = (0..model.encoders.len())
        .map(|i| {
            mlp_forward(
                &model.encoder_specs[i],
                &model.encoders[i],
                &dataset.modalities[i],
            )
        })
        .collect::<Result<_>>()?;
    let refs: Vec<&Tensor2D> = outputs.iter().collect();
    Tensor2D::concat_cols(&refs)
}

pub fn traces_to_csv(traces: &[TraceRow]) -> String {
    let mut out = String::from("epoch,objective,value\n");
    for row in traces {
        // Objective labels contain commas, so the field is always quoted.
        out.push_str(&format!(
            "{},\"{}\",{}\n",
            row.epoch, row.objective, row.value
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Checkpoints: a JSON manifest plus one CSV per weight matrix / bias vector.
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct ModelManifest {
    config: TrainConfig,
    encoder_specs: Vec<MlpSpec>,
    assembly: SchemeAssembly,
    critic_specs: Vec<MlpSpec>,
}

fn write_mlp(dir: &Path, prefix: &str, params: &MlpParams) -> Result<()> {
    for (l, layer) in params.layers.iter().enumerate() {
        fs::write(
            dir.join(format!("{prefix}_layer{l}_weight.csv")),
            matrix_to_csv(&layer.weight),
        )?;
        let bias = Tensor2D::new(1, layer.bias.len(), layer.bias.clone())?;
        fs::write(
            dir.join(format!("{prefix}_layer{l}_bias.csv")),
            matrix_to_csv(&bias),
        )?;
    }
    Ok(())
}

fn read_mlp(dir: &Path, prefix: &str, spec: &MlpSpec) -> Result<MlpParams> {
    let mut params = MlpParams::zeros(spec);
    for l in 0..spec.num_layers() {
        let weight = matrix_from_csv(&fs::read_to_string(
            dir.join(format!("{prefix}_layer{l}_weight.csv")),
        )?)?;
        let bias = matrix_from_csv(&fs::read_to_string(
            dir.join(format!("{prefix}_layer{l}_bias.csv")),
        )?)?;
        params.layers[l].weight = weight;
        params.layers[l].bias = bias.row(0).to_vec();
    }
    if !params.matches(spec) {
        return Err(Error::dimension(
            "read_mlp",
            format!("{prefix} shape mismatch"),
        ));
    }
    Ok(params)
}

pub fn save_model(model: &TrainedModel, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let manifest = ModelManifest {
        config: model.config.clone(),
        encoder_specs: model.encoder_specs.clone(),
        assembly: model.assembly.clone(),
        critic_specs: model.critics.iter().map(|c| c.spec.clone()).collect(),
    };
    fs::write(
        dir.join("model.json"),
        serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::parse("model manifest", e.to_string()))?,
    )?;
    for (i, enc) in model.encoders.iter().enumerate() {
        write_mlp(dir, &format!("encoder_{i}"), enc)?;
    }
    for (i, critic) in model.critics.iter().enumerate() {
        write_mlp(dir, &format!("critic_{i}"), &critic.params)?;
    }
    fs::write(dir.join("traces.csv"), traces_to_csv(&model.traces))?;
    Ok(())
}

pub fn load_model(dir: &Path) -> Result<TrainedModel> {
    let manifest: ModelManifest =
        serde_json::from_str(&fs::read_to_string(dir.join("model.json"))?)
            .map_err(|e| Error::parse("model manifest", e.to_string()))?;
    let encoders = manifest
        .encoder_specs
        .iter()
        .enumerate()
        .map(|(i, spec)| read_mlp(dir, &format!("encoder_{i}"), spec))
        .collect::<Result<Vec<_>>>()?;
    let critics = manifest
        .critic_specs
        .iter()
        .enumerate()
        .map(|(i, spec)| Critic::new(spec.clone(), read_mlp(dir, &format!("critic_{i}"), spec)?))
        .collect::<Result<Vec<_>>>()?;
    let traces_text = fs::read_to_string(dir.join("traces.csv")).unwrap_or_default();
    let mut traces = Vec::new();
    for (ln, line) in traces_text.lines().enumerate() {
        if ln == 0 || line.trim().is_empty() {
            continue;
        }
        // epoch,"objective",value with a quoted middle field.
        let first = line
            .find(',')
            .ok_or_else(|| Error::parse("traces.csv", format!("bad line {ln}")))?;
        let last = line
            .rfind(',')
            .filter(|&l| l > first)
            .ok_or_else(|| Error::parse("traces.csv", format!("bad line {ln}")))?;
        let epoch = line[..first]
            .parse()
            .map_err(|_| Error::parse("traces.csv", format!("bad epoch on line {ln}")))?;
        let objective = line[first + 1..last].trim_matches('"').to_string();
        let value = line[last + 1..]
            .parse()
            .map_err(|_| Error::parse("traces.csv", format!("bad value on line {ln}")))?;
        traces.push(TraceRow {
            epoch,
            objective,
            value,
        });
    }
    Ok(TrainedModel {
        config: manifest.config,
        encoder_specs: manifest.encoder_specs,
        encoders,
        assembly: manifest.assembly,
        critics,
        traces,
    })
}
