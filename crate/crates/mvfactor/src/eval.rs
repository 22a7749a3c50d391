//! Downstream probes, ablation runner, modality sweeps, and the complexity
//! accountant.
//!
//! Probes are deliberately simple and deterministic: a closed-form ridge
//! regressor on standardized features for the regression tasks and a small
//! 2-layer MLP trained with a KL objective for the 5-class task. Complexity
//! accounting counts exact trainable scalars and forward FLOPs (two ops per
//! multiply-add, plus one op per activation output) over the encoders and
//! every critic an objective scheme instantiates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    adam_step, mlp_backward_cached, mlp_forward, mlp_forward_cached, solve_spd, Activation,
    AdamHyper, AdamState, MlpParams, MlpSpec, Tensor2D,
};
use crate::objectives::{assemble, Scheme};
use crate::rng::{mix, Rng};
use crate::synth::SyntheticRegionDataset;
use crate::train::{export_embeddings, run_training, TrainConfig};

pub const NUM_CLASSES: usize = 5;

// ---------------------------------------------------------------------------
// Fold splitting
// ---------------------------------------------------------------------------

/// Deterministic K-fold partition of 0..n: a seeded shuffle chunked into
/// `folds` nearly equal parts. The folds partition the index set exactly.
pub fn kfold_indices(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::Input(format!("need at least 2 folds, got {folds}")));
    }
    if n < folds {
        return Err(Error::Input(format!(
            "{n} samples cannot fill {folds} folds"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    Rng::stream(seed, &[0x666f_6c64]).shuffle(&mut order);
    let base = n / folds;
    let rem = n % folds;
    let mut out = Vec::with_capacity(folds);
    let mut cursor = 0;
    for f in 0..folds {
        let size = base + usize::from(f < rem);
        out.push(order[cursor..cursor + size].to_vec());
        cursor += size;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Regression probe (closed-form ridge)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldRegression {
    pub mae: f64,
    pub rmse: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub folds: Vec<FoldRegression>,
    pub mae_mean: f64,
    pub mae_std: f64,
    pub rmse_mean: f64,
    pub rmse_std: f64,
    pub r2_mean: f64,
    pub r2_std: f64,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

struct Standardizer {
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Standardizer {
    fn fit(x: &Tensor2D) -> Standardizer {
        let means = x.col_means();
        let mut stds = vec![0.0; x.cols()];
        for r in 0..x.rows() {
            for (c, &v) in x.row(r).iter().enumerate() {
                let d = v - means[c];
                stds[c] += d * d;
            }
        }
        for s in &mut stds {
            *s = (*s / x.rows() as f64).sqrt();
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        Standardizer { means, stds }
    }

    fn apply(&self, x: &Tensor2D) -> Tensor2D {
        let mut out = x.clone();
        for r in 0..out.rows() {
            for (c, v) in out.row_mut(r).iter_mut().enumerate() {
                *v = (*v - self.means[c]) / self.stds[c];
            }
        }
        out
    }
}

/// Closed-form ridge on standardized features with centered labels:
/// solves (X^T X + lambda I) beta = X^T y per training fold and scores the
/// held-out fold.
pub fn regression_probe_with_lambda(
    embeddings: &Tensor2D,
    labels: &[f64],
    folds: usize,
    seed: u64,
    lambda: f64,
) -> Result<RegressionReport> {
    let n = embeddings.rows();
    if labels.len() != n {
        return Err(Error::dimension(
            "regression_probe",
            format!("{} labels for {n} rows", labels.len()),
        ));
    }
    let splits = kfold_indices(n, folds, seed)?;
    let mut fold_reports = Vec::with_capacity(folds);
    for (f, test_idx) in splits.iter().enumerate() {
        let train_idx: Vec<usize> = splits
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, ix)| ix.iter().copied())
            .collect();
        let x_train_raw = embeddings.select_rows(&train_idx)?;
        let standardizer = Standardizer::fit(&x_train_raw);
        let x_train = standardizer.apply(&x_train_raw);
        let y_mean = train_idx.iter().map(|&i| labels[i]).sum::<f64>() / train_idx.len() as f64;
        let y_train: Vec<f64> = train_idx.iter().map(|&i| labels[i] - y_mean).collect();

        // Normal equations.
        let d = x_train.cols();
        let mut gram = x_train.matmul_transpose_a(&x_train)?;
        for i in 0..d {
            let v = gram.get(i, i) + lambda;
            gram.set(i, i, v);
        }
        let mut xty = vec![0.0; d];
        for (r, &y) in y_train.iter().enumerate() {
            for (c, &v) in x_train.row(r).iter().enumerate() {
                xty[c] += v * y;
            }
        }
        let beta = solve_spd(&gram, &xty)?;

        let x_test = standardizer.apply(&embeddings.select_rows(test_idx)?);
        let y_test: Vec<f64> = test_idx.iter().map(|&i| labels[i]).collect();
        let test_mean = y_test.iter().sum::<f64>() / y_test.len() as f64;
        let mut abs_sum = 0.0;
        let mut sq_sum = 0.0;
        let mut ss_tot = 0.0;
        for (r, &y) in y_test.iter().enumerate() {
            let pred = crate::numerics::dot(x_test.row(r), &beta) + y_mean;
            let err = pred - y;
            abs_sum += err.abs();
            sq_sum += err * err;
            ss_tot += (y - test_mean) * (y - test_mean);
        }
        if ss_tot == 0.0 {
            return Err(Error::Input(format!(
                "labels constant in test fold {f}; R^2 undefined"
            )));
        }
        let k = y_test.len() as f64;
        fold_reports.push(FoldRegression {
            mae: abs_sum / k,
            rmse: (sq_sum / k).sqrt(),
            r2: 1.0 - sq_sum / ss_tot,
        });
    }
    let (mae_mean, mae_std) = mean_std(fold_reports.iter().map(|r| r.mae));
    let (rmse_mean, rmse_std) = mean_std(fold_reports.iter().map(|r| r.rmse));
    let (r2_mean, r2_std) = mean_std(fold_reports.iter().map(|r| r.r2));
    Ok(RegressionReport {
        folds: fold_reports,
        mae_mean,
        mae_std,
        rmse_mean,
        rmse_std,
        r2_mean,
        r2_std,
    })
}

/// Default regression probe: ridge with lambda = 1.0, five folds.
pub fn regression_probe(
    embeddings: &Tensor2D,
    labels: &[f64],
    folds: usize,
    seed: u64,
) -> Result<RegressionReport> {
    regression_probe_with_lambda(embeddings, labels, folds, seed, 1.0)
}

// ---------------------------------------------------------------------------
// Classification probe (small MLP, KL objective)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldClassification {
    pub l1: f64,
    pub kl: f64,
    pub cosine: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub folds: Vec<FoldClassification>,
    pub l1_mean: f64,
    pub l1_std: f64,
    pub kl_mean: f64,
    pub kl_std: f64,
    pub cosine_mean: f64,
    pub cosine_std: f64,
}

const CLASSIFIER_HIDDEN: usize = 64;
const CLASSIFIER_EPOCHS: usize = 300;
const CLASSIFIER_LR: f64 = 0.01;

fn softmax_rows(logits: &Tensor2D) -> Tensor2D {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    out
}

/// Mean L1 distance, KL divergence, and cosine similarity between predicted
/// class distributions and one-hot targets.
pub fn distribution_metrics(predictions: &Tensor2D, classes: &[u8]) -> Result<FoldClassification> {
    let n = predictions.rows();
    if classes.len() != n {
        return Err(Error::dimension(
            "distribution_metrics",
            format!("{} classes for {n} rows", classes.len()),
        ));
    }
    let k = predictions.cols();
    let mut l1 = 0.0;
    let mut kl = 0.0;
    let mut cos = 0.0;
    for r in 0..n {
        let c = classes[r] as usize;
        if c >= k {
            return Err(Error::Input(format!("class {c} out of range 0..{k}")));
        }
        let row = predictions.row(r);
        let mut abs = 0.0;
        let mut norm = 0.0;
        for (j, &p) in row.iter().enumerate() {
            let t = if j == c { 1.0 } else { 0.0 };
            abs += (p - t).abs();
            norm += p * p;
        }
        l1 += abs;
        kl += -(row[c].max(f64::MIN_POSITIVE)).ln();
        cos += row[c] / norm.sqrt();
    }
    let n = n as f64;
    Ok(FoldClassification {
        l1: l1 / n,
        kl: kl / n,
        cosine: cos / n,
    })
}

/// 2-layer MLP probe trained with the KL objective on one-hot targets;
/// reports L1 / KL / cosine of the predicted distributions per fold.
pub fn classification_probe(
    embeddings: &Tensor2D,
    classes: &[u8],
    folds: usize,
    seed: u64,
) -> Result<ClassificationReport> {
    let n = embeddings.rows();
    if classes.len() != n {
        return Err(Error::dimension(
            "classification_probe",
            format!("{} classes for {n} rows", classes.len()),
        ));
    }
    let splits = kfold_indices(n, folds, seed)?;
    let spec = MlpSpec::uniform(
        vec![embeddings.cols(), CLASSIFIER_HIDDEN, NUM_CLASSES],
        Activation::Relu,
    )?;
    let mut fold_reports = Vec::with_capacity(folds);
    for (f, test_idx) in splits.iter().enumerate() {
        let train_idx: Vec<usize> = splits
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, ix)| ix.iter().copied())
            .collect();
        // Every class must appear in the training fold.
        let mut present = [false; NUM_CLASSES];
        for &i in &train_idx {
            present[classes[i] as usize] = true;
        }
        if let Some(missing) = present.iter().position(|&p| !p) {
            return Err(Error::Stratification(format!(
                "class {missing} missing from training fold {f}"
            )));
        }

        let x_train = embeddings.select_rows(&train_idx)?;
        let mut params = MlpParams::init(&spec, mix(seed, 0x636c_6673 ^ f as u64));
        let mut state = AdamState::new(&spec, AdamHyper::with_lr(CLASSIFIER_LR));
        let inv = 1.0 / train_idx.len() as f64;
        for _ in 0..CLASSIFIER_EPOCHS {
            let cache = mlp_forward_cached(&spec, &params, &x_train)?;
            let probs = softmax_rows(cache.output());
            // KL(one-hot || p) gradient through the softmax: (p - t) / n.
            let mut upstream = probs;
            for (r, &i) in train_idx.iter().enumerate() {
                let c = classes[i] as usize;
                let row = upstream.row_mut(r);
                row[c] -= 1.0;
                for v in row.iter_mut() {
                    *v *= inv;
                }
            }
            let (grads, _) = mlp_backward_cached(&spec, &params, &cache, &upstream)?;
            adam_step(&mut params, &grads, &mut state)?;
        }

        let x_test = embeddings.select_rows(test_idx)?;
        let logits = mlp_forward(&spec, &params, &x_test)?;
        let probs = softmax_rows(&logits);
        let test_classes: Vec<u8> = test_idx.iter().map(|&i| classes[i]).collect();
        fold_reports.push(distribution_metrics(&probs, &test_classes)?);
    }
    let (l1_mean, l1_std) = mean_std(fold_reports.iter().map(|r| r.l1));
    let (kl_mean, kl_std) = mean_std(fold_reports.iter().map(|r| r.kl));
    let (cosine_mean, cosine_std) = mean_std(fold_reports.iter().map(|r| r.cosine));
    Ok(ClassificationReport {
        folds: fold_reports,
        l1_mean,
        l1_std,
        kl_mean,
        kl_std,
        cosine_mean,
        cosine_std,
    })
}

// ---------------------------------------------------------------------------
// Complexity accounting
// ---------------------------------------------------------------------------

/// Exact trainable scalar count of one MLP.
pub fn count_params(spec: &MlpSpec) -> u64 {
    spec.num_params() as u64
}

/// Forward FLOPs of one MLP at the given batch size: two ops per
/// multiply-add in each affine layer plus one op per activation output.
pub fn count_flops(spec: &MlpSpec, batch: u64) -> u64 {
    let dims = spec.layer_dims();
    let mut per_row = 0u64;
    for l in 0..dims.len() - 1 {
        per_row += 2 * (dims[l] as u64) * (dims[l + 1] as u64);
        per_row += dims[l + 1] as u64;
    }
    batch * per_row
}

/// Parameter and FLOP accounting for one scheme instantiation: encoders
/// plus every critic across all objectives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub scheme: Scheme,
    pub m: usize,
    pub objective_count: u64,
    pub term_count: u64,
    pub encoder_params: u64,
    pub total_params: u64,
    pub flops: u64,
}

/// Critic architecture used for accounting: 2-layer, hidden = override or
/// 4x input, matching instantiation.
fn critic_spec_for(width: usize, critic_hidden: Option<usize>) -> Result<MlpSpec> {
    MlpSpec::uniform(
        vec![width, critic_hidden.unwrap_or(4 * width), 1],
        Activation::Relu,
    )
}

pub fn complexity_report(
    scheme: Scheme,
    embed_dim: usize,
    encoder_specs: &[MlpSpec],
    critic_hidden: Option<usize>,
    batch: u64,
) -> Result<ComplexityReport> {
    let m = encoder_specs.len();
    let assembly = assemble(m, scheme)?;
    let mut total_params = 0u64;
    let mut flops = 0u64;
    let mut encoder_params = 0u64;
    for spec in encoder_specs {
        encoder_params += count_params(spec);
        flops += count_flops(spec, batch);
    }
    total_params += encoder_params;
    for term in assembly.terms() {
        let spec = critic_spec_for(term.critic_input_width(embed_dim), critic_hidden)?;
        total_params += count_params(&spec);
        flops += count_flops(&spec, batch);
    }
    Ok(ComplexityReport {
        scheme,
        m,
        objective_count: assembly.objectives.len() as u64,
        term_count: assembly.num_terms() as u64,
        encoder_params,
        total_params,
        flops,
    })
}

/// Percentage increases of `other` over `base`, field by field:
/// 100 * (other - base) / base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentIncrease {
    pub objective_count: f64,
    pub term_count: f64,
    pub params: f64,
    pub flops: f64,
}

pub fn percent_increase(
    base: &ComplexityReport,
    other: &ComplexityReport,
) -> Result<PercentIncrease> {
    if base.m != other.m {
        return Err(Error::Input(format!(
            "cannot compare complexity across modality counts {} and {}",
            base.m, other.m
        )));
    }
    if base.encoder_params != other.encoder_params {
        return Err(Error::Input(
            "complexity comparison requires identical encoder backbones".into(),
        ));
    }
    let pct = |b: u64, o: u64| -> Result<f64> {
        if b == 0 {
            return Err(Error::Input(
                "percent increase undefined for zero base".into(),
            ));
        }
        Ok(100.0 * (o as f64 - b as f64) / b as f64)
    };
    Ok(PercentIncrease {
        objective_count: pct(base.objective_count, other.objective_count)?,
        term_count: pct(base.term_count, other.term_count)?,
        params: pct(base.total_params, other.total_params)?,
        flops: pct(base.flops, other.flops)?,
    })
}

// ---------------------------------------------------------------------------
// Ablation runner and modality sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: String,
    pub regression_r2: Vec<f64>,
    pub regression_r2_mean: f64,
    pub regression_r2_std: f64,
    pub classification_cosine: Vec<f64>,
    pub classification_cosine_mean: f64,
    pub classification_cosine_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub rows: Vec<AblationRow>,
}

fn train_and_probe(dataset: &SyntheticRegionDataset, config: &TrainConfig) -> Result<(f64, f64)> {
    let model = run_training(dataset, config)?;
    let embeddings = export_embeddings(&model, dataset)?;
    // Folds are a property of the evaluation protocol, so they key on the
    // dataset seed: every arm and training seed is scored on identical
    // splits.
    let reg = regression_probe(&embeddings, &dataset.labels, 5, dataset.seed)?;
    let cls = classification_probe(&embeddings, &dataset.classes, 5, dataset.seed)?;
    Ok((reg.r2_mean, cls.cosine_mean))
}

/// Three full train+probe arms (base, intra-removed, unique-removed) over
/// the same seeds; multi-seed means and stds are reported per arm.
pub fn run_ablation(
    dataset: &SyntheticRegionDataset,
    base_config: &TrainConfig,
    seeds: &[u64],
) -> Result<AblationTable> {
    if seeds.is_empty() {
        return Err(Error::Input("ablation needs at least one seed".into()));
    }
    let variants: [(&str, fn(&mut TrainConfig)); 3] = [
        ("base", |_| {}),
        ("ir", |c| c.disable_intra = true),
        ("ur", |c| c.disable_unique = true),
    ];
    let mut rows = Vec::with_capacity(3);
    for (name, apply) in variants {
        let mut r2s = Vec::with_capacity(seeds.len());
        let mut cosines = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let mut config = base_config.clone();
            config.seed = seed;
            apply(&mut config);
            let (r2, cosine) = train_and_probe(dataset, &config)?;
            r2s.push(r2);
            cosines.push(cosine);
        }
        let (r2_mean, r2_std) = mean_std(r2s.iter().copied());
        let (cos_mean, cos_std) = mean_std(cosines.iter().copied());
        rows.push(AblationRow {
            variant: name.to_string(),
            regression_r2: r2s,
            regression_r2_mean: r2_mean,
            regression_r2_std: r2_std,
            classification_cosine: cosines,
            classification_cosine_mean: cos_mean,
            classification_cosine_std: cos_std,
        });
    }
    Ok(AblationTable { rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// 1-based modality indices, e.g. "1+2+4".
    pub subset: String,
    pub modalities: Vec<usize>,
    pub regression_r2: Vec<f64>,
    pub regression_r2_mean: f64,
    pub regression_r2_std: f64,
    pub classification_cosine: Vec<f64>,
    pub classification_cosine_mean: f64,
    pub classification_cosine_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub warnings: Vec<String>,
}

pub fn subset_label(subset: &[usize]) -> String {
    subset
        .iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join("+")
}

/// One train+probe run per modality subset (each of size >= 2), shared
/// seeds. Duplicate subsets are dropped with a warning.
pub fn modality_sweep(
    dataset: &SyntheticRegionDataset,
    base_config: &TrainConfig,
    subsets: &[Vec<usize>],
    seeds: &[u64],
) -> Result<SweepTable> {
    if seeds.is_empty() {
        return Err(Error::Input("sweep needs at least one seed".into()));
    }
    let m = dataset.num_modalities();
    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut warnings = Vec::new();
    let mut rows = Vec::new();
    for subset in subsets {
        let mut normalized = subset.clone();
        normalized.sort_unstable();
        normalized.dedup();
        if normalized.len() != subset.len() {
            return Err(Error::Input(format!(
                "subset {subset:?} repeats a modality"
            )));
        }
        if normalized.len() < 2 {
            return Err(Error::Input(format!(
                "subset {subset:?} has fewer than 2 modalities"
            )));
        }
        if normalized.iter().any(|&i| i >= m) {
            return Err(Error::Input(format!(
                "subset {subset:?} references a modality >= {m}"
            )));
        }
        if seen.contains(&normalized) {
            warnings.push(format!(
                "duplicate subset {} dropped",
                subset_label(&normalized)
            ));
            continue;
        }
        seen.push(normalized.clone());

        let restricted = dataset.restrict_modalities(&normalized)?;
        let mut r2s = Vec::with_capacity(seeds.len());
        let mut cosines = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let mut config = base_config.clone();
            config.seed = seed;
            let (r2, cosine) = train_and_probe(&restricted, &config)?;
            r2s.push(r2);
            cosines.push(cosine);
        }
        let (r2_mean, r2_std) = mean_std(r2s.iter().copied());
        let (cos_mean, cos_std) = mean_std(cosines.iter().copied());
        rows.push(SweepRow {
            subset: subset_label(&normalized),
            modalities: normalized,
            regression_r2: r2s,
            regression_r2_mean: r2_mean,
            regression_r2_std: r2_std,
            classification_cosine: cosines,
            classification_cosine_mean: cos_mean,
            classification_cosine_std: cos_std,
        });
    }
    Ok(SweepTable { rows, warnings })
}

// ---------------------------------------------------------------------------
// CSV rendering (fixed column orders)
// ---------------------------------------------------------------------------

pub fn regression_report_csv(report: &RegressionReport) -> String {
    let mut out = String::from("fold,mae,rmse,r2\n");
    for (f, r) in report.folds.iter().enumerate() {
        out.push_str(&format!("{f},{},{},{}\n", r.mae, r.rmse, r.r2));
    }
    out.push_str(&format!(
        "mean,{},{},{}\n",
        report.mae_mean, report.rmse_mean, report.r2_mean
    ));
    out.push_str(&format!(
        "std,{},{},{}\n",
        report.mae_std, report.rmse_std, report.r2_std
    ));
    out
}

pub fn classification_report_csv(report: &ClassificationReport) -> String {
    let mut out = String::from("fold,l1,kl,cosine\n");
    for (f, r) in report.folds.iter().enumerate() {
        out.push_str(&format!("{f},{},{},{}\n", r.l1, r.kl, r.cosine));
    }
    out.push_str(&format!(
        "mean,{},{},{}\n",
        report.l1_mean, report.kl_mean, report.cosine_mean
    ));
    out.push_str(&format!(
        "std,{},{},{}\n",
        report.l1_std, report.kl_std, report.cosine_std
    ));
    out
}

pub fn complexity_csv(reports: &[ComplexityReport], increase: Option<&PercentIncrease>) -> String {
    let mut out = String::from("scheme,m,objectives,terms,params,flops\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.scheme, r.m, r.objective_count, r.term_count, r.total_params, r.flops
        ));
    }
    if let Some(inc) = increase {
        out.push_str(&format!(
            "percent_increase,,{},{},{},{}\n",
            inc.objective_count, inc.term_count, inc.params, inc.flops
        ));
    }
    out
}

pub fn ablation_csv(table: &AblationTable) -> String {
    let mut out = String::from("variant,r2_mean,r2_std,cosine_mean,cosine_std\n");
    for r in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.variant,
            r.regression_r2_mean,
            r.regression_r2_std,
            r.classification_cosine_mean,
            r.classification_cosine_std
        ));
    }
    out
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from("subset,r2_mean,r2_std,cosine_mean,cosine_std\n");
    for r in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.subset,
            r.regression_r2_mean,
            r.regression_r2_std,
            r.classification_cosine_mean,
            r.classification_cosine_std
        ));
    }
    out
}
