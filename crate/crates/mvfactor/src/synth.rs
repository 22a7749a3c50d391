//! Seeded synthetic multimodal "region" datasets.
//!
//! A linear-Gaussian latent-factor model generates m modality feature
//! matrices with analytically known shared/unique structure: a shared
//! latent feeds every modality, each modality owns a private latent, and a
//! regression label mixes both with controllable weights. Modality 0 can be
//! rendered as counts through an exp-link Poisson so the count-perturbation
//! augmentation operates on genuine counts; the exact MI oracle is disabled
//! for that modality rather than approximated.
//!
//! Generation is counter-based: each region draws from its own derived RNG
//! stream, so output is reproducible regardless of evaluation order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Tensor2D;
use crate::oracle::{gaussian_mi, GaussianPair};
use crate::rng::Rng;

const REGION_STREAM: u64 = 0x7265_6769;
const LOADING_STREAM: u64 = 0x6c6f_6164;

/// Linear-Gaussian latent-factor generator with known information structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianFactorModel {
    pub shared_dim: usize,
    pub unique_dims: Vec<usize>,
    /// Per modality: [modality_dim x shared_dim].
    pub loadings_shared: Vec<Tensor2D>,
    /// Per modality: [modality_dim x unique_dim].
    pub loadings_unique: Vec<Tensor2D>,
    pub sigma_obs: f64,
    /// Label weights on the shared latent.
    pub label_shared: Vec<f64>,
    /// Label weights on each modality's unique latent.
    pub label_unique: Vec<Vec<f64>>,
    pub sigma_label: f64,
    /// Which modality (if any) is rendered as Poisson counts.
    pub count_modality: Option<usize>,
}

impl GaussianFactorModel {
    pub fn validate(&self) -> Result<()> {
        let m = self.num_modalities();
        if m < 1 {
            return Err(Error::Input("model needs at least one modality".into()));
        }
        if self.shared_dim == 0 || self.unique_dims.contains(&0) {
            return Err(Error::Input("latent dims must be > 0".into()));
        }
        if self.unique_dims.len() != m
            || self.loadings_unique.len() != m
            || self.label_unique.len() != m
        {
            return Err(Error::dimension(
                "GaussianFactorModel",
                "per-modality field lengths disagree",
            ));
        }
        if self.sigma_obs < 0.0 || self.sigma_label < 0.0 {
            return Err(Error::Input("noise scales must be >= 0".into()));
        }
        if self.label_shared.len() != self.shared_dim {
            return Err(Error::dimension(
                "GaussianFactorModel",
                "label_shared length != shared_dim",
            ));
        }
        for i in 0..m {
            let dim = self.loadings_shared[i].rows();
            if self.loadings_shared[i].cols() != self.shared_dim {
                return Err(Error::dimension(
                    "GaussianFactorModel",
                    format!("modality {i} shared loading has wrong latent width"),
                ));
            }
            if self.loadings_unique[i].rows() != dim
                || self.loadings_unique[i].cols() != self.unique_dims[i]
            {
                return Err(Error::dimension(
                    "GaussianFactorModel",
                    format!("modality {i} unique loading shape mismatch"),
                ));
            }
            if self.label_unique[i].len() != self.unique_dims[i] {
                return Err(Error::dimension(
                    "GaussianFactorModel",
                    format!("modality {i} label_unique length mismatch"),
                ));
            }
            if let Some(c) = self.count_modality {
                if c >= m {
                    return Err(Error::Input(format!(
                        "count modality {c} out of range 0..{m}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_modalities(&self) -> usize {
        self.loadings_shared.len()
    }

    pub fn modality_dims(&self) -> Vec<usize> {
        self.loadings_shared.iter().map(Tensor2D::rows).collect()
    }
}

/// Config from which a seeded model is built: random loadings, scalar label
/// weight scales spread evenly over the latent coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    pub seed: u64,
    pub modality_dims: Vec<usize>,
    pub shared_dim: usize,
    pub unique_dims: Vec<usize>,
    #[serde(default = "default_sigma_obs")]
    pub sigma_obs: f64,
    #[serde(default = "default_sigma_label")]
    pub sigma_label: f64,
    /// Total label weight carried by the shared latent.
    #[serde(default = "default_label_shared_weight")]
    pub label_shared_weight: f64,
    /// Total label weight carried by each modality's unique latent.
    pub label_unique_weights: Vec<f64>,
    #[serde(default)]
    pub count_modality: Option<usize>,
    #[serde(default)]
    pub loading_seed: u64,
}

fn default_sigma_obs() -> f64 {
    0.1
}

fn default_sigma_label() -> f64 {
    0.1
}

fn default_label_shared_weight() -> f64 {
    1.0
}

impl GeneratorConfig {
    /// Desk-scale default shape: four modalities of dim 16, shared latent 4,
    /// unique latents 2, modality 0 rendered as counts.
    pub fn desk_default(n: usize, seed: u64) -> Self {
        GeneratorConfig {
            n,
            seed,
            modality_dims: vec![16; 4],
            shared_dim: 4,
            unique_dims: vec![2; 4],
            sigma_obs: 0.1,
            sigma_label: 0.1,
            label_shared_weight: 1.0,
            label_unique_weights: vec![0.5; 4],
            count_modality: Some(0),
            loading_seed: 0,
        }
    }

    pub fn build_model(&self) -> Result<GaussianFactorModel> {
        let m = self.modality_dims.len();
        if self.unique_dims.len() != m || self.label_unique_weights.len() != m {
            return Err(Error::Config(
                "modality_dims, unique_dims, and label_unique_weights must have equal length"
                    .into(),
            ));
        }
        let mut rng = Rng::stream(self.loading_seed, &[LOADING_STREAM]);
        let mut loadings_shared = Vec::with_capacity(m);
        let mut loadings_unique = Vec::with_capacity(m);
        for i in 0..m {
            let dim = self.modality_dims[i];
            loadings_shared.push(Tensor2D::randn(
                dim,
                self.shared_dim,
                1.0 / (self.shared_dim as f64).sqrt(),
                &mut rng,
            ));
            loadings_unique.push(Tensor2D::randn(
                dim,
                self.unique_dims[i],
                1.0 / (self.unique_dims[i] as f64).sqrt(),
                &mut rng,
            ));
        }
        let label_shared =
            vec![self.label_shared_weight / (self.shared_dim as f64).sqrt(); self.shared_dim];
        let label_unique = (0..m)
            .map(|i| {
                vec![
                    self.label_unique_weights[i] / (self.unique_dims[i] as f64).sqrt();
                    self.unique_dims[i]
                ]
            })
            .collect();
        let model = GaussianFactorModel {
            shared_dim: self.shared_dim,
            unique_dims: self.unique_dims.clone(),
            loadings_shared,
            loadings_unique,
            sigma_obs: self.sigma_obs,
            label_shared,
            label_unique,
            sigma_label: self.sigma_label,
            count_modality: self.count_modality,
        };
        model.validate()?;
        Ok(model)
    }
}

/// Generated dataset: one feature matrix per modality plus labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticRegionDataset {
    pub modalities: Vec<Tensor2D>,
    pub labels: Vec<f64>,
    /// Quantile-binned 5-class labels in {0..4}.
    pub classes: Vec<u8>,
    pub count_modality: Option<usize>,
    pub seed: u64,
    pub model: GaussianFactorModel,
}

impl SyntheticRegionDataset {
    pub fn num_regions(&self) -> usize {
        self.labels.len()
    }

    pub fn num_modalities(&self) -> usize {
        self.modalities.len()
    }

    /// View with only the listed modalities, in the listed order.
    pub fn restrict_modalities(&self, subset: &[usize]) -> Result<SyntheticRegionDataset> {
        for &i in subset {
            if i >= self.num_modalities() {
                return Err(Error::Input(format!(
                    "modality {i} out of range 0..{}",
                    self.num_modalities()
                )));
            }
        }
        let count_modality = self
            .count_modality
            .and_then(|c| subset.iter().position(|&s| s == c));
        Ok(SyntheticRegionDataset {
            modalities: subset.iter().map(|&i| self.modalities[i].clone()).collect(),
            labels: self.labels.clone(),
            classes: self.classes.clone(),
            count_modality,
            seed: self.seed,
            model: self.model.clone(),
        })
    }
}

const COUNT_LINK_CLAMP: f64 = 8.0;
const NUM_CLASSES: usize = 5;

/// Draws the dataset: per region, shared latent s ~ N(0, I) and unique
/// latents u_i ~ N(0, I); modality_i = A_i s + B_i u_i + N(0, sigma_obs^2);
/// the count modality is passed through exp-then-Poisson; the label is
/// w_s . s + sum_i w_u[i] . u_i + N(0, sigma_label^2).
pub fn generate(
    model: &GaussianFactorModel,
    n: usize,
    seed: u64,
) -> Result<SyntheticRegionDataset> {
    model.validate()?;
    if n < 2 {
        return Err(Error::Input(format!("generate needs n >= 2, got {n}")));
    }
    let m = model.num_modalities();
    let dims = model.modality_dims();
    let mut modalities: Vec<Tensor2D> = dims.iter().map(|&d| Tensor2D::zeros(n, d)).collect();
    let mut labels = vec![0.0; n];

    for r in 0..n {
        let mut rng = Rng::stream(seed, &[REGION_STREAM, r as u64]);
        let shared: Vec<f64> = (0..model.shared_dim).map(|_| rng.normal()).collect();
        let mut label = crate::numerics::dot(&model.label_shared, &shared);
        for i in 0..m {
            let unique: Vec<f64> = (0..model.unique_dims[i]).map(|_| rng.normal()).collect();
            label += crate::numerics::dot(&model.label_unique[i], &unique);
            let a = &model.loadings_shared[i];
            let b = &model.loadings_unique[i];
            let row = modalities[i].row_mut(r);
            for (d, slot) in row.iter_mut().enumerate() {
                let mut v = crate::numerics::dot(a.row(d), &shared)
                    + crate::numerics::dot(b.row(d), &unique);
                v += model.sigma_obs * rng.normal();
                *slot = v;
            }
            if model.count_modality == Some(i) {
                for slot in modalities[i].row_mut(r) {
                    let rate = slot.clamp(-COUNT_LINK_CLAMP, COUNT_LINK_CLAMP).exp();
                    *slot = rng.poisson(rate) as f64;
                }
            }
        }
        label += model.sigma_label * rng.normal();
        labels[r] = label;
    }

    let classes = quantile_classes(&labels);
    Ok(SyntheticRegionDataset {
        modalities,
        labels,
        classes,
        count_modality: model.count_modality,
        seed,
        model: model.clone(),
    })
}

/// Quantile bins: rank order, then split into 5 contiguous chunks whose
/// sizes differ by at most one. Ties broken by index for determinism.
fn quantile_classes(labels: &[f64]) -> Vec<u8> {
    let n = labels.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        labels[a]
            .partial_cmp(&labels[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let base = n / NUM_CLASSES;
    let rem = n % NUM_CLASSES;
    let mut classes = vec![0u8; n];
    let mut cursor = 0;
    for c in 0..NUM_CLASSES {
        let size = base + usize::from(c < rem);
        for &idx in &order[cursor..cursor + size] {
            classes[idx] = c as u8;
        }
        cursor += size;
    }
    classes
}

/// Exact MI between the pre-Poisson linear-Gaussian modality vectors, from
/// the closed-form Gaussian MI on the implied joint covariance. Count
/// modalities are refused rather than approximated.
pub fn ground_truth_mi(model: &GaussianFactorModel, a: usize, b: usize) -> Result<f64> {
    model.validate()?;
    let m = model.num_modalities();
    if a == b || a >= m || b >= m {
        return Err(Error::Input(format!(
            "ground_truth_mi needs distinct modalities < {m}, got ({a}, {b})"
        )));
    }
    if model.count_modality == Some(a) || model.count_modality == Some(b) {
        return Err(Error::Unsupported(
            "exact MI is not defined for the Poisson count modality".into(),
        ));
    }
    let dims = model.modality_dims();
    let (da, db) = (dims[a], dims[b]);
    // Sigma_xx = A_x A_x^T + B_x B_x^T + sigma^2 I; Sigma_ab = A_a A_b^T.
    let cov_block = |x: usize| -> Result<Tensor2D> {
        let a_l = &model.loadings_shared[x];
        let b_l = &model.loadings_unique[x];
        let mut c = a_l.matmul_transpose_b(a_l)?;
        c.add_assign(&b_l.matmul_transpose_b(b_l)?)?;
        for i in 0..c.rows() {
            let v = c.get(i, i) + model.sigma_obs * model.sigma_obs;
            c.set(i, i, v);
        }
        Ok(c)
    };
    let caa = cov_block(a)?;
    let cbb = cov_block(b)?;
    let cab = model.loadings_shared[a].matmul_transpose_b(&model.loadings_shared[b])?;
    let total = da + db;
    let mut joint = Tensor2D::zeros(total, total);
    for i in 0..da {
        for j in 0..da {
            joint.set(i, j, caa.get(i, j));
        }
        for j in 0..db {
            joint.set(i, da + j, cab.get(i, j));
            joint.set(da + j, i, cab.get(i, j));
        }
    }
    for i in 0..db {
        for j in 0..db {
            joint.set(da + i, da + j, cbb.get(i, j));
        }
    }
    gaussian_mi(&GaussianPair::new(da, db, joint)?)
}

/// Correlated scalar Gaussian pair sampler: x ~ N(0,1),
/// y = rho x + sqrt(1 - rho^2) e. Used by the estimator sandwich checks.
pub fn sample_correlated_pairs(rho: f64, n: usize, seed: u64) -> Result<(Tensor2D, Tensor2D)> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::Input(format!("correlation {rho} outside [-1, 1]")));
    }
    let mut rng = Rng::stream(seed, &[0x7061_6972]);
    let resid = (1.0 - rho * rho).sqrt();
    let mut a = Tensor2D::zeros(n, 1);
    let mut b = Tensor2D::zeros(n, 1);
    for i in 0..n {
        let x = rng.normal();
        let y = rho * x + resid * rng.normal();
        a.set(i, 0, x);
        b.set(i, 0, y);
    }
    Ok((a, b))
}

// ---------------------------------------------------------------------------
// Serialization: one CSV per modality, a labels CSV, and a JSON manifest.
// f64 values use the shortest round-trip formatting, so load(save(x)) == x
// bit for bit.
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct DatasetManifest {
    n: usize,
    seed: u64,
    modality_dims: Vec<usize>,
    count_modality: Option<usize>,
    model: GaussianFactorModel,
}

pub fn matrix_to_csv(t: &Tensor2D) -> String {
    let mut out = String::new();
    for r in 0..t.rows() {
        let mut first = true;
        for v in t.row(r) {
            if !first {
                out.push(',');
            }
            out.push_str(&format!("{v}"));
            first = false;
        }
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str) -> Result<Tensor2D> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            line.split(',')
                .map(|f| {
                    f.trim()
                        .parse()
                        .map_err(|e| Error::parse("matrix csv", format!("bad value {f:?}: {e}")))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Tensor2D::from_rows(&rows)
}

impl SyntheticRegionDataset {
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let manifest = DatasetManifest {
            n: self.num_regions(),
            seed: self.seed,
            modality_dims: self.modalities.iter().map(Tensor2D::cols).collect(),
            count_modality: self.count_modality,
            model: self.model.clone(),
        };
        let manifest_json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::parse("dataset manifest", e.to_string()))?;
        fs::write(dir.join("dataset.json"), manifest_json)?;
        for (i, modality) in self.modalities.iter().enumerate() {
            fs::write(
                dir.join(format!("modality_{i}.csv")),
                matrix_to_csv(modality),
            )?;
        }
        let mut labels = String::from("y,class\n");
        for (y, c) in self.labels.iter().zip(&self.classes) {
            labels.push_str(&format!("{y},{c}\n"));
        }
        fs::write(dir.join("labels.csv"), labels)?;
        Ok(())
    }

    pub fn load_dir(dir: &Path) -> Result<SyntheticRegionDataset> {
        let manifest: DatasetManifest =
            serde_json::from_str(&fs::read_to_string(dir.join("dataset.json"))?)
                .map_err(|e| Error::parse("dataset manifest", e.to_string()))?;
        let mut modalities = Vec::with_capacity(manifest.modality_dims.len());
        for i in 0..manifest.modality_dims.len() {
            let text = fs::read_to_string(dir.join(format!("modality_{i}.csv")))?;
            modalities.push(matrix_from_csv(&text)?);
        }
        let labels_text = fs::read_to_string(dir.join("labels.csv"))?;
        let mut labels = Vec::new();
        let mut classes = Vec::new();
        for (ln, line) in labels_text.lines().enumerate() {
            if ln == 0 || line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let y: f64 = fields
                .next()
                .ok_or_else(|| Error::parse("labels.csv", "missing y"))?
                .parse()
                .map_err(|e| Error::parse("labels.csv", format!("bad y: {e}")))?;
            let c: u8 = fields
                .next()
                .ok_or_else(|| Error::parse("labels.csv", "missing class"))?
                .trim()
                .parse()
                .map_err(|e| Error::parse("labels.csv", format!("bad class: {e}")))?;
            labels.push(y);
            classes.push(c);
        }
        Ok(SyntheticRegionDataset {
            modalities,
            labels,
            classes,
            count_modality: manifest.count_modality,
            seed: manifest.seed,
            model: manifest.model,
        })
    }
}

/// Stable checksum of the serialized dataset (FNV-1a over the CSV bytes),
/// used by golden determinism tests.
pub fn dataset_checksum(ds: &SyntheticRegionDataset) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    for m in &ds.modalities {
        feed(matrix_to_csv(m).as_bytes());
    }
    for (y, c) in ds.labels.iter().zip(&ds.classes) {
        feed(format!("{y},{c}\n").as_bytes());
    }
    hash
}
