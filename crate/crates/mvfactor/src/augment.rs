//! Modality-specific augmentation operators.
//!
//! Each operator produces the positive view used by intra-view contrastive
//! learning and doubles as the label proxy for the inter-view objectives.
//! All operators are pure functions of (input, spec): the seed lives in the
//! spec, so replays are bit-identical and concurrent use is safe.
//!
//! Count perturbation triggers per category with probability `p` and then
//! applies exactly one of {add one, remove one (clamped at zero), move one
//! unit to a uniformly chosen other category}. Feature noise scales the
//! whole vector by a single random factor in [1 - jitter, 1 + jitter] and
//! adds i.i.d. Gaussian noise. Building drop removes a uniform fraction of
//! per-building vectors (always leaving at least one) and returns the mean
//! of the survivors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AugmentSpec {
    /// Per-category count perturbation with trigger probability `probability`.
    CountPerturb { probability: f64, rng_seed: u64 },
    /// Multiplicative scale jitter of half-width `scale_jitter` plus
    /// additive Gaussian noise of standard deviation `noise_sigma`.
    FeatureNoise {
        noise_sigma: f64,
        scale_jitter: f64,
        rng_seed: u64,
    },
    /// Drop `floor(drop_fraction * n)` vectors before aggregating.
    BuildingDrop { drop_fraction: f64, rng_seed: u64 },
}

impl AugmentSpec {
    pub fn count_perturb(rng_seed: u64) -> Self {
        AugmentSpec::CountPerturb {
            probability: 0.1,
            rng_seed,
        }
    }

    pub fn feature_noise(noise_sigma: f64, rng_seed: u64) -> Self {
        AugmentSpec::FeatureNoise {
            noise_sigma,
            scale_jitter: 0.1,
            rng_seed,
        }
    }

    pub fn building_drop(rng_seed: u64) -> Self {
        AugmentSpec::BuildingDrop {
            drop_fraction: 0.10,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            AugmentSpec::CountPerturb { probability, .. } => {
                if !(0.0..=1.0).contains(&probability) {
                    return Err(Error::Input(format!(
                        "count perturb probability {probability} outside [0, 1]"
                    )));
                }
            }
            AugmentSpec::FeatureNoise {
                noise_sigma,
                scale_jitter,
                ..
            } => {
                if noise_sigma < 0.0 || !noise_sigma.is_finite() {
                    return Err(Error::Input(format!(
                        "noise_sigma {noise_sigma} must be >= 0"
                    )));
                }
                if scale_jitter < 0.0 || !scale_jitter.is_finite() {
                    return Err(Error::Input(format!(
                        "scale_jitter {scale_jitter} must be >= 0"
                    )));
                }
            }
            AugmentSpec::BuildingDrop { drop_fraction, .. } => {
                if !(0.0..=1.0).contains(&drop_fraction) {
                    return Err(Error::Input(format!(
                        "drop_fraction {drop_fraction} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }
}

const AUG_STREAM: u64 = 0x6175_676d;

/// Perturbs a nonnegative count vector per the count-perturbation recipe.
///
/// For each category independently, with probability `p`, exactly one of
/// addition (+1), removal (-1 clamped at 0), or replacement (move one unit
/// to a uniformly chosen other category) is applied. Draw order per
/// category: trigger uniform, then a uniform choice among the three
/// techniques, then (for replacement) the target category index among the
/// others.
pub fn augment_counts(counts: &[u64], spec: &AugmentSpec) -> Result<Vec<u64>> {
    let AugmentSpec::CountPerturb {
        probability,
        rng_seed,
    } = *spec
    else {
        return Err(Error::Input(
            "augment_counts needs a CountPerturb spec".into(),
        ));
    };
    spec.validate()?;
    if counts.is_empty() {
        return Err(Error::Input("augment_counts: empty count vector".into()));
    }
    let mut out = counts.to_vec();
    let mut rng = Rng::stream(rng_seed, &[AUG_STREAM, 1]);
    for i in 0..counts.len() {
        if rng.uniform() >= probability {
            continue;
        }
        match rng.index(3) {
            0 => out[i] += 1,
            1 => out[i] = out[i].saturating_sub(1),
            _ => {
                // Move one unit to another category; with a single category
                // or an empty source there is nothing to move.
                if counts.len() > 1 && out[i] > 0 {
                    let mut j = rng.index(counts.len() - 1);
                    if j >= i {
                        j += 1;
                    }
                    out[i] -= 1;
                    out[j] += 1;
                }
            }
        }
    }
    Ok(out)
}

/// Scales a real feature vector by a single random factor in
/// [1 - scale_jitter, 1 + scale_jitter] and adds N(0, noise_sigma^2) noise
/// per coordinate.
pub fn augment_features(features: &[f64], spec: &AugmentSpec) -> Result<Vec<f64>> {
    let AugmentSpec::FeatureNoise {
        noise_sigma,
        scale_jitter,
        rng_seed,
    } = *spec
    else {
        return Err(Error::Input(
            "augment_features needs a FeatureNoise spec".into(),
        ));
    };
    spec.validate()?;
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric(
            "augment_features",
            "non-finite input feature",
        ));
    }
    let mut rng = Rng::stream(rng_seed, &[AUG_STREAM, 2]);
    let scale = if scale_jitter == 0.0 {
        1.0
    } else {
        rng.uniform_in(1.0 - scale_jitter, 1.0 + scale_jitter)
    };
    Ok(features
        .iter()
        .map(|&v| {
            let noise = if noise_sigma == 0.0 {
                0.0
            } else {
                noise_sigma * rng.normal()
            };
            v * scale + noise
        })
        .collect())
}

/// Drops `floor(drop_fraction * n)` uniformly chosen building vectors
/// (guaranteeing at least one survivor) and returns the mean of the rest.
pub fn augment_building(buildings: &[Vec<f64>], spec: &AugmentSpec) -> Result<Vec<f64>> {
    let AugmentSpec::BuildingDrop {
        drop_fraction,
        rng_seed,
    } = *spec
    else {
        return Err(Error::Input(
            "augment_building needs a BuildingDrop spec".into(),
        ));
    };
    spec.validate()?;
    if buildings.is_empty() {
        return Err(Error::Input("augment_building: empty building list".into()));
    }
    let dim = buildings[0].len();
    if buildings.iter().any(|b| b.len() != dim) {
        return Err(Error::dimension(
            "augment_building",
            "ragged building vectors",
        ));
    }
    let n = buildings.len();
    let drop = ((drop_fraction * n as f64).floor() as usize).min(n - 1);
    let mut rng = Rng::stream(rng_seed, &[AUG_STREAM, 3]);
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let survivors = &order[drop..];
    let mut mean = vec![0.0; dim];
    for &idx in survivors {
        for (m, &v) in mean.iter_mut().zip(&buildings[idx]) {
            *m += v;
        }
    }
    let count = survivors.len() as f64;
    for m in &mut mean {
        *m /= count;
    }
    Ok(mean)
}
