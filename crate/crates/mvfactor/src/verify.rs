//! Self-contained property suites.
//!
//! Three named suites back the `verify` CLI command and the acceptance
//! tests: `oracle` (exact information-theory identities on random joints),
//! `grad` (finite-difference checks of every estimator, the intra-view
//! loss, and the assembled joint loss), and `sandwich` (trained estimator
//! bounds bracketing a known Gaussian mutual information).

use serde::Serialize;

use crate::error::Result;
use crate::estimators::ClubMode;
use crate::estimators::{
    club, club_with_grads, conditional_club_with_grads, conditional_info_nce_with_grads,
    fit_critic_nce, info_nce, info_nce_with_grads, Critic, NegativeShuffle,
};
use crate::numerics::{grad_check_flat, Tensor2D};
use crate::objectives::{
    assemble, evaluate_assembly, instantiate_critics, intra_loss, intra_loss_with_grads, Scheme,
};
use crate::oracle::{
    discrete_mi, gaussian_mi, interaction_info, verify_inclusion_identity, DiscreteJoint,
    GaussianPair,
};
use crate::rng::{mix, Rng};
use crate::synth::sample_correlated_pairs;

/// One named pass/fail check with a human-readable measurement.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(suite: &str, name: &str, passed: bool, detail: String) -> Check {
        Check {
            suite: suite.to_string(),
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

pub fn checks_csv(checks: &[Check]) -> String {
    let mut out = String::from("suite,check,passed,detail\n");
    for c in checks {
        out.push_str(&format!(
            "{},{},{},\"{}\"\n",
            c.suite, c.name, c.passed, c.detail
        ));
    }
    out
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

// ---------------------------------------------------------------------------
// Oracle suite
// ---------------------------------------------------------------------------

pub const ORACLE_JOINT_COUNT: usize = 1000;
pub const INCLUSION_TOL: f64 = 1e-10;
pub const SYMMETRY_TOL: f64 = 1e-12;

fn random_joint_sizes(seed: u64) -> Vec<usize> {
    // Alphabets in 2..=4 per the oracle's enumeration budget.
    vec![
        2 + (seed % 3) as usize,
        2 + ((seed / 3) % 3) as usize,
        2 + ((seed / 9) % 3) as usize,
    ]
}

/// Exact-identity checks over seeded random 3-variable joints.
pub fn oracle_suite() -> Result<Vec<Check>> {
    let suite = "oracle";
    let mut checks = Vec::new();

    let mut worst_residual = 0.0f64;
    for seed in 0..ORACLE_JOINT_COUNT as u64 {
        let joint = DiscreteJoint::random(random_joint_sizes(seed), seed)?;
        let r = verify_inclusion_identity(&joint)?.abs();
        worst_residual = worst_residual.max(r);
    }
    checks.push(Check::new(
        suite,
        "inclusion_identity_residual",
        worst_residual < INCLUSION_TOL,
        format!("max |residual| over {ORACLE_JOINT_COUNT} joints = {worst_residual:.3e}"),
    ));

    let mut worst_asym = 0.0f64;
    for seed in 0..200u64 {
        let joint = DiscreteJoint::random(random_joint_sizes(seed), mix(seed, 0x7379))?;
        let base = interaction_info(&joint, 0, 1, 2)?;
        for (a, b, c) in [(0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)] {
            worst_asym = worst_asym.max((interaction_info(&joint, a, b, c)? - base).abs());
        }
    }
    checks.push(Check::new(
        suite,
        "interaction_info_symmetry",
        worst_asym < SYMMETRY_TOL,
        format!("max asymmetry over 200 joints x 6 permutations = {worst_asym:.3e}"),
    ));

    let mut worst_chain = 0.0f64;
    for seed in 0..200u64 {
        let joint = DiscreteJoint::random(random_joint_sizes(seed), mix(seed, 0x6368))?;
        let mi = discrete_mi(&joint, 0, 1)?;
        let ii = interaction_info(&joint, 0, 1, 2)?;
        let cmi = crate::oracle::discrete_cmi(&joint, 0, 1, 2)?;
        worst_chain = worst_chain.max((mi - (ii + cmi)).abs());
    }
    checks.push(Check::new(
        suite,
        "chain_identity",
        worst_chain < SYMMETRY_TOL,
        format!("max |I(a;b) - (II + I(a;b|c))| = {worst_chain:.3e}"),
    ));

    // Closed-form Gaussian MI agrees with grid enumeration at rho = 0.8.
    let exact = gaussian_mi(&GaussianPair::scalar_with_correlation(0.8)?)?;
    let grid = discrete_mi(
        &crate::oracle::discretized_scalar_gaussian(0.8, 200, 6.0)?,
        0,
        1,
    )?;
    checks.push(Check::new(
        suite,
        "gaussian_grid_cross_check",
        (exact - grid).abs() < 0.01,
        format!("closed form {exact:.6} vs 200x200 grid {grid:.6}"),
    ));

    Ok(checks)
}

// ---------------------------------------------------------------------------
// Gradient suite
// ---------------------------------------------------------------------------

pub const GRAD_TOL: f64 = 1e-4;
const FD_EPS: f64 = 1e-5;

/// Finite-difference check of one estimator over critic parameters and all
/// input embeddings, on a small net.
fn estimator_grad_check(kind: &str, seed: u64) -> Result<f64> {
    let n = 16;
    let (da, db) = (4, 4);
    let dc = if kind.starts_with("conditional") {
        8
    } else {
        0
    };
    let mut rng = Rng::stream(seed, &[0x6764]);
    let z_a = Tensor2D::randn(n, da, 1.0, &mut rng);
    let z_b = Tensor2D::randn(n, db, 1.0, &mut rng);
    let cond = (dc > 0).then(|| Tensor2D::randn(n, dc, 1.0, &mut rng));
    let critic = Critic::with_hidden(da + db + dc, 8, mix(seed, 2))?;
    let shuffle = NegativeShuffle::Seeded(mix(seed, 3));

    let mut theta = critic.params.flatten();
    theta.extend_from_slice(z_a.data());
    theta.extend_from_slice(z_b.data());
    if let Some(c) = &cond {
        theta.extend_from_slice(c.data());
    }
    let eval = |flat: &[f64], want: bool| -> Result<(f64, Vec<f64>)> {
        let mut c = critic.clone();
        let p = c.params.num_params();
        c.params.assign_from_flat(&flat[..p])?;
        let za = Tensor2D::new(n, da, flat[p..p + n * da].to_vec())?;
        let zb = Tensor2D::new(n, db, flat[p + n * da..p + n * da + n * db].to_vec())?;
        let cc = (dc > 0)
            .then(|| Tensor2D::new(n, dc, flat[p + n * da + n * db..].to_vec()))
            .transpose()?;
        let (value, grads) = match kind {
            "info_nce" => {
                let (e, g) = info_nce_with_grads(&za, &zb, &c)?;
                (e.value, g)
            }
            "conditional_info_nce" => {
                let (e, g) = conditional_info_nce_with_grads(&za, &zb, cc.as_ref().unwrap(), &c)?;
                (e.value, g)
            }
            "club" => {
                let (e, g) = club_with_grads(&za, &zb, &c, &shuffle)?;
                (e.value, g)
            }
            "conditional_club" => {
                let (e, g) =
                    conditional_club_with_grads(&za, &zb, cc.as_ref().unwrap(), &c, &shuffle)?;
                (e.value, g)
            }
            other => unreachable!("unknown estimator {other}"),
        };
        if !want {
            return Ok((value, Vec::new()));
        }
        let mut flat_g = grads.critic.flatten();
        flat_g.extend_from_slice(grads.z_a.data());
        flat_g.extend_from_slice(grads.z_b.data());
        if let Some(gc) = &grads.cond {
            flat_g.extend_from_slice(gc.data());
        }
        Ok((value, flat_g))
    };
    let (_, analytic) = eval(&theta, true)?;
    grad_check_flat(
        |f| eval(f, false).map(|(v, _)| v),
        &theta,
        &analytic,
        FD_EPS,
    )
}

fn intra_grad_check(seed: u64) -> Result<f64> {
    let n = 16;
    let d = 8;
    let mut rng = Rng::stream(seed, &[0x6974]);
    let z = Tensor2D::randn(n, d, 1.0, &mut rng);
    let z_pos = Tensor2D::randn(n, d, 1.0, &mut rng);
    let tau = 0.5;
    let mut theta = z.data().to_vec();
    theta.extend_from_slice(z_pos.data());
    let (_, gz, gp) = intra_loss_with_grads(&z, &z_pos, tau)?;
    let mut analytic = gz.data().to_vec();
    analytic.extend_from_slice(gp.data());
    grad_check_flat(
        |flat| {
            let z = Tensor2D::new(n, d, flat[..n * d].to_vec())?;
            let zp = Tensor2D::new(n, d, flat[n * d..].to_vec())?;
            intra_loss(&z, &zp, tau)
        },
        &theta,
        &analytic,
        FD_EPS,
    )
}

/// End-to-end check of the joint loss (alpha * intra - objective sum) as a
/// function of every critic parameter and both embedding views, on a
/// 2-modality, dim-4, batch-8 instance.
fn joint_loss_grad_check(seed: u64) -> Result<f64> {
    let m = 2;
    let embed_dim = 4;
    let n = 8;
    let alpha = 0.7;
    let tau = 0.4;
    let assembly = assemble(m, Scheme::Pairwise)?;
    let critics = instantiate_critics(&assembly, embed_dim, Some(8), mix(seed, 5))?;
    let mut rng = Rng::stream(seed, &[0x6a6c]);
    let embeds: Vec<Tensor2D> = (0..m)
        .map(|_| Tensor2D::randn(n, embed_dim, 1.0, &mut rng))
        .collect();
    let augs: Vec<Tensor2D> = (0..m)
        .map(|_| Tensor2D::randn(n, embed_dim, 1.0, &mut rng))
        .collect();

    let mut theta = Vec::new();
    for c in &critics {
        theta.extend(c.params.flatten());
    }
    for t in embeds.iter().chain(&augs) {
        theta.extend_from_slice(t.data());
    }
    let unpack = |flat: &[f64]| -> Result<(Vec<Critic>, Vec<Tensor2D>, Vec<Tensor2D>)> {
        let mut cs = critics.clone();
        let mut offset = 0;
        for c in &mut cs {
            let p = c.params.num_params();
            c.params.assign_from_flat(&flat[offset..offset + p])?;
            offset += p;
        }
        let mut views = Vec::new();
        for _ in 0..2 * m {
            views.push(Tensor2D::new(
                n,
                embed_dim,
                flat[offset..offset + n * embed_dim].to_vec(),
            )?);
            offset += n * embed_dim;
        }
        let augs = views.split_off(m);
        Ok((cs, views, augs))
    };
    let loss_of = |cs: &[Critic], embeds: &[Tensor2D], augs: &[Tensor2D]| -> Result<f64> {
        let eval = evaluate_assembly(&assembly, cs, embeds, augs, 9, ClubMode::Sampled, false)?;
        let mut intra_total = 0.0;
        for i in 0..m {
            intra_total += intra_loss(&embeds[i], &augs[i], tau)?;
        }
        Ok(alpha * intra_total - eval.total)
    };

    let (cs, e0, a0) = unpack(&theta)?;
    let eval = evaluate_assembly(&assembly, &cs, &e0, &a0, 9, ClubMode::Sampled, true)?;
    let g = eval.grads.unwrap();
    let mut analytic = Vec::new();
    for c in &g.critics {
        let mut neg = c.flatten();
        for v in &mut neg {
            *v = -*v;
        }
        analytic.extend(neg);
    }
    // View gradients in theta order: all raw views, then all augmented.
    let mut intra_grads = Vec::with_capacity(m);
    for i in 0..m {
        let (_, gz, gp) = intra_loss_with_grads(&e0[i], &a0[i], tau)?;
        intra_grads.push((gz, gp));
    }
    for i in 0..m {
        let mut embed_grad = g.embeds[i].clone();
        embed_grad.scale_in_place(-1.0);
        let mut gz = intra_grads[i].0.clone();
        gz.scale_in_place(alpha);
        embed_grad.add_assign(&gz)?;
        analytic.extend_from_slice(embed_grad.data());
    }
    for i in 0..m {
        let mut aug_grad = g.augs[i].clone();
        aug_grad.scale_in_place(-1.0);
        let mut gp = intra_grads[i].1.clone();
        gp.scale_in_place(alpha);
        aug_grad.add_assign(&gp)?;
        analytic.extend_from_slice(aug_grad.data());
    }

    grad_check_flat(
        |flat| {
            let (cs, embeds, augs) = unpack(flat)?;
            loss_of(&cs, &embeds, &augs)
        },
        &theta,
        &analytic,
        FD_EPS,
    )
}

/// Finite-difference gradient checks for every estimator, the intra-view
/// loss, and the assembled joint loss.
pub fn grad_suite() -> Result<Vec<Check>> {
    let suite = "grad";
    let mut checks = Vec::new();
    for kind in [
        "info_nce",
        "conditional_info_nce",
        "club",
        "conditional_club",
    ] {
        let err = estimator_grad_check(kind, 11)?;
        checks.push(Check::new(
            suite,
            kind,
            err < GRAD_TOL,
            format!("max relative error {err:.3e}"),
        ));
    }
    let err = intra_grad_check(13)?;
    checks.push(Check::new(
        suite,
        "intra_loss",
        err < GRAD_TOL,
        format!("max relative error {err:.3e}"),
    ));
    let err = joint_loss_grad_check(17)?;
    checks.push(Check::new(
        suite,
        "joint_loss",
        err < GRAD_TOL,
        format!("max relative error {err:.3e}"),
    ));
    Ok(checks)
}

// ---------------------------------------------------------------------------
// Sandwich suite
// ---------------------------------------------------------------------------

pub const SANDWICH_RHO: f64 = 0.8;
pub const SANDWICH_BATCH: usize = 128;
pub const SANDWICH_SEEDS: u64 = 10;
const SANDWICH_TRAIN_STEPS: usize = 150;
const SANDWICH_LR: f64 = 5e-3;
const SANDWICH_EVAL_BATCHES: u64 = 8;

#[derive(Debug, Clone, Serialize)]
pub struct SandwichOutcome {
    pub true_mi: f64,
    pub nce_per_seed: Vec<f64>,
    pub club_per_seed: Vec<f64>,
    pub nce_mean: f64,
    pub club_mean: f64,
}

/// Trains one critic per seed with the noise-contrastive objective on
/// fresh correlated-Gaussian batches and evaluates both bounds on held-out
/// batches.
pub fn sandwich_outcome() -> Result<SandwichOutcome> {
    let true_mi = gaussian_mi(&GaussianPair::scalar_with_correlation(SANDWICH_RHO)?)?;
    let mut nce_per_seed = Vec::new();
    let mut club_per_seed = Vec::new();
    for seed in 0..SANDWICH_SEEDS {
        let mut critic = Critic::with_hidden(2, 8, mix(seed, 0x7377))?;
        fit_critic_nce(
            &mut critic,
            |step| {
                let (a, b) = sample_correlated_pairs(
                    SANDWICH_RHO,
                    SANDWICH_BATCH,
                    mix(seed, 0x1000 + step as u64),
                )?;
                Ok((a, b, None))
            },
            SANDWICH_TRAIN_STEPS,
            SANDWICH_LR,
        )?;
        let mut nce_sum = 0.0;
        let mut club_sum = 0.0;
        for k in 0..SANDWICH_EVAL_BATCHES {
            let (a, b) =
                sample_correlated_pairs(SANDWICH_RHO, SANDWICH_BATCH, mix(seed, 0x9000 + k))?;
            let nce = info_nce(&a, &b, &critic)?;
            // The ceiling must hold on every batch.
            assert!(nce.value <= (SANDWICH_BATCH as f64).ln() + 1e-9);
            nce_sum += nce.value;
            club_sum += club(
                &a,
                &b,
                &critic,
                &NegativeShuffle::Seeded(mix(seed, 0xa000 + k)),
            )?
            .value;
        }
        nce_per_seed.push(nce_sum / SANDWICH_EVAL_BATCHES as f64);
        club_per_seed.push(club_sum / SANDWICH_EVAL_BATCHES as f64);
    }
    let nce_mean = nce_per_seed.iter().sum::<f64>() / nce_per_seed.len() as f64;
    let club_mean = club_per_seed.iter().sum::<f64>() / club_per_seed.len() as f64;
    Ok(SandwichOutcome {
        true_mi,
        nce_per_seed,
        club_per_seed,
        nce_mean,
        club_mean,
    })
}

/// Trained-estimator bracket of the known scalar-Gaussian MI at rho = 0.8.
pub fn sandwich_suite() -> Result<Vec<Check>> {
    let suite = "sandwich";
    let outcome = sandwich_outcome()?;
    let ceiling = (SANDWICH_BATCH as f64).ln();
    let mut checks = Vec::new();

    let nce_in_range = outcome
        .nce_per_seed
        .iter()
        .all(|&v| (0.30..=ceiling).contains(&v));
    checks.push(Check::new(
        suite,
        "nce_estimate_range",
        nce_in_range,
        format!(
            "per-seed lower-bound estimates {:?} within [0.30, ln {}]",
            outcome
                .nce_per_seed
                .iter()
                .map(|v| (v * 1e4).round() / 1e4)
                .collect::<Vec<_>>(),
            SANDWICH_BATCH
        ),
    ));

    let club_in_range = outcome
        .club_per_seed
        .iter()
        .all(|&v| (0.40..=1.20).contains(&v));
    checks.push(Check::new(
        suite,
        "club_estimate_range",
        club_in_range,
        format!(
            "per-seed upper-bound estimates {:?} within [0.40, 1.20]",
            outcome
                .club_per_seed
                .iter()
                .map(|v| (v * 1e4).round() / 1e4)
                .collect::<Vec<_>>()
        ),
    ));

    checks.push(Check::new(
        suite,
        "mean_bracket",
        outcome.nce_mean <= outcome.true_mi + 0.10
            && outcome.true_mi + 0.10 <= outcome.club_mean + 0.20,
        format!(
            "nce mean {:.4} <= true {:.4} + 0.10 <= club mean {:.4} + 0.20",
            outcome.nce_mean, outcome.true_mi, outcome.club_mean
        ),
    ));

    Ok(checks)
}
