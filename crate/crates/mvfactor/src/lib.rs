//! Factorized multi-view contrastive representation learning at desk scale.
//!
//! The crate trains per-modality MLP encoders on synthetic multi-view
//! "region" data with two inter-view objective schemes — a pairwise scheme
//! whose objective count grows as O(m^2) in the number of modalities, and a
//! factorized scheme that enumerates all 2^m - 1 unique / conditional-shared /
//! high-order objectives — and verifies the estimators, identities, and
//! complexity claims behind them against exact oracles:
//!
//! - [`numerics`]: dense f64 matrices, a fixed-architecture MLP with
//!   reverse-mode gradients, Adam, and a finite-difference gradient checker.
//! - [`augment`]: modality-specific augmentations producing positive views.
//! - [`estimators`]: trainable mutual-information bounds (noise-contrastive
//!   lower bound, score-difference upper bound, conditional variants).
//! - [`objectives`]: the objective algebra for both schemes plus the
//!   intra-view contrastive loss and the joint loss.
//! - [`oracle`]: exact discrete mutual information / conditional MI /
//!   interaction information by enumeration, and the Gaussian closed form.
//! - [`synth`]: seeded linear-Gaussian multi-view generators with
//!   analytically known shared/unique structure.
//! - [`train`]: intra-view pretraining and joint inter-view training.
//! - [`eval`]: downstream probes, ablations, modality sweeps, and the
//!   parameter/FLOP complexity accountant.
//! - [`verify`]: self-contained property suites (oracle, gradients,
//!   estimator sandwich) used by the CLI and the acceptance tests.
//!
//! Everything is deterministic: the same seeds and configs reproduce
//! bit-identical datasets, models, and reports.

pub mod augment;
pub mod error;
pub mod estimators;
pub mod eval;
pub mod numerics;
pub mod objectives;
pub mod oracle;
pub mod rng;
pub mod synth;
pub mod train;
pub mod verify;

pub use error::{Error, Result};
