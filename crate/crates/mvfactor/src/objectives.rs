//! The objective algebra.
//!
//! Two schemes enumerate the inter-view learning objectives over m
//! modalities:
//!
//! - `Pairwise`: one unique objective per modality plus one shared objective
//!   per unordered pair — m(m+1)/2 objectives, O(m^2) estimator terms.
//! - `Factorized`: one objective per nonempty modality subset — singletons
//!   are unique objectives, larger subsets are conditional shared
//!   objectives given the complement (the full set is the unconditioned
//!   high-order objective) — 2^m - 1 objectives, O(2^m) terms.
//!
//! Each objective expands into signed estimator terms, every term owning a
//! dedicated critic. The label never appears: under the
//! augmentation-as-label-proxy assumption, each term conditions on the
//! concatenated augmented embeddings of the two modalities whose mutual
//! information it scores.
//!
//! The expansion of a conditional shared objective over members
//! {m1, m2, e1..er} given G follows the interaction-information recursion:
//! sum over subsets S of {e1..er, proxy} of (-1)^|S| I(m1; m2 | G, S),
//! realized as a noise-contrastive lower bound when the sign is positive
//! and the score-difference upper bound when negative. For a pair given one
//! conditioner this is the familiar two-term form, and for an unconditioned
//! triple the four-term form.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    club_full_with_grads, club_with_grads, conditional_club_full_with_grads,
    conditional_club_with_grads, conditional_info_nce_with_grads, info_nce_with_grads, ClubMode,
    Critic, EstimatorGrads, NegativeShuffle,
};
use crate::numerics::{log_sum_exp, MlpParams, Tensor2D};
use crate::rng::mix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Pairwise,
    Factorized,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Pairwise => write!(f, "pairwise"),
            Scheme::Factorized => write!(f, "factorized"),
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pairwise" => Ok(Scheme::Pairwise),
            "factorized" => Ok(Scheme::Factorized),
            other => Err(Error::Input(format!(
                "unknown scheme {other:?} (expected pairwise or factorized)"
            ))),
        }
    }
}

/// One learning objective. Modality indices are 0-based internally; the
/// canonical text form prints them 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveKind {
    Unique {
        modality: usize,
    },
    SharedPair {
        a: usize,
        b: usize,
    },
    /// Shared information among `members` given `given` (empty `given`
    /// means the unconditioned high-order objective).
    CondShared {
        members: Vec<usize>,
        given: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    pub scheme: Scheme,
}

impl ObjectiveSpec {
    /// Modalities the objective touches (members plus conditioning set).
    pub fn touched(&self) -> Vec<usize> {
        match &self.kind {
            ObjectiveKind::Unique { modality } => vec![*modality],
            ObjectiveKind::SharedPair { a, b } => vec![*a, *b],
            ObjectiveKind::CondShared { members, given } => {
                let mut t = members.clone();
                t.extend_from_slice(given);
                t
            }
        }
    }

    /// Canonical text form: U(1), S(1,2), S(1,2|3), H(1,2,3).
    pub fn label(&self) -> String {
        fn list(ix: &[usize]) -> String {
            ix.iter()
                .map(|i| (i + 1).to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
        match &self.kind {
            ObjectiveKind::Unique { modality } => format!("U({})", modality + 1),
            ObjectiveKind::SharedPair { a, b } => format!("S({},{})", a + 1, b + 1),
            ObjectiveKind::CondShared { members, given } => {
                if given.is_empty() {
                    if members.len() == 2 {
                        format!("S({})", list(members))
                    } else {
                        format!("H({})", list(members))
                    }
                } else {
                    format!("S({}|{})", list(members), list(given))
                }
            }
        }
    }
}

impl fmt::Display for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Enumerates the objectives of a scheme over m modalities.
///
/// Pairwise: all Unique(i) then all SharedPair(i < j). Factorized: all
/// Unique(i), then every modality subset of size >= 2 (ordered by size,
/// then lexicographically) conditioned on its complement.
pub fn enumerate_objectives(m: usize, scheme: Scheme) -> Result<Vec<ObjectiveSpec>> {
    if m < 2 {
        return Err(Error::Input(format!(
            "objective enumeration needs m >= 2, got {m}"
        )));
    }
    let mut out = Vec::new();
    for i in 0..m {
        out.push(ObjectiveSpec {
            kind: ObjectiveKind::Unique { modality: i },
            scheme,
        });
    }
    match scheme {
        Scheme::Pairwise => {
            for i in 0..m {
                for j in i + 1..m {
                    out.push(ObjectiveSpec {
                        kind: ObjectiveKind::SharedPair { a: i, b: j },
                        scheme,
                    });
                }
            }
        }
        Scheme::Factorized => {
            for size in 2..=m {
                for members in subsets_of_size(m, size) {
                    let given: Vec<usize> = (0..m).filter(|i| !members.contains(i)).collect();
                    out.push(ObjectiveSpec {
                        kind: ObjectiveKind::CondShared { members, given },
                        scheme,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn subsets_of_size(m: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn recurse(
        start: usize,
        m: usize,
        size: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for i in start..m {
            current.push(i);
            recurse(i + 1, m, size, current, out);
            current.pop();
        }
    }
    recurse(0, m, size, &mut current, &mut out);
    out
}

/// Which estimator a term invokes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorKind {
    Nce,
    CondNce,
    Club,
    CondClub,
}

/// What feeds an estimator argument slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArgRole {
    /// Raw-view embedding of a modality.
    Embed(usize),
    /// Augmented-view embedding of a modality (the label proxy).
    AugEmbed(usize),
}

/// One signed estimator invocation with a dedicated critic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossTerm {
    pub estimator: EstimatorKind,
    pub a: ArgRole,
    pub b: ArgRole,
    pub cond: Vec<ArgRole>,
    pub sign: f64,
    pub critic_id: usize,
}

impl LossTerm {
    /// Critic input width given a common embedding dimension.
    pub fn critic_input_width(&self, embed_dim: usize) -> usize {
        (2 + self.cond.len()) * embed_dim
    }

    pub fn label(&self) -> String {
        fn role(r: &ArgRole) -> String {
            match r {
                ArgRole::Embed(i) => format!("z{}", i + 1),
                ArgRole::AugEmbed(i) => format!("z{}'", i + 1),
            }
        }
        let sign = if self.sign >= 0.0 { "+" } else { "-" };
        let est = match self.estimator {
            EstimatorKind::Nce | EstimatorKind::CondNce => "NCE",
            EstimatorKind::Club | EstimatorKind::CondClub => "CLUB",
        };
        if self.cond.is_empty() {
            format!("{sign}{est}({},{})", role(&self.a), role(&self.b))
        } else {
            let cond = self.cond.iter().map(role).collect::<Vec<_>>().join(",");
            format!("{sign}{est}({},{}|{cond})", role(&self.a), role(&self.b))
        }
    }
}

/// An objective together with its expanded estimator terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveLossTerms {
    pub objective: ObjectiveSpec,
    pub terms: Vec<LossTerm>,
}

fn term(
    estimator: EstimatorKind,
    a: ArgRole,
    b: ArgRole,
    cond: Vec<ArgRole>,
    sign: f64,
    next_id: &mut usize,
) -> LossTerm {
    let critic_id = *next_id;
    *next_id += 1;
    LossTerm {
        estimator,
        a,
        b,
        cond,
        sign,
        critic_id,
    }
}

fn unique_terms_impl(i: usize, m: usize, next_id: &mut usize) -> Vec<LossTerm> {
    // Per partner j: keep the augmentation-aligned information of modality
    // i, remove the raw cross-modal dependence, add back the task-relevant
    // conditional dependence under the proxy.
    let mut terms = Vec::with_capacity(3 * (m - 1));
    for j in (0..m).filter(|&j| j != i) {
        terms.push(term(
            EstimatorKind::Nce,
            ArgRole::Embed(i),
            ArgRole::AugEmbed(i),
            vec![],
            1.0,
            next_id,
        ));
        terms.push(term(
            EstimatorKind::Club,
            ArgRole::Embed(i),
            ArgRole::Embed(j),
            vec![],
            -1.0,
            next_id,
        ));
        terms.push(term(
            EstimatorKind::CondNce,
            ArgRole::Embed(i),
            ArgRole::Embed(j),
            vec![ArgRole::AugEmbed(i), ArgRole::AugEmbed(j)],
            1.0,
            next_id,
        ));
    }
    terms
}

/// General expansion for shared information among `members` given `given`:
/// anchor the first two members and alternate signs over subsets of the
/// remaining members plus the proxy. Subsets are enumerated by bitmask with
/// the proxy as the highest bit, so the pair case yields
/// [+NCE(a,b|G), -CLUB(a,b|G,proxy)] and the unconditioned triple yields
/// [+NCE, -CLUB(|k), -CLUB(|proxy), +NCE(|k,proxy)].
fn cond_shared_terms_impl(
    members: &[usize],
    given: &[usize],
    next_id: &mut usize,
) -> Vec<LossTerm> {
    let (a, b) = (members[0], members[1]);
    let extras = &members[2..];
    let proxy = [ArgRole::AugEmbed(a), ArgRole::AugEmbed(b)];
    let bits = extras.len() + 1;
    let mut terms = Vec::with_capacity(1 << bits);
    for mask in 0u32..(1 << bits) {
        let mut cond: Vec<ArgRole> = given.iter().map(|&g| ArgRole::Embed(g)).collect();
        for (pos, &e) in extras.iter().enumerate() {
            if mask & (1 << pos) != 0 {
                cond.push(ArgRole::Embed(e));
            }
        }
        let with_proxy = mask & (1 << extras.len()) != 0;
        if with_proxy {
            cond.extend_from_slice(&proxy);
        }
        let sign = if mask.count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        let estimator = match (sign > 0.0, cond.is_empty()) {
            (true, true) => EstimatorKind::Nce,
            (true, false) => EstimatorKind::CondNce,
            (false, true) => EstimatorKind::Club,
            (false, false) => EstimatorKind::CondClub,
        };
        terms.push(term(
            estimator,
            ArgRole::Embed(a),
            ArgRole::Embed(b),
            cond,
            sign,
            next_id,
        ));
    }
    terms
}

/// Unique-information objective for modality i among m: per partner j,
/// +NCE(z_i, z_i'), -CLUB(z_i, z_j), +NCE(z_i, z_j | z_i', z_j').
pub fn unique_loss_terms(i: usize, m: usize) -> Result<ObjectiveLossTerms> {
    if i >= m || m < 2 {
        return Err(Error::Input(format!(
            "unique objective needs i < m and m >= 2, got i={i}, m={m}"
        )));
    }
    let mut next_id = 0;
    Ok(ObjectiveLossTerms {
        objective: ObjectiveSpec {
            kind: ObjectiveKind::Unique { modality: i },
            scheme: Scheme::Pairwise,
        },
        terms: unique_terms_impl(i, m, &mut next_id),
    })
}

/// Shared-pair objective: +NCE(z_i, z_j), -CLUB(z_i, z_j | z_i', z_j').
pub fn shared_pair_loss_terms(i: usize, j: usize) -> Result<ObjectiveLossTerms> {
    if i == j {
        return Err(Error::Input(format!(
            "shared pair needs distinct modalities, got ({i}, {j})"
        )));
    }
    let mut next_id = 0;
    Ok(ObjectiveLossTerms {
        objective: ObjectiveSpec {
            kind: ObjectiveKind::SharedPair { a: i, b: j },
            scheme: Scheme::Pairwise,
        },
        terms: cond_shared_terms_impl(&[i, j], &[], &mut next_id),
    })
}

/// Conditional shared pair: +NCE(z_i, z_j | z_k),
/// -CLUB(z_i, z_j | z_k, z_i', z_j').
pub fn cond_shared_loss_terms(i: usize, j: usize, k: usize) -> Result<ObjectiveLossTerms> {
    if i == j || i == k || j == k {
        return Err(Error::Input(format!(
            "conditional shared pair needs distinct modalities, got ({i}, {j}, {k})"
        )));
    }
    let mut next_id = 0;
    Ok(ObjectiveLossTerms {
        objective: ObjectiveSpec {
            kind: ObjectiveKind::CondShared {
                members: vec![i, j],
                given: vec![k],
            },
            scheme: Scheme::Factorized,
        },
        terms: cond_shared_terms_impl(&[i, j], &[k], &mut next_id),
    })
}

/// Unconditioned high-order objective over three modalities: four terms,
/// four critics.
pub fn high_order_loss_terms(i: usize, j: usize, k: usize) -> Result<ObjectiveLossTerms> {
    if i == j || i == k || j == k {
        return Err(Error::Input(format!(
            "high-order objective needs distinct modalities, got ({i}, {j}, {k})"
        )));
    }
    let mut next_id = 0;
    Ok(ObjectiveLossTerms {
        objective: ObjectiveSpec {
            kind: ObjectiveKind::CondShared {
                members: vec![i, j, k],
                given: vec![],
            },
            scheme: Scheme::Factorized,
        },
        terms: cond_shared_terms_impl(&[i, j, k], &[], &mut next_id),
    })
}

/// A scheme fully expanded into objectives and terms with globally unique
/// critic ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeAssembly {
    pub m: usize,
    pub scheme: Scheme,
    pub objectives: Vec<ObjectiveLossTerms>,
    pub num_critics: usize,
}

impl SchemeAssembly {
    pub fn num_terms(&self) -> usize {
        self.objectives.iter().map(|o| o.terms.len()).sum()
    }

    pub fn terms(&self) -> impl Iterator<Item = &LossTerm> {
        self.objectives.iter().flat_map(|o| o.terms.iter())
    }

    /// Drops the unique objectives (the unique-removed ablation). Critic
    /// ids are reindexed densely so instantiation stays 1:1 with terms.
    pub fn without_unique(&self) -> SchemeAssembly {
        let mut objectives: Vec<ObjectiveLossTerms> = self
            .objectives
            .iter()
            .filter(|o| !matches!(o.objective.kind, ObjectiveKind::Unique { .. }))
            .cloned()
            .collect();
        let mut next_id = 0;
        for objective in &mut objectives {
            for term in &mut objective.terms {
                term.critic_id = next_id;
                next_id += 1;
            }
        }
        SchemeAssembly {
            m: self.m,
            scheme: self.scheme,
            objectives,
            num_critics: next_id,
        }
    }
}

/// Expands every objective of the scheme, assigning one critic per term.
pub fn assemble(m: usize, scheme: Scheme) -> Result<SchemeAssembly> {
    let specs = enumerate_objectives(m, scheme)?;
    let mut next_id = 0;
    let mut objectives = Vec::with_capacity(specs.len());
    for spec in specs {
        let terms = match &spec.kind {
            ObjectiveKind::Unique { modality } => unique_terms_impl(*modality, m, &mut next_id),
            ObjectiveKind::SharedPair { a, b } => {
                cond_shared_terms_impl(&[*a, *b], &[], &mut next_id)
            }
            ObjectiveKind::CondShared { members, given } => {
                cond_shared_terms_impl(members, given, &mut next_id)
            }
        };
        objectives.push(ObjectiveLossTerms {
            objective: spec,
            terms,
        });
    }
    Ok(SchemeAssembly {
        m,
        scheme,
        objectives,
        num_critics: next_id,
    })
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Gradients of an assembly evaluation with respect to every embedding view
/// and critic.
#[derive(Debug, Clone)]
pub struct AssemblyGrads {
    /// d value / d z_i (raw view), per modality.
    pub embeds: Vec<Tensor2D>,
    /// d value / d z_i' (augmented view), per modality.
    pub augs: Vec<Tensor2D>,
    /// Per critic id.
    pub critics: Vec<MlpParams>,
}

#[derive(Debug, Clone)]
pub struct AssemblyEval {
    /// Signed information value per objective, in assembly order.
    pub objective_values: Vec<f64>,
    /// Sum of the objective values.
    pub total: f64,
    pub grads: Option<AssemblyGrads>,
}

fn role_tensor<'a>(role: &ArgRole, embeds: &'a [Tensor2D], augs: &'a [Tensor2D]) -> &'a Tensor2D {
    match role {
        ArgRole::Embed(i) => &embeds[*i],
        ArgRole::AugEmbed(i) => &augs[*i],
    }
}

fn accumulate_role(
    role: &ArgRole,
    grad: &Tensor2D,
    sign: f64,
    embeds: &mut [Tensor2D],
    augs: &mut [Tensor2D],
) -> Result<()> {
    let target = match role {
        ArgRole::Embed(i) => &mut embeds[*i],
        ArgRole::AugEmbed(i) => &mut augs[*i],
    };
    let mut scaled = grad.clone();
    scaled.scale_in_place(sign);
    target.add_assign(&scaled)
}

/// Evaluates one term, optionally with gradients folded into the
/// accumulators (scaled by the term's sign).
#[allow(clippy::too_many_arguments)]
fn evaluate_term(
    term: &LossTerm,
    critics: &[Critic],
    embeds: &[Tensor2D],
    augs: &[Tensor2D],
    shuffle_seed: u64,
    club_mode: ClubMode,
    grads: Option<&mut AssemblyGrads>,
) -> Result<f64> {
    let critic = &critics[term.critic_id];
    let z_a = role_tensor(&term.a, embeds, augs);
    let z_b = role_tensor(&term.b, embeds, augs);
    let cond = if term.cond.is_empty() {
        None
    } else {
        let parts: Vec<&Tensor2D> = term
            .cond
            .iter()
            .map(|r| role_tensor(r, embeds, augs))
            .collect();
        Some(Tensor2D::concat_cols(&parts)?)
    };
    let shuffle = NegativeShuffle::Seeded(mix(shuffle_seed, term.critic_id as u64));
    let want = grads.is_some();
    let (estimate, est_grads): (f64, Option<EstimatorGrads>) = match (term.estimator, &cond) {
        (EstimatorKind::Nce, None) => {
            let (e, g) = info_nce_with_grads(z_a, z_b, critic)?;
            (e.value, want.then_some(g))
        }
        (EstimatorKind::CondNce, Some(c)) => {
            let (e, g) = conditional_info_nce_with_grads(z_a, z_b, c, critic)?;
            (e.value, want.then_some(g))
        }
        (EstimatorKind::Club, None) => match club_mode {
            ClubMode::Sampled => {
                let (e, g) = club_with_grads(z_a, z_b, critic, &shuffle)?;
                (e.value, want.then_some(g))
            }
            ClubMode::FullPairwise => {
                let (e, g) = club_full_with_grads(z_a, z_b, critic)?;
                (e.value, want.then_some(g))
            }
        },
        (EstimatorKind::CondClub, Some(c)) => match club_mode {
            ClubMode::Sampled => {
                let (e, g) = conditional_club_with_grads(z_a, z_b, c, critic, &shuffle)?;
                (e.value, want.then_some(g))
            }
            ClubMode::FullPairwise => {
                let (e, g) = conditional_club_full_with_grads(z_a, z_b, c, critic)?;
                (e.value, want.then_some(g))
            }
        },
        _ => {
            return Err(Error::Input(format!(
                "estimator {:?} is inconsistent with conditioning arity {}",
                term.estimator,
                term.cond.len()
            )))
        }
    };

    if let (Some(acc), Some(g)) = (grads, est_grads) {
        acc.critics[term.critic_id].add_scaled(&g.critic, term.sign)?;
        accumulate_role(&term.a, &g.z_a, term.sign, &mut acc.embeds, &mut acc.augs)?;
        accumulate_role(&term.b, &g.z_b, term.sign, &mut acc.embeds, &mut acc.augs)?;
        if let Some(gc) = &g.cond {
            // Split the conditioning gradient back into its role slices.
            let n = gc.rows();
            let mut offset = 0;
            for role in &term.cond {
                let width = role_tensor(role, embeds, augs).cols();
                let mut slice = Tensor2D::zeros(n, width);
                for r in 0..n {
                    slice
                        .row_mut(r)
                        .copy_from_slice(&gc.row(r)[offset..offset + width]);
                }
                accumulate_role(role, &slice, term.sign, &mut acc.embeds, &mut acc.augs)?;
                offset += width;
            }
        }
    }
    Ok(term.sign * estimate)
}

/// Evaluates one objective's signed term sum, folding gradients (scaled by
/// each term's sign) into the accumulator when given.
pub fn evaluate_objective_terms(
    objective: &ObjectiveLossTerms,
    critics: &[Critic],
    embeds: &[Tensor2D],
    augs: &[Tensor2D],
    shuffle_seed: u64,
    club_mode: ClubMode,
    mut grads: Option<&mut AssemblyGrads>,
) -> Result<f64> {
    let mut value = 0.0;
    for term in &objective.terms {
        value += evaluate_term(
            term,
            critics,
            embeds,
            augs,
            shuffle_seed,
            club_mode,
            grads.as_deref_mut(),
        )
        .map_err(|e| match e {
            Error::Numeric { context, detail } => Error::Numeric {
                context: format!("term {} ({context})", term.label()),
                detail,
            },
            other => other,
        })?;
    }
    Ok(value)
}

/// Evaluates every objective of an assembly on the given embedding views.
/// Returns per-objective values (information quantities; the trainer
/// minimizes their negation) and, when requested, gradients of the total.
pub fn evaluate_assembly(
    assembly: &SchemeAssembly,
    critics: &[Critic],
    embeds: &[Tensor2D],
    augs: &[Tensor2D],
    shuffle_seed: u64,
    club_mode: ClubMode,
    want_grads: bool,
) -> Result<AssemblyEval> {
    if embeds.len() != assembly.m || augs.len() != assembly.m {
        return Err(Error::dimension(
            "evaluate_assembly",
            format!(
                "assembly over {} modalities, got {} embeds / {} augs",
                assembly.m,
                embeds.len(),
                augs.len()
            ),
        ));
    }
    if critics.len() < assembly.num_critics {
        return Err(Error::Input(format!(
            "assembly needs {} critics, got {}",
            assembly.num_critics,
            critics.len()
        )));
    }
    let mut grads = want_grads.then(|| AssemblyGrads {
        embeds: embeds
            .iter()
            .map(|e| Tensor2D::zeros(e.rows(), e.cols()))
            .collect(),
        augs: augs
            .iter()
            .map(|a| Tensor2D::zeros(a.rows(), a.cols()))
            .collect(),
        critics: critics.iter().map(|c| MlpParams::zeros(&c.spec)).collect(),
    });
    let mut objective_values = Vec::with_capacity(assembly.objectives.len());
    let mut total = 0.0;
    for objective in &assembly.objectives {
        let value = evaluate_objective_terms(
            objective,
            critics,
            embeds,
            augs,
            shuffle_seed,
            club_mode,
            grads.as_mut(),
        )?;
        objective_values.push(value);
        total += value;
    }
    Ok(AssemblyEval {
        objective_values,
        total,
        grads,
    })
}

/// Instantiates one seeded critic per term of the assembly. `hidden`
/// overrides the default 4x-input hidden width when given.
pub fn instantiate_critics(
    assembly: &SchemeAssembly,
    embed_dim: usize,
    hidden: Option<usize>,
    seed: u64,
) -> Result<Vec<Critic>> {
    let mut critics = vec![None; assembly.num_critics];
    for term in assembly.terms() {
        let width = term.critic_input_width(embed_dim);
        let critic_seed = mix(seed, 0xc417_0000 ^ term.critic_id as u64);
        let critic = match hidden {
            Some(h) => Critic::with_hidden(width, h, critic_seed)?,
            None => Critic::with_default_arch(width, critic_seed)?,
        };
        critics[term.critic_id] = Some(critic);
    }
    Ok(critics.into_iter().map(Option::unwrap).collect())
}

// ---------------------------------------------------------------------------
// Intra-view loss and the joint loss
// ---------------------------------------------------------------------------

/// Temperature-scaled contrastive loss within one modality: the positive is
/// the augmented view of the same region, the negatives are the other
/// regions in the batch. Returns
/// mean_i -log[ exp(z_i . z+_i / tau) / (exp(z_i . z+_i / tau) +
/// sum_{j != i} exp(z_i . z_j / tau)) ].
pub fn intra_loss(z: &Tensor2D, z_pos: &Tensor2D, tau: f64) -> Result<f64> {
    intra_core(z, z_pos, tau, false).map(|(v, _)| v)
}

/// Loss plus gradients with respect to both embedding views.
pub fn intra_loss_with_grads(
    z: &Tensor2D,
    z_pos: &Tensor2D,
    tau: f64,
) -> Result<(f64, Tensor2D, Tensor2D)> {
    intra_core(z, z_pos, tau, true).map(|(v, g)| {
        let (gz, gp) = g.unwrap();
        (v, gz, gp)
    })
}

fn intra_core(
    z: &Tensor2D,
    z_pos: &Tensor2D,
    tau: f64,
    want_grads: bool,
) -> Result<(f64, Option<(Tensor2D, Tensor2D)>)> {
    if tau <= 0.0 || !tau.is_finite() {
        return Err(Error::Input(format!("temperature must be > 0, got {tau}")));
    }
    let n = z.rows();
    if n < 2 {
        return Err(Error::Estimator(format!(
            "intra loss needs at least 2 regions, got {n}"
        )));
    }
    if z_pos.rows() != n || z_pos.cols() != z.cols() {
        return Err(Error::dimension("intra_loss", "views must share shape"));
    }
    let inv_tau = 1.0 / tau;
    // Candidate scores per anchor: index 0 is the positive, then the other
    // regions in batch order.
    let mut loss = 0.0;
    let mut grad_z = want_grads.then(|| Tensor2D::zeros(n, z.cols()));
    let mut grad_pos = want_grads.then(|| Tensor2D::zeros(n, z.cols()));
    let inv_n = 1.0 / n as f64;
    for i in 0..n {
        let zi = z.row(i);
        let s_pos = crate::numerics::dot(zi, z_pos.row(i)) * inv_tau;
        let mut scores = Vec::with_capacity(n);
        scores.push(s_pos);
        for j in 0..n {
            if j != i {
                scores.push(crate::numerics::dot(zi, z.row(j)) * inv_tau);
            }
        }
        let lse = log_sum_exp(&scores);
        loss += lse - s_pos;
        if let (Some(gz), Some(gp)) = (grad_z.as_mut(), grad_pos.as_mut()) {
            let p_pos = (s_pos - lse).exp();
            // d/ds_pos = p_pos - 1 -> flows into z_i and z+_i.
            let w_pos = (p_pos - 1.0) * inv_n * inv_tau;
            for (g, &v) in gz.row_mut(i).iter_mut().zip(z_pos.row(i)) {
                *g += w_pos * v;
            }
            for (g, &v) in gp.row_mut(i).iter_mut().zip(zi) {
                *g += w_pos * v;
            }
            // Negatives: d/ds_ij = p_ij -> z_i and z_j.
            let mut k = 1;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let p = (scores[k] - lse).exp();
                k += 1;
                let w = p * inv_n * inv_tau;
                for (idx, &v) in z.row(j).iter().enumerate() {
                    gz.row_mut(i)[idx] += w * v;
                }
                for (idx, &v) in zi.iter().enumerate() {
                    gz.row_mut(j)[idx] += w * v;
                }
            }
        }
    }
    loss *= inv_n;
    Ok((loss, grad_z.zip(grad_pos)))
}

/// Joint loss: alpha * intra + inter_s + inter_u, where the inter terms are
/// the negated information objectives (maximization turned minimization).
pub fn joint_loss(intra: f64, inter_s: f64, inter_u: f64, alpha: f64) -> Result<f64> {
    if alpha < 0.0 || !alpha.is_finite() {
        return Err(Error::Input(format!("alpha must be >= 0, got {alpha}")));
    }
    Ok(alpha * intra + inter_s + inter_u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Activation, MlpSpec};
    use crate::rng::Rng;

    #[test]
    fn enumeration_counts_match_closed_forms() {
        for m in 2..=6 {
            let pairwise = enumerate_objectives(m, Scheme::Pairwise).unwrap();
            assert_eq!(pairwise.len(), m * (m + 1) / 2, "pairwise m={m}");
            let factorized = enumerate_objectives(m, Scheme::Factorized).unwrap();
            assert_eq!(factorized.len(), (1 << m) - 1, "factorized m={m}");
        }
        assert!(enumerate_objectives(1, Scheme::Pairwise).is_err());
    }

    #[test]
    fn headline_counts_and_listings() {
        let p3: Vec<String> = enumerate_objectives(3, Scheme::Pairwise)
            .unwrap()
            .iter()
            .map(ObjectiveSpec::label)
            .collect();
        assert_eq!(p3, ["U(1)", "U(2)", "U(3)", "S(1,2)", "S(1,3)", "S(2,3)"]);

        let f3: Vec<String> = enumerate_objectives(3, Scheme::Factorized)
            .unwrap()
            .iter()
            .map(ObjectiveSpec::label)
            .collect();
        assert_eq!(
            f3,
            ["U(1)", "U(2)", "U(3)", "S(1,2|3)", "S(1,3|2)", "S(2,3|1)", "H(1,2,3)"]
        );

        let p4 = enumerate_objectives(4, Scheme::Pairwise).unwrap();
        assert_eq!(p4.len(), 10);
        let f4: Vec<String> = enumerate_objectives(4, Scheme::Factorized)
            .unwrap()
            .iter()
            .map(ObjectiveSpec::label)
            .collect();
        assert_eq!(f4.len(), 15);
        for expected in [
            "S(1,2,3|4)",
            "S(1,2,4|3)",
            "S(1,3,4|2)",
            "S(2,3,4|1)",
            "H(1,2,3,4)",
        ] {
            assert!(f4.iter().any(|l| l == expected), "missing {expected}");
        }

        let f2: Vec<String> = enumerate_objectives(2, Scheme::Factorized)
            .unwrap()
            .iter()
            .map(ObjectiveSpec::label)
            .collect();
        assert_eq!(f2, ["U(1)", "U(2)", "S(1,2)"]);
    }

    #[test]
    fn pairwise_never_touches_three_modalities() {
        for m in 2..=6 {
            for o in enumerate_objectives(m, Scheme::Pairwise).unwrap() {
                assert!(o.touched().len() <= 2);
            }
            if m >= 3 {
                let any_high = enumerate_objectives(m, Scheme::Factorized)
                    .unwrap()
                    .iter()
                    .any(|o| o.touched().len() >= 3);
                assert!(any_high);
            }
        }
    }

    #[test]
    fn term_counts_match_spec_examples() {
        assert_eq!(unique_loss_terms(0, 2).unwrap().terms.len(), 3);
        assert_eq!(unique_loss_terms(2, 4).unwrap().terms.len(), 9);
        assert_eq!(shared_pair_loss_terms(0, 1).unwrap().terms.len(), 2);
        assert_eq!(cond_shared_loss_terms(0, 1, 2).unwrap().terms.len(), 2);
        assert_eq!(high_order_loss_terms(0, 1, 2).unwrap().terms.len(), 4);
    }

    #[test]
    fn high_order_expansion_matches_interaction_decomposition() {
        let terms = high_order_loss_terms(0, 1, 2).unwrap().terms;
        let labels: Vec<String> = terms.iter().map(LossTerm::label).collect();
        assert_eq!(
            labels,
            [
                "+NCE(z1,z2)",
                "-CLUB(z1,z2|z3)",
                "-CLUB(z1,z2|z1',z2')",
                "+NCE(z1,z2|z3,z1',z2')",
            ]
        );
    }

    #[test]
    fn assembly_totals_match_hand_expansion() {
        // 3 uniques x 6 + 3 shared x 2 = 24 terms for the pairwise scheme;
        // the factorized scheme adds the 4-term high-order objective: 28.
        let pairwise = assemble(3, Scheme::Pairwise).unwrap();
        assert_eq!(pairwise.num_terms(), 24);
        assert_eq!(pairwise.num_critics, 24);
        let factorized = assemble(3, Scheme::Factorized).unwrap();
        assert_eq!(factorized.num_terms(), 28);
        assert_eq!(factorized.num_critics, 28);
    }

    #[test]
    fn critic_ids_are_unique_and_dense() {
        for scheme in [Scheme::Pairwise, Scheme::Factorized] {
            for m in 2..=5 {
                let assembly = assemble(m, scheme).unwrap();
                let mut seen = vec![false; assembly.num_critics];
                for t in assembly.terms() {
                    assert!(!seen[t.critic_id], "critic {} shared", t.critic_id);
                    seen[t.critic_id] = true;
                }
                assert!(seen.iter().all(|&s| s));
            }
        }
    }

    #[test]
    fn term_counts_grow_quadratically_vs_exponentially() {
        let pairwise: Vec<usize> = (2..=6)
            .map(|m| assemble(m, Scheme::Pairwise).unwrap().num_terms())
            .collect();
        let factorized: Vec<usize> = (2..=6)
            .map(|m| assemble(m, Scheme::Factorized).unwrap().num_terms())
            .collect();
        // Closed forms: 4m(m-1) and 3m(m-1) + (3^m - 1 - 2m)/2.
        for (idx, m) in (2..=6usize).enumerate() {
            assert_eq!(pairwise[idx], 4 * m * (m - 1));
            let pow3 = 3usize.pow(m as u32);
            assert_eq!(factorized[idx], 3 * m * (m - 1) + (pow3 - 1 - 2 * m) / 2);
        }
        // Monotone counts and strictly increasing dominance ratio.
        for w in pairwise.windows(2) {
            assert!(w[1] > w[0]);
        }
        for w in factorized.windows(2) {
            assert!(w[1] > w[0]);
        }
        let mut last_ratio = 0.0;
        for idx in 0..pairwise.len() {
            let ratio = factorized[idx] as f64 / pairwise[idx] as f64;
            assert!(ratio > last_ratio, "ratio not increasing at m={}", idx + 2);
            last_ratio = ratio;
        }
    }

    #[test]
    fn intra_loss_identical_embeddings_is_ln_n() {
        for n in [2usize, 5, 8] {
            let z = Tensor2D::new(n, 3, vec![0.7; n * 3]).unwrap();
            let loss = intra_loss(&z, &z, 0.5).unwrap();
            assert!((loss - (n as f64).ln()).abs() < 1e-12, "n={n} loss {loss}");
        }
    }

    #[test]
    fn intra_loss_saturated_positive_vanishes() {
        // Orthogonal regions, positive aligned with the anchor, large scale.
        let mut z = Tensor2D::zeros(3, 3);
        for i in 0..3 {
            z.set(i, i, 30.0);
        }
        let loss = intra_loss(&z, &z, 1.0).unwrap();
        assert!(loss < 1e-9, "loss {loss}");
    }

    #[test]
    fn intra_loss_two_region_hand_value() {
        // n=2, tau=1, z1.z1+ = 1, z1.z2 = 0 symmetric:
        // loss = -ln(e / (e + 1)).
        let z = Tensor2D::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let z_pos = z.clone();
        let loss = intra_loss(&z, &z_pos, 1.0).unwrap();
        let expected = -(1.0f64.exp() / (1.0f64.exp() + 1.0)).ln();
        assert!((loss - expected).abs() < 1e-12, "loss {loss}");
        assert!((loss - 0.3133).abs() < 1e-4);
    }

    #[test]
    fn intra_loss_rejects_bad_temperature() {
        let z = Tensor2D::new(2, 1, vec![1.0, 2.0]).unwrap();
        assert!(intra_loss(&z, &z, 0.0).is_err());
        assert!(intra_loss(&z, &z, -1.0).is_err());
    }

    #[test]
    fn intra_gradients_pass_finite_differences() {
        use crate::numerics::grad_check_flat;
        let n = 5;
        let d = 3;
        let mut rng = Rng::new(3);
        let z = Tensor2D::randn(n, d, 1.0, &mut rng);
        let z_pos = Tensor2D::randn(n, d, 1.0, &mut rng);
        let mut theta = z.data().to_vec();
        theta.extend_from_slice(z_pos.data());
        let (_, gz, gp) = intra_loss_with_grads(&z, &z_pos, 0.3).unwrap();
        let mut analytic = gz.data().to_vec();
        analytic.extend_from_slice(gp.data());
        let err = grad_check_flat(
            |flat| {
                let z = Tensor2D::new(n, d, flat[..n * d].to_vec())?;
                let zp = Tensor2D::new(n, d, flat[n * d..].to_vec())?;
                intra_loss(&z, &zp, 0.3)
            },
            &theta,
            &analytic,
            1e-5,
        )
        .unwrap();
        assert!(err < 1e-4, "err {err}");
    }

    #[test]
    fn joint_loss_is_plain_arithmetic() {
        assert_eq!(joint_loss(2.0, 1.0, 0.5, 0.5).unwrap(), 2.5);
        assert_eq!(joint_loss(9.0, 1.0, 0.5, 0.0).unwrap(), 1.5);
        assert_eq!(joint_loss(0.0, 0.0, 0.0, 1.0).unwrap(), 0.0);
        assert!(joint_loss(1.0, 1.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn constant_critics_zero_every_objective() {
        let m = 3;
        let embed_dim = 4;
        let assembly = assemble(m, Scheme::Factorized).unwrap();
        let critics: Vec<Critic> = assembly
            .terms()
            .map(|t| Critic::constant(t.critic_input_width(embed_dim), 0.9).unwrap())
            .collect();
        let mut rng = Rng::new(8);
        let embeds: Vec<Tensor2D> = (0..m)
            .map(|_| Tensor2D::randn(6, embed_dim, 1.0, &mut rng))
            .collect();
        let augs: Vec<Tensor2D> = (0..m)
            .map(|_| Tensor2D::randn(6, embed_dim, 1.0, &mut rng))
            .collect();
        let eval = evaluate_assembly(
            &assembly,
            &critics,
            &embeds,
            &augs,
            7,
            ClubMode::Sampled,
            false,
        )
        .unwrap();
        for (v, o) in eval.objective_values.iter().zip(&assembly.objectives) {
            assert!(v.abs() <= 1e-12, "{} evaluated to {v}", o.objective);
        }
        assert!(eval.total.abs() <= 1e-11);
    }

    #[test]
    fn assembly_gradients_pass_finite_differences() {
        // Small full assembly over 2 modalities: objective sum as a function
        // of critic parameters and both embedding views.
        use crate::numerics::grad_check_flat;
        let m = 2;
        let embed_dim = 3;
        let n = 5;
        let assembly = assemble(m, Scheme::Pairwise).unwrap();
        let critics = instantiate_critics(&assembly, embed_dim, Some(6), 11).unwrap();
        let mut rng = Rng::new(13);
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
                let t = Tensor2D::new(n, embed_dim, flat[offset..offset + n * embed_dim].to_vec())?;
                offset += n * embed_dim;
                views.push(t);
            }
            let augs = views.split_off(m);
            Ok((cs, views, augs))
        };

        let value = |flat: &[f64]| -> Result<f64> {
            let (cs, embeds, augs) = unpack(flat)?;
            Ok(
                evaluate_assembly(&assembly, &cs, &embeds, &augs, 5, ClubMode::Sampled, false)?
                    .total,
            )
        };
        let (cs, e0, a0) = unpack(&theta).unwrap();
        let eval = evaluate_assembly(&assembly, &cs, &e0, &a0, 5, ClubMode::Sampled, true).unwrap();
        let g = eval.grads.unwrap();
        let mut analytic = Vec::new();
        for c in &g.critics {
            analytic.extend(c.flatten());
        }
        for t in g.embeds.iter().chain(&g.augs) {
            analytic.extend_from_slice(t.data());
        }
        let err = grad_check_flat(value, &theta, &analytic, 1e-5).unwrap();
        assert!(err < 1e-4, "err {err}");
    }

    #[test]
    fn without_unique_drops_only_unique_objectives() {
        let assembly = assemble(3, Scheme::Pairwise).unwrap();
        let reduced = assembly.without_unique();
        assert_eq!(reduced.objectives.len(), 3);
        assert!(reduced
            .objectives
            .iter()
            .all(|o| matches!(o.objective.kind, ObjectiveKind::SharedPair { .. })));
    }

    /// Trains the critics of one objective (embeddings frozen) by
    /// minimizing the negated objective with Adam, mirroring the joint
    /// trainer. Returns the objective value on a fresh evaluation batch.
    fn train_objective_critics(
        objective: &ObjectiveLossTerms,
        critics: &mut [Critic],
        sample: &dyn Fn(u64) -> (Vec<Tensor2D>, Vec<Tensor2D>),
        epochs: usize,
        lr: f64,
        seed: u64,
    ) -> f64 {
        use crate::numerics::{adam_step, AdamHyper, AdamState};
        let mut states: Vec<AdamState> = critics
            .iter()
            .map(|c| AdamState::new(&c.spec, AdamHyper::with_lr(lr)))
            .collect();
        for step in 0..epochs {
            let (embeds, augs) = sample(mix(seed, step as u64));
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
            evaluate_objective_terms(
                objective,
                critics,
                &embeds,
                &augs,
                mix(seed, 0xc1 + step as u64),
                ClubMode::Sampled,
                Some(&mut grads),
            )
            .unwrap();
            for (ci, critic) in critics.iter_mut().enumerate() {
                let mut g = grads.critics[ci].clone();
                for layer in &mut g.layers {
                    layer.weight.scale_in_place(-1.0);
                    for b in &mut layer.bias {
                        *b = -*b;
                    }
                }
                adam_step(&mut critic.params, &g, &mut states[ci]).unwrap();
            }
        }
        let (embeds, augs) = sample(mix(seed, 0xeeee));
        evaluate_objective_terms(
            objective,
            critics,
            &embeds,
            &augs,
            mix(seed, 0xffff),
            ClubMode::Sampled,
            None,
        )
        .unwrap()
    }

    /// Two modalities sharing a strong latent; embeddings are the raw
    /// factor-model draws (d = 4), augmented views add small noise.
    fn shared_latent_sampler(n: usize) -> impl Fn(u64) -> (Vec<Tensor2D>, Vec<Tensor2D>) {
        move |seed: u64| {
            let mut rng = Rng::stream(seed, &[0x5a5a]);
            let d = 4;
            let mut z_a = Tensor2D::zeros(n, d);
            let mut z_b = Tensor2D::zeros(n, d);
            for r in 0..n {
                for c in 0..d {
                    let shared = rng.normal();
                    z_a.set(r, c, shared + 0.4 * rng.normal());
                    z_b.set(r, c, shared + 0.4 * rng.normal());
                }
            }
            let noise = |z: &Tensor2D, rng: &mut Rng| {
                let mut out = z.clone();
                for v in out.data_mut() {
                    *v += 0.1 * rng.normal();
                }
                out
            };
            let aug_a = noise(&z_a, &mut rng);
            let aug_b = noise(&z_b, &mut rng);
            (vec![z_a, z_b], vec![aug_a, aug_b])
        }
    }

    #[test]
    fn trained_shared_pair_extracts_shared_information() {
        // Per-coordinate shared latent with noise 0.4 on both sides: the
        // true MI is far above 0.2 nats, and maximizing the shared-pair
        // objective must push its lower-bound term above 0.2.
        let objective = shared_pair_loss_terms(0, 1).unwrap();
        let mut critics: Vec<Critic> = objective
            .terms
            .iter()
            .map(|t| {
                Critic::with_hidden(t.critic_input_width(4), 16, 7 + t.critic_id as u64).unwrap()
            })
            .collect();
        let sample = shared_latent_sampler(64);
        train_objective_critics(&objective, &mut critics, &sample, 200, 5e-3, 3);
        let (embeds, augs) = sample(99_999);
        let nce_term = &objective.terms[0];
        assert_eq!(nce_term.estimator, EstimatorKind::Nce);
        let est = crate::estimators::info_nce(&embeds[0], &embeds[1], &critics[0]).unwrap();
        assert!(est.value > 0.2, "trained shared estimate {}", est.value);
        let _ = augs;
    }

    /// Fits each term's critic by tightening its own bound on fresh
    /// batches, then returns the objective's signed term sum averaged over
    /// evaluation batches.
    fn fitted_objective_value(
        objective: &ObjectiveLossTerms,
        critics: &mut [Critic],
        sample: &dyn Fn(u64) -> (Vec<Tensor2D>, Vec<Tensor2D>),
        seed: u64,
    ) -> f64 {
        use crate::estimators::fit_critic_nce;
        let gather = |term: &LossTerm,
                      embeds: &[Tensor2D],
                      augs: &[Tensor2D]|
         -> (Tensor2D, Tensor2D, Option<Tensor2D>) {
            let a = role_tensor(&term.a, embeds, augs).clone();
            let b = role_tensor(&term.b, embeds, augs).clone();
            let cond = if term.cond.is_empty() {
                None
            } else {
                let parts: Vec<&Tensor2D> = term
                    .cond
                    .iter()
                    .map(|r| role_tensor(r, embeds, augs))
                    .collect();
                Some(Tensor2D::concat_cols(&parts).unwrap())
            };
            (a, b, cond)
        };
        for (term, critic) in objective.terms.iter().zip(critics.iter_mut()) {
            fit_critic_nce(
                critic,
                |step| {
                    let (embeds, augs) = sample(mix(seed, 0x1111 + step as u64));
                    Ok(gather(term, &embeds, &augs))
                },
                150,
                5e-3,
            )
            .unwrap();
        }
        let evals = 12;
        let mut total = 0.0;
        for k in 0..evals {
            let (embeds, augs) = sample(mix(seed, 0x9900 + k));
            total += evaluate_objective_terms(
                objective,
                critics,
                &embeds,
                &augs,
                mix(seed, 0xaa00 + k),
                ClubMode::Sampled,
                None,
            )
            .unwrap();
        }
        total / evals as f64
    }

    /// Widens a critic by inserting zero-weight input columns at `offset`,
    /// preserving its function on inputs whose new columns are arbitrary.
    fn widen_critic(narrow: &Critic, offset: usize, extra: usize) -> Critic {
        let old_width = narrow.spec.input_dim();
        let hidden = narrow.spec.layer_dims()[1];
        let spec = MlpSpec::uniform(vec![old_width + extra, hidden, 1], Activation::Relu).unwrap();
        let mut params = MlpParams::zeros(&spec);
        for h in 0..hidden {
            for c in 0..old_width {
                let target = if c < offset { c } else { c + extra };
                params.layers[0]
                    .weight
                    .set(h, target, narrow.params.layers[0].weight.get(h, c));
            }
        }
        params.layers[0].bias = narrow.params.layers[0].bias.clone();
        params.layers[1] = narrow.params.layers[1].clone();
        Critic::new(spec, params).unwrap()
    }

    #[test]
    fn constant_conditioner_matches_unconditioned_shared_pair() {
        // Conditioning the pair objective on a constant third modality is
        // vacuous. Pair the arms exactly: the conditional arm's critics are
        // the plain arm's critics widened with zero columns for the
        // constant block, and both arms fit on identical draw streams.
        let n = 64;
        let base_sampler = shared_latent_sampler(n);
        let sample3 = move |seed: u64| {
            let (mut embeds, mut augs) = base_sampler(seed);
            embeds.push(Tensor2D::new(n, 4, vec![0.7; n * 4]).unwrap());
            augs.push(Tensor2D::new(n, 4, vec![0.7; n * 4]).unwrap());
            (embeds, augs)
        };
        let sample2 = shared_latent_sampler(n);

        let mut plain_values = Vec::new();
        let mut cond_values = Vec::new();
        for seed in 0..6u64 {
            let plain = shared_pair_loss_terms(0, 1).unwrap();
            let mut plain_critics: Vec<Critic> = plain
                .terms
                .iter()
                .map(|t| {
                    Critic::with_hidden(t.critic_input_width(4), 16, mix(seed, t.critic_id as u64))
                        .unwrap()
                })
                .collect();
            // Widened copies before fitting: the conditional layout is
            // [z0 | z1 | z2 | ...], so the z2 block sits at offset 8.
            let cond = cond_shared_loss_terms(0, 1, 2).unwrap();
            let mut cond_critics: Vec<Critic> = plain_critics
                .iter()
                .map(|c| widen_critic(c, 8, 4))
                .collect();
            plain_values.push(fitted_objective_value(
                &plain,
                &mut plain_critics,
                &sample2,
                seed,
            ));
            cond_values.push(fitted_objective_value(
                &cond,
                &mut cond_critics,
                &sample3,
                seed,
            ));
        }
        let plain_mean = plain_values.iter().sum::<f64>() / plain_values.len() as f64;
        let cond_mean = cond_values.iter().sum::<f64>() / cond_values.len() as f64;
        assert!(
            (plain_mean - cond_mean).abs() <= 0.05,
            "plain mean {plain_mean:.4} {plain_values:?} vs constant-conditioned {cond_mean:.4} {cond_values:?}"
        );
    }
}
