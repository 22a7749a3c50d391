//! Exact, estimator-free information-theory ground truth.
//!
//! Discrete mutual information, conditional mutual information, and
//! interaction information are computed by full enumeration over a finite
//! joint probability table, so every value is exact up to float rounding.
//! Gaussian mutual information uses the closed form
//! `0.5 * ln(det(S_aa) * det(S_bb) / det(S))`. All quantities are in nats;
//! `0 * log 0` is taken as 0 by continuity.

use crate::error::{Error, Result};
use crate::numerics::{log_det_spd, Tensor2D};
use crate::rng::Rng;

const NORMALIZATION_TOL: f64 = 1e-12;

/// Finite joint probability table over up to four variables.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJoint {
    alphabet_sizes: Vec<usize>,
    /// Probabilities in lexicographic index order (last variable fastest).
    probs: Vec<f64>,
}

impl DiscreteJoint {
    pub fn new(alphabet_sizes: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if alphabet_sizes.is_empty() || alphabet_sizes.len() > 4 {
            return Err(Error::Input(format!(
                "DiscreteJoint supports 1..=4 variables, got {}",
                alphabet_sizes.len()
            )));
        }
        if alphabet_sizes.contains(&0) {
            return Err(Error::Input("alphabet sizes must be > 0".into()));
        }
        let atoms: usize = alphabet_sizes.iter().product();
        if probs.len() != atoms {
            return Err(Error::Input(format!(
                "joint table needs {atoms} probabilities, got {}",
                probs.len()
            )));
        }
        if probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::Input("probabilities must be finite and >= 0".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Input(format!(
                "joint table sums to {total}, not 1 (tolerance {NORMALIZATION_TOL})"
            )));
        }
        Ok(DiscreteJoint {
            alphabet_sizes,
            probs,
        })
    }

    /// Random joint with the given alphabet sizes: i.i.d. uniform weights,
    /// normalized.
    pub fn random(alphabet_sizes: Vec<usize>, seed: u64) -> Result<Self> {
        let atoms: usize = alphabet_sizes.iter().product();
        let mut rng = Rng::stream(seed, &[0x6a6f_696e]);
        let mut probs: Vec<f64> = (0..atoms).map(|_| rng.uniform() + 1e-9).collect();
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        // A second pass brings the sum to 1 within the constructor tolerance.
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        DiscreteJoint::new(alphabet_sizes, probs)
    }

    pub fn num_vars(&self) -> usize {
        self.alphabet_sizes.len()
    }

    pub fn alphabet_sizes(&self) -> &[usize] {
        &self.alphabet_sizes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.num_vars()];
        for i in (0..self.num_vars().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.alphabet_sizes[i + 1];
        }
        strides
    }

    /// Marginal table over the listed variables, in the listed order.
    pub fn marginal(&self, vars: &[usize]) -> Result<DiscreteJoint> {
        for &v in vars {
            if v >= self.num_vars() {
                return Err(Error::Input(format!(
                    "variable {v} out of range 0..{}",
                    self.num_vars()
                )));
            }
        }
        let sizes: Vec<usize> = vars.iter().map(|&v| self.alphabet_sizes[v]).collect();
        let atoms: usize = sizes.iter().product();
        let mut probs = vec![0.0; atoms];
        let strides = self.strides();
        let mut idx = vec![0usize; self.num_vars()];
        for (flat, &p) in self.probs.iter().enumerate() {
            let mut rem = flat;
            for v in 0..self.num_vars() {
                idx[v] = rem / strides[v];
                rem %= strides[v];
            }
            let mut out = 0usize;
            for &v in vars {
                out = out * self.alphabet_sizes[v] + idx[v];
            }
            probs[out] += p;
        }
        Ok(DiscreteJoint {
            alphabet_sizes: sizes,
            probs,
        })
    }

    /// Plain-text serialization: a header line with the arity followed by
    /// the alphabet sizes, then one probability per line in lexicographic
    /// index order. Values round-trip bit-exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.num_vars().to_string());
        for a in &self.alphabet_sizes {
            out.push(' ');
            out.push_str(&a.to_string());
        }
        out.push('\n');
        for p in &self.probs {
            out.push_str(&format!("{p}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::parse("DiscreteJoint", "empty input"))?;
        let mut fields = header.split_whitespace();
        let arity: usize = fields
            .next()
            .ok_or_else(|| Error::parse("DiscreteJoint", "missing arity"))?
            .parse()
            .map_err(|e| Error::parse("DiscreteJoint", format!("bad arity: {e}")))?;
        let sizes: Vec<usize> = fields
            .map(|f| {
                f.parse()
                    .map_err(|e| Error::parse("DiscreteJoint", format!("bad alphabet size: {e}")))
            })
            .collect::<Result<_>>()?;
        if sizes.len() != arity {
            return Err(Error::parse(
                "DiscreteJoint",
                format!("header promises {arity} sizes, found {}", sizes.len()),
            ));
        }
        let probs: Vec<f64> = lines
            .map(|l| {
                l.trim()
                    .parse()
                    .map_err(|e| Error::parse("DiscreteJoint", format!("bad probability: {e}")))
            })
            .collect::<Result<_>>()?;
        DiscreteJoint::new(sizes, probs)
    }
}

fn xlogy_ratio(p: f64, q: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * (p / q).ln()
    }
}

/// Exact mutual information I(a; b) in nats.
pub fn discrete_mi(joint: &DiscreteJoint, a: usize, b: usize) -> Result<f64> {
    if a == b {
        return Err(Error::Input(format!("discrete_mi needs a != b, got {a}")));
    }
    let pair = joint.marginal(&[a, b])?;
    let pa = pair.marginal(&[0])?;
    let pb = pair.marginal(&[1])?;
    let nb = pair.alphabet_sizes[1];
    let mut mi = 0.0;
    for (flat, &p) in pair.probs.iter().enumerate() {
        let (i, j) = (flat / nb, flat % nb);
        mi += xlogy_ratio(p, pa.probs[i] * pb.probs[j]);
    }
    Ok(mi)
}

/// Exact conditional mutual information I(a; b | c) in nats:
/// sum over c of p(c) times the MI of the conditional slice.
pub fn discrete_cmi(joint: &DiscreteJoint, a: usize, b: usize, c: usize) -> Result<f64> {
    if a == b || a == c || b == c {
        return Err(Error::Input(format!(
            "discrete_cmi needs distinct indices, got ({a}, {b}, {c})"
        )));
    }
    let triple = joint.marginal(&[a, b, c])?;
    let (na, nb, nc) = (
        triple.alphabet_sizes[0],
        triple.alphabet_sizes[1],
        triple.alphabet_sizes[2],
    );
    let p_c = triple.marginal(&[2])?;
    let p_ac = triple.marginal(&[0, 2])?;
    let p_bc = triple.marginal(&[1, 2])?;
    let mut cmi = 0.0;
    for i in 0..na {
        for j in 0..nb {
            for k in 0..nc {
                let p_abc = triple.probs[(i * nb + j) * nc + k];
                if p_abc <= 0.0 {
                    continue;
                }
                let pc = p_c.probs[k];
                let pac = p_ac.probs[i * nc + k];
                let pbc = p_bc.probs[j * nc + k];
                cmi += p_abc * ((p_abc * pc) / (pac * pbc)).ln();
            }
        }
    }
    Ok(cmi)
}

/// Interaction information I(a; b; c) = I(a; b) - I(a; b | c); may be
/// negative (synergy). Symmetric in all three arguments.
pub fn interaction_info(joint: &DiscreteJoint, a: usize, b: usize, c: usize) -> Result<f64> {
    Ok(discrete_mi(joint, a, b)? - discrete_cmi(joint, a, b, c)?)
}

/// Residual of the additive identity relating the three pairwise MI terms of
/// a 3-variable joint to three times the interaction information plus the
/// three conditional pairwise terms. The identity holds exactly, so the
/// residual is pure float error.
pub fn verify_inclusion_identity(joint: &DiscreteJoint) -> Result<f64> {
    if joint.num_vars() != 3 {
        return Err(Error::Input(format!(
            "inclusion identity needs a 3-variable joint, got {} variables",
            joint.num_vars()
        )));
    }
    let pairwise =
        discrete_mi(joint, 0, 1)? + discrete_mi(joint, 0, 2)? + discrete_mi(joint, 1, 2)?;
    let interaction = interaction_info(joint, 0, 1, 2)?;
    let conditional = discrete_cmi(joint, 0, 1, 2)?
        + discrete_cmi(joint, 0, 2, 1)?
        + discrete_cmi(joint, 1, 2, 0)?;
    Ok(pairwise - (3.0 * interaction + conditional))
}

/// Jointly Gaussian pair with an explicit joint covariance.
#[derive(Debug, Clone)]
pub struct GaussianPair {
    dim_a: usize,
    dim_b: usize,
    /// [(dim_a + dim_b) x (dim_a + dim_b)], symmetric positive definite.
    covariance: Tensor2D,
}

impl GaussianPair {
    pub fn new(dim_a: usize, dim_b: usize, covariance: Tensor2D) -> Result<Self> {
        let n = dim_a + dim_b;
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::Input("GaussianPair dims must be > 0".into()));
        }
        if covariance.rows() != n || covariance.cols() != n {
            return Err(Error::dimension(
                "GaussianPair",
                format!(
                    "covariance is {}x{}, expected {n}x{n}",
                    covariance.rows(),
                    covariance.cols()
                ),
            ));
        }
        for i in 0..n {
            for j in 0..i {
                if (covariance.get(i, j) - covariance.get(j, i)).abs() > 1e-12 {
                    return Err(Error::Input(format!(
                        "covariance not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(GaussianPair {
            dim_a,
            dim_b,
            covariance,
        })
    }

    /// Scalar pair with unit variances and correlation rho.
    pub fn scalar_with_correlation(rho: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::Input(format!("correlation {rho} outside [-1, 1]")));
        }
        GaussianPair::new(1, 1, Tensor2D::new(2, 2, vec![1.0, rho, rho, 1.0])?)
    }

    pub fn covariance(&self) -> &Tensor2D {
        &self.covariance
    }

    fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Tensor2D {
        let mut out = Tensor2D::zeros(rows.len(), cols.len());
        for (ri, r) in rows.clone().enumerate() {
            for (ci, c) in cols.clone().enumerate() {
                out.set(ri, ci, self.covariance.get(r, c));
            }
        }
        out
    }
}

/// Closed-form Gaussian mutual information in nats:
/// 0.5 * ln(det(S_aa) * det(S_bb) / det(S)). Fails if the covariance is not
/// positive definite.
pub fn gaussian_mi(pair: &GaussianPair) -> Result<f64> {
    let n = pair.dim_a + pair.dim_b;
    let s_aa = pair.block(0..pair.dim_a, 0..pair.dim_a);
    let s_bb = pair.block(pair.dim_a..n, pair.dim_a..n);
    let log_det_joint = log_det_spd(&pair.covariance)
        .map_err(|e| Error::numeric("gaussian_mi", format!("covariance not SPD: {e}")))?;
    let log_det_a = log_det_spd(&s_aa)?;
    let log_det_b = log_det_spd(&s_bb)?;
    Ok(0.5 * (log_det_a + log_det_b - log_det_joint))
}

/// Discretizes a correlated scalar Gaussian pair onto a uniform grid over
/// [-span, span]^2 and returns the grid joint. Used to cross-check the
/// closed form against `discrete_mi`.
pub fn discretized_scalar_gaussian(rho: f64, grid: usize, span: f64) -> Result<DiscreteJoint> {
    if grid < 2 {
        return Err(Error::Input("grid must have at least 2 cells".into()));
    }
    let det = 1.0 - rho * rho;
    if det <= 0.0 {
        return Err(Error::Input("|rho| must be < 1 for discretization".into()));
    }
    let step = 2.0 * span / grid as f64;
    let mut probs = Vec::with_capacity(grid * grid);
    // Midpoint rule on the joint density.
    let norm = 1.0 / (std::f64::consts::TAU * det.sqrt());
    for i in 0..grid {
        let x = -span + (i as f64 + 0.5) * step;
        for j in 0..grid {
            let y = -span + (j as f64 + 0.5) * step;
            let quad = (x * x - 2.0 * rho * x * y + y * y) / det;
            probs.push(norm * (-0.5 * quad).exp() * step * step);
        }
    }
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    DiscreteJoint::new(vec![grid, grid], probs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_bits(n: usize) -> Vec<usize> {
        vec![2; n]
    }

    /// p(a, b) = product of uniform bits.
    fn independent_pair() -> DiscreteJoint {
        DiscreteJoint::new(uniform_bits(2), vec![0.25; 4]).unwrap()
    }

    /// a uniform bit, b = a.
    fn copy_pair() -> DiscreteJoint {
        DiscreteJoint::new(uniform_bits(2), vec![0.5, 0.0, 0.0, 0.5]).unwrap()
    }

    /// a, b uniform bits, c = a XOR b.
    fn xor_triple() -> DiscreteJoint {
        let mut probs = vec![0.0; 8];
        for a in 0..2 {
            for b in 0..2 {
                let c = a ^ b;
                probs[(a * 2 + b) * 2 + c] = 0.25;
            }
        }
        DiscreteJoint::new(uniform_bits(3), probs).unwrap()
    }

    /// a = b = c, a uniform bit.
    fn common_cause_triple() -> DiscreteJoint {
        let mut probs = vec![0.0; 8];
        probs[0] = 0.5;
        probs[7] = 0.5;
        DiscreteJoint::new(uniform_bits(3), probs).unwrap()
    }

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn product_distribution_has_zero_mi() {
        let mi = discrete_mi(&independent_pair(), 0, 1).unwrap();
        assert!(mi.abs() < 1e-12, "mi {mi}");
    }

    #[test]
    fn copy_channel_has_ln2() {
        let mi = discrete_mi(&copy_pair(), 0, 1).unwrap();
        assert!((mi - LN2).abs() < 1e-12);
    }

    #[test]
    fn binary_symmetric_pair_matches_entropy_arithmetic() {
        // Uniform bit a, b = a flipped with probability 0.25:
        // I = ln 2 - H(0.25).
        let flip = 0.25;
        let mut probs = vec![0.0; 4];
        for a in 0..2 {
            for b in 0..2 {
                let p = if a == b { 1.0 - flip } else { flip };
                probs[a * 2 + b] = 0.5 * p;
            }
        }
        let joint = DiscreteJoint::new(uniform_bits(2), probs).unwrap();
        let mi = discrete_mi(&joint, 0, 1).unwrap();
        let h = -(flip * flip.ln() + (1.0 - flip) * (1.0 - flip).ln());
        assert!((mi - (LN2 - h)).abs() < 1e-12, "mi {mi}");
        assert!((mi - 0.1308).abs() < 5e-5, "mi {mi}");
    }

    #[test]
    fn unnormalized_joint_is_rejected() {
        let err = DiscreteJoint::new(uniform_bits(2), vec![0.3; 4]).unwrap_err();
        assert!(err.to_string().contains("sums"), "{err}");
    }

    #[test]
    fn cmi_with_independent_conditioner_equals_mi() {
        // c independent of (a, b) with (a, b) the BSC(0.25) pair.
        let flip = 0.25;
        let mut probs = vec![0.0; 8];
        for a in 0..2 {
            for b in 0..2 {
                let p = 0.5 * if a == b { 1.0 - flip } else { flip };
                for c in 0..2 {
                    probs[(a * 2 + b) * 2 + c] = 0.5 * p;
                }
            }
        }
        let joint = DiscreteJoint::new(uniform_bits(3), probs).unwrap();
        let mi = discrete_mi(&joint, 0, 1).unwrap();
        let cmi = discrete_cmi(&joint, 0, 1, 2).unwrap();
        assert!((mi - cmi).abs() < 1e-12);
    }

    #[test]
    fn xor_triple_has_ln2_conditional_mi() {
        let joint = xor_triple();
        assert!(discrete_mi(&joint, 0, 1).unwrap().abs() < 1e-12);
        let cmi = discrete_cmi(&joint, 0, 1, 2).unwrap();
        assert!((cmi - LN2).abs() < 1e-12, "cmi {cmi}");
    }

    #[test]
    fn deterministic_conditioner_kills_cmi() {
        // c = a: conditioning removes all of a's variability.
        let mut probs = vec![0.0; 8];
        for a in 0..2 {
            for b in 0..2 {
                probs[(a * 2 + b) * 2 + a] = 0.25;
            }
        }
        let joint = DiscreteJoint::new(uniform_bits(3), probs).unwrap();
        let cmi = discrete_cmi(&joint, 0, 1, 2).unwrap();
        assert!(cmi.abs() < 1e-12, "cmi {cmi}");
    }

    #[test]
    fn interaction_info_signature_cases() {
        // All independent -> 0.
        let indep = DiscreteJoint::new(uniform_bits(3), vec![0.125; 8]).unwrap();
        assert!(interaction_info(&indep, 0, 1, 2).unwrap().abs() < 1e-12);
        // XOR -> -ln 2 (synergy).
        let ii = interaction_info(&xor_triple(), 0, 1, 2).unwrap();
        assert!((ii + LN2).abs() < 1e-12, "ii {ii}");
        // Common cause -> +ln 2: I(a;b) = ln 2, I(a;b|c) = 0.
        let ii = interaction_info(&common_cause_triple(), 0, 1, 2).unwrap();
        assert!((ii - LN2).abs() < 1e-12, "ii {ii}");
    }

    #[test]
    fn interaction_info_is_permutation_symmetric() {
        for seed in 0..50u64 {
            let joint = DiscreteJoint::random(vec![3, 2, 4], seed).unwrap();
            let base = interaction_info(&joint, 0, 1, 2).unwrap();
            for (a, b, c) in [(0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)] {
                let other = interaction_info(&joint, a, b, c).unwrap();
                assert!(
                    (base - other).abs() < 1e-12,
                    "seed {seed}: {base} vs {other} at ({a},{b},{c})"
                );
            }
        }
    }

    #[test]
    fn chain_identity_holds_on_random_joints() {
        for seed in 0..50u64 {
            let joint = DiscreteJoint::random(vec![2, 3, 3], seed).unwrap();
            let mi = discrete_mi(&joint, 0, 1).unwrap();
            let ii = interaction_info(&joint, 0, 1, 2).unwrap();
            let cmi = discrete_cmi(&joint, 0, 1, 2).unwrap();
            assert!((mi - (ii + cmi)).abs() < 1e-12);
        }
    }

    #[test]
    fn inclusion_identity_residual_is_float_noise() {
        // XOR triple: pairwise terms (0,0,0) vs 3*(-ln2) + 3*ln2.
        let r = verify_inclusion_identity(&xor_triple()).unwrap();
        assert!(r.abs() < 1e-12, "residual {r}");
        let indep = DiscreteJoint::new(uniform_bits(3), vec![0.125; 8]).unwrap();
        assert!(verify_inclusion_identity(&indep).unwrap().abs() < 1e-12);
        for seed in 0..100u64 {
            let sizes = vec![
                2 + (seed % 3) as usize,
                2 + ((seed / 3) % 3) as usize,
                2 + ((seed / 9) % 3) as usize,
            ];
            let joint = DiscreteJoint::random(sizes, seed).unwrap();
            let r = verify_inclusion_identity(&joint).unwrap();
            assert!(r.abs() < 1e-10, "seed {seed}: residual {r}");
        }
    }

    #[test]
    fn inclusion_identity_rejects_wrong_arity() {
        assert!(verify_inclusion_identity(&independent_pair()).is_err());
    }

    #[test]
    fn gaussian_block_diagonal_is_zero() {
        let cov = Tensor2D::new(2, 2, vec![2.0, 0.0, 0.0, 3.0]).unwrap();
        let pair = GaussianPair::new(1, 1, cov).unwrap();
        assert!(gaussian_mi(&pair).unwrap().abs() < 1e-12);
    }

    #[test]
    fn gaussian_scalar_rho_08_matches_closed_form() {
        let pair = GaussianPair::scalar_with_correlation(0.8).unwrap();
        let mi = gaussian_mi(&pair).unwrap();
        let expected = -0.5 * (1.0 - 0.64_f64).ln();
        assert!((mi - expected).abs() < 1e-12);
        assert!((mi - 0.5108).abs() < 5e-5, "mi {mi}");
    }

    #[test]
    fn gaussian_mi_rejects_non_spd() {
        let cov = Tensor2D::new(2, 2, vec![1.0, 1.5, 1.5, 1.0]).unwrap();
        let pair = GaussianPair::new(1, 1, cov).unwrap();
        assert!(gaussian_mi(&pair).is_err());
    }

    #[test]
    fn grid_discretization_cross_checks_closed_form() {
        let joint = discretized_scalar_gaussian(0.8, 200, 6.0).unwrap();
        let grid_mi = discrete_mi(&joint, 0, 1).unwrap();
        let exact = gaussian_mi(&GaussianPair::scalar_with_correlation(0.8).unwrap()).unwrap();
        assert!(
            (grid_mi - exact).abs() < 0.01,
            "grid {grid_mi} vs exact {exact}"
        );
    }

    #[test]
    fn gaussian_mi_is_monotone_in_correlation() {
        let mut last = -1.0;
        for k in 0..20 {
            let rho = 0.045 * (k as f64 + 1.0);
            let mi = gaussian_mi(&GaussianPair::scalar_with_correlation(rho).unwrap()).unwrap();
            assert!(mi > last, "rho {rho}: {mi} <= {last}");
            last = mi;
        }
        // Blows up toward |rho| = 1.
        let near_one =
            gaussian_mi(&GaussianPair::scalar_with_correlation(0.999999).unwrap()).unwrap();
        assert!(near_one > 6.0);
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let joint = DiscreteJoint::random(vec![3, 2, 4], 99).unwrap();
        let text = joint.to_text();
        let back = DiscreteJoint::from_text(&text).unwrap();
        assert_eq!(joint, back);
    }
}
