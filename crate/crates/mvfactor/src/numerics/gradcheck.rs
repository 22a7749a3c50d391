//! Central finite-difference gradient checker.

use crate::error::{Error, Result};
use crate::numerics::mlp::MlpParams;

/// Verifies an analytic gradient against central finite differences over a
/// flat parameter vector. `value` evaluates the scalar objective at a given
/// parameter vector; `analytic` is the claimed gradient at `theta`.
///
/// Returns the maximum over coordinates of
/// |analytic - numeric| / max(1, |analytic|, |numeric|).
pub fn grad_check_flat<F>(mut value: F, theta: &[f64], analytic: &[f64], eps: f64) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if eps <= 0.0 {
        return Err(Error::Input(format!(
            "grad_check eps must be > 0, got {eps}"
        )));
    }
    if theta.len() != analytic.len() {
        return Err(Error::dimension(
            "grad_check",
            format!(
                "gradient length {} does not match parameter length {}",
                analytic.len(),
                theta.len()
            ),
        ));
    }
    let mut work = theta.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..theta.len() {
        work[i] = theta[i] + eps;
        let plus = value(&work)?;
        work[i] = theta[i] - eps;
        let minus = value(&work)?;
        work[i] = theta[i];
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::numeric(
                "grad_check",
                format!("loss non-finite at perturbed coordinate {i}"),
            ));
        }
        let numeric = (plus - minus) / (2.0 * eps);
        let denom = 1.0_f64.max(analytic[i].abs()).max(numeric.abs());
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    Ok(worst)
}

/// Checks the gradient of a scalar loss of MLP parameters. The closure must
/// return the loss value and its analytic gradient at the given parameters;
/// only the value is used at perturbed points.
pub fn grad_check<F>(mut loss: F, params: &MlpParams, eps: f64) -> Result<f64>
where
    F: FnMut(&MlpParams) -> Result<(f64, MlpParams)>,
{
    let (center_value, analytic) = loss(params)?;
    if !center_value.is_finite() {
        return Err(Error::numeric("grad_check", "loss non-finite at center"));
    }
    let theta = params.flatten();
    let analytic_flat = analytic.flatten();
    let mut scratch = params.clone();
    grad_check_flat(
        |flat| {
            scratch.assign_from_flat(flat)?;
            loss(&scratch).map(|(v, _)| v)
        },
        &theta,
        &analytic_flat,
        eps,
    )
}
