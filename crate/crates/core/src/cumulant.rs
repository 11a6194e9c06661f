//! Closed-form cumulant theory of the truncated Levy flight: kappa_j,
//! lambda_j, walk cumulant functions, regime thresholds, the model
//! characteristic function and the Levy-regime return law.

use std::f64::consts::PI;

use crate::error::{Result, TlfError};
use crate::special::gamma;
use crate::stable::StableParams;
use crate::truncation::{DeformationKind, TlfModel};

/// Highest even order exposed by default; beyond it the truncated series of
/// the model characteristic function is no longer stable.
pub const MAX_ORDER: u32 = 8;

/// A(alpha) = (2/pi) Gamma(alpha + 1) sin(pi alpha / 2), positive on (0, 2).
pub fn a_coefficient(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(TlfError::Domain(format!(
            "A(alpha) is defined on (0, 2), got {alpha}"
        )));
    }
    Ok(2.0 / PI * gamma(alpha + 1.0)? * (PI * alpha / 2.0).sin())
}

fn influence(model: &TlfModel, j: u32) -> Result<f64> {
    let alpha = model.stable.alpha();
    if model.deformation.is_custom() {
        model.deformation.influence_numeric(j, alpha)
    } else {
        model.deformation.influence_closed(j, alpha)
    }
}

/// kappa_j = l^{j-alpha} gamma^alpha A(alpha) mu_j(alpha) for even j;
/// odd orders are exactly zero by symmetry and are returned without
/// computation.
pub fn cumulant(model: &TlfModel, j: u32) -> Result<f64> {
    if j % 2 == 1 {
        return Ok(0.0);
    }
    if j < 2 {
        return Err(TlfError::Domain("cumulant order must be >= 1".into()));
    }
    let alpha = model.stable.alpha();
    let g = model.stable.gamma();
    let l = model.deformation.ell();
    let mu = influence(model, j)?;
    Ok(l.powf(j as f64 - alpha) * g.powf(alpha) * a_coefficient(alpha)? * mu)
}

/// Truncated-Cauchy cumulants, kappa_j = l^{j-1} gamma 2 M_{j-2} / pi,
/// via the numerically integrated deformation moments. Requires alpha = 1.
pub fn cumulant_cauchy(model: &TlfModel, j: u32) -> Result<f64> {
    if model.stable.alpha() != 1.0 {
        return Err(TlfError::Domain(format!(
            "the deformation-moment form of the cumulants holds at alpha = 1 only, \
             got alpha = {}",
            model.stable.alpha()
        )));
    }
    if j % 2 != 0 || j < 2 {
        return Err(TlfError::Domain(format!(
            "even order j >= 2 required, got {j}"
        )));
    }
    let l = model.deformation.ell();
    let g = model.stable.gamma();
    let m = model.deformation.moment(j - 2)?;
    Ok(l.powi(j as i32 - 1) * g * 2.0 * m / PI)
}

/// Standardized cumulant lambda_j = (l/gamma)^{alpha(j-2)/2}
/// mu_j / (A^{j/2-1} mu_2^{j/2}), equal to kappa_j / kappa_2^{j/2}.
pub fn cumulant_coefficient(model: &TlfModel, j: u32) -> Result<f64> {
    if j % 2 != 0 || j < 4 {
        return Err(TlfError::Domain(format!(
            "cumulant coefficients are exposed for even j >= 4, got {j}"
        )));
    }
    let alpha = model.stable.alpha();
    let ratio = model.deformation.ell() / model.stable.gamma();
    let a = a_coefficient(alpha)?;
    let mu_j = influence(model, j)?;
    let mu_2 = influence(model, 2)?;
    let half = j as f64 / 2.0;
    Ok(ratio.powf(alpha * (j as f64 - 2.0) / 2.0) * mu_j / (a.powf(half - 1.0) * mu_2.powf(half)))
}

/// Family closed form of the variance (the j = 2 cumulant).
pub fn family_variance(model: &TlfModel) -> Result<f64> {
    let alpha = model.stable.alpha();
    let pref = model.deformation.ell().powf(2.0 - alpha)
        * model.stable.gamma().powf(alpha)
        * a_coefficient(alpha)?;
    let shape = match model.deformation.kind() {
        DeformationKind::MantegnaStanley => 1.0 / (2.0 - alpha),
        DeformationKind::Exponential => gamma(2.0 - alpha)?,
        DeformationKind::PowerExponential { h } => gamma((2.0 - alpha) / h)? / h,
        DeformationKind::Custom { .. } => {
            return Err(TlfError::UnsupportedFamily(
                "no closed-form variance for a custom deformation".into(),
            ))
        }
    };
    Ok(pref * shape)
}

/// Family closed form of the kurtosis coefficient lambda_4.
pub fn family_kurtosis(model: &TlfModel) -> Result<f64> {
    let alpha = model.stable.alpha();
    let ratio = (model.deformation.ell() / model.stable.gamma()).powf(alpha);
    let a = a_coefficient(alpha)?;
    let shape = match model.deformation.kind() {
        DeformationKind::MantegnaStanley => (2.0 - alpha).powi(2) / (4.0 - alpha),
        DeformationKind::Exponential => (2.0 - alpha) * (3.0 - alpha) / gamma(2.0 - alpha)?,
        DeformationKind::PowerExponential { h } => {
            h * gamma((4.0 - alpha) / h)? / gamma((2.0 - alpha) / h)?.powi(2)
        }
        DeformationKind::Custom { .. } => {
            return Err(TlfError::UnsupportedFamily(
                "no closed-form kurtosis for a custom deformation".into(),
            ))
        }
    };
    Ok(ratio / a * shape)
}

/// Walk cumulant function: kappa_j(n) = n kappa_j (linear in step count).
pub fn walk_cumulant(model: &TlfModel, j: u32, n: u64) -> Result<f64> {
    if n < 1 {
        return Err(TlfError::Domain("step count must be >= 1".into()));
    }
    Ok(n as f64 * cumulant(model, j)?)
}

/// Walk cumulant coefficient lambda_j(n) = lambda_j / n^{j/2 - 1}, the
/// cumulant form of the central limit theorem.
pub fn walk_cumulant_coefficient(model: &TlfModel, j: u32, n: u64) -> Result<f64> {
    if n < 1 {
        return Err(TlfError::Domain("step count must be >= 1".into()));
    }
    Ok(cumulant_coefficient(model, j)? / (n as f64).powf(j as f64 / 2.0 - 1.0))
}

/// Regime summary of a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    /// Diffusion coefficient D = kappa_2 (variance per step).
    pub diffusion: f64,
    /// Gaussian-regime threshold scale N_G = lambda_4. The walk is
    /// effectively Gaussian for n well above this (n >= 10 N_G as a
    /// rule of thumb; the threshold itself is the reported scale).
    pub n_gauss: f64,
    /// Levy-regime upper bound (l/gamma)^alpha = 1/epsilon.
    pub n_levy_max: f64,
    /// Scale-separation parameter (gamma/l)^alpha.
    pub epsilon: f64,
}

pub fn regime_report(model: &TlfModel) -> Result<RegimeReport> {
    Ok(RegimeReport {
        diffusion: cumulant(model, 2)?,
        n_gauss: cumulant_coefficient(model, 4)?,
        n_levy_max: 1.0 / model.epsilon(),
        epsilon: model.epsilon(),
    })
}

/// Per-order cumulant table for a model.
#[derive(Debug, Clone)]
pub struct CumulantTable {
    pub orders: Vec<u32>,
    pub a_alpha: f64,
    pub epsilon: f64,
    /// Influence functions mu_j(alpha), same order as `orders`.
    pub mu: Vec<f64>,
    /// Cumulants kappa_j (units length^j).
    pub kappa: Vec<f64>,
    /// Standardized cumulants kappa_j / kappa_2^{j/2}; 1 at j = 2.
    pub lambda: Vec<f64>,
    /// Variance kappa_2.
    pub variance: f64,
}

impl CumulantTable {
    pub fn build(model: &TlfModel, orders: &[u32]) -> Result<Self> {
        let alpha = model.stable.alpha();
        for &j in orders {
            if j % 2 != 0 || j < 2 || j > MAX_ORDER {
                return Err(TlfError::Domain(format!(
                    "table orders must be even and within [2, {MAX_ORDER}], got {j}"
                )));
            }
            if (j as f64) <= alpha {
                return Err(TlfError::Domain(format!(
                    "order {j} does not exceed alpha = {alpha}"
                )));
            }
        }
        let variance = cumulant(model, 2)?;
        let mut mu = Vec::with_capacity(orders.len());
        let mut kappa = Vec::with_capacity(orders.len());
        let mut lambda = Vec::with_capacity(orders.len());
        for &j in orders {
            mu.push(influence(model, j)?);
            let k = cumulant(model, j)?;
            kappa.push(k);
            lambda.push(k / variance.powf(j as f64 / 2.0));
        }
        Ok(Self {
            orders: orders.to_vec(),
            a_alpha: a_coefficient(alpha)?,
            epsilon: model.epsilon(),
            mu,
            kappa,
            lambda,
            variance,
        })
    }
}

/// Reliability guard for the truncated cumulant series of the model
/// characteristic function: |q| l must not exceed 1.
fn check_series_domain(model: &TlfModel, q: f64) -> Result<()> {
    if q.abs() * model.deformation.ell() > 1.0 {
        return Err(TlfError::Domain(format!(
            "model characteristic function is reliable only for |q| l <= 1; \
             got |q| l = {}",
            q.abs() * model.deformation.ell()
        )));
    }
    Ok(())
}

/// Model characteristic function exp(sum_{j even <= j_max} n kappa_j (iq)^j / j!).
/// With every odd cumulant zero the series is real; for even truncation the
/// value stays in (0, 1] on the guarded domain.
pub fn model_char_fn(model: &TlfModel, q: f64, n: u64, j_max: u32) -> Result<f64> {
    if j_max % 2 != 0 || j_max < 2 || j_max > MAX_ORDER {
        return Err(TlfError::Domain(format!(
            "series order cap must be even and within [2, {MAX_ORDER}], got {j_max}"
        )));
    }
    if n < 1 {
        return Err(TlfError::Domain("step count must be >= 1".into()));
    }
    check_series_domain(model, q)?;
    let mut exponent = 0.0;
    let mut factorial = 1.0f64; // j!
    let mut j = 2u32;
    let mut q_pow = q * q;
    while j <= j_max {
        factorial *= ((j - 1) * j) as f64;
        let sign = if j % 4 == 0 { 1.0 } else { -1.0 }; // (iq)^j for even j
        exponent += sign * n as f64 * cumulant(model, j)? * q_pow / factorial;
        q_pow *= q * q;
        j += 2;
    }
    Ok(exponent.exp())
}

/// Guard shared by the Levy-regime operations: the effective scale
/// gamma n^{1/alpha} must stay well inside l, made concrete as
/// n epsilon <= 0.1 (the rescaled model's epsilon is n epsilon).
fn levy_regime_ok(model: &TlfModel, n: u64) -> bool {
    n as f64 * model.epsilon() <= 0.1
}

/// |theta(q, n, gamma) - theta(q, 1, gamma n^{1/alpha})|: the Levy-regime
/// scale identity, exact at model level because every kappa_j scales as
/// gamma^alpha. Returns the absolute discrepancy.
pub fn scale_identity_check(model: &TlfModel, q: f64, n: u64, j_max: u32) -> Result<f64> {
    if !levy_regime_ok(model, n) {
        return Err(TlfError::Precondition(format!(
            "scale identity requires gamma n^(1/alpha) << l (n epsilon <= 0.1); \
             n = {n} gives n epsilon = {}",
            n as f64 * model.epsilon()
        )));
    }
    let walk = model_char_fn(model, q, n, j_max)?;
    let alpha = model.stable.alpha();
    let rescaled = TlfModel::new(
        StableParams::new(alpha, model.stable.gamma() * (n as f64).powf(1.0 / alpha))?,
        model.deformation.clone(),
    );
    let single = model_char_fn(&rescaled, q, 1, j_max)?;
    Ok((walk - single).abs())
}

/// Undisturbed-Levy return value W(0, n) = Gamma(1/alpha) / (pi alpha gamma
/// n^{1/alpha}). The O(epsilon_eff^2)-and-beyond deformation correction is
/// not modeled; a warning is logged outside the Levy-regime guard.
pub fn return_density(model: &TlfModel, n: u64) -> Result<f64> {
    if n < 1 {
        return Err(TlfError::Domain("step count must be >= 1".into()));
    }
    if !levy_regime_ok(model, n) {
        log::warn!(
            "return density requested outside the Levy regime \
             (n epsilon = {} > 0.1); the undisturbed value is unreliable there",
            n as f64 * model.epsilon()
        );
    }
    let alpha = model.stable.alpha();
    Ok(gamma(1.0 / alpha)?
        / (PI * alpha * model.stable.gamma() * (n as f64).powf(1.0 / alpha)))
}
