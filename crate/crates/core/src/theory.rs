//! Population quantities: best order-k projection coefficients, fit norms,
//! the theoretical loss curve and its minimizer, asymptotic order formulas
//! and the basin-shape diagnostic.

use crate::error::{Error, Result};
use crate::process::{AutocovTable, ProcessSpec};

/// Best linear predictor of order `k` (Yule-Walker solution) in the
/// convention `x_{k+1} + x'_k(k) a(k) = e_{k+1,k}`.
#[derive(Debug, Clone)]
pub struct OrderKProjection {
    pub k: usize,
    pub a_k: Vec<f64>,
    /// k-th order innovation variance `sigma^2_k = sigma^2 + ||a - a(k)||_R^2`.
    pub sigma2_k: f64,
}

/// Theoretical loss curve `L_n(k)` for `k = 1..K_n`.
#[derive(Debug, Clone)]
pub struct TheoreticalCurve {
    pub n: usize,
    pub k_n: usize,
    /// `N = n - K_n`.
    pub n_eff: usize,
    /// `L_n(k)`, index 0 holds k = 1.
    pub loss: Vec<f64>,
    /// `||a - a(k)||_R^2`, index 0 holds k = 1.
    pub fit_norm: Vec<f64>,
    /// Smallest argmin of the loss.
    pub k_star: usize,
    /// Complexity weight; 2 gives the plain curve `(k/N) sigma^2 + fit_norm`.
    pub alpha: f64,
    pub sigma2: f64,
}

/// Levinson-Durbin recursion up to order `k_max`, returning every
/// intermediate projection.
pub fn yule_walker_sequence(gamma: &AutocovTable, k_max: usize) -> Result<Vec<OrderKProjection>> {
    if k_max < 1 {
        return Err(Error::Config("order must be >= 1".into()));
    }
    if gamma.max_lag() < k_max {
        return Err(Error::Precision {
            what: "autocovariance table too short for requested order".into(),
            required: k_max,
            cap: gamma.max_lag(),
        });
    }
    let g = &gamma.gamma;
    if !(g[0] > 0.0) {
        return Err(Error::RankDegeneracy { order: 1 });
    }
    let mut out = Vec::with_capacity(k_max);
    // phi minimizes E(x_t - sum phi_i x_{t-i})^2; a(k) = -phi.
    let mut phi: Vec<f64> = Vec::with_capacity(k_max);
    let mut sigma = g[0];
    for m in 1..=k_max {
        let mut acc = g[m];
        for (j, &p) in phi.iter().enumerate() {
            acc -= p * g[m - 1 - j];
        }
        let kappa = acc / sigma;
        let prev = phi.clone();
        phi.push(0.0);
        for j in 0..m {
            let reflected = if j + 1 < m { prev[m - 2 - j] } else { 0.0 };
            phi[j] = if j + 1 < m { prev[j] } else { 0.0 } - kappa * reflected;
        }
        phi[m - 1] = kappa;
        sigma *= 1.0 - kappa * kappa;
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::RankDegeneracy { order: m });
        }
        out.push(OrderKProjection {
            k: m,
            a_k: phi.iter().map(|p| -p).collect(),
            sigma2_k: sigma,
        });
    }
    Ok(out)
}

/// Projection of order exactly `k`.
pub fn yule_walker(gamma: &AutocovTable, k: usize) -> Result<OrderKProjection> {
    Ok(yule_walker_sequence(gamma, k)?.pop().expect("nonempty"))
}

/// `||a - a(k)||_R^2 = sigma^2_k - sigma^2`, clamped at zero.
pub fn fit_norm(gamma: &AutocovTable, k: usize) -> Result<f64> {
    let proj = yule_walker(gamma, k)?;
    Ok((proj.sigma2_k - gamma.sigma2).max(0.0))
}

/// Quadratic form `sum_{i,j} d_i d_j gamma_{|i-j|}` for a coefficient
/// perturbation `d` indexed from lag 1.
pub fn quadratic_r_norm(d: &[f64], gamma: &AutocovTable) -> Result<f64> {
    if d.is_empty() {
        return Ok(0.0);
    }
    if gamma.max_lag() + 1 < d.len() {
        return Err(Error::Precision {
            what: "autocovariance table does not cover the support of d".into(),
            required: d.len() - 1,
            cap: gamma.max_lag(),
        });
    }
    let g = &gamma.gamma;
    let mut acc = 0.0;
    for i in 0..d.len() {
        acc += d[i] * d[i] * g[0];
        for j in i + 1..d.len() {
            acc += 2.0 * d[i] * d[j] * g[j - i];
        }
    }
    Ok(acc)
}

/// Theoretical loss curve `L_n^(alpha)(k) = (alpha-1) k sigma^2 / N + ||a - a(k)||_R^2`
/// over `k = 1..K_n`, with `N = n - K_n`. Ties in the argmin break toward the
/// smallest order.
pub fn loss_curve(spec: &ProcessSpec, n: usize, k_n: usize, alpha: f64) -> Result<TheoreticalCurve> {
    if k_n < 1 || k_n >= n {
        return Err(Error::InvalidWindow { k_n, n });
    }
    if !(alpha >= 1.0) {
        return Err(Error::Config(format!("alpha must be >= 1, got {alpha}")));
    }
    let sigma2 = spec.sigma2();
    let gamma = spec.autocovariances(k_n)?;
    let projections = yule_walker_sequence(&gamma, k_n)?;
    let n_eff = n - k_n;
    let fit_norm: Vec<f64> = projections
        .iter()
        .map(|p| (p.sigma2_k - sigma2).max(0.0))
        .collect();
    let loss: Vec<f64> = fit_norm
        .iter()
        .enumerate()
        .map(|(i, fnorm)| (alpha - 1.0) * (i + 1) as f64 * sigma2 / n_eff as f64 + fnorm)
        .collect();
    let k_star = argmin_smallest(&loss) + 1;
    Ok(TheoreticalCurve {
        n,
        k_n,
        n_eff,
        loss,
        fit_norm,
        k_star,
        alpha,
        sigma2,
    })
}

pub(crate) fn argmin_smallest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Leading term `(1/beta) log N` of the optimal order under exponentially
/// decaying coefficient tails.
pub fn kstar_asymptotic_exponential(beta: f64, n_eff: usize) -> f64 {
    (n_eff as f64).ln() / beta
}

/// `(N C_4 beta / sigma^2)^{1/(beta+1)}`, the optimal order under
/// algebraically decaying fit norms `||a - a(k)||_R^2 ~ C_4 k^{-beta}`.
pub fn kstar_asymptotic_algebraic(sigma2: f64, c4: f64, beta: f64, n_eff: usize) -> f64 {
    (n_eff as f64 * c4 * beta / sigma2).powf(1.0 / (beta + 1.0))
}

/// Basin diagnostic: `N (L_n(k) - L_n(k*)) / |k - k*|` for every `k != k*`.
pub fn basin_profile(curve: &TheoreticalCurve) -> Vec<(usize, f64)> {
    let l_star = curve.loss[curve.k_star - 1];
    (1..=curve.k_n)
        .filter(|&k| k != curve.k_star)
        .map(|k| {
            let ratio = curve.n_eff as f64 * (curve.loss[k - 1] - l_star)
                / (k as f64 - curve.k_star as f64).abs();
            (k, ratio)
        })
        .collect()
}
