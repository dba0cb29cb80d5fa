//! Least-squares AR fitting over nested orders on a common estimation
//! window, the one-step predictor, pseudo-innovation statistics and the
//! exact decomposition identities used as numerical oracles.
//!
//! All orders `k = 1..K_n` share the single summation range `j = K_n..n-1`,
//! so the leading k-block of the Gram matrix is the design matrix of the
//! order-k fit and the residual variances are monotone in k by construction.

use crate::error::{Error, Result};
use crate::process::{ArCoeffs, AutocovTable, MaCoeffs};
use crate::theory::{quadratic_r_norm, OrderKProjection, TheoreticalCurve};

const PIVOT_REL_TOL: f64 = 1e-12;

/// Gram summary of one sample path at maximal order `K_n`.
#[derive(Debug, Clone)]
pub struct DesignSummary {
    pub n: usize,
    pub k_n: usize,
    /// `N = n - K_n`.
    pub n_eff: usize,
    /// Row-major symmetric `K_n x K_n` Gram matrix `(1/N) sum x_j(K) x_j(K)'`.
    g: Vec<f64>,
    /// Cross vector `(1/N) sum x_j(K) x_{j+1}`.
    b: Vec<f64>,
    /// `(1/N) sum x_{j+1}^2`.
    pub c0: f64,
}

impl DesignSummary {
    pub fn gram(&self, r: usize, c: usize) -> f64 {
        self.g[r * self.k_n + c]
    }

    pub fn cross(&self, r: usize) -> f64 {
        self.b[r]
    }

    /// Quadratic form `d' G(k) d` over the leading `k`-block.
    pub fn quadratic_form(&self, d: &[f64]) -> f64 {
        let k = d.len();
        debug_assert!(k <= self.k_n);
        let mut acc = 0.0;
        for i in 0..k {
            acc += d[i] * d[i] * self.gram(i, i);
            for j in i + 1..k {
                acc += 2.0 * d[i] * d[j] * self.gram(i, j);
            }
        }
        acc
    }
}

/// Per-order least-squares output for `k = 1..K_n`.
#[derive(Debug, Clone)]
pub struct FitSequence {
    pub design: DesignSummary,
    /// `a_hat(k)`, index 0 holds the order-1 fit.
    coeffs: Vec<Vec<f64>>,
    /// Residual mean squares, nonincreasing in k.
    sigma2_hat: Vec<f64>,
}

impl FitSequence {
    pub fn k_n(&self) -> usize {
        self.design.k_n
    }

    pub fn n(&self) -> usize {
        self.design.n
    }

    pub fn n_eff(&self) -> usize {
        self.design.n_eff
    }

    pub fn coeffs(&self, k: usize) -> &[f64] {
        &self.coeffs[k - 1]
    }

    pub fn sigma2_hat(&self, k: usize) -> f64 {
        self.sigma2_hat[k - 1]
    }

    /// Degrees-of-freedom corrected variance `(N/(N-k)) sigma2_hat(k)`.
    pub fn sigma2_tilde(&self, k: usize) -> f64 {
        let n_eff = self.design.n_eff as f64;
        n_eff / (n_eff - k as f64) * self.sigma2_hat(k)
    }
}

/// Accumulates the Gram matrix, cross vector and response energy over the
/// fixed window `j = K_n..n-1` (1-based series indices; `x[0]` is `x_1`).
///
/// Entries with a common lag difference are window sums of the same lagged
/// product series, so one prefix-sum pass per lag fills the whole matrix.
pub fn design_summary(x: &[f64], k_n: usize) -> Result<DesignSummary> {
    let n = x.len();
    if k_n < 1 || k_n >= n {
        return Err(Error::InvalidWindow { k_n, n });
    }
    let n_eff = n - k_n;
    let inv_n = 1.0 / n_eff as f64;
    let mut g = vec![0.0; k_n * k_n];
    let mut b = vec![0.0; k_n];
    let mut c0 = 0.0;
    let mut prefix = vec![0.0; n + 1];
    for d in 0..=k_n {
        // prefix[u+1] = sum_{v <= u} x[v] x[v+d]  (0-based array indices)
        for u in 0..n - d {
            prefix[u + 1] = prefix[u] + x[u] * x[u + d];
        }
        let window = |lo: usize, hi: usize| prefix[hi + 1] - prefix[lo];
        if d == 0 {
            // c0: x_{j+1}^2 over j = K..n-1 -> array indices K..n-1.
            c0 = inv_n * window(k_n, n - 1);
        }
        // G[r][c] with |r - c| = d: sum_u x[u] x[u+d], u = K-1-max .. n-2-max.
        for m in d..k_n {
            let v = inv_n * window(k_n - 1 - m, n - 2 - m);
            g[m * k_n + (m - d)] = v;
            g[(m - d) * k_n + m] = v;
        }
        // b[r] uses lag r+1 = d: sum_u x[u] x[u+d], u = K-d .. n-1-d.
        if d >= 1 {
            b[d - 1] = inv_n * window(k_n - d, n - 1 - d);
        }
    }
    Ok(DesignSummary {
        n,
        k_n,
        n_eff,
        g,
        b,
        c0,
    })
}

/// Solves the nested normal equations `G(k) a_hat(k) = -b(k)` for every
/// `k = 1..K_n` through one incremental Cholesky factorization.
pub fn fit_all_orders(design: &DesignSummary) -> Result<FitSequence> {
    let k_n = design.k_n;
    let pivot_floor = PIVOT_REL_TOL * design.gram(0, 0).abs();
    // Lower-triangular factor of G, built row by row.
    let mut l = vec![0.0; k_n * k_n];
    // Forward substitution z = L^{-1} b, extended one entry per row.
    let mut z = vec![0.0; k_n];
    let mut coeffs = Vec::with_capacity(k_n);
    let mut sigma2_hat = Vec::with_capacity(k_n);
    let mut resid = design.c0;
    for k in 0..k_n {
        for j in 0..k {
            let mut v = design.gram(k, j);
            for m in 0..j {
                v -= l[k * k_n + m] * l[j * k_n + m];
            }
            l[k * k_n + j] = v / l[j * k_n + j];
        }
        let mut d = design.gram(k, k);
        for m in 0..k {
            d -= l[k * k_n + m] * l[k * k_n + m];
        }
        if !(d > pivot_floor) {
            return Err(Error::RankDegeneracy { order: k + 1 });
        }
        l[k * k_n + k] = d.sqrt();
        let mut zv = design.cross(k);
        for m in 0..k {
            zv -= l[k * k_n + m] * z[m];
        }
        z[k] = zv / l[k * k_n + k];
        resid -= z[k] * z[k];
        sigma2_hat.push(resid.max(0.0));
        // Back substitution L(k)' w = z(k); a_hat = -w.
        let mut w = z[..=k].to_vec();
        for i in (0..=k).rev() {
            w[i] /= l[i * k_n + i];
            for m in 0..i {
                w[m] -= l[i * k_n + m] * w[i];
            }
        }
        coeffs.push(w.iter().map(|v| -v).collect());
    }
    Ok(FitSequence {
        design: design.clone(),
        coeffs,
        sigma2_hat,
    })
}

/// One-step predictor `x_hat_{n+1}(k) = -x'_n(k) a_hat(k)`.
pub fn predict_one(x: &[f64], a_hat_k: &[f64]) -> f64 {
    let n = x.len();
    debug_assert!(a_hat_k.len() <= n);
    let mut v = 0.0;
    for (i, &a) in a_hat_k.iter().enumerate() {
        v -= a * x[n - 1 - i];
    }
    v
}

/// Pseudo-innovations `e_{t+1,k} = x_{t+1} + x'_t(k) a(k)` over the common
/// window and their mean square `S^2_k`.
pub fn pseudo_innovation_stats(
    x: &[f64],
    proj: &OrderKProjection,
    k_n: usize,
) -> (f64, Vec<f64>) {
    let n = x.len();
    let k = proj.k;
    debug_assert!(k <= k_n && k_n < n);
    let mut eps = Vec::with_capacity(n - k_n);
    let mut sq = 0.0;
    for t in k_n..n {
        // 1-based j = t: e_{j+1,k} uses x_{j+1} = x[t] and x_{j+1-i} = x[t-i].
        let mut v = x[t];
        for i in 1..=k {
            v += proj.a_k[i - 1] * x[t - i];
        }
        sq += v * v;
        eps.push(v);
    }
    (sq / (n - k_n) as f64, eps)
}

/// Relative residual of the exact decomposition of `S_n(k) = (N + 2k) sigma2_hat(k)`
/// into theoretical loss, variance fluctuation and projection-error terms.
/// The identity is exact algebra, so the residual must sit at floating-point
/// level for any path.
pub fn decomposition_check(
    x: &[f64],
    proj_k: &OrderKProjection,
    fits: &FitSequence,
    curve: &TheoreticalCurve,
    sigma2: f64,
) -> f64 {
    let k = proj_k.k;
    let n_eff = fits.n_eff() as f64;
    let sigma2_hat = fits.sigma2_hat(k);
    let lhs = (n_eff + 2.0 * k as f64) * sigma2_hat;

    let (s2_k, _) = pseudo_innovation_stats(x, proj_k, fits.k_n());
    let diff: Vec<f64> = fits
        .coeffs(k)
        .iter()
        .zip(&proj_k.a_k)
        .map(|(ah, a)| ah - a)
        .collect();
    let emp_norm = fits.design.quadratic_form(&diff);
    let loss = curve.loss[k - 1];
    let rhs = n_eff * loss
        + 2.0 * k as f64 * (sigma2_hat - sigma2)
        + (k as f64 * sigma2 - n_eff * emp_norm)
        + n_eff * sigma2
        + n_eff * (s2_k - proj_k.sigma2_k);
    (lhs - rhs).abs() / lhs.abs().max(f64::MIN_POSITIVE)
}

/// Exact independent-realization conditional MSPE excess
/// `||a_hat(k) - a||_R^2`, with `a_hat` zero-padded beyond `k` and `a`
/// truncated at its tolerance.
pub fn empirical_r_distance(
    a_hat_k: &[f64],
    ar: &ArCoeffs,
    gamma: &AutocovTable,
) -> Result<f64> {
    let d = coefficient_gap(a_hat_k, ar);
    quadratic_r_norm(&d, gamma)
}

/// Same value as [`empirical_r_distance`], computed through the MA
/// representation: `||d||_R^2 = sigma^2 sum_m (d * b)_m^2`. Linear in the
/// MA length, which makes it cheap inside Monte Carlo loops.
pub fn r_distance_via_ma(a_hat_k: &[f64], ar: &ArCoeffs, ma: &MaCoeffs, sigma2: f64) -> f64 {
    let d = coefficient_gap(a_hat_k, ar);
    let b = &ma.b;
    let mut acc = 0.0;
    // c_m = sum_i d_{i+1} b_{m-i}, m = 0..len(d)+len(b)-2 (d indexed from lag 1).
    for m in 0..d.len() + b.len() - 1 {
        let lo = m.saturating_sub(b.len() - 1);
        let hi = m.min(d.len() - 1);
        let mut c = 0.0;
        for i in lo..=hi {
            c += d[i] * b[m - i];
        }
        acc += c * c;
    }
    sigma2 * acc
}

fn coefficient_gap(a_hat_k: &[f64], ar: &ArCoeffs) -> Vec<f64> {
    let len = a_hat_k.len().max(ar.a.len()).max(1);
    let mut d = vec![0.0; len];
    for (i, &v) in a_hat_k.iter().enumerate() {
        d[i] += v;
    }
    for (i, &v) in ar.a.iter().enumerate() {
        d[i] -= v;
    }
    d
}
