//! Order-selection criteria: the AIC family, FPE, S_n, S_p, C_p, their
//! alpha-weighted variants and the consistency-type BIC/HQ contrasts.
//!
//! Formula notes (n = sample size, N = n - K_n):
//!   S_n(k)   = (N + 2k) sigma2_hat(k)
//!   AIC(k)   = log sigma2_hat(k) + 2k/n
//!   FPE(k)   = ((n + k)/(n - k)) sigma2_hat(k)
//!   S_p(k)   = (1 + k/(N - k - 1)) sigma2_tilde(k)
//!   C_p(k)   = N sigma2_hat(k) - (N - 2k) sigma2_tilde(K_n)
//!   AIC_a(k) = log sigma2_hat(k) + a k/n
//!   FPE_a(k) = (1 + a k/n) sigma2_hat(k)
//!   S_a(k)   = (N + a k) sigma2_hat(k)
//!   BIC(k)   = log sigma2_hat(k) + k log(n)/n
//!   HQ(k)    = log sigma2_hat(k) + 2 c k log(log n)/n,  c > 1
//!
//! S_p and C_p consume the degrees-of-freedom corrected variance
//! sigma2_tilde; AIC, FPE and S_n consume the raw residual mean square.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fit::FitSequence;
use crate::theory::argmin_smallest;

/// Default Hannan-Quinn constant; any c > 1 is admissible.
pub const DEFAULT_HQ_C: f64 = 1.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriterionId {
    Aic,
    Fpe,
    Sn,
    Sp,
    Cp,
    AicAlpha(f64),
    FpeAlpha(f64),
    SnAlpha(f64),
    Bic,
    Hq(f64),
}

impl CriterionId {
    pub fn hq() -> Self {
        CriterionId::Hq(DEFAULT_HQ_C)
    }

    fn validate(&self) -> Result<()> {
        let alpha = match self {
            CriterionId::AicAlpha(a) | CriterionId::FpeAlpha(a) | CriterionId::SnAlpha(a) => *a,
            CriterionId::Hq(c) => {
                if !(*c > 1.0) {
                    return Err(Error::Config(format!("HQ constant must be > 1, got {c}")));
                }
                return Ok(());
            }
            _ => return Ok(()),
        };
        if !(alpha > 1.0) {
            return Err(Error::Config(format!("alpha must be > 1, got {alpha}")));
        }
        Ok(())
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriterionId::Aic => write!(f, "aic"),
            CriterionId::Fpe => write!(f, "fpe"),
            CriterionId::Sn => write!(f, "sn"),
            CriterionId::Sp => write!(f, "sp"),
            CriterionId::Cp => write!(f, "cp"),
            CriterionId::AicAlpha(a) => write!(f, "aic_alpha:{a}"),
            CriterionId::FpeAlpha(a) => write!(f, "fpe_alpha:{a}"),
            CriterionId::SnAlpha(a) => write!(f, "sn_alpha:{a}"),
            CriterionId::Bic => write!(f, "bic"),
            CriterionId::Hq(c) => write!(f, "hq:{c}"),
        }
    }
}

impl FromStr for CriterionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let parse_param = |p: Option<&str>, what: &str| -> Result<f64> {
            let p = p.ok_or_else(|| Error::Config(format!("{what} requires a parameter, e.g. {what}:3.0")))?;
            p.parse::<f64>()
                .map_err(|_| Error::Config(format!("bad {what} parameter: {p}")))
        };
        let id = match name {
            "aic" => CriterionId::Aic,
            "fpe" => CriterionId::Fpe,
            "sn" => CriterionId::Sn,
            "sp" => CriterionId::Sp,
            "cp" => CriterionId::Cp,
            "bic" => CriterionId::Bic,
            "hq" => match param {
                Some(p) => CriterionId::Hq(
                    p.parse()
                        .map_err(|_| Error::Config(format!("bad hq parameter: {p}")))?,
                ),
                None => CriterionId::hq(),
            },
            "aic_alpha" => CriterionId::AicAlpha(parse_param(param, "aic_alpha")?),
            "fpe_alpha" => CriterionId::FpeAlpha(parse_param(param, "fpe_alpha")?),
            "sn_alpha" => CriterionId::SnAlpha(parse_param(param, "sn_alpha")?),
            other => return Err(Error::Config(format!("unknown criterion: {other}"))),
        };
        id.validate()?;
        Ok(id)
    }
}

/// Per-order scores under one criterion and the selected order.
#[derive(Debug, Clone)]
pub struct CriterionScores {
    pub criterion: CriterionId,
    /// Index 0 holds k = 1.
    pub scores: Vec<f64>,
    /// Smallest argmin of the scores.
    pub k_hat: usize,
}

/// Scores every candidate order `1..K_n`.
pub fn score(criterion: CriterionId, fits: &FitSequence) -> Result<CriterionScores> {
    criterion.validate()?;
    let n = fits.n() as f64;
    let n_eff = fits.n_eff() as f64;
    let k_n = fits.k_n();
    let uses_log = matches!(
        criterion,
        CriterionId::Aic | CriterionId::AicAlpha(_) | CriterionId::Bic | CriterionId::Hq(_)
    );
    let tilde_kn = fits.sigma2_tilde(k_n);
    let mut scores = Vec::with_capacity(k_n);
    for k in 1..=k_n {
        let s2 = fits.sigma2_hat(k);
        if uses_log && !(s2 > 0.0) {
            return Err(Error::DegenerateFit { order: k });
        }
        let kf = k as f64;
        let v = match criterion {
            CriterionId::Aic => s2.ln() + 2.0 * kf / n,
            CriterionId::Fpe => (n + kf) / (n - kf) * s2,
            CriterionId::Sn => (n_eff + 2.0 * kf) * s2,
            CriterionId::Sp => (1.0 + kf / (n_eff - kf - 1.0)) * fits.sigma2_tilde(k),
            CriterionId::Cp => n_eff * s2 - (n_eff - 2.0 * kf) * tilde_kn,
            CriterionId::AicAlpha(a) => s2.ln() + a * kf / n,
            CriterionId::FpeAlpha(a) => (1.0 + a * kf / n) * s2,
            CriterionId::SnAlpha(a) => (n_eff + a * kf) * s2,
            CriterionId::Bic => s2.ln() + kf * n.ln() / n,
            CriterionId::Hq(c) => s2.ln() + 2.0 * c * kf * n.ln().ln() / n,
        };
        scores.push(v);
    }
    let k_hat = argmin_smallest(&scores) + 1;
    Ok(CriterionScores {
        criterion,
        scores,
        k_hat,
    })
}

/// Selected order (smallest argmin of the scores).
pub fn select(criterion: CriterionId, fits: &FitSequence) -> Result<usize> {
    Ok(score(criterion, fits)?.k_hat)
}
