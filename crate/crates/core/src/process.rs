//! Data-generating processes: ARMA and explicit-rule AR models, their
//! AR/MA series expansions, autocovariances and seeded simulation.
//!
//! Sign convention throughout: the AR representation is written as
//! `x_t + a_1 x_{t-1} + a_2 x_{t-2} + ... = e_t`, so a stable AR(1) with
//! autoregression parameter `phi` has `a_1 = -phi`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Default coefficient truncation tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Hard cap on the length of truncated coefficient sequences.
pub const MAX_COEFFS: usize = 4096;

const STATIONARITY_GRID: usize = 720;
const STATIONARITY_FLOOR: f64 = 1e-6;

/// Coefficient rule for an explicitly specified AR(∞) model.
#[derive(Debug, Clone, PartialEq)]
pub enum ArRule {
    /// `a_i = c * rho^i`, `|rho| < 1`.
    Exponential { c: f64, rho: f64 },
    /// `a_i = c * i^(-gamma)`, `gamma > 1` for absolute summability.
    Algebraic { c: f64, gamma: f64 },
    /// A finite list `a_1 .. a_p`.
    Coeffs(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProcessKind {
    /// `x_t = phi_1 x_{t-1} + .. + phi_p x_{t-p} + e_t - theta_1 e_{t-1} - .. - theta_q e_{t-q}`
    Arma { phi: Vec<f64>, theta: Vec<f64> },
    ExplicitAr(ArRule),
}

/// A validated data-generating process.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    kind: ProcessKind,
    sigma2: f64,
}

/// Truncated AR(∞) coefficients `a_1 .. a_M` with a bound on the squared tail.
#[derive(Debug, Clone)]
pub struct ArCoeffs {
    pub a: Vec<f64>,
    /// Bound on `sum_{i > M} a_i^2`.
    pub tail_bound: f64,
    pub truncation_tol: f64,
}

/// Truncated MA(∞) coefficients `b_0 .. b_M`, `b_0 = 1`.
#[derive(Debug, Clone)]
pub struct MaCoeffs {
    pub b: Vec<f64>,
    pub tail_bound: f64,
}

/// Autocovariances `gamma_0 .. gamma_M` together with the innovation variance.
#[derive(Debug, Clone)]
pub struct AutocovTable {
    pub gamma: Vec<f64>,
    pub sigma2: f64,
}

impl AutocovTable {
    pub fn max_lag(&self) -> usize {
        self.gamma.len() - 1
    }
}

/// Identifier of one independent random stream.
///
/// The (master, cell, rep) triple is embedded verbatim into the ChaCha seed,
/// so distinct triples always yield distinct streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamId {
    pub master: u64,
    pub cell: u64,
    pub rep: u64,
}

impl StreamId {
    pub fn new(master: u64, cell: u64, rep: u64) -> Self {
        StreamId { master, cell, rep }
    }

    /// Stream for standalone (non-harness) use.
    pub fn from_master(master: u64) -> Self {
        StreamId::new(master, 0, 0)
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        seed[0..8].copy_from_slice(&self.master.to_le_bytes());
        seed[8..16].copy_from_slice(&self.cell.to_le_bytes());
        seed[16..24].copy_from_slice(&self.rep.to_le_bytes());
        ChaCha8Rng::from_seed(seed)
    }
}

/// One simulated realization, retaining the innovations and enough
/// pre-sample history to evaluate exact conditional means.
#[derive(Debug, Clone)]
pub struct SamplePath {
    /// Observations `x_1 .. x_n`.
    pub x: Vec<f64>,
    /// Innovations `e_1 .. e_n` actually drawn.
    pub innovations: Vec<f64>,
    /// Tail of the burn-in period: `pre_x.last()` is `x_0`, and so on.
    pub pre_x: Vec<f64>,
    pub pre_e: Vec<f64>,
    pub stream: StreamId,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `x_t` for integer time `t <= n`, reaching into the burn-in tail for
    /// `t <= 0`. Times before the retained history are treated as zero
    /// (they are below truncation tolerance by the burn-in contract).
    fn x_at(&self, t: i64) -> f64 {
        if t >= 1 {
            self.x[(t - 1) as usize]
        } else {
            let idx = self.pre_x.len() as i64 + t - 1;
            if idx >= 0 {
                self.pre_x[idx as usize]
            } else {
                0.0
            }
        }
    }

    fn e_at(&self, t: i64) -> f64 {
        if t >= 1 {
            self.innovations[(t - 1) as usize]
        } else {
            let idx = self.pre_e.len() as i64 + t - 1;
            if idx >= 0 {
                self.pre_e[idx as usize]
            } else {
                0.0
            }
        }
    }
}

/// Spectral radius of the companion matrix of `1 - c_1 z - .. - c_m z^m`.
/// The polynomial has all roots outside the closed unit disk iff this is < 1.
fn companion_spectral_radius(coeffs: &[f64]) -> f64 {
    let m = coeffs.len();
    if m == 0 {
        return 0.0;
    }
    let mut comp = DMatrix::<f64>::zeros(m, m);
    for (j, &c) in coeffs.iter().enumerate() {
        comp[(0, j)] = c;
    }
    for i in 1..m {
        comp[(i, i - 1)] = 1.0;
    }
    comp.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Long division of the power series `num(z) / den(z)`, `den[0] = 1`.
fn series_divide(num: &[f64], den: &[f64], len: usize) -> Vec<f64> {
    debug_assert!((den[0] - 1.0).abs() < 1e-14);
    let mut out = vec![0.0; len];
    for i in 0..len {
        let mut v = if i < num.len() { num[i] } else { 0.0 };
        let jmax = i.min(den.len() - 1);
        for j in 1..=jmax {
            v -= den[j] * out[i - j];
        }
        out[i] = v;
    }
    out
}

/// Truncates a full-length series (constant term excluded) at the last
/// coefficient above `tol`, estimating the dropped squared tail.
fn truncate_series(series: &[f64], tol: f64) -> (Vec<f64>, f64) {
    let last = series.iter().rposition(|c| c.abs() > tol);
    let m = match last {
        Some(i) => i + 1,
        None => return (Vec::new(), 0.0),
    };
    let kept = series[..m].to_vec();
    let mut tail: f64 = series[m..].iter().map(|c| c * c).sum();
    // Beyond the computed horizon, extrapolate geometrically from the
    // observed decay of the last coefficients.
    let n = series.len();
    if n >= 8 {
        let head = series[n - 8..n - 4].iter().map(|c| c * c).sum::<f64>();
        let rear = series[n - 4..].iter().map(|c| c * c).sum::<f64>();
        if head > 0.0 && rear > 0.0 {
            let r = (rear / head).min(0.999);
            tail += rear * r / (1.0 - r);
        }
    }
    (kept, tail)
}

impl ProcessSpec {
    pub fn arma(phi: Vec<f64>, theta: Vec<f64>, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "sigma2 must be a positive real, got {sigma2}"
            )));
        }
        let rho_ar = companion_spectral_radius(&phi);
        if rho_ar >= 1.0 - 1e-8 {
            return Err(Error::InvalidSpec(format!(
                "AR polynomial has a root with |z| <= 1 (companion spectral radius {rho_ar:.6})"
            )));
        }
        let rho_ma = companion_spectral_radius(&theta);
        if rho_ma >= 1.0 - 1e-8 {
            return Err(Error::InvalidSpec(format!(
                "MA polynomial has a root with |z| <= 1 (companion spectral radius {rho_ma:.6})"
            )));
        }
        Ok(ProcessSpec {
            kind: ProcessKind::Arma { phi, theta },
            sigma2,
        })
    }

    pub fn explicit_ar(rule: ArRule, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "sigma2 must be a positive real, got {sigma2}"
            )));
        }
        match &rule {
            ArRule::Exponential { c, rho } => {
                if rho.abs() >= 1.0 || !c.is_finite() {
                    return Err(Error::InvalidSpec(format!(
                        "exponential rule needs |rho| < 1, got c={c}, rho={rho}"
                    )));
                }
            }
            ArRule::Algebraic { c, gamma } => {
                if *gamma <= 1.0 || !c.is_finite() {
                    return Err(Error::InvalidSpec(format!(
                        "algebraic rule needs gamma > 1 for summability, got c={c}, gamma={gamma}"
                    )));
                }
            }
            ArRule::Coeffs(v) => {
                if v.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidSpec("non-finite AR coefficient".into()));
                }
            }
        }
        let spec = ProcessSpec {
            kind: ProcessKind::ExplicitAr(rule),
            sigma2,
        };
        spec.screen_stationarity()?;
        Ok(spec)
    }

    /// Evaluates `A(z)` on a grid of the unit circle and at `z = 1`,
    /// rejecting specs whose characteristic function comes too close to zero.
    fn screen_stationarity(&self) -> Result<()> {
        let a = self.rule_coefficients(DEFAULT_TOL);
        let mut points: Vec<(f64, f64)> = (0..STATIONARITY_GRID)
            .map(|j| {
                let w = 2.0 * std::f64::consts::PI * j as f64 / STATIONARITY_GRID as f64;
                (w.cos(), w.sin())
            })
            .collect();
        points.push((1.0, 0.0));
        for (re, im) in points {
            // Horner evaluation of 1 + a_1 z + ... at z = re + i*im.
            let (mut hr, mut hi) = (0.0, 0.0);
            for &ai in a.iter().rev() {
                let nr = hr * re - hi * im + ai;
                let ni = hr * im + hi * re;
                hr = nr;
                hi = ni;
            }
            let nr = hr * re - hi * im + 1.0;
            let ni = hr * im + hi * re;
            if (nr * nr + ni * ni).sqrt() < STATIONARITY_FLOOR {
                return Err(Error::InvalidSpec(
                    "characteristic function A(z) vanishes on |z| <= 1 (grid screen)".into(),
                ));
            }
        }
        Ok(())
    }

    /// White noise (the empty AR model).
    pub fn white_noise(sigma2: f64) -> Self {
        ProcessSpec::explicit_ar(ArRule::Coeffs(Vec::new()), sigma2).expect("valid")
    }

    pub fn ar1(phi: f64, sigma2: f64) -> Result<Self> {
        ProcessSpec::arma(vec![phi], Vec::new(), sigma2)
    }

    pub fn ma1(theta: f64, sigma2: f64) -> Result<Self> {
        ProcessSpec::arma(Vec::new(), vec![theta], sigma2)
    }

    pub fn arma11(phi: f64, theta: f64, sigma2: f64) -> Result<Self> {
        ProcessSpec::arma(vec![phi], vec![theta], sigma2)
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn kind(&self) -> &ProcessKind {
        &self.kind
    }

    /// Raw rule coefficients `a_1 .. a_M` for explicit specs,
    /// truncated at `tol` and capped at [`MAX_COEFFS`].
    fn rule_coefficients(&self, tol: f64) -> Vec<f64> {
        match &self.kind {
            ProcessKind::ExplicitAr(ArRule::Exponential { c, rho }) => {
                let mut out = Vec::new();
                for i in 1..=MAX_COEFFS {
                    let v = c * rho.powi(i as i32);
                    if v.abs() <= tol {
                        break;
                    }
                    out.push(v);
                }
                out
            }
            ProcessKind::ExplicitAr(ArRule::Algebraic { c, gamma }) => {
                let mut out = Vec::new();
                for i in 1..=MAX_COEFFS {
                    let v = c * (i as f64).powf(-gamma);
                    if v.abs() <= tol {
                        break;
                    }
                    out.push(v);
                }
                out
            }
            ProcessKind::ExplicitAr(ArRule::Coeffs(v)) => v.clone(),
            ProcessKind::Arma { .. } => unreachable!("rule_coefficients on ARMA spec"),
        }
    }

    /// AR(∞) coefficients in the convention `x_t + sum a_i x_{t-i} = e_t`.
    pub fn ar_coefficients(&self, tol: f64) -> Result<ArCoeffs> {
        if !(tol > 0.0) {
            return Err(Error::InvalidSpec(format!("tol must be > 0, got {tol}")));
        }
        match &self.kind {
            ProcessKind::Arma { phi, theta } => {
                // A(z) = Phi(z) / Theta(z) with Phi = 1 - sum phi_j z^j.
                let mut num = vec![1.0];
                num.extend(phi.iter().map(|p| -p));
                let mut den = vec![1.0];
                den.extend(theta.iter().map(|t| -t));
                if theta.is_empty() {
                    // Pure AR: the series is the polynomial itself.
                    let (a, _) = truncate_series(&num[1..], 0.0);
                    return Ok(ArCoeffs {
                        a,
                        tail_bound: 0.0,
                        truncation_tol: tol,
                    });
                }
                let series = series_divide(&num, &den, MAX_COEFFS + 1);
                let (a, tail_bound) = truncate_series(&series[1..], tol);
                Ok(ArCoeffs {
                    a,
                    tail_bound,
                    truncation_tol: tol,
                })
            }
            ProcessKind::ExplicitAr(rule) => {
                let a = self.rule_coefficients(tol);
                let tail_bound = match rule {
                    ArRule::Exponential { c, rho } => {
                        let m = a.len() as i32;
                        let r2 = rho * rho;
                        c * c * r2.powi(m + 1) / (1.0 - r2)
                    }
                    ArRule::Algebraic { c, gamma } => {
                        if a.len() == MAX_COEFFS {
                            let m = a.len() as f64;
                            c * c * m.powf(1.0 - 2.0 * gamma) / (2.0 * gamma - 1.0)
                        } else {
                            // Truncated where |a_i| <= tol; bound the tail by the
                            // integral of the rule past the truncation point.
                            let m = a.len() as f64 + 1.0;
                            c * c * m.powf(1.0 - 2.0 * gamma) / (2.0 * gamma - 1.0)
                        }
                    }
                    ArRule::Coeffs(_) => 0.0,
                };
                Ok(ArCoeffs {
                    a,
                    tail_bound,
                    truncation_tol: tol,
                })
            }
        }
    }

    /// MA(∞) coefficients `b_0 = 1, b_1, ..` of the inverted representation.
    pub fn ma_coefficients(&self, tol: f64) -> Result<MaCoeffs> {
        if !(tol > 0.0) {
            return Err(Error::InvalidSpec(format!("tol must be > 0, got {tol}")));
        }
        let series = match &self.kind {
            ProcessKind::Arma { phi, theta } => {
                let mut num = vec![1.0];
                num.extend(theta.iter().map(|t| -t));
                let mut den = vec![1.0];
                den.extend(phi.iter().map(|p| -p));
                if phi.is_empty() {
                    let (b_tail, _) = truncate_series(&num[1..], 0.0);
                    let mut b = vec![1.0];
                    b.extend(b_tail);
                    return Ok(MaCoeffs { b, tail_bound: 0.0 });
                }
                series_divide(&num, &den, MAX_COEFFS + 1)
            }
            ProcessKind::ExplicitAr(_) => {
                let a = self.rule_coefficients(tol);
                let mut den = vec![1.0];
                den.extend_from_slice(&a);
                series_divide(&[1.0], &den, MAX_COEFFS + 1)
            }
        };
        let (b_tail, tail_bound) = truncate_series(&series[1..], tol);
        let mut b = vec![1.0];
        b.extend(b_tail);
        Ok(MaCoeffs { b, tail_bound })
    }

    /// Autocovariances `gamma_0 .. gamma_M` via `gamma_h = sigma^2 sum_i b_i b_{i+h}`.
    pub fn autocovariances(&self, max_lag: usize) -> Result<AutocovTable> {
        let ma = self.ma_coefficients(DEFAULT_TOL)?;
        // Truncating gamma_h = sigma2 sum_i b_i b_{i+h} at index M leaves both
        // factors of every dropped term in the tail, so by Cauchy-Schwarz the
        // error is at most sigma2 * sum_{i>M-h} b_i^2. The shift by h <= max_lag
        // is small next to M; absorb it with a fixed safety factor.
        if self.sigma2 * 4.0 * ma.tail_bound > 1e-8 {
            return Err(Error::Precision {
                what: "MA coefficient tail too large for autocovariance table".into(),
                required: ma.b.len() * 2,
                cap: MAX_COEFFS,
            });
        }
        let b = &ma.b;
        let gamma = (0..=max_lag)
            .map(|h| {
                if h >= b.len() {
                    return 0.0;
                }
                self.sigma2 * b[..b.len() - h].iter().zip(&b[h..]).map(|(u, v)| u * v).sum::<f64>()
            })
            .collect();
        Ok(AutocovTable {
            gamma,
            sigma2: self.sigma2,
        })
    }

    /// Burn-in long enough for the initialization transient to fall below
    /// truncation tolerance.
    pub fn default_burnin(&self) -> usize {
        let tail = match &self.kind {
            ProcessKind::Arma { phi, theta } => {
                let rho = companion_spectral_radius(phi)
                    .max(companion_spectral_radius(theta))
                    .max(0.1);
                (DEFAULT_TOL.ln() / rho.ln()).ceil() as usize
            }
            ProcessKind::ExplicitAr(_) => self.rule_coefficients(DEFAULT_TOL).len(),
        };
        tail.max(1000)
    }

    /// Simulates `n` observations with Gaussian innovations of variance
    /// `sigma2`, starting from zeros and discarding `burnin` values.
    pub fn simulate(&self, n: usize, stream: StreamId, burnin: usize) -> SamplePath {
        let mut rng = stream.rng();
        let sd = self.sigma2.sqrt();
        let total = burnin + n;
        let mut e = Vec::with_capacity(total);
        for _ in 0..total {
            let z: f64 = StandardNormal.sample(&mut rng);
            e.push(sd * z);
        }
        let mut x = vec![0.0; total];
        match &self.kind {
            ProcessKind::Arma { phi, theta } => {
                for t in 0..total {
                    let mut v = e[t];
                    for (j, &p) in phi.iter().enumerate() {
                        if t > j {
                            v += p * x[t - j - 1];
                        }
                    }
                    for (j, &th) in theta.iter().enumerate() {
                        if t > j {
                            v -= th * e[t - j - 1];
                        }
                    }
                    x[t] = v;
                }
            }
            ProcessKind::ExplicitAr(_) => {
                let a = self.rule_coefficients(DEFAULT_TOL);
                for t in 0..total {
                    let mut v = e[t];
                    for (i, &ai) in a.iter().enumerate() {
                        if t > i {
                            v -= ai * x[t - i - 1];
                        }
                    }
                    x[t] = v;
                }
            }
        }
        let hist = match &self.kind {
            ProcessKind::Arma { phi, theta } => phi.len().max(theta.len()),
            ProcessKind::ExplicitAr(_) => self.rule_coefficients(DEFAULT_TOL).len(),
        };
        let keep = hist.min(burnin);
        SamplePath {
            pre_x: x[burnin - keep..burnin].to_vec(),
            pre_e: e[burnin - keep..burnin].to_vec(),
            x: x[burnin..].to_vec(),
            innovations: e[burnin..].to_vec(),
            stream,
        }
    }

    /// Exact one-step conditional mean `E(x_{t+1} | x_1..x_t and full past)`,
    /// computed from the model state, not from truncated AR coefficients
    /// (for explicit-rule specs the rule itself is the model).
    pub fn conditional_mean_at(&self, path: &SamplePath, t: usize) -> f64 {
        assert!(t <= path.len(), "conditioning time beyond path length");
        let t = t as i64;
        match &self.kind {
            ProcessKind::Arma { phi, theta } => {
                let mut v = 0.0;
                for (j, &p) in phi.iter().enumerate() {
                    v += p * path.x_at(t - j as i64);
                }
                for (j, &th) in theta.iter().enumerate() {
                    v -= th * path.e_at(t - j as i64);
                }
                v
            }
            ProcessKind::ExplicitAr(_) => {
                let a = self.rule_coefficients(DEFAULT_TOL);
                let mut v = 0.0;
                for (i, &ai) in a.iter().enumerate() {
                    v -= ai * path.x_at(t - i as i64);
                }
                v
            }
        }
    }

    /// `E(x_{n+1} | x_1, ..., x_n)` for the full path.
    pub fn conditional_mean_next(&self, path: &SamplePath) -> f64 {
        self.conditional_mean_at(path, path.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "expected {b}, got {a} (tol {tol})");
    }

    #[test]
    fn ar1_ar_coefficients_are_finite() {
        let spec = ProcessSpec::ar1(0.5, 1.0).unwrap();
        let ar = spec.ar_coefficients(1e-12).unwrap();
        assert_eq!(ar.a, vec![-0.5]);
        assert_eq!(ar.tail_bound, 0.0);
    }

    #[test]
    fn ma1_ar_coefficients_match_long_division() {
        // Oracle: long division of (1 - 0.8z)^{-1} gives a_i = 0.8^i.
        let spec = ProcessSpec::ma1(0.8, 1.0).unwrap();
        let ar = spec.ar_coefficients(1e-12).unwrap();
        for (i, &ai) in ar.a.iter().enumerate() {
            assert_close(ai, 0.8f64.powi(i as i32 + 1), 1e-12);
        }
        assert!(ar.a.len() > 50);
        assert!(ar.tail_bound < 1e-20);
    }

    #[test]
    fn arma11_ar_coefficients_match_long_division() {
        // Oracle: (1 - 0.6z)^{-1}(1 - 0.9z) = 1 - 0.3 z - 0.18 z^2 - ...
        let spec = ProcessSpec::arma11(0.9, 0.6, 1.0).unwrap();
        let ar = spec.ar_coefficients(1e-12).unwrap();
        for (i, &ai) in ar.a.iter().enumerate() {
            let expect = -(0.9 - 0.6) * 0.6f64.powi(i as i32);
            assert_close(ai, expect, 1e-12);
        }
    }

    #[test]
    fn white_noise_ma_is_identity() {
        let spec = ProcessSpec::white_noise(1.0);
        let ma = spec.ma_coefficients(1e-12).unwrap();
        assert_eq!(ma.b, vec![1.0]);
    }

    #[test]
    fn ar1_ma_coefficients_are_powers() {
        // Oracle: power-series inversion of (1 - 0.5z).
        let spec = ProcessSpec::ar1(0.5, 1.0).unwrap();
        let ma = spec.ma_coefficients(1e-12).unwrap();
        for (i, &bi) in ma.b.iter().enumerate() {
            assert_close(bi, 0.5f64.powi(i as i32), 1e-12);
        }
    }

    #[test]
    fn ma1_ma_coefficients_are_finite() {
        let spec = ProcessSpec::ma1(0.8, 1.0).unwrap();
        let ma = spec.ma_coefficients(1e-12).unwrap();
        assert_eq!(ma.b, vec![1.0, -0.8]);
        assert_eq!(ma.tail_bound, 0.0);
    }

    #[test]
    fn autocovariances_white_noise() {
        let gamma = ProcessSpec::white_noise(1.0).autocovariances(5).unwrap();
        assert_eq!(gamma.gamma[0], 1.0);
        assert!(gamma.gamma[1..].iter().all(|&g| g == 0.0));
    }

    #[test]
    fn autocovariances_ma1_closed_form() {
        // gamma_0 = (1 + theta^2) sigma^2, gamma_1 = -theta sigma^2.
        let gamma = ProcessSpec::ma1(0.8, 1.0).unwrap().autocovariances(4).unwrap();
        assert_close(gamma.gamma[0], 1.64, 1e-12);
        assert_close(gamma.gamma[1], -0.8, 1e-12);
        assert!(gamma.gamma[2].abs() < 1e-14);
    }

    #[test]
    fn autocovariances_ar1_closed_form() {
        let gamma = ProcessSpec::ar1(0.5, 1.0).unwrap().autocovariances(8).unwrap();
        for h in 0..=8 {
            let expect = 0.5f64.powi(h as i32) / 0.75;
            assert_close(gamma.gamma[h], expect, 1e-10 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn autocovariances_arma11_closed_form() {
        // gamma_0 = sigma^2 (1 + theta^2 - 2 phi theta) / (1 - phi^2),
        // gamma_1 = sigma^2 (phi - theta)(1 - phi theta) / (1 - phi^2),
        // gamma_h = phi gamma_{h-1} for h >= 2.
        let (phi, theta) = (0.9, 0.6);
        let gamma = ProcessSpec::arma11(phi, theta, 1.0)
            .unwrap()
            .autocovariances(10)
            .unwrap();
        let g0 = (1.0 + theta * theta - 2.0 * phi * theta) / (1.0 - phi * phi);
        let g1 = (phi - theta) * (1.0 - phi * theta) / (1.0 - phi * phi);
        assert_close(gamma.gamma[0], g0, 1e-10 * g0);
        assert_close(gamma.gamma[1], g1, 1e-10 * g0);
        for h in 2..=10 {
            assert_close(gamma.gamma[h], phi * gamma.gamma[h - 1], 1e-10 * g0);
        }
    }

    #[test]
    fn non_invertible_ma_rejected() {
        assert!(ProcessSpec::ma1(1.0, 1.0).is_err());
        assert!(ProcessSpec::ma1(1.3, 1.0).is_err());
        assert!(ProcessSpec::ar1(1.01, 1.0).is_err());
    }

    #[test]
    fn explicit_rule_near_unit_root_rejected() {
        // a_i = rho^i sums to rho/(1-rho); A(-1) crosses zero as rho -> ~0.62.
        // Pick a rule whose A(z) vanishes inside the disk: a_1 = -1.0.
        let err = ProcessSpec::explicit_ar(ArRule::Coeffs(vec![-1.0]), 1.0);
        assert!(err.is_err());
    }

    #[test]
    fn simulate_is_deterministic() {
        let spec = ProcessSpec::arma11(0.9, 0.6, 1.0).unwrap();
        let s = StreamId::from_master(7);
        let p1 = spec.simulate(500, s, 1000);
        let p2 = spec.simulate(500, s, 1000);
        assert_eq!(p1.x, p2.x);
        assert_eq!(p1.innovations, p2.innovations);
    }

    #[test]
    fn distinct_streams_differ() {
        let spec = ProcessSpec::ma1(0.8, 1.0).unwrap();
        let p1 = spec.simulate(100, StreamId::new(1, 0, 0), 1000);
        let p2 = spec.simulate(100, StreamId::new(1, 0, 1), 1000);
        assert_ne!(p1.x, p2.x);
    }

    #[test]
    fn white_noise_sample_autocovariance_small() {
        let spec = ProcessSpec::white_noise(1.0);
        let n = 100_000;
        let p = spec.simulate(n, StreamId::from_master(3), 1000);
        let lag1: f64 = p.x.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / n as f64;
        // Standard error of the lag-1 sample autocovariance is gamma_0/sqrt(n).
        assert!(lag1.abs() < 3.0 / (n as f64).sqrt(), "lag1 = {lag1}");
    }

    #[test]
    fn arma11_sample_variance_matches_theory() {
        let spec = ProcessSpec::arma11(0.9, 0.6, 1.0).unwrap();
        let n = 100_000;
        let p = spec.simulate(n, StreamId::from_master(11), 1000);
        let var: f64 = p.x.iter().map(|v| v * v).sum::<f64>() / n as f64;
        let g0 = spec.autocovariances(0).unwrap().gamma[0];
        assert!((var - g0).abs() / g0 < 0.05, "var {var} vs gamma0 {g0}");
    }

    #[test]
    fn conditional_mean_trivial_cases() {
        let wn = ProcessSpec::white_noise(1.0);
        let p = wn.simulate(50, StreamId::from_master(1), 1000);
        assert_eq!(wn.conditional_mean_next(&p), 0.0);

        let ma1 = ProcessSpec::ma1(0.8, 1.0).unwrap();
        let mut p = ma1.simulate(50, StreamId::from_master(1), 1000);
        *p.innovations.last_mut().unwrap() = 1.0;
        assert!((ma1.conditional_mean_next(&p) + 0.8).abs() < 1e-15);

        let ar1 = ProcessSpec::ar1(0.5, 1.0).unwrap();
        let mut p = ar1.simulate(50, StreamId::from_master(1), 1000);
        *p.x.last_mut().unwrap() = 2.0;
        assert!((ar1.conditional_mean_next(&p) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn conditional_mean_is_l2_projection() {
        // E[(x_{t+1} - E(x_{t+1}|past))^2] = sigma^2; check by Monte Carlo on
        // a single long path.
        let spec = ProcessSpec::arma11(-0.9, 0.8, 1.0).unwrap();
        let n = 50_000;
        let p = spec.simulate(n, StreamId::from_master(5), 1000);
        let mut sq = 0.0;
        for t in 200..n {
            let cm = spec.conditional_mean_at(&p, t);
            let err = p.x[t] - cm;
            sq += err * err;
        }
        let mse = sq / (n - 200) as f64;
        assert!((mse - 1.0).abs() < 0.05, "mse = {mse}");
    }

    #[test]
    fn ar_ma_convolution_is_identity() {
        for spec in [
            ProcessSpec::arma11(0.9, 0.6, 1.0).unwrap(),
            ProcessSpec::ma1(0.8, 1.0).unwrap(),
            ProcessSpec::explicit_ar(ArRule::Exponential { c: 0.5, rho: 0.8 }, 1.0).unwrap(),
            ProcessSpec::explicit_ar(ArRule::Algebraic { c: 0.35, gamma: 1.5 }, 1.0).unwrap(),
        ] {
            let ar = spec.ar_coefficients(1e-12).unwrap();
            let ma = spec.ma_coefficients(1e-12).unwrap();
            let mut a_full = vec![1.0];
            a_full.extend_from_slice(&ar.a);
            // (a * b)_m should be 1 at m = 0 and ~0 elsewhere.
            for m in 0..a_full.len().min(ma.b.len()).min(200) {
                let conv: f64 = (0..=m)
                    .map(|i| a_full[i] * if m - i < ma.b.len() { ma.b[m - i] } else { 0.0 })
                    .sum();
                let expect = if m == 0 { 1.0 } else { 0.0 };
                assert!((conv - expect).abs() < 1e-9, "conv[{m}] = {conv}");
            }
        }
    }
}
