//! Monte Carlo harness for the prediction-efficiency experiments:
//! per-order MSPE curves, PE / PEI ratios, the strong-efficiency gaps
//! r* (same realization) and r*_I (independent realization), and the
//! gamma_opt decay profile.
//!
//! Replications are independent work items, each owning its own random
//! stream. Aggregation always runs in replication order, so results are
//! bit-identical for any degree of parallelism.

use rayon::prelude::*;

use crate::criteria::{self, CriterionId};
use crate::error::{Error, Result};
use crate::fit::{design_summary, fit_all_orders, predict_one, r_distance_via_ma};
use crate::process::{ProcessSpec, StreamId, DEFAULT_TOL};
use crate::theory::argmin_smallest;

/// One `(n, K_n)` experiment cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub n: usize,
    pub k_n: usize,
}

impl Cell {
    pub fn new(n: usize, k_n: usize) -> Self {
        Cell { n, k_n }
    }

    /// `K_n` = largest integer <= sqrt(n).
    pub fn sqrt_rule(n: usize) -> Self {
        Cell {
            n,
            k_n: (n as f64).sqrt().floor() as usize,
        }
    }
}

/// The five cells used in the reference experiments.
pub const REFERENCE_CELLS: [Cell; 5] = [
    Cell { n: 60, k_n: 7 },
    Cell { n: 120, k_n: 10 },
    Cell { n: 200, k_n: 14 },
    Cell { n: 500, k_n: 22 },
    Cell { n: 1000, k_n: 31 },
];

/// Table grids: phi values for the ARMA(1,1) experiment.
pub const TABLE1_PHIS: [f64; 6] = [-0.9, -0.7, -0.5, 0.5, 0.7, 0.9];
/// Table grids: theta values (ARMA and MA experiments share them).
pub const TABLE1_THETAS: [f64; 4] = [0.8, 0.6, -0.6, -0.8];
pub const TABLE23_THETAS: [f64; 4] = [0.8, 0.6, -0.6, -0.8];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorMode {
    /// Same-realization contributions are the exact conditional gaps
    /// `d_k^2 = (E(x_{n+1}|past) - x_hat(k))^2` (variance-reduced).
    Conditional,
    /// Contributions are `(x_{n+1} - x_hat(k))^2 - sigma^2` with the future
    /// value actually simulated.
    Raw,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub spec: ProcessSpec,
    pub cells: Vec<Cell>,
    pub reps: usize,
    pub master_seed: u64,
    pub criteria: Vec<CriterionId>,
    pub mode: EstimatorMode,
    /// Reference cell for gamma_opt; the (60, 7) cell by default.
    pub baseline_cell: Cell,
}

impl ExperimentConfig {
    pub fn new(spec: ProcessSpec) -> Self {
        ExperimentConfig {
            spec,
            cells: REFERENCE_CELLS.to_vec(),
            reps: 20_000,
            master_seed: 0,
            criteria: vec![CriterionId::Aic],
            mode: EstimatorMode::Conditional,
            baseline_cell: Cell::new(60, 7),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be >= 1".into()));
        }
        for c in &self.cells {
            if c.k_n < 1 || c.k_n >= c.n {
                return Err(Error::InvalidWindow { k_n: c.k_n, n: c.n });
            }
        }
        if self.criteria.is_empty() {
            return Err(Error::Config("at least one criterion required".into()));
        }
        Ok(())
    }
}

/// Estimate with its standard error.
pub type Estimate = (f64, f64);

#[derive(Debug, Clone)]
pub struct CriterionStats {
    pub criterion: CriterionId,
    /// Selected-order counts over k = 1..K_n; sums to the kept replications.
    pub histogram: Vec<u64>,
    /// `mean_r same(k_hat_r) / min_k mspe_same(k)`.
    pub pe: Estimate,
    /// Independent-realization analogue.
    pub pei: Estimate,
    /// `mean_r same(k_hat_r) / mean_r min_k cond(k, r)`.
    pub r_star: Estimate,
    /// `mean_r indep(k_hat_r) / mean_r min_k indep(k, r)`.
    pub r_star_i: Estimate,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub spec: ProcessSpec,
    pub cell: Cell,
    pub mode: EstimatorMode,
    pub reps_kept: usize,
    pub dropped: usize,
    /// Mode-selected per-order same-realization second-order MSPE, k = 1..K_n.
    pub mspe_same: Vec<Estimate>,
    /// The other same-realization estimator (raw if mode is conditional and
    /// vice versa), kept for cross-validation.
    pub mspe_same_alt: Vec<Estimate>,
    /// Per-order independent-realization second-order MSPE.
    pub mspe_indep: Vec<Estimate>,
    pub min_mspe_same: f64,
    /// Order at which `mspe_same` attains its minimum (smallest tie).
    pub argmin_same: usize,
    pub per_criterion: Vec<CriterionStats>,
}

struct RepRow {
    /// Conditional gaps squared, per order.
    cond: Vec<f64>,
    /// Raw second-order squared errors, per order.
    raw: Vec<f64>,
    /// `||a_hat(k) - a||_R^2`, per order.
    indep: Vec<f64>,
    /// Selected order per configured criterion.
    k_hat: Vec<usize>,
}

fn mean_se(values: &[f64]) -> Estimate {
    let r = values.len() as f64;
    let m = values.iter().sum::<f64>() / r;
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / r;
    (m, (var / r).sqrt())
}

/// Delta-method standard error for a ratio of means over paired samples.
fn ratio_se(num: &[f64], den: &[f64]) -> Estimate {
    let r = num.len() as f64;
    let nm = num.iter().sum::<f64>() / r;
    let dm = den.iter().sum::<f64>() / r;
    let ratio = nm / dm;
    let var = num
        .iter()
        .zip(den)
        .map(|(a, b)| {
            let g = a - ratio * b;
            g * g
        })
        .sum::<f64>()
        / r;
    (ratio, (var / r).sqrt() / dm.abs())
}

/// Deterministic, injective stream id for one replication.
pub fn seed_stream(master_seed: u64, cell_stream: u64, rep: u64) -> StreamId {
    StreamId::new(master_seed, cell_stream, rep)
}

/// Stable stream component for a (spec-parameter, cell) combination, so the
/// same cell reuses the same streams independently of grid subsetting.
pub fn cell_stream_id(phi_bits: u64, theta_bits: u64, n: usize) -> u64 {
    // splitmix64-style mixing.
    let mut z = phi_bits
        .wrapping_mul(0x9e3779b97f4a7c15)
        .wrapping_add(theta_bits)
        .wrapping_mul(0xbf58476d1ce4e5b9)
        .wrapping_add(n as u64);
    z ^= z >> 30;
    z = z.wrapping_mul(0x94d049bb133111eb);
    z ^= z >> 31;
    z
}

/// Runs every replication of one cell and aggregates the estimates.
pub fn run_cell(config: &ExperimentConfig, cell: Cell, cell_stream: u64) -> Result<CellResult> {
    config.validate()?;
    let spec = &config.spec;
    let k_n = cell.k_n;
    let n = cell.n;
    let sigma2 = spec.sigma2();
    let ar = spec.ar_coefficients(DEFAULT_TOL)?;
    let ma = spec.ma_coefficients(DEFAULT_TOL)?;
    let burnin = spec.default_burnin();

    let rows: Vec<Option<RepRow>> = (0..config.reps as u64)
        .into_par_iter()
        .map(|rep| {
            let stream = seed_stream(config.master_seed, cell_stream, rep);
            // One extra observation so the raw estimator has a real future.
            let path = spec.simulate(n + 1, stream, burnin);
            let x_fit = &path.x[..n];
            let design = match design_summary(x_fit, k_n) {
                Ok(d) => d,
                Err(_) => return None,
            };
            let fits = match fit_all_orders(&design) {
                Ok(f) => f,
                Err(_) => return None,
            };
            let cm = spec.conditional_mean_at(&path, n);
            let x_next = path.x[n];
            let mut cond = Vec::with_capacity(k_n);
            let mut raw = Vec::with_capacity(k_n);
            let mut indep = Vec::with_capacity(k_n);
            for k in 1..=k_n {
                let pred = predict_one(x_fit, fits.coeffs(k));
                let d = cm - pred;
                cond.push(d * d);
                let e = x_next - pred;
                raw.push(e * e - sigma2);
                indep.push(r_distance_via_ma(fits.coeffs(k), &ar, &ma, sigma2));
            }
            let mut k_hat = Vec::with_capacity(config.criteria.len());
            for &crit in &config.criteria {
                match criteria::select(crit, &fits) {
                    Ok(k) => k_hat.push(k),
                    Err(_) => return None,
                }
            }
            Some(RepRow {
                cond,
                raw,
                indep,
                k_hat,
            })
        })
        .collect();

    let dropped = rows.iter().filter(|r| r.is_none()).count();
    if dropped * 1000 > config.reps {
        return Err(Error::TooManyDrops {
            dropped,
            total: config.reps,
        });
    }
    let kept: Vec<&RepRow> = rows.iter().flatten().collect();
    let reps_kept = kept.len();

    let column =
        |take: &dyn Fn(&RepRow) -> &[f64], k: usize| kept.iter().map(move |r| take(r)[k]).collect::<Vec<f64>>();
    let cond_col: Vec<Vec<f64>> = (0..k_n).map(|k| column(&|r: &RepRow| &r.cond, k)).collect();
    let raw_col: Vec<Vec<f64>> = (0..k_n).map(|k| column(&|r: &RepRow| &r.raw, k)).collect();
    let indep_col: Vec<Vec<f64>> = (0..k_n).map(|k| column(&|r: &RepRow| &r.indep, k)).collect();

    let cond_est: Vec<Estimate> = cond_col.iter().map(|c| mean_se(c)).collect();
    let raw_est: Vec<Estimate> = raw_col.iter().map(|c| mean_se(c)).collect();
    let indep_est: Vec<Estimate> = indep_col.iter().map(|c| mean_se(c)).collect();

    let (same_col, same_est, alt_est) = match config.mode {
        EstimatorMode::Conditional => (&cond_col, cond_est, raw_est),
        EstimatorMode::Raw => (&raw_col, raw_est, cond_est),
    };

    let same_means: Vec<f64> = same_est.iter().map(|e| e.0).collect();
    let k0 = argmin_smallest(&same_means);
    let min_mspe_same = same_means[k0];

    // Per-replication minima for the strong-efficiency denominators.
    let cond_min: Vec<f64> = kept
        .iter()
        .map(|r| r.cond.iter().cloned().fold(f64::INFINITY, f64::min))
        .collect();
    let indep_min: Vec<f64> = kept
        .iter()
        .map(|r| r.indep.iter().cloned().fold(f64::INFINITY, f64::min))
        .collect();

    let indep_means: Vec<f64> = indep_est.iter().map(|e| e.0).collect();
    let k0_i = argmin_smallest(&indep_means);

    let mut per_criterion = Vec::with_capacity(config.criteria.len());
    for (ci, &crit) in config.criteria.iter().enumerate() {
        let mut histogram = vec![0u64; k_n];
        for r in &kept {
            histogram[r.k_hat[ci] - 1] += 1;
        }
        let same_sel: Vec<f64> = kept
            .iter()
            .map(|r| match config.mode {
                EstimatorMode::Conditional => r.cond[r.k_hat[ci] - 1],
                EstimatorMode::Raw => r.raw[r.k_hat[ci] - 1],
            })
            .collect();
        let cond_sel: Vec<f64> = kept.iter().map(|r| r.cond[r.k_hat[ci] - 1]).collect();
        let indep_sel: Vec<f64> = kept.iter().map(|r| r.indep[r.k_hat[ci] - 1]).collect();
        let pe = ratio_se(&same_sel, &same_col[k0]);
        let pei = ratio_se(&indep_sel, &indep_col[k0_i]);
        let r_star = ratio_se(&cond_sel, &cond_min);
        let r_star_i = ratio_se(&indep_sel, &indep_min);
        per_criterion.push(CriterionStats {
            criterion: crit,
            histogram,
            pe,
            pei,
            r_star,
            r_star_i,
        });
    }

    Ok(CellResult {
        spec: spec.clone(),
        cell,
        mode: config.mode,
        reps_kept,
        dropped,
        mspe_same: same_est,
        mspe_same_alt: alt_est,
        mspe_indep: indep_est,
        min_mspe_same,
        argmin_same: k0 + 1,
        per_criterion,
    })
}

/// Runs every cell of a config. The per-cell stream component is the cell
/// index in the config.
pub fn run_cells(config: &ExperimentConfig) -> Result<Vec<CellResult>> {
    config
        .cells
        .iter()
        .enumerate()
        .map(|(i, &cell)| run_cell(config, cell, i as u64))
        .collect()
}

/// `min_k mspe(k) / min_{k<=6} mspe_baseline(k)` per cell, with the baseline
/// cell reported as exactly 1 by convention.
pub fn gamma_opt(results: &[CellResult], baseline: &CellResult) -> Result<Vec<Estimate>> {
    if baseline.cell.k_n < 6 {
        return Err(Error::Config(
            "gamma_opt baseline cell must cover orders 1..6".into(),
        ));
    }
    let den_means: Vec<f64> = baseline.mspe_same[..6].iter().map(|e| e.0).collect();
    let kd = argmin_smallest(&den_means);
    let (den, den_se) = baseline.mspe_same[kd];
    results
        .iter()
        .map(|r| {
            if r.spec != baseline.spec {
                return Err(Error::Config(
                    "gamma_opt cells must share the baseline's process spec".into(),
                ));
            }
            if r.cell == baseline.cell {
                return Ok((1.0, 0.0));
            }
            let (num, num_se) = r.mspe_same[r.argmin_same - 1];
            let ratio = num / den;
            let se = ratio.abs() * ((num_se / num).powi(2) + (den_se / den).powi(2)).sqrt();
            Ok((ratio, se))
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct TableOptions {
    pub reps: usize,
    pub master_seed: u64,
    pub mode: EstimatorMode,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            reps: 20_000,
            master_seed: 0,
            mode: EstimatorMode::Conditional,
        }
    }
}

/// One cell of the ARMA(1,1) PE / gamma_opt experiment.
#[derive(Debug, Clone)]
pub struct ArmaCellRow {
    pub phi: f64,
    pub theta: f64,
    pub cell: Cell,
    pub pe: Estimate,
    pub gamma_opt: Estimate,
}

/// AIC prediction-efficiency grid over ARMA(1,1) parameter combinations.
pub fn table1(opts: &TableOptions, phis: &[f64], thetas: &[f64]) -> Result<Vec<ArmaCellRow>> {
    let mut rows = Vec::new();
    for &phi in phis {
        for &theta in thetas {
            let spec = ProcessSpec::arma11(phi, theta, 1.0)?;
            let mut cfg = ExperimentConfig::new(spec);
            cfg.reps = opts.reps;
            cfg.master_seed = opts.master_seed;
            cfg.mode = opts.mode;
            let results: Vec<CellResult> = REFERENCE_CELLS
                .iter()
                .map(|&cell| {
                    run_cell(
                        &cfg,
                        cell,
                        cell_stream_id(phi.to_bits(), theta.to_bits(), cell.n),
                    )
                })
                .collect::<Result<_>>()?;
            let gammas = gamma_opt(&results, &results[0])?;
            for (r, g) in results.iter().zip(gammas) {
                rows.push(ArmaCellRow {
                    phi,
                    theta,
                    cell: r.cell,
                    pe: r.per_criterion[0].pe,
                    gamma_opt: g,
                });
            }
        }
    }
    Ok(rows)
}

/// One cell of the MA(1) strong-efficiency experiment.
#[derive(Debug, Clone)]
pub struct Ma1CellRow {
    pub theta: f64,
    pub cell: Cell,
    pub r_star: Estimate,
    pub r_star_i: Estimate,
}

/// MA(1) grid shared by the same- and independent-realization
/// strong-efficiency tables.
pub fn ma1_efficiency_grid(opts: &TableOptions, thetas: &[f64]) -> Result<Vec<Ma1CellRow>> {
    let mut rows = Vec::new();
    for &theta in thetas {
        let spec = ProcessSpec::ma1(theta, 1.0)?;
        let mut cfg = ExperimentConfig::new(spec);
        cfg.reps = opts.reps;
        cfg.master_seed = opts.master_seed;
        cfg.mode = opts.mode;
        for &cell in &REFERENCE_CELLS {
            let r = run_cell(
                &cfg,
                cell,
                cell_stream_id(0, theta.to_bits(), cell.n),
            )?;
            rows.push(Ma1CellRow {
                theta,
                cell,
                r_star: r.per_criterion[0].r_star,
                r_star_i: r.per_criterion[0].r_star_i,
            });
        }
    }
    Ok(rows)
}
