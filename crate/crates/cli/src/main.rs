//! `arsel`: order fitting, selection criteria, theoretical loss curves, and
//! the Monte Carlo prediction-efficiency tables, all emitting CSV.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical degeneracy,
//! 3 reference-diff failure.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use arsel::*;

#[derive(Parser)]
#[command(name = "arsel", version, about = "Autoregressive order selection toolkit")]
struct Cli {
    /// Worker threads for Monte Carlo replications (output-invariant).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct SpecArgs {
    /// Shorthand spec: whitenoise | ar1:PHI | ma1:THETA | arma11:PHI,THETA |
    /// expdecay:C,RHO | algdecay:C,GAMMA.
    #[arg(long, conflicts_with = "config")]
    spec: Option<String>,
    /// TOML config file with a [spec] block (and optionally [experiment]).
    #[arg(long)]
    config: Option<PathBuf>,
}

impl SpecArgs {
    fn load(&self) -> Result<FileConfig> {
        match (&self.spec, &self.config) {
            (Some(s), None) => Ok(FileConfig {
                spec: parse_spec_shorthand(s)?,
                seed: None,
                experiment: None,
            }),
            (None, Some(path)) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    Error::Config(format!("cannot read {}: {e}", path.display()))
                })?;
                load_config(&text)
            }
            _ => Err(Error::Config("exactly one of --spec/--config required".into())),
        }
    }
}

#[derive(Args)]
struct OutArg {
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, default_value_t = 20_000)]
    reps: usize,
    /// Master seed for the replication streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Same-realization estimator.
    #[arg(long, default_value = "conditional")]
    mode: String,
    /// Restrict the grid to one phi value.
    #[arg(long)]
    phi: Option<f64>,
    /// Restrict the grid to one theta value.
    #[arg(long)]
    theta: Option<f64>,
    #[command(flatten)]
    out: OutArg,
    /// Reference CSV (phi0,theta0,n,K_n,statistic,value,tolerance); mismatch
    /// exits 3.
    #[arg(long)]
    reference: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a path and write it as `t,x` CSV.
    Simulate {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Fit all orders 1..kmax on a simulated path; write the fit table.
    Fit {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        n: usize,
        /// Maximum order (default: largest integer <= sqrt(n)).
        #[arg(long)]
        kmax: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Score criteria on a simulated path; print per-criterion selections.
    Select {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        kmax: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma list, e.g. `aic,fpe,sn_alpha:3`.
        #[arg(long, default_value = "aic")]
        criteria: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Theoretical loss curve L_n(k) and its minimizer.
    TheoryCurve {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        kmax: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Basin diagnostic N(L_n(k) - L_n(k*))/|k - k*|.
    Basin {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        kmax: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Verify the exact fit decomposition on simulated paths.
    IdentityCheck {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 100)]
        paths: usize,
        #[arg(long, default_value_t = 120)]
        n: usize,
        #[arg(long)]
        kmax: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare brute-force optimal orders with the asymptotic formulas.
    AsymptoticsCheck {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// ARMA(1,1) prediction-efficiency and gamma_opt grid.
    Table1(TableArgs),
    /// MA(1) same-realization strong-efficiency gap grid.
    Table2(TableArgs),
    /// MA(1) independent-realization strong-efficiency gap grid.
    Table3(TableArgs),
    /// Run an arbitrary experiment config.
    Run {
        /// TOML config with [spec] and [experiment] blocks.
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutArg,
        #[arg(long)]
        reference: Option<PathBuf>,
    },
}

fn out_writer(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    match out {
        Some(path) => {
            let f = fs::File::create(path)
                .map_err(|e| Error::Config(format!("cannot create {}: {e}", path.display())))?;
            Ok(Box::new(io::BufWriter::new(f)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn default_kmax(n: usize, kmax: Option<usize>) -> usize {
    kmax.unwrap_or_else(|| (n as f64).sqrt().floor() as usize)
}

fn fit_simulated(spec: &ProcessSpec, n: usize, kmax: usize, seed: u64) -> Result<FitSequence> {
    let path = spec.simulate(n, StreamId::from_master(seed), spec.default_burnin());
    let design = design_summary(&path.x, kmax)?;
    fit_all_orders(&design)
}

fn check_reference(rows: &[ResultRow], reference: &Option<PathBuf>) -> Result<bool> {
    let Some(path) = reference else { return Ok(true) };
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let diffs = diff_reference(rows, &text)?;
    let mut all_ok = true;
    for d in &diffs {
        eprintln!(
            "reference {} at (phi0={}, theta0={}, n={}, K_n={}): expected {} ± {}, got {} -> {}",
            d.statistic,
            d.key.0,
            d.key.1,
            d.key.2,
            d.key.3,
            d.expected,
            d.tolerance,
            d.actual,
            if d.ok { "ok" } else { "MISMATCH" }
        );
        all_ok &= d.ok;
    }
    Ok(all_ok)
}

fn table_opts(t: &TableArgs) -> Result<TableOptions> {
    Ok(TableOptions {
        reps: t.reps,
        master_seed: t.seed,
        mode: parse_mode_str(&t.mode)?,
    })
}

fn grid<T: Copy>(full: &[T], pick: Option<T>) -> Vec<T> {
    match pick {
        Some(v) => vec![v],
        None => full.to_vec(),
    }
}

/// Returns `true` when a supplied reference file matched.
fn run_cmd(cmd: &Cmd) -> Result<bool> {
    match cmd {
        Cmd::Simulate { spec, n, seed, out } => {
            let fc = spec.load()?;
            let seed = fc.seed.unwrap_or(*seed);
            let path = fc
                .spec
                .simulate(*n, StreamId::from_master(seed), fc.spec.default_burnin());
            write_path_csv(out_writer(&out.out)?, &path)?;
            Ok(true)
        }
        Cmd::Fit { spec, n, kmax, seed, out } => {
            let fc = spec.load()?;
            let kmax = default_kmax(*n, *kmax);
            let fits = fit_simulated(&fc.spec, *n, kmax, fc.seed.unwrap_or(*seed))?;
            write_fit_csv(out_writer(&out.out)?, &fits)?;
            Ok(true)
        }
        Cmd::Select { spec, n, kmax, seed, criteria, out } => {
            let fc = spec.load()?;
            let kmax = default_kmax(*n, *kmax);
            let fits = fit_simulated(&fc.spec, *n, kmax, fc.seed.unwrap_or(*seed))?;
            let crits = parse_criteria_list(criteria)?;
            let mut scored = Vec::new();
            for &c in &crits {
                let s = score(c, &fits)?;
                println!("{}: k_hat = {}", s.criterion, s.k_hat);
                scored.push(s);
            }
            if out.out.is_some() {
                write_scores_csv(out_writer(&out.out)?, &scored)?;
            }
            Ok(true)
        }
        Cmd::TheoryCurve { spec, n, kmax, out } => {
            let fc = spec.load()?;
            let kmax = default_kmax(*n, *kmax);
            let curve = loss_curve(&fc.spec, *n, kmax, 2.0)?;
            eprintln!("k_star = {}", curve.k_star);
            write_curve_csv(out_writer(&out.out)?, &curve)?;
            Ok(true)
        }
        Cmd::Basin { spec, n, kmax, out } => {
            let fc = spec.load()?;
            let kmax = default_kmax(*n, *kmax);
            let curve = loss_curve(&fc.spec, *n, kmax, 2.0)?;
            let mut w = out_writer(&out.out)?;
            writeln!(w, "k,basin_ratio").map_err(|e| Error::Config(e.to_string()))?;
            for (k, ratio) in basin_profile(&curve) {
                writeln!(w, "{k},{ratio}").map_err(|e| Error::Config(e.to_string()))?;
            }
            Ok(true)
        }
        Cmd::IdentityCheck { spec, paths, n, kmax, seed } => {
            let fc = spec.load()?;
            let kmax = default_kmax(*n, *kmax);
            let s = &fc.spec;
            let curve = loss_curve(s, *n, kmax, 2.0)?;
            let gamma = s.autocovariances(kmax)?;
            let projs = yule_walker_sequence(&gamma, kmax)?;
            let burnin = s.default_burnin();
            let mut max_resid = 0f64;
            for rep in 0..*paths as u64 {
                let path = s.simulate(*n, StreamId::new(fc.seed.unwrap_or(*seed), 0, rep), burnin);
                let fits = fit_all_orders(&design_summary(&path.x, kmax)?)?;
                for proj in &projs {
                    max_resid =
                        max_resid.max(decomposition_check(&path.x, proj, &fits, &curve, s.sigma2()));
                }
            }
            println!("max decomposition residual over {paths} paths: {max_resid:e}");
            if max_resid > 1e-8 {
                return Err(Error::DegenerateFit { order: 0 });
            }
            Ok(true)
        }
        Cmd::AsymptoticsCheck { spec, out } => {
            let fc = spec.load()?;
            let s = &fc.spec;
            let mut w = out_writer(&out.out)?;
            writeln!(w, "N,k_star,formula,within_band").map_err(|e| Error::Config(e.to_string()))?;
            match s.kind() {
                ProcessKind::ExplicitAr(ArRule::Exponential { rho, .. }) => {
                    let beta = -2.0 * rho.abs().ln();
                    for n in [1_000usize, 10_000, 100_000] {
                        let k_n = (n as f64).powf(0.45).floor() as usize;
                        let curve = loss_curve(s, n, k_n, 2.0)?;
                        let pred = kstar_asymptotic_exponential(beta, curve.n_eff);
                        let band = 5.0 * (curve.n_eff as f64).ln().ln();
                        let ok = (curve.k_star as f64 - pred).abs() <= band;
                        writeln!(w, "{},{},{pred},{}", curve.n_eff, curve.k_star, ok as u8)
                            .map_err(|e| Error::Config(e.to_string()))?;
                    }
                }
                ProcessKind::ExplicitAr(ArRule::Algebraic { gamma: g, .. }) => {
                    let beta = 2.0 * g - 1.0;
                    let table = s.autocovariances(220)?;
                    let c4 = fit_norm(&table, 200)? * 200f64.powf(beta);
                    for n in [10_000usize, 100_000] {
                        let k_n = (n as f64).powf(0.45).floor() as usize;
                        let curve = loss_curve(s, n, k_n, 2.0)?;
                        let pred = kstar_asymptotic_algebraic(s.sigma2(), c4, beta, curve.n_eff);
                        let band = (0.15 * pred).max(3.0);
                        let ok = (curve.k_star as f64 - pred).abs() <= band;
                        writeln!(w, "{},{},{pred},{}", curve.n_eff, curve.k_star, ok as u8)
                            .map_err(|e| Error::Config(e.to_string()))?;
                    }
                }
                _ => {
                    return Err(Error::Config(
                        "asymptotics-check needs an expdecay or algdecay spec".into(),
                    ))
                }
            }
            Ok(true)
        }
        Cmd::Table1(t) => {
            let opts = table_opts(t)?;
            let rows = table1(
                &opts,
                &grid(&TABLE1_PHIS, t.phi),
                &grid(&TABLE1_THETAS, t.theta),
            )?;
            let result_rows: Vec<ResultRow> = rows
                .iter()
                .flat_map(|r| {
                    [
                        ResultRow {
                            phi0: r.phi,
                            theta0: r.theta,
                            n: r.cell.n,
                            k_n: r.cell.k_n,
                            statistic: "pe[aic]".into(),
                            value: r.pe.0,
                            stderr: r.pe.1,
                        },
                        ResultRow {
                            phi0: r.phi,
                            theta0: r.theta,
                            n: r.cell.n,
                            k_n: r.cell.k_n,
                            statistic: "gamma_opt".into(),
                            value: r.gamma_opt.0,
                            stderr: r.gamma_opt.1,
                        },
                    ]
                })
                .collect();
            write_results_csv(out_writer(&t.out.out)?, &result_rows)?;
            check_reference(&result_rows, &t.reference)
        }
        Cmd::Table2(t) | Cmd::Table3(t) => {
            let independent = matches!(cmd, Cmd::Table3(_));
            let opts = table_opts(t)?;
            if t.phi.is_some() {
                return Err(Error::Config("the MA(1) tables take no --phi".into()));
            }
            let rows = ma1_efficiency_grid(&opts, &grid(&TABLE23_THETAS, t.theta))?;
            let result_rows: Vec<ResultRow> = rows
                .iter()
                .map(|r| {
                    let (stat, est) = if independent {
                        ("r_star_i[aic]", r.r_star_i)
                    } else {
                        ("r_star[aic]", r.r_star)
                    };
                    ResultRow {
                        phi0: 0.0,
                        theta0: r.theta,
                        n: r.cell.n,
                        k_n: r.cell.k_n,
                        statistic: stat.into(),
                        value: est.0,
                        stderr: est.1,
                    }
                })
                .collect();
            write_results_csv(out_writer(&t.out.out)?, &result_rows)?;
            check_reference(&result_rows, &t.reference)
        }
        Cmd::Run { config, out, reference } => {
            let text = fs::read_to_string(config)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", config.display())))?;
            let fc = load_config(&text)?;
            let exp = fc.experiment.ok_or_else(|| {
                Error::Config("run needs an [experiment] block in the config".into())
            })?;
            let (phi0, theta0) = match exp.spec.kind() {
                ProcessKind::Arma { phi, theta } => (
                    phi.first().copied().unwrap_or(0.0),
                    theta.first().copied().unwrap_or(0.0),
                ),
                ProcessKind::ExplicitAr(_) => (0.0, 0.0),
            };
            let results = run_cells(&exp)?;
            let mut rows = Vec::new();
            for r in &results {
                rows.extend(result_rows_from_cell(r, phi0, theta0));
            }
            if let Some(base) = results.iter().find(|r| r.cell == exp.baseline_cell) {
                if base.cell.k_n >= 6 {
                    for (r, g) in results.iter().zip(gamma_opt(&results, base)?) {
                        rows.push(ResultRow {
                            phi0,
                            theta0,
                            n: r.cell.n,
                            k_n: r.cell.k_n,
                            statistic: "gamma_opt".into(),
                            value: g.0,
                            stderr: g.1,
                        });
                    }
                }
            }
            write_results_csv(out_writer(&out.out)?, &rows)?;
            check_reference(&rows, reference)
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidSpec(_) | Error::InvalidWindow { .. } => 1,
        Error::Precision { .. }
        | Error::RankDegeneracy { .. }
        | Error::DegenerateFit { .. }
        | Error::TooManyDrops { .. } => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: cannot configure {jobs} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    match run_cmd(&cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: reference values not reproduced");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
