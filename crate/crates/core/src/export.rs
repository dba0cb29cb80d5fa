//! CSV emission for every artifact the CLI produces, plus reference-file
//! diffing. CSV is the single output format; quoting follows RFC 4180 via
//! the `csv` crate.

use std::io::Write;

use csv::WriterBuilder;

use crate::criteria::CriterionScores;
use crate::error::{Error, Result};
use crate::fit::FitSequence;
use crate::mc::CellResult;
use crate::process::SamplePath;
use crate::theory::TheoreticalCurve;

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv error: {e}"))
}

/// `t, x_t` for a simulated path (t starting at 1).
pub fn write_path_csv<W: Write>(w: W, path: &SamplePath) -> Result<()> {
    let mut wtr = WriterBuilder::new().from_writer(w);
    wtr.write_record(["t", "x"]).map_err(csv_err)?;
    for (t, x) in path.x.iter().enumerate() {
        wtr.write_record([(t + 1).to_string(), x.to_string()])
            .map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| Error::Config(e.to_string()))
}

/// `k, sigma2_hat, sigma2_tilde, coeffs` with the coefficient list as one
/// quoted comma-separated field.
pub fn write_fit_csv<W: Write>(w: W, fits: &FitSequence) -> Result<()> {
    let mut wtr = WriterBuilder::new().from_writer(w);
    wtr.write_record(["k", "sigma2_hat", "sigma2_tilde", "coeffs"])
        .map_err(csv_err)?;
    for k in 1..=fits.k_n() {
        let coeffs = fits
            .coeffs(k)
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",");
        wtr.write_record([
            k.to_string(),
            fits.sigma2_hat(k).to_string(),
            fits.sigma2_tilde(k).to_string(),
            coeffs,
        ])
        .map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| Error::Config(e.to_string()))
}

/// `k, fit_norm, loss, is_k_star`.
pub fn write_curve_csv<W: Write>(w: W, curve: &TheoreticalCurve) -> Result<()> {
    let mut wtr = WriterBuilder::new().from_writer(w);
    wtr.write_record(["k", "fit_norm", "loss", "is_k_star"])
        .map_err(csv_err)?;
    for k in 1..=curve.k_n {
        wtr.write_record([
            k.to_string(),
            curve.fit_norm[k - 1].to_string(),
            curve.loss[k - 1].to_string(),
            ((k == curve.k_star) as u8).to_string(),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| Error::Config(e.to_string()))
}

/// `criterion, k, score, selected`.
pub fn write_scores_csv<W: Write>(w: W, scores: &[CriterionScores]) -> Result<()> {
    let mut wtr = WriterBuilder::new().from_writer(w);
    wtr.write_record(["criterion", "k", "score", "selected"])
        .map_err(csv_err)?;
    for cs in scores {
        for (i, s) in cs.scores.iter().enumerate() {
            let k = i + 1;
            wtr.write_record([
                cs.criterion.to_string(),
                k.to_string(),
                s.to_string(),
                ((k == cs.k_hat) as u8).to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    wtr.flush().map_err(|e| Error::Config(e.to_string()))
}

/// One estimate in the flat results schema shared by all experiment commands.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub phi0: f64,
    pub theta0: f64,
    pub n: usize,
    pub k_n: usize,
    pub statistic: String,
    pub value: f64,
    pub stderr: f64,
}

/// `phi0, theta0, n, K_n, statistic, value, stderr`.
pub fn write_results_csv<W: Write>(w: W, rows: &[ResultRow]) -> Result<()> {
    let mut wtr = WriterBuilder::new().from_writer(w);
    wtr.write_record(["phi0", "theta0", "n", "K_n", "statistic", "value", "stderr"])
        .map_err(csv_err)?;
    for r in rows {
        wtr.write_record([
            r.phi0.to_string(),
            r.theta0.to_string(),
            r.n.to_string(),
            r.k_n.to_string(),
            r.statistic.clone(),
            r.value.to_string(),
            r.stderr.to_string(),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| Error::Config(e.to_string()))
}

/// Flattens one cell result into the results schema. `phi0`/`theta0` label
/// the generating parameters (0 when not applicable).
pub fn result_rows_from_cell(res: &CellResult, phi0: f64, theta0: f64) -> Vec<ResultRow> {
    let mut rows = Vec::new();
    let mut push = |statistic: String, value: f64, stderr: f64| {
        rows.push(ResultRow {
            phi0,
            theta0,
            n: res.cell.n,
            k_n: res.cell.k_n,
            statistic,
            value,
            stderr,
        });
    };
    for (i, &(v, se)) in res.mspe_same.iter().enumerate() {
        push(format!("mspe_same_k{}", i + 1), v, se);
    }
    for (i, &(v, se)) in res.mspe_indep.iter().enumerate() {
        push(format!("mspe_indep_k{}", i + 1), v, se);
    }
    push("min_mspe_same".into(), res.min_mspe_same, 0.0);
    push("argmin_same".into(), res.argmin_same as f64, 0.0);
    push("dropped".into(), res.dropped as f64, 0.0);
    for cs in &res.per_criterion {
        let c = cs.criterion.to_string();
        push(format!("pe[{c}]"), cs.pe.0, cs.pe.1);
        push(format!("pei[{c}]"), cs.pei.0, cs.pei.1);
        push(format!("r_star[{c}]"), cs.r_star.0, cs.r_star.1);
        push(format!("r_star_i[{c}]"), cs.r_star_i.0, cs.r_star_i.1);
        for (i, &count) in cs.histogram.iter().enumerate() {
            push(format!("hist[{c}]_k{}", i + 1), count as f64, 0.0);
        }
    }
    rows
}

/// One line of a reference comparison.
#[derive(Debug, Clone)]
pub struct RefDiff {
    pub statistic: String,
    pub key: (f64, f64, usize, usize),
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
    pub ok: bool,
}

/// Compares computed rows against a reference CSV with columns
/// `phi0, theta0, n, K_n, statistic, value, tolerance`. Every reference row
/// must match a computed row; unmatched references are an error.
pub fn diff_reference(rows: &[ResultRow], reference_csv: &str) -> Result<Vec<RefDiff>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reference_csv.as_bytes());
    let mut diffs = Vec::new();
    for record in rdr.records() {
        let rec = record.map_err(csv_err)?;
        if rec.len() != 7 {
            return Err(Error::Config(format!(
                "reference row needs 7 fields, got {}",
                rec.len()
            )));
        }
        let parse_f = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number `{}` in reference", &rec[i])))
        };
        let parse_u = |i: usize| -> Result<usize> {
            rec[i]
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad integer `{}` in reference", &rec[i])))
        };
        let key = (parse_f(0)?, parse_f(1)?, parse_u(2)?, parse_u(3)?);
        let statistic = rec[4].to_string();
        let expected = parse_f(5)?;
        let tolerance = parse_f(6)?;
        let hit = rows.iter().find(|r| {
            r.statistic == statistic
                && r.phi0 == key.0
                && r.theta0 == key.1
                && r.n == key.2
                && r.k_n == key.3
        });
        let actual = match hit {
            Some(r) => r.value,
            None => {
                return Err(Error::Config(format!(
                    "reference statistic `{statistic}` at {key:?} not found in results"
                )))
            }
        };
        diffs.push(RefDiff {
            statistic,
            key,
            expected,
            actual,
            tolerance,
            ok: (actual - expected).abs() <= tolerance,
        });
    }
    Ok(diffs)
}
