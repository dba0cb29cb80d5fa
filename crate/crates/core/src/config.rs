//! Config-file and shorthand parsing for process specs and experiments.
//!
//! File format (TOML):
//!
//! ```toml
//! [spec]
//! kind = "arma"            # "arma" | "explicit_ar" | "white_noise"
//! phi = [0.9]              # arma only
//! theta = [0.6]            # arma only
//! sigma2 = 1.0
//! # explicit_ar only:
//! # rule = "exponential"   # "exponential" | "algebraic" | "coeffs"
//! # c = 0.5
//! # rho = 0.8              # exponential
//! # gamma_exp = 1.5        # algebraic
//! # coeffs = [0.3, -0.1]   # coeffs
//! seed = 42                # optional default master seed
//!
//! [experiment]             # optional; needed by `run`
//! cells = [[60, 7], [120, 10]]
//! reps = 20000
//! criteria = ["aic", "sn_alpha:3"]
//! master_seed = 1
//! mode = "conditional"     # "conditional" | "raw"
//! baseline_cell = [60, 7]  # optional, defaults to the first cell
//! ```
//!
//! Shorthand spec strings for `--spec`: `whitenoise`, `ar1:PHI`, `ma1:THETA`,
//! `arma11:PHI,THETA`, `expdecay:C,RHO`, `algdecay:C,GAMMA`.

use serde::Deserialize;

use crate::criteria::CriterionId;
use crate::error::{Error, Result};
use crate::mc::{Cell, EstimatorMode, ExperimentConfig, REFERENCE_CELLS};
use crate::process::{ArRule, ProcessSpec};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecSection {
    kind: String,
    #[serde(default)]
    phi: Vec<f64>,
    #[serde(default)]
    theta: Vec<f64>,
    sigma2: Option<f64>,
    rule: Option<String>,
    c: Option<f64>,
    rho: Option<f64>,
    gamma_exp: Option<f64>,
    coeffs: Option<Vec<f64>>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    cells: Option<Vec<[u64; 2]>>,
    reps: Option<usize>,
    criteria: Option<Vec<String>>,
    master_seed: Option<u64>,
    mode: Option<String>,
    baseline_cell: Option<[u64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSchema {
    spec: SpecSection,
    experiment: Option<ExperimentSection>,
}

/// Parsed config file: a validated spec, an optional default seed, and an
/// optional fully-assembled experiment.
#[derive(Debug, Clone)]
pub struct FileConfig {
    pub spec: ProcessSpec,
    pub seed: Option<u64>,
    pub experiment: Option<ExperimentConfig>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn build_spec(s: &SpecSection) -> Result<ProcessSpec> {
    let sigma2 = s.sigma2.unwrap_or(1.0);
    match s.kind.as_str() {
        "white_noise" | "whitenoise" => Ok(ProcessSpec::white_noise(sigma2)),
        "arma" => ProcessSpec::arma(s.phi.clone(), s.theta.clone(), sigma2),
        "explicit_ar" => {
            let rule = match s.rule.as_deref() {
                Some("exponential") => ArRule::Exponential {
                    c: s.c.ok_or_else(|| config_err("exponential rule needs `c`"))?,
                    rho: s.rho.ok_or_else(|| config_err("exponential rule needs `rho`"))?,
                },
                Some("algebraic") => ArRule::Algebraic {
                    c: s.c.ok_or_else(|| config_err("algebraic rule needs `c`"))?,
                    gamma: s
                        .gamma_exp
                        .ok_or_else(|| config_err("algebraic rule needs `gamma_exp`"))?,
                },
                Some("coeffs") => ArRule::Coeffs(
                    s.coeffs
                        .clone()
                        .ok_or_else(|| config_err("coeffs rule needs `coeffs`"))?,
                ),
                Some(other) => return Err(config_err(format!("unknown rule `{other}`"))),
                None => return Err(config_err("explicit_ar spec needs `rule`")),
            };
            ProcessSpec::explicit_ar(rule, sigma2)
        }
        other => Err(config_err(format!("unknown spec kind `{other}`"))),
    }
}

fn parse_mode(s: &str) -> Result<EstimatorMode> {
    match s {
        "conditional" => Ok(EstimatorMode::Conditional),
        "raw" => Ok(EstimatorMode::Raw),
        other => Err(config_err(format!(
            "mode must be `conditional` or `raw`, got `{other}`"
        ))),
    }
}

/// Parses `--mode` values.
pub fn parse_mode_str(s: &str) -> Result<EstimatorMode> {
    parse_mode(s)
}

/// Parses a comma-separated criteria list (`aic,fpe,sn_alpha:3`).
pub fn parse_criteria_list(s: &str) -> Result<Vec<CriterionId>> {
    s.split(',')
        .map(|tok| tok.trim().parse::<CriterionId>())
        .collect()
}

fn cell_of(pair: [u64; 2]) -> Cell {
    Cell::new(pair[0] as usize, pair[1] as usize)
}

/// Parses a complete TOML config document.
pub fn load_config(text: &str) -> Result<FileConfig> {
    let schema: FileSchema =
        toml::from_str(text).map_err(|e| config_err(format!("config parse error: {e}")))?;
    let spec = build_spec(&schema.spec)?;
    let seed = schema.spec.seed;
    let experiment = match &schema.experiment {
        None => None,
        Some(exp) => {
            let mut cfg = ExperimentConfig::new(spec.clone());
            cfg.cells = exp
                .cells
                .as_ref()
                .map(|cs| cs.iter().map(|&c| cell_of(c)).collect())
                .unwrap_or_else(|| REFERENCE_CELLS.to_vec());
            if let Some(reps) = exp.reps {
                cfg.reps = reps;
            }
            if let Some(crits) = &exp.criteria {
                cfg.criteria = crits
                    .iter()
                    .map(|s| s.parse::<CriterionId>())
                    .collect::<Result<_>>()?;
            }
            cfg.master_seed = exp.master_seed.or(seed).unwrap_or(0);
            if let Some(mode) = &exp.mode {
                cfg.mode = parse_mode(mode)?;
            }
            cfg.baseline_cell = exp
                .baseline_cell
                .map(cell_of)
                .unwrap_or_else(|| cfg.cells.first().copied().unwrap_or(Cell::new(60, 7)));
            Some(cfg)
        }
    };
    Ok(FileConfig {
        spec,
        seed,
        experiment,
    })
}

/// Parses a shorthand spec string (see module docs). Noise variance is 1.
pub fn parse_spec_shorthand(s: &str) -> Result<ProcessSpec> {
    let (name, args) = match s.split_once(':') {
        Some((n, a)) => (n, a),
        None => (s, ""),
    };
    let nums: Vec<f64> = if args.is_empty() {
        Vec::new()
    } else {
        args.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| config_err(format!("bad number `{t}` in spec `{s}`")))
            })
            .collect::<Result<_>>()?
    };
    let want = |n: usize| -> Result<()> {
        if nums.len() == n {
            Ok(())
        } else {
            Err(config_err(format!(
                "spec `{name}` takes {n} parameter(s), got {}",
                nums.len()
            )))
        }
    };
    match name {
        "whitenoise" => {
            want(0)?;
            Ok(ProcessSpec::white_noise(1.0))
        }
        "ar1" => {
            want(1)?;
            ProcessSpec::ar1(nums[0], 1.0)
        }
        "ma1" => {
            want(1)?;
            ProcessSpec::ma1(nums[0], 1.0)
        }
        "arma11" => {
            want(2)?;
            ProcessSpec::arma11(nums[0], nums[1], 1.0)
        }
        "expdecay" => {
            want(2)?;
            ProcessSpec::explicit_ar(
                ArRule::Exponential {
                    c: nums[0],
                    rho: nums[1],
                },
                1.0,
            )
        }
        "algdecay" => {
            want(2)?;
            ProcessSpec::explicit_ar(
                ArRule::Algebraic {
                    c: nums[0],
                    gamma: nums[1],
                },
                1.0,
            )
        }
        other => Err(config_err(format!("unknown spec shorthand `{other}`"))),
    }
}
