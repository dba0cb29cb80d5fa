//! Autoregressive order fitting and selection for AR(∞) processes, with a
//! Monte Carlo harness for same- and independent-realization prediction
//! efficiency experiments.
//!
//! The crate is organised around the experiment pipeline:
//!
//! - [`process`]: validated data-generating processes (ARMA or explicit
//!   AR(∞) coefficient rules), seedable simulation, AR/MA expansions,
//!   autocovariances, and exact conditional means.
//! - [`theory`]: Yule–Walker projections via the Levinson recursion, the
//!   theoretical loss curve `L_n(k)` and its minimizer, and the appendix
//!   asymptotic formulas for the optimal order.
//! - [`fit`]: nested least-squares fits of all orders `1..K_n` over a common
//!   observation window, one-step prediction, and the exact decomposition
//!   identities used as numerical self-checks.
//! - [`criteria`]: the AIC-family order-selection criteria and their
//!   generalized-penalty variants.
//! - [`mc`]: the replication harness producing MSPE curves, prediction
//!   efficiencies, and strong-efficiency gap ratios with standard errors.
//! - [`config`] / [`export`]: TOML experiment configs and CSV artifacts.

pub mod config;
pub mod criteria;
pub mod error;
pub mod export;
pub mod fit;
pub mod mc;
pub mod process;
pub mod theory;

pub use config::{load_config, parse_criteria_list, parse_mode_str, parse_spec_shorthand, FileConfig};
pub use criteria::{score, select, CriterionId, CriterionScores, DEFAULT_HQ_C};
pub use error::{Error, Result};
pub use export::{
    diff_reference, result_rows_from_cell, write_curve_csv, write_fit_csv, write_path_csv,
    write_results_csv, write_scores_csv, RefDiff, ResultRow,
};
pub use fit::{
    decomposition_check, design_summary, empirical_r_distance, fit_all_orders, predict_one,
    r_distance_via_ma, DesignSummary, FitSequence,
};
pub use mc::{
    gamma_opt, ma1_efficiency_grid, run_cell, run_cells, seed_stream, table1, ArmaCellRow, Cell,
    CellResult, CriterionStats, EstimatorMode, ExperimentConfig, Ma1CellRow, TableOptions,
    REFERENCE_CELLS, TABLE1_PHIS, TABLE1_THETAS, TABLE23_THETAS,
};
pub use process::{
    ArCoeffs, ArRule, AutocovTable, MaCoeffs, ProcessKind, ProcessSpec, SamplePath, StreamId,
    DEFAULT_TOL, MAX_COEFFS,
};
pub use theory::{
    basin_profile, fit_norm, kstar_asymptotic_algebraic, kstar_asymptotic_exponential, loss_curve,
    quadratic_r_norm, yule_walker, yule_walker_sequence, OrderKProjection, TheoreticalCurve,
};
