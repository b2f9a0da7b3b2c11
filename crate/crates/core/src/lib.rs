//! Goodness-of-fit testing for correlated paired binary data.
//!
//! Each subject contributes either two correlated binary outcomes
//! (bilateral) or one (unilateral). Four parametric models describe the
//! intra-subject dependence; this crate fits them by maximum likelihood,
//! tests their fit with asymptotic and parametric-bootstrap statistics,
//! compares them by AIC, and runs Monte Carlo studies of the tests.

pub mod bootstrap;
pub mod data;
pub mod datasets;
pub mod error;
pub mod estimation;
pub mod gof;
pub mod models;
pub mod poly;
pub mod selection;
pub mod simulation;

pub use bootstrap::{bootstrap_all, bootstrap_gof, BootstrapOptions, RandomSource};
pub use data::{parse_frequency_table, FrequencyTable, GroupCounts, TableFormat};
pub use error::{Error, Result};
pub use estimation::{fit, FitOptions, FitResult};
pub use gof::{asymptotic_gof, GofMethod, GofResult};
pub use models::{JointProbs, ModelKind, NuisanceInterval, ParamVector};
pub use selection::{aic, select_model, SelectionReport};
pub use simulation::{classify_rate, run_grid, run_scenario, RateClass, RateReport, ScenarioConfig};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "PAIRED_GOF_THREADS";

/// Sizes the global thread pool from `PAIRED_GOF_THREADS` when set.
///
/// Must run before any parallel work; later calls have no effect.
pub fn init_thread_pool() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidConfig(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    // A pool that already exists keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
