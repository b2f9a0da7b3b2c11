//! Monte Carlo estimation of type I error rates and powers.
//!
//! Every outer replicate draws its table from stream `(seed, r)`; bootstrap
//! methods inside replicate `r` use a seed derived from the same pair, so
//! reports are reproducible regardless of thread count.

use std::fmt;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_run, refit, sample_with_probs, BootstrapOptions, RandomSource};
use crate::data::{FrequencyTable, GroupCounts};
use crate::error::{Error, Result};
use crate::estimation::FitOptions;
use crate::gof::{asymptotic_gof_fitted, degrees_of_freedom, GofMethod};
use crate::models::{joint_probs, JointProbs, ModelKind};

/// Nuisance value shared by all groups, or one per group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KappaSpec {
    Common(f64),
    PerGroup(Vec<f64>),
}

impl KappaSpec {
    fn for_group(&self, i: usize) -> f64 {
        match self {
            KappaSpec::Common(k) => *k,
            KappaSpec::PerGroup(ks) => ks[i],
        }
    }
}

fn default_alpha() -> f64 {
    0.05
}

fn default_n_rep() -> usize {
    10_000
}

fn default_methods() -> Vec<GofMethod> {
    vec![GofMethod::G2, GofMethod::X2, GofMethod::X2adj]
}

/// Bootstrap size inside a scenario; the seed is derived per replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerBootstrap {
    pub n_boot: usize,
    #[serde(default = "default_max_regen")]
    pub max_regen: usize,
}

fn default_max_regen() -> usize {
    100
}

impl Default for InnerBootstrap {
    fn default() -> Self {
        Self {
            n_boot: 2000,
            max_regen: default_max_regen(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Generating model.
    pub model: ModelKind,
    /// Group count; must equal `pis.len()` when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<usize>,
    pub pis: Vec<f64>,
    pub kappa: KappaSpec,
    pub m_plus: u32,
    pub n_plus: u32,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_n_rep")]
    pub n_rep: usize,
    #[serde(default)]
    pub boot: InnerBootstrap,
    #[serde(default = "default_methods")]
    pub methods: Vec<GofMethod>,
    /// Model fitted to each replicate; defaults to the generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_model: Option<ModelKind>,
    #[serde(default)]
    pub fit: FitOptions,
}

impl ScenarioConfig {
    /// A scenario with equal sizes and the default alpha, N and methods.
    pub fn new(model: ModelKind, pis: Vec<f64>, kappa: KappaSpec, size: u32) -> Self {
        Self {
            label: None,
            model,
            g: None,
            pis,
            kappa,
            m_plus: size,
            n_plus: size,
            alpha: default_alpha(),
            n_rep: default_n_rep(),
            boot: InnerBootstrap::default(),
            methods: default_methods(),
            fitted_model: None,
            fit: FitOptions::default(),
        }
    }

    pub fn fitted(&self) -> ModelKind {
        self.fitted_model.unwrap_or(self.model)
    }

    fn shape(&self) -> Result<FrequencyTable> {
        FrequencyTable::new(vec![
            GroupCounts::new(self.m_plus, 0, 0, self.n_plus, 0);
            self.pis.len()
        ])
    }

    /// Checks sizes and evaluates each group's generating cell probabilities.
    pub fn generating_probs(&self) -> Result<Vec<JointProbs>> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.pis.is_empty() {
            return bad("scenario has no groups".into());
        }
        if let Some(g) = self.g {
            if g != self.pis.len() {
                return bad(format!("g = {g} but {} marginals given", self.pis.len()));
            }
        }
        if let KappaSpec::PerGroup(ks) = &self.kappa {
            if ks.len() != self.pis.len() {
                return bad(format!("{} nuisance values for {} groups", ks.len(), self.pis.len()));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.n_rep == 0 {
            return bad("n_rep must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("no methods requested".into());
        }
        if self.model == ModelKind::Saturated || self.fitted() == ModelKind::Saturated {
            return bad("the saturated model cannot drive a scenario".into());
        }
        if self.methods.iter().any(|m| m.is_bootstrap()) && self.boot.n_boot == 0 {
            return bad("n_boot must be at least 1".into());
        }
        self.fit.validate()?;
        self.pis
            .iter()
            .enumerate()
            .map(|(i, &pi)| {
                joint_probs(self.model, pi, self.kappa.for_group(i))
                    .map_err(|e| Error::InvalidConfig(format!("group {}: {e}", i + 1)))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateClass {
    Liberal,
    Conservative,
    Robust,
}

impl fmt::Display for RateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateClass::Liberal => "liberal",
            RateClass::Conservative => "conservative",
            RateClass::Robust => "robust",
        })
    }
}

/// Liberal above 1.2 alpha, conservative below 0.8 alpha, else robust.
pub fn classify_rate(rate: f64, alpha: f64) -> RateClass {
    const EPS: f64 = 1e-12;
    let ratio = rate / alpha;
    if ratio > 1.2 + EPS {
        RateClass::Liberal
    } else if ratio < 0.8 - EPS {
        RateClass::Conservative
    } else {
        RateClass::Robust
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRate {
    pub method: GofMethod,
    pub rate: f64,
    pub rejections: usize,
    /// Replicates where the method produced a p-value.
    pub n_valid: usize,
    pub se: f64,
    pub class: RateClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub model: ModelKind,
    pub fitted_model: ModelKind,
    pub g: usize,
    pub m_plus: u32,
    pub n_plus: u32,
    pub alpha: f64,
    pub n_rep: usize,
    /// Replicates whose observed fit failed; excluded from every rate.
    pub failed_fits: usize,
    pub rates: Vec<MethodRate>,
}

/// Seed of the `index`-th derived sub-run.
fn derive_seed(seed: u64, domain: u64, index: u64) -> u64 {
    let mut rng = RandomSource::new(seed ^ domain, index);
    rng.rng().next_u64()
}

const BOOT_DOMAIN: u64 = 0x6f6f_7473_7472_6170;
const GRID_DOMAIN: u64 = 0x6469_7267_5f73_696d;

/// Per-method p-values of one replicate, or `None` when the fit failed.
fn replicate(
    cfg: &ScenarioConfig,
    probs: &[JointProbs],
    shape: &FrequencyTable,
    seed: u64,
    r: usize,
) -> Option<Vec<Option<f64>>> {
    let mut rng = RandomSource::new(seed, r as u64);
    let table = sample_with_probs(probs, &cfg.pis, shape, &mut rng);
    let fitted = refit(cfg.fitted(), &table, &cfg.fit)?;
    let run = if cfg.methods.iter().any(|m| m.is_bootstrap()) {
        let boot = BootstrapOptions {
            n_boot: cfg.boot.n_boot,
            seed: derive_seed(seed, BOOT_DOMAIN, r as u64),
            max_regen: cfg.boot.max_regen,
        };
        bootstrap_run(&fitted, &table, &boot, &cfg.fit).ok()
    } else {
        None
    };
    Some(
        cfg.methods
            .iter()
            .map(|&m| {
                let res = if m.is_bootstrap() {
                    run.as_ref()?.result(m)
                } else {
                    asymptotic_gof_fitted(m, &fitted, &table)
                };
                res.ok().map(|g| g.p_value)
            })
            .collect(),
    )
}

/// Rejection rates at level `alpha` (reject when p < alpha) over
/// `n_rep` generated tables.
pub fn run_scenario(cfg: &ScenarioConfig, seed: u64) -> Result<RateReport> {
    let probs = cfg.generating_probs()?;
    let shape = cfg.shape()?;
    if cfg.methods.iter().any(|m| !m.is_bootstrap()) {
        degrees_of_freedom(cfg.fitted(), &shape)
            .map_err(|e| Error::InvalidConfig(format!("asymptotic methods unavailable: {e}")))?;
    }
    let outcomes: Vec<Option<Vec<Option<f64>>>> = (0..cfg.n_rep)
        .into_par_iter()
        .map(|r| replicate(cfg, &probs, &shape, seed, r))
        .collect();
    let failed_fits = outcomes.iter().filter(|o| o.is_none()).count();
    let rates = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(j, &method)| {
            let ps: Vec<f64> = outcomes.iter().flatten().filter_map(|o| o[j]).collect();
            let rejections = ps.iter().filter(|&&p| p < cfg.alpha).count();
            let n_valid = ps.len();
            let rate = if n_valid == 0 {
                f64::NAN
            } else {
                rejections as f64 / n_valid as f64
            };
            MethodRate {
                method,
                rate,
                rejections,
                n_valid,
                se: (rate * (1.0 - rate) / n_valid as f64).sqrt(),
                class: classify_rate(rate, cfg.alpha),
            }
        })
        .collect();
    Ok(RateReport {
        label: cfg.label.clone(),
        model: cfg.model,
        fitted_model: cfg.fitted(),
        g: cfg.pis.len(),
        m_plus: cfg.m_plus,
        n_plus: cfg.n_plus,
        alpha: cfg.alpha,
        n_rep: cfg.n_rep,
        failed_fits,
        rates,
    })
}

/// Runs each scenario with its own seed derived from `seed` and its index.
pub fn run_grid(configs: &[ScenarioConfig], seed: u64) -> Result<Vec<RateReport>> {
    configs
        .iter()
        .enumerate()
        .map(|(i, cfg)| {
            run_scenario(cfg, derive_seed(seed, GRID_DOMAIN, i as u64)).map_err(|e| match e {
                Error::InvalidConfig(msg) => Error::InvalidConfig(format!("scenario {}: {msg}", i + 1)),
                other => other,
            })
        })
        .collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GridFile {
    List(Vec<ScenarioConfig>),
    Wrapped { scenarios: Vec<ScenarioConfig> },
}

/// Parses a scenario grid: either a JSON array of scenarios or an object
/// with a `scenarios` array.
pub fn parse_grid(text: &str) -> Result<Vec<ScenarioConfig>> {
    match serde_json::from_str::<GridFile>(text) {
        Ok(GridFile::List(v)) | Ok(GridFile::Wrapped { scenarios: v }) => Ok(v),
        Err(e) => Err(Error::Malformed(format!("scenario grid: {e}"))),
    }
}

/// Null-hypothesis nuisance values studied for each model.
pub fn null_kappas(model: ModelKind) -> &'static [f64] {
    match model {
        ModelKind::Rosner => &[1.2, 1.5, 1.8],
        ModelKind::Donner => &[0.5, 0.7, 0.9],
        ModelKind::Dallal => &[0.3, 0.5, 0.7],
        ModelKind::ClaytonCopula => &[1.0, 2.0, 4.0],
        _ => &[],
    }
}

/// Marginal configurations under the null: cases I–VI.
pub fn null_cases() -> [(&'static str, Vec<f64>); 6] {
    let iii = vec![0.1, 0.2, 0.3, 0.4];
    let iv = vec![0.2, 0.2, 0.4, 0.4];
    [
        ("I", vec![0.3, 0.5]),
        ("II", vec![0.5, 0.5]),
        ("III", iii.clone()),
        ("IV", iv.clone()),
        ("V", [iii.as_slice(), iii.as_slice()].concat()),
        ("VI", [iv.as_slice(), iv.as_slice()].concat()),
    ]
}

/// Marginal configurations under the alternative: cases I–VI.
pub fn alternative_cases() -> [(&'static str, Vec<f64>); 6] {
    let mut cases = null_cases();
    cases[0].1 = vec![0.2, 0.2];
    cases[1].1 = vec![0.2, 0.4];
    cases
}

/// Alternative per-group nuisance values: the first half of the groups
/// take the low value, the second half the high one.
pub fn alternative_kappas(model: ModelKind, g: usize) -> Vec<f64> {
    let (lo, hi) = match model {
        ModelKind::Rosner => (1.2, 1.5),
        ModelKind::Donner | ModelKind::Dallal => (0.5, 0.7),
        ModelKind::ClaytonCopula => (2.0, 4.0),
        _ => return Vec::new(),
    };
    (0..g).map(|i| if i < g / 2 { lo } else { hi }).collect()
}

/// The 18 null scenarios of one model at a common size.
pub fn null_grid(model: ModelKind, size: u32) -> Vec<ScenarioConfig> {
    null_cases()
        .into_iter()
        .flat_map(|(case, pis)| {
            null_kappas(model).iter().map(move |&k| {
                let mut cfg = ScenarioConfig::new(model, pis.clone(), KappaSpec::Common(k), size);
                cfg.label = Some(format!("{size}/{}/{case}/{k}", pis.len()));
                cfg
            })
        })
        .collect()
}

/// The six power scenarios of one model at a common size.
pub fn alternative_grid(model: ModelKind, size: u32) -> Vec<ScenarioConfig> {
    alternative_cases()
        .into_iter()
        .map(|(case, pis)| {
            let ks = alternative_kappas(model, pis.len());
            let mut cfg = ScenarioConfig::new(model, pis, KappaSpec::PerGroup(ks), size);
            cfg.label = Some(format!("{size}/{}/{case}", cfg.pis.len()));
            cfg
        })
        .collect()
}
