//! Parametric bootstrap goodness-of-fit tests.
//!
//! Replicate `r` draws from its own counter-based stream `(seed, r)`, so the
//! result does not depend on how replicates are scheduled across threads.
//! A replicate whose refit fails is redrawn from the same stream up to
//! `max_regen` times and then dropped from both numerator and denominator.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{FrequencyTable, GroupCounts};
use crate::error::{Error, Result};
use crate::estimation::{fit, fit_independence, FitOptions, FitResult};
use crate::gof::{fitted_statistic, log_observed_table_probability, require_converged, GofMethod, GofResult};
use crate::models::{JointProbs, ModelKind, ParamVector};

/// Relative distance under which a replicate counts as tied with the
/// observed value.
pub const TIE_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub n_boot: usize,
    pub seed: u64,
    #[serde(default = "default_max_regen")]
    pub max_regen: usize,
}

fn default_max_regen() -> usize {
    100
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self {
            n_boot: 2000,
            seed: 0,
            max_regen: default_max_regen(),
        }
    }
}

impl BootstrapOptions {
    pub fn new(n_boot: usize, seed: u64) -> Self {
        Self {
            n_boot,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_boot == 0 {
            return Err(Error::InvalidConfig("n_boot must be at least 1".into()));
        }
        Ok(())
    }
}

/// Deterministic generator keyed by `(seed, stream)`.
#[derive(Debug, Clone)]
pub struct RandomSource(ChaCha8Rng);

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self(rng)
    }

    pub fn rng(&mut self) -> &mut impl Rng {
        &mut self.0
    }

    fn binomial(&mut self, n: u32, p: f64) -> u32 {
        if n == 0 || p <= 0.0 {
            return 0;
        }
        if p >= 1.0 {
            return n;
        }
        let dist = Binomial::new(u64::from(n), p).expect("p in (0, 1)");
        dist.sample(&mut self.0) as u32
    }

    /// Trinomial draw as two conditional binomials.
    fn trinomial(&mut self, n: u32, p: JointProbs) -> [u32; 3] {
        let k0 = self.binomial(n, p.p0);
        let rest = 1.0 - p.p0;
        let k1 = if rest > 0.0 {
            self.binomial(n - k0, p.p1 / rest)
        } else {
            0
        };
        [k0, k1, n - k0 - k1]
    }
}

/// Draws a table with the margins of `shape` under given per-group cell
/// probabilities and marginals.
pub fn sample_with_probs(
    probs: &[JointProbs],
    pis: &[f64],
    shape: &FrequencyTable,
    rng: &mut RandomSource,
) -> FrequencyTable {
    let groups = shape
        .groups()
        .iter()
        .enumerate()
        .map(|(i, gc)| {
            let [m0, m1, m2] = rng.trinomial(gc.m_plus(), probs[i]);
            let n1 = rng.binomial(gc.n_plus(), pis[i]);
            GroupCounts::new(m0, m1, m2, gc.n_plus() - n1, n1)
        })
        .collect();
    shape.with_counts(groups)
}

/// Draws `(m0, m1, m2) ~ Multinomial(m+, p)` and `n1 ~ Binomial(n+, pi)`
/// per group, keeping the margins of `shape`.
pub fn sample_table(
    params: &ParamVector,
    model: ModelKind,
    shape: &FrequencyTable,
    rng: &mut RandomSource,
) -> Result<FrequencyTable> {
    if params.g() != shape.g() {
        return Err(Error::GroupMismatch {
            expected: shape.g(),
            got: params.g(),
        });
    }
    let probs = (0..shape.g())
        .map(|i| params.group_probs(model, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(sample_with_probs(&probs, &params.pis, shape, rng))
}

/// Refit used on every replicate; failures are reported as `None`.
pub(crate) fn refit(model: ModelKind, table: &FrequencyTable, opts: &FitOptions) -> Option<FitResult> {
    let res = if model == ModelKind::Independence {
        fit_independence(table)
    } else {
        fit(model, table, opts)
    };
    res.ok().filter(|f| f.converged && f.loglik.is_finite())
}

/// The three ordering quantities of one fitted table: G², X², ln Pr.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateStats {
    pub g2: f64,
    pub x2: f64,
    pub log_prob: f64,
}

impl ReplicateStats {
    pub fn of(fit: &FitResult, table: &FrequencyTable) -> Result<Self> {
        Ok(Self {
            g2: fitted_statistic(GofMethod::G2, fit, table)?,
            x2: fitted_statistic(GofMethod::X2, fit, table)?,
            log_prob: log_observed_table_probability(fit, table)?,
        })
    }
}

/// Observed quantities plus every replicate; `None` marks a replicate that
/// could not be refitted.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapRun {
    pub observed: ReplicateStats,
    pub replicates: Vec<Option<ReplicateStats>>,
    pub boundary: bool,
}

fn tied(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= TIE_RTOL * a.abs().max(b.abs())
}

impl BootstrapRun {
    pub fn failed(&self) -> usize {
        self.replicates.iter().filter(|r| r.is_none()).count()
    }

    /// Summarizes `method`: G² and X² count replicates strictly larger
    /// than observed, B3 replicates strictly less probable.
    pub fn result(&self, method: GofMethod) -> Result<GofResult> {
        let (observed, pick, more_extreme): (f64, fn(&ReplicateStats) -> f64, fn(f64, f64) -> bool) = match method {
            GofMethod::B1 => (self.observed.g2, |r| r.g2, |b, o| b > o),
            GofMethod::B2 => (self.observed.x2, |r| r.x2, |b, o| b > o),
            GofMethod::B3 => (self.observed.log_prob, |r| r.log_prob, |b, o| b < o),
            other => return Err(Error::WrongMethod(other.to_string())),
        };
        let valid: Vec<f64> = self.replicates.iter().flatten().map(pick).collect();
        if valid.is_empty() {
            return Err(Error::NoValidReplicates { failed: self.failed() });
        }
        let mut n_extreme = 0;
        let mut ties = 0;
        for b in &valid {
            if tied(*b, observed) {
                ties += 1;
            } else if more_extreme(*b, observed) {
                n_extreme += 1;
            }
        }
        Ok(GofResult {
            method,
            statistic: if method == GofMethod::B3 {
                observed.exp()
            } else {
                observed
            },
            dof: None,
            p_value: n_extreme as f64 / valid.len() as f64,
            n_boot: Some(valid.len()),
            n_extreme: Some(n_extreme),
            failed_replicates: Some(self.failed()),
            ties: Some(ties),
            boundary: self.boundary,
        })
    }
}

/// Generates and refits all replicates under `fitted`.
pub fn bootstrap_run(
    fitted: &FitResult,
    table: &FrequencyTable,
    boot: &BootstrapOptions,
    fit_opts: &FitOptions,
) -> Result<BootstrapRun> {
    boot.validate()?;
    let model = fitted.model;
    let probs = (0..table.g())
        .map(|i| fitted.params.group_probs(model, i))
        .collect::<Result<Vec<_>>>()?;
    let observed = ReplicateStats::of(fitted, table)?;
    let replicates = (0..boot.n_boot)
        .into_par_iter()
        .map(|r| {
            let mut rng = RandomSource::new(boot.seed, r as u64);
            for _ in 0..=boot.max_regen {
                let sample = sample_with_probs(&probs, &fitted.params.pis, table, &mut rng);
                if let Some(f) = refit(model, &sample, fit_opts) {
                    if let Ok(stats) = ReplicateStats::of(&f, &sample) {
                        return Some(stats);
                    }
                }
            }
            None
        })
        .collect();
    Ok(BootstrapRun {
        observed,
        replicates,
        boundary: fitted.boundary,
    })
}

fn fit_observed(model: ModelKind, table: &FrequencyTable, fit_opts: &FitOptions) -> Result<FitResult> {
    if model == ModelKind::Saturated {
        return Err(Error::InvalidParams(
            "the saturated model cannot be bootstrapped".into(),
        ));
    }
    let fitted = if model == ModelKind::Independence {
        fit_independence(table)?
    } else {
        fit(model, table, fit_opts)?
    };
    require_converged(&fitted)?;
    Ok(fitted)
}

/// All requested bootstrap methods from one shared set of replicates.
pub fn bootstrap_all(
    model: ModelKind,
    table: &FrequencyTable,
    methods: &[GofMethod],
    boot: &BootstrapOptions,
    fit_opts: &FitOptions,
) -> Result<Vec<GofResult>> {
    if let Some(m) = methods.iter().find(|m| !m.is_bootstrap()) {
        return Err(Error::WrongMethod(m.to_string()));
    }
    let fitted = fit_observed(model, table, fit_opts)?;
    let run = bootstrap_run(&fitted, table, boot, fit_opts)?;
    methods.iter().map(|&m| run.result(m)).collect()
}

/// Parametric bootstrap test `method` (B1, B2 or B3) of `model`.
pub fn bootstrap_gof(
    model: ModelKind,
    table: &FrequencyTable,
    method: GofMethod,
    boot: &BootstrapOptions,
    fit_opts: &FitOptions,
) -> Result<GofResult> {
    Ok(bootstrap_all(model, table, &[method], boot, fit_opts)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, stream| {
            let mut r = RandomSource::new(seed, stream);
            (0..4).map(|_| r.rng().random::<u64>()).collect::<Vec<_>>()
        };
        assert_eq!(draw(7, 3), draw(7, 3));
        assert_ne!(draw(7, 3), draw(7, 4));
        assert_ne!(draw(7, 3), draw(8, 3));
    }

    #[test]
    fn degenerate_draws() {
        let shape = FrequencyTable::new(vec![GroupCounts::new(3, 2, 1, 4, 2), GroupCounts::new(0, 0, 0, 0, 0)]);
        // second group is degenerate and rejected by validation
        assert!(shape.is_err());
        let shape = FrequencyTable::new(vec![GroupCounts::new(3, 2, 1, 4, 2)]).unwrap();
        let p = ParamVector::new(vec![1.0], None);
        let mut rng = RandomSource::new(1, 0);
        let t = sample_table(&p, ModelKind::Independence, &shape, &mut rng).unwrap();
        assert_eq!(t.group(0), &GroupCounts::new(0, 0, 6, 0, 6));
    }

    #[test]
    fn empty_parts_stay_empty() {
        let shape = datasets::retinitis_pigmentosa();
        let p = ParamVector::new(vec![0.4; 4], Some(0.5));
        let mut rng = RandomSource::new(3, 0);
        let t = sample_table(&p, ModelKind::Donner, &shape, &mut rng).unwrap();
        for (a, b) in t.groups().iter().zip(shape.groups()) {
            assert_eq!((a.m_plus(), a.n_plus()), (b.m_plus(), b.n_plus()));
        }
    }

    #[test]
    fn same_seed_same_p_value() {
        let t = datasets::myopia();
        let boot = BootstrapOptions::new(200, 11);
        let a = bootstrap_gof(ModelKind::Dallal, &t, GofMethod::B1, &boot, &FitOptions::default()).unwrap();
        let b = bootstrap_gof(ModelKind::Dallal, &t, GofMethod::B1, &boot, &FitOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.p_value, a.n_extreme.unwrap() as f64 / a.n_boot.unwrap() as f64);
    }

    #[test]
    fn single_method_matches_shared_run() {
        let t = datasets::otitis_media();
        let boot = BootstrapOptions::new(100, 5);
        let all = bootstrap_all(
            ModelKind::Rosner,
            &t,
            &[GofMethod::B1, GofMethod::B2, GofMethod::B3],
            &boot,
            &FitOptions::default(),
        )
        .unwrap();
        let b2 = bootstrap_gof(ModelKind::Rosner, &t, GofMethod::B2, &boot, &FitOptions::default()).unwrap();
        assert_eq!(all[1], b2);
    }

    #[test]
    fn rejects_asymptotic_methods_and_empty_runs() {
        let t = datasets::otitis_media();
        let boot = BootstrapOptions::new(10, 5);
        assert!(bootstrap_gof(ModelKind::Rosner, &t, GofMethod::G2, &boot, &FitOptions::default()).is_err());
        let run = BootstrapRun {
            observed: ReplicateStats {
                g2: 1.0,
                x2: 1.0,
                log_prob: -1.0,
            },
            replicates: vec![None, None],
            boundary: false,
        };
        assert_eq!(
            run.result(GofMethod::B1).unwrap_err(),
            Error::NoValidReplicates { failed: 2 }
        );
        assert!(bootstrap_gof(
            ModelKind::Rosner,
            &t,
            GofMethod::B1,
            &BootstrapOptions::new(0, 1),
            &FitOptions::default()
        )
        .is_err());
    }

    #[test]
    fn strict_comparison_with_ties() {
        let stats = |v: f64| {
            Some(ReplicateStats {
                g2: v,
                x2: v,
                log_prob: -v,
            })
        };
        let run = BootstrapRun {
            observed: stats(2.0).unwrap(),
            replicates: vec![stats(1.0), stats(2.0), stats(3.0), None],
            boundary: false,
        };
        let b1 = run.result(GofMethod::B1).unwrap();
        assert_eq!(
            (b1.n_extreme, b1.ties, b1.n_boot, b1.failed_replicates),
            (Some(1), Some(1), Some(3), Some(1))
        );
        let b3 = run.result(GofMethod::B3).unwrap();
        assert_eq!(b3.n_extreme, Some(1));
        assert!((b3.statistic - (-2f64).exp()).abs() < 1e-15);
    }
}
