//! AIC-based choice among models that pass the goodness-of-fit screen.

use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_run, BootstrapOptions};
use crate::data::FrequencyTable;
use crate::error::{Error, Result};
use crate::estimation::{fit, fit_independence, FitOptions, FitResult};
use crate::gof::{asymptotic_gof_fitted, require_converged, GofMethod, GofResult};
use crate::models::ModelKind;

/// Free parameters charged to `model`: one marginal per group plus one
/// nuisance; the saturated model counts every free cell.
pub fn parameter_count(model: ModelKind, table: &FrequencyTable) -> usize {
    match model {
        ModelKind::Saturated => table
            .groups()
            .iter()
            .map(|gc| 2 * usize::from(gc.m_plus() > 0) + usize::from(gc.n_plus() > 0))
            .sum(),
        _ => table.g() + 1,
    }
}

/// `2k - 2 l`, with `l` excluding the multinomial constant.
pub fn aic(fit: &FitResult, table: &FrequencyTable) -> Result<f64> {
    if !fit.loglik.is_finite() {
        return Err(Error::FitFailed(format!("{} log-likelihood is not finite", fit.model)));
    }
    Ok(2.0 * parameter_count(fit.model, table) as f64 - 2.0 * fit.loglik)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodPValue {
    pub method: GofMethod,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub name: ModelKind,
    pub pvalues: Vec<MethodPValue>,
    pub aic: Option<f64>,
    pub pass: bool,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub boundary: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Full per-method results.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub results: Vec<GofResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub models: Vec<ModelSummary>,
    pub best: Option<ModelKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// Requested tests of one model that has already been fitted; bootstrap
/// methods share one set of replicates.
pub fn test_fitted(
    fitted: &FitResult,
    table: &FrequencyTable,
    methods: &[GofMethod],
    boot: Option<&BootstrapOptions>,
    fit_opts: &FitOptions,
) -> Result<Vec<GofResult>> {
    let run = if methods.iter().any(|m| m.is_bootstrap()) {
        let boot = boot.ok_or_else(|| Error::InvalidConfig("bootstrap methods need a seed".into()))?;
        Some(bootstrap_run(fitted, table, boot, fit_opts)?)
    } else {
        None
    };
    methods
        .iter()
        .map(|&m| match &run {
            Some(run) if m.is_bootstrap() => run.result(m),
            _ => asymptotic_gof_fitted(m, fitted, table),
        })
        .collect()
}

fn summarize(
    model: ModelKind,
    table: &FrequencyTable,
    methods: &[GofMethod],
    threshold: f64,
    boot: Option<&BootstrapOptions>,
    fit_opts: &FitOptions,
) -> ModelSummary {
    let k = parameter_count(model, table);
    let failed = |e: Error| ModelSummary {
        name: model,
        pvalues: Vec::new(),
        aic: None,
        pass: false,
        k,
        kappa: None,
        boundary: false,
        error: Some(e.to_string()),
        results: Vec::new(),
    };
    let fitted = match model {
        ModelKind::Independence => fit_independence(table),
        _ => fit(model, table, fit_opts),
    };
    let fitted = match fitted.and_then(|f| require_converged(&f).map(|_| f)) {
        Ok(f) => f,
        Err(e) => return failed(e),
    };
    let aic_value = aic(&fitted, table).ok();
    match test_fitted(&fitted, table, methods, boot, fit_opts) {
        Ok(results) => ModelSummary {
            name: model,
            pvalues: results
                .iter()
                .map(|r| MethodPValue {
                    method: r.method,
                    p_value: r.p_value,
                })
                .collect(),
            aic: aic_value,
            pass: aic_value.is_some() && results.iter().all(|r| r.p_value > threshold),
            k,
            kappa: fitted.params.kappa,
            boundary: fitted.boundary,
            error: None,
            results,
        },
        Err(e) => ModelSummary {
            aic: aic_value,
            kappa: fitted.params.kappa,
            boundary: fitted.boundary,
            ..failed(e)
        },
    }
}

/// Tests every candidate and picks the passing model with the smallest
/// AIC. Ties go to fewer parameters, then to the earlier candidate.
pub fn select_model(
    table: &FrequencyTable,
    candidates: &[ModelKind],
    methods: &[GofMethod],
    threshold: f64,
    boot: Option<&BootstrapOptions>,
    fit_opts: &FitOptions,
) -> Result<SelectionReport> {
    if candidates.is_empty() {
        return Err(Error::InvalidConfig("no candidate models".into()));
    }
    if methods.is_empty() {
        return Err(Error::InvalidConfig("no test methods".into()));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    if candidates.contains(&ModelKind::Saturated) {
        return Err(Error::InvalidConfig("the saturated model is not a candidate".into()));
    }
    if methods.iter().any(|m| m.is_bootstrap()) && boot.is_none() {
        return Err(Error::InvalidConfig("bootstrap methods need a seed".into()));
    }
    let models: Vec<ModelSummary> = candidates
        .iter()
        .map(|&m| summarize(m, table, methods, threshold, boot, fit_opts))
        .collect();
    let best = models
        .iter()
        .filter(|s| s.pass)
        .filter_map(|s| s.aic.map(|a| (a, s.k, s.name)))
        .fold(None::<(f64, usize, ModelKind)>, |acc, cur| match acc {
            None => Some(cur),
            Some(b) => {
                let tie = (cur.0 - b.0).abs() <= 1e-9 * (1.0 + b.0.abs());
                if (cur.0 < b.0 && !tie) || (tie && cur.1 < b.1) {
                    Some(cur)
                } else {
                    Some(b)
                }
            }
        })
        .map(|b| b.2);
    let diagnostic = best
        .is_none()
        .then(|| format!("no candidate passed every test at threshold {threshold}"));
    Ok(SelectionReport {
        models,
        best,
        diagnostic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use crate::estimation::fit_saturated;

    #[test]
    fn parameter_counts() {
        let t = datasets::myopia();
        assert_eq!(parameter_count(ModelKind::Independence, &t), 4);
        assert_eq!(parameter_count(ModelKind::Rosner, &t), 4);
        assert_eq!(parameter_count(ModelKind::Saturated, &t), 9);
        assert_eq!(
            parameter_count(ModelKind::Saturated, &datasets::retinitis_pigmentosa()),
            8
        );
    }

    #[test]
    fn saturated_aic_beats_nothing_in_likelihood() {
        let t = datasets::otitis_media();
        let sat = fit_saturated(&t).unwrap();
        for m in ModelKind::NUISANCE {
            let f = fit(m, &t, &FitOptions::default()).unwrap();
            assert!(f.loglik <= sat.loglik + 1e-9);
        }
    }

    #[test]
    fn argument_checks() {
        let t = datasets::otitis_media();
        let o = FitOptions::default();
        assert!(select_model(&t, &[], &[GofMethod::G2], 0.05, None, &o).is_err());
        assert!(select_model(&t, &[ModelKind::Rosner], &[GofMethod::G2], 1.5, None, &o).is_err());
        assert!(select_model(&t, &[ModelKind::Rosner], &[GofMethod::B1], 0.05, None, &o).is_err());
        assert!(select_model(&t, &[ModelKind::Saturated], &[GofMethod::G2], 0.05, None, &o).is_err());
    }

    #[test]
    fn nothing_passes_an_extreme_threshold() {
        let t = datasets::otitis_media();
        let r = select_model(
            &t,
            &ModelKind::CANDIDATES,
            &[GofMethod::G2],
            0.99,
            None,
            &FitOptions::default(),
        )
        .unwrap();
        assert_eq!(r.best, None);
        assert!(r.diagnostic.is_some());
    }

    #[test]
    fn ranking_ignores_shared_constant() {
        let t = datasets::retinitis_pigmentosa();
        let c = crate::models::log_likelihood_constant(&t);
        let mut with = Vec::new();
        let mut without = Vec::new();
        for m in ModelKind::CANDIDATES {
            let f = match m {
                ModelKind::Independence => fit_independence(&t).unwrap(),
                _ => fit(m, &t, &FitOptions::default()).unwrap(),
            };
            let a = aic(&f, &t).unwrap();
            without.push((a, m));
            with.push((a - 2.0 * c, m));
        }
        without.sort_by(|a, b| a.0.total_cmp(&b.0));
        with.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(
            with.iter().map(|x| x.1).collect::<Vec<_>>(),
            without.iter().map(|x| x.1).collect::<Vec<_>>()
        );
    }
}
