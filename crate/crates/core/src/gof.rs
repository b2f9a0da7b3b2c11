//! Goodness-of-fit statistics and their asymptotic reference.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;
use statrs::function::gamma::gamma_ur;

use crate::data::FrequencyTable;
use crate::error::{Error, Result};
use crate::estimation::{fit, FitOptions, FitResult};
use crate::models::{xlogy, ModelKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GofMethod {
    G2,
    X2,
    X2adj,
    B1,
    B2,
    B3,
}

impl GofMethod {
    /// All six methods in reporting order.
    pub const ALL: [GofMethod; 6] = [
        GofMethod::G2,
        GofMethod::X2,
        GofMethod::X2adj,
        GofMethod::B1,
        GofMethod::B2,
        GofMethod::B3,
    ];

    pub fn is_bootstrap(self) -> bool {
        matches!(self, GofMethod::B1 | GofMethod::B2 | GofMethod::B3)
    }

    /// The asymptotic statistic a bootstrap method orders by (none for B3).
    pub fn ordering_statistic(self) -> Option<GofMethod> {
        match self {
            GofMethod::G2 | GofMethod::B1 => Some(GofMethod::G2),
            GofMethod::X2 | GofMethod::B2 => Some(GofMethod::X2),
            GofMethod::X2adj => Some(GofMethod::X2adj),
            GofMethod::B3 => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GofMethod::G2 => "G2",
            GofMethod::X2 => "X2",
            GofMethod::X2adj => "X2adj",
            GofMethod::B1 => "B1",
            GofMethod::B2 => "B2",
            GofMethod::B3 => "B3",
        }
    }

    /// Parses a comma-separated list; `all` expands to [`GofMethod::ALL`].
    /// Duplicates are dropped, first occurrence wins.
    pub fn parse_list(s: &str) -> Result<Vec<GofMethod>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let items: Vec<GofMethod> = if part.eq_ignore_ascii_case("all") {
                GofMethod::ALL.to_vec()
            } else {
                vec![part.parse()?]
            };
            for m in items {
                if !out.contains(&m) {
                    out.push(m);
                }
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidConfig("empty method list".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for GofMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GofMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "g2" => Ok(GofMethod::G2),
            "x2" => Ok(GofMethod::X2),
            "x2adj" | "x2_adj" => Ok(GofMethod::X2adj),
            "b1" => Ok(GofMethod::B1),
            "b2" => Ok(GofMethod::B2),
            "b3" => Ok(GofMethod::B3),
            other => Err(Error::InvalidConfig(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub method: GofMethod,
    /// The test statistic; for B3 the observed table probability.
    pub statistic: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dof: Option<i64>,
    pub p_value: f64,
    /// Replicates that entered the p-value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_boot: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_extreme: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_replicates: Option<usize>,
    /// Replicates exactly equal to the observed value (not counted as extreme).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ties: Option<usize>,
    /// The fitted nuisance value sits on its domain boundary, so the
    /// chi-square reference is only approximate.
    #[serde(default)]
    pub boundary: bool,
}

/// Expected counts `(m+ p0, m+ p1, m+ p2, n+ (1-pi), n+ pi)` per group.
pub fn expected_counts(fit: &FitResult, table: &FrequencyTable) -> Result<Vec<[f64; 5]>> {
    if fit.params.g() != table.g() {
        return Err(Error::GroupMismatch {
            expected: table.g(),
            got: fit.params.g(),
        });
    }
    if fit.model == ModelKind::Saturated {
        return Ok(table.groups().iter().map(|gc| gc.cells().map(f64::from)).collect());
    }
    table
        .groups()
        .iter()
        .enumerate()
        .map(|(i, gc)| {
            let mp = f64::from(gc.m_plus());
            let np = f64::from(gc.n_plus());
            let bilateral = if gc.m_plus() > 0 {
                fit.params.group_probs(fit.model, i)?.as_array().map(|p| mp * p)
            } else {
                [0.0; 3]
            };
            let pi = fit.params.pis[i];
            let unilateral = if gc.n_plus() > 0 {
                [np * (1.0 - pi), np * pi]
            } else {
                [0.0; 2]
            };
            Ok([bilateral[0], bilateral[1], bilateral[2], unilateral[0], unilateral[1]])
        })
        .collect()
}

/// G², X² or adjusted X² summed over every cell of every group.
pub fn gof_statistic(method: GofMethod, observed: &FrequencyTable, expected: &[[f64; 5]]) -> Result<f64> {
    if expected.len() != observed.g() {
        return Err(Error::GroupMismatch {
            expected: observed.g(),
            got: expected.len(),
        });
    }
    if !matches!(method, GofMethod::G2 | GofMethod::X2 | GofMethod::X2adj) {
        return Err(Error::WrongMethod(method.to_string()));
    }
    let mut total = 0.0;
    for (gc, exp) in observed.groups().iter().zip(expected) {
        for (o, &e) in gc.cells().map(f64::from).into_iter().zip(exp) {
            if e == 0.0 {
                if o > 0.0 {
                    return Ok(f64::INFINITY);
                }
                continue;
            }
            total += match method {
                GofMethod::G2 => 2.0 * (xlogy(o, o) - xlogy(o, e)),
                GofMethod::X2 => (o - e) * (o - e) / e,
                GofMethod::X2adj => {
                    let d = (o - e).abs() - 0.5;
                    d * d / e
                }
                _ => unreachable!(),
            };
        }
    }
    // Rounding can leave G² a hair below zero for a perfect fit.
    Ok(total.max(0.0))
}

/// Number of observed cells minus the number of free parameters.
///
/// A group contributes two free cells when it has bilateral subjects and
/// one when it has unilateral subjects; every model except the saturated
/// one is charged `g + 1` parameters.
pub fn degrees_of_freedom(model: ModelKind, table: &FrequencyTable) -> Result<i64> {
    if model == ModelKind::Saturated {
        return Err(Error::DofUndefined(0));
    }
    let cells: i64 = table
        .groups()
        .iter()
        .map(|gc| 2 * i64::from(gc.m_plus() > 0) + i64::from(gc.n_plus() > 0))
        .sum();
    let dof = cells - (table.g() as i64 + 1);
    if dof < 1 {
        return Err(Error::DofUndefined(dof));
    }
    Ok(dof)
}

/// Upper tail of the chi-square distribution.
pub fn chi_square_sf(x: f64, dof: i64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 1.0;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    gamma_ur(dof as f64 / 2.0, x / 2.0)
}

/// Log of the product of multinomial and binomial probabilities of the
/// observed counts under the fitted parameters.
pub fn log_observed_table_probability(fit: &FitResult, table: &FrequencyTable) -> Result<f64> {
    let lf = |n: u32| ln_factorial(u64::from(n));
    let mut total = 0.0;
    for (i, gc) in table.groups().iter().enumerate() {
        let [m0, m1, m2, n0, n1] = gc.cells();
        if gc.m_plus() > 0 {
            let p = fit.params.group_probs(fit.model, i)?;
            total += lf(gc.m_plus()) - lf(m0) - lf(m1) - lf(m2)
                + xlogy(f64::from(m0), p.p0)
                + xlogy(f64::from(m1), p.p1)
                + xlogy(f64::from(m2), p.p2);
        }
        if gc.n_plus() > 0 {
            let pi = fit.params.pis[i];
            total += lf(gc.n_plus()) - lf(n0) - lf(n1) + xlogy(f64::from(n0), 1.0 - pi) + xlogy(f64::from(n1), pi);
        }
    }
    Ok(total)
}

pub fn observed_table_probability(fit: &FitResult, table: &FrequencyTable) -> Result<f64> {
    log_observed_table_probability(fit, table).map(f64::exp)
}

/// Statistic of an already fitted model.
pub(crate) fn fitted_statistic(method: GofMethod, fit: &FitResult, table: &FrequencyTable) -> Result<f64> {
    gof_statistic(method, table, &expected_counts(fit, table)?)
}

/// Asymptotic chi-square test of an already fitted model.
pub fn asymptotic_gof_fitted(method: GofMethod, fit: &FitResult, table: &FrequencyTable) -> Result<GofResult> {
    if method.is_bootstrap() {
        return Err(Error::WrongMethod(method.to_string()));
    }
    let dof = degrees_of_freedom(fit.model, table)?;
    let statistic = fitted_statistic(method, fit, table)?;
    Ok(GofResult {
        method,
        statistic,
        dof: Some(dof),
        p_value: chi_square_sf(statistic, dof),
        n_boot: None,
        n_extreme: None,
        failed_replicates: None,
        ties: None,
        boundary: fit.boundary,
    })
}

pub(crate) fn require_converged(fit: &FitResult) -> Result<()> {
    if fit.converged {
        Ok(())
    } else {
        Err(Error::FitFailed(format!(
            "{} did not converge in {} iterations",
            fit.model, fit.iterations
        )))
    }
}

/// Fits `model` and applies the asymptotic test `method`.
pub fn asymptotic_gof(
    model: ModelKind,
    table: &FrequencyTable,
    method: GofMethod,
    opts: &FitOptions,
) -> Result<GofResult> {
    if method.is_bootstrap() {
        return Err(Error::WrongMethod(method.to_string()));
    }
    degrees_of_freedom(model, table)?;
    let fitted = fit(model, table, opts)?;
    require_converged(&fitted)?;
    asymptotic_gof_fitted(method, &fitted, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::GroupCounts;
    use crate::datasets;
    use crate::estimation::{fit_independence, fit_saturated};
    use crate::models::{JointProbs, ParamVector};

    fn one(m: [u32; 3], n: [u32; 2]) -> FrequencyTable {
        FrequencyTable::new(vec![GroupCounts::new(m[0], m[1], m[2], n[0], n[1])]).unwrap()
    }

    fn saturated_with(table: &FrequencyTable, cells: Vec<JointProbs>, pis: Vec<f64>) -> FitResult {
        let mut f = fit_saturated(table).unwrap();
        f.params = ParamVector::saturated(pis, cells);
        f
    }

    #[test]
    fn method_list_parsing() {
        assert_eq!(GofMethod::parse_list("all").unwrap(), GofMethod::ALL.to_vec());
        assert_eq!(
            GofMethod::parse_list("b3, g2,g2").unwrap(),
            vec![GofMethod::B3, GofMethod::G2]
        );
        assert!(GofMethod::parse_list("g3").is_err());
        assert!(GofMethod::parse_list("").is_err());
    }

    #[test]
    fn independence_expected_counts() {
        let t = one([21, 9, 14], [38, 24]);
        let f = fit_independence(&t).unwrap();
        let e = expected_counts(&f, &t).unwrap()[0];
        let p = 61.0 / 150.0;
        let want = [
            44.0 * (1.0 - p) * (1.0 - p),
            88.0 * p * (1.0 - p),
            44.0 * p * p,
            62.0 * (1.0 - p),
            62.0 * p,
        ];
        for (a, b) in e.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn saturated_fit_has_zero_statistics() {
        let t = datasets::otitis_media();
        let f = fit_saturated(&t).unwrap();
        let e = expected_counts(&f, &t).unwrap();
        assert_eq!(gof_statistic(GofMethod::G2, &t, &e).unwrap().abs(), 0.0);
        assert!(gof_statistic(GofMethod::X2, &t, &e).unwrap().abs() < 1e-24);
        let rp = datasets::retinitis_pigmentosa();
        let e = expected_counts(&fit_saturated(&rp).unwrap(), &rp).unwrap();
        assert_eq!(&e[0][3..], &[0.0, 0.0]);
    }

    #[test]
    fn adjusted_statistic_at_equality() {
        let t = one([2, 3, 5], [0, 0]);
        let e = vec![[2.0, 3.0, 5.0, 0.0, 0.0]];
        let v = gof_statistic(GofMethod::X2adj, &t, &e).unwrap();
        assert!((v - 0.25 * (0.5 + 1.0 / 3.0 + 0.2)).abs() < 1e-15);
    }

    #[test]
    fn single_cell_contribution() {
        let t = one([10, 0, 0], [0, 0]);
        let e = vec![[5.0, 0.0, 0.0, 0.0, 0.0]];
        let v = gof_statistic(GofMethod::G2, &t, &e).unwrap();
        assert!((v - 20.0 * 2f64.ln()).abs() < 1e-12);
        let e = vec![[0.0, 10.0, 0.0, 0.0, 0.0]];
        assert_eq!(gof_statistic(GofMethod::X2, &t, &e).unwrap(), f64::INFINITY);
        assert!(gof_statistic(GofMethod::B1, &t, &e).is_err());
    }

    #[test]
    fn dof_cases() {
        assert_eq!(
            degrees_of_freedom(ModelKind::Rosner, &datasets::otitis_media()).unwrap(),
            3
        );
        assert_eq!(
            degrees_of_freedom(ModelKind::Donner, &datasets::retinitis_pigmentosa()).unwrap(),
            3
        );
        assert_eq!(
            degrees_of_freedom(ModelKind::Independence, &datasets::otitis_media()).unwrap(),
            3
        );
        assert_eq!(
            degrees_of_freedom(ModelKind::Independence, &datasets::myopia()).unwrap(),
            5
        );
        let t = one([1, 1, 1], [0, 0]);
        assert_eq!(
            degrees_of_freedom(ModelKind::Dallal, &t).unwrap_err(),
            Error::DofUndefined(0)
        );
        assert!(degrees_of_freedom(ModelKind::Saturated, &t).is_err());
    }

    #[test]
    fn chi_square_tail() {
        assert_eq!(chi_square_sf(0.0, 3), 1.0);
        assert_eq!(chi_square_sf(f64::INFINITY, 3), 0.0);
        assert!((chi_square_sf(3.841_458_820_694_124, 1) - 0.05).abs() < 1e-12);
        // scipy.stats.chi2.sf(7.0, 3)
        assert!((chi_square_sf(7.0, 3) - 0.071_897_772_496_465_09).abs() < 1e-12);
        assert!(chi_square_sf(5.0, 3) > chi_square_sf(6.0, 3));
    }

    #[test]
    fn table_probability_small_cases() {
        let t = one([2, 0, 0], [0, 0]);
        let f = saturated_with(
            &t,
            vec![JointProbs {
                p0: 1.0,
                p1: 0.0,
                p2: 0.0,
            }],
            vec![f64::NAN],
        );
        assert_eq!(observed_table_probability(&f, &t).unwrap(), 1.0);
        let t = one([1, 1, 0], [0, 0]);
        let f = saturated_with(
            &t,
            vec![JointProbs {
                p0: 0.5,
                p1: 0.5,
                p2: 0.0,
            }],
            vec![f64::NAN],
        );
        assert!((observed_table_probability(&f, &t).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn table_probability_saturated_example() {
        let t = datasets::otitis_media();
        let f = fit_saturated(&t).unwrap();
        let lp = log_observed_table_probability(&f, &t).unwrap();
        // log-gamma evaluation with mpmath
        assert!((lp - (-11.822_391_264_127_29)).abs() < 1e-9, "{lp}");
    }

    #[test]
    fn asymptotic_rejects_bootstrap_methods() {
        let t = datasets::otitis_media();
        assert!(matches!(
            asymptotic_gof(ModelKind::Rosner, &t, GofMethod::B1, &FitOptions::default()),
            Err(Error::WrongMethod(_))
        ));
    }

    #[test]
    fn group_order_does_not_matter() {
        let t = datasets::myopia();
        let mut groups = t.groups().to_vec();
        groups.reverse();
        let r = FrequencyTable::new(groups).unwrap();
        for model in [ModelKind::Rosner, ModelKind::Dallal] {
            let a = asymptotic_gof(model, &t, GofMethod::G2, &FitOptions::default()).unwrap();
            let b = asymptotic_gof(model, &r, GofMethod::G2, &FitOptions::default()).unwrap();
            assert!((a.p_value - b.p_value).abs() < 1e-7);
        }
    }
}
