//! Parametric models for the intra-subject correlation.
//!
//! Every model maps a group's marginal response probability `pi` and the
//! shared nuisance parameter `kappa` to the trinomial cell probabilities
//! `(p0, p1, p2)` of a bilateral subject:
//!
//! ```text
//! p2 = pi [pi + (1 - pi) Corr]
//! p1 = 2 pi (1 - pi) (1 - Corr)
//! p0 = (1 - pi) [1 - pi + pi Corr]
//! ```
//!
//! | model    | kappa | Corr                       |
//! |----------|-------|----------------------------|
//! | Rosner   | R     | (R - 1) pi / (1 - pi)      |
//! | Donner   | rho   | rho                        |
//! | Dallal   | gamma | (gamma - pi) / (1 - pi)    |
//! | Clayton  | theta | via C(1-pi, 1-pi), theta>0 |
//!
//! Unilateral subjects are Bernoulli(pi). The log-likelihood omits the
//! multinomial-coefficient constant; see [`log_likelihood_constant`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::data::{FrequencyTable, GroupCounts};
use crate::error::{Error, Result};

/// Upper cap on the Clayton dependence parameter.
pub const CLAYTON_THETA_MAX: f64 = 500.0;

/// Slack allowed on cell probabilities before they count as invalid.
pub const PROB_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Independence,
    Rosner,
    Donner,
    Dallal,
    #[serde(rename = "clayton")]
    ClaytonCopula,
    Saturated,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Independence,
        ModelKind::Rosner,
        ModelKind::Donner,
        ModelKind::Dallal,
        ModelKind::ClaytonCopula,
        ModelKind::Saturated,
    ];

    /// The five candidate models compared during selection.
    pub const CANDIDATES: [ModelKind; 5] = [
        ModelKind::Independence,
        ModelKind::Rosner,
        ModelKind::Donner,
        ModelKind::Dallal,
        ModelKind::ClaytonCopula,
    ];

    /// The four models with one nuisance parameter.
    pub const NUISANCE: [ModelKind; 4] = [
        ModelKind::Rosner,
        ModelKind::Donner,
        ModelKind::Dallal,
        ModelKind::ClaytonCopula,
    ];

    pub fn has_nuisance(self) -> bool {
        !matches!(self, ModelKind::Independence | ModelKind::Saturated)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Independence => "independence",
            ModelKind::Rosner => "rosner",
            ModelKind::Donner => "donner",
            ModelKind::Dallal => "dallal",
            ModelKind::ClaytonCopula => "clayton",
            ModelKind::Saturated => "saturated",
        }
    }

    /// Symbol of the nuisance parameter, if any.
    pub fn nuisance_symbol(self) -> Option<&'static str> {
        match self {
            ModelKind::Rosner => Some("R"),
            ModelKind::Donner => Some("rho"),
            ModelKind::Dallal => Some("gamma"),
            ModelKind::ClaytonCopula => Some("theta"),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "independence" | "ind" => Ok(ModelKind::Independence),
            "rosner" | "r" => Ok(ModelKind::Rosner),
            "donner" | "rho" => Ok(ModelKind::Donner),
            "dallal" | "gamma" => Ok(ModelKind::Dallal),
            "clayton" | "copula" | "clayton_copula" | "claytoncopula" => Ok(ModelKind::ClaytonCopula),
            "saturated" => Ok(ModelKind::Saturated),
            other => Err(Error::InvalidConfig(format!("unknown model `{other}`"))),
        }
    }
}

/// Cell probabilities of one bilateral subject.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointProbs {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
}

impl JointProbs {
    pub fn as_array(&self) -> [f64; 3] {
        [self.p0, self.p1, self.p2]
    }

    pub(crate) fn undefined() -> Self {
        Self {
            p0: f64::NAN,
            p1: f64::NAN,
            p2: f64::NAN,
        }
    }
}

/// Model parameters: marginal probabilities, nuisance value, and (for the
/// saturated model only) free per-group cell probabilities.
///
/// For the saturated model, entries for a group with no bilateral (or no
/// unilateral) subjects are NaN, as that part has no estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub pis: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<JointProbs>>,
}

impl ParamVector {
    pub fn new(pis: Vec<f64>, kappa: Option<f64>) -> Self {
        Self {
            pis,
            kappa,
            cells: None,
        }
    }

    pub fn saturated(pis: Vec<f64>, cells: Vec<JointProbs>) -> Self {
        Self {
            pis,
            kappa: None,
            cells: Some(cells),
        }
    }

    pub fn g(&self) -> usize {
        self.pis.len()
    }

    /// Cell probabilities used for group `i` under `model`.
    pub fn group_probs(&self, model: ModelKind, i: usize) -> Result<JointProbs> {
        match model {
            ModelKind::Saturated => self
                .cells
                .as_ref()
                .and_then(|c| c.get(i).copied())
                .ok_or_else(|| Error::InvalidParams("saturated parameters lack cells".into())),
            _ => joint_probs(model, self.pis[i], self.kappa.unwrap_or(f64::NAN)),
        }
    }

    fn kappa_for(&self, model: ModelKind) -> Result<f64> {
        match (model.has_nuisance(), self.kappa) {
            (true, Some(k)) => Ok(k),
            (true, None) => Err(Error::InvalidParams(format!("{model} needs a nuisance value"))),
            (false, _) => Ok(f64::NAN),
        }
    }
}

/// Admissible region of the nuisance parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuisanceInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl NuisanceInterval {
    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    /// Nearest point at least `eps` inside the interval, or the midpoint
    /// when the interval is narrower than `2 eps`.
    pub fn clamp_interior(&self, x: f64, eps: f64) -> f64 {
        if self.hi - self.lo <= 2.0 * eps {
            return self.midpoint();
        }
        x.clamp(self.lo + eps, self.hi - eps)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Cell probabilities under `model` at marginal `pi` and nuisance `kappa`.
pub fn joint_probs(model: ModelKind, pi: f64, kappa: f64) -> Result<JointProbs> {
    if !(0.0..=1.0).contains(&pi) {
        return Err(Error::InvalidProbability(pi));
    }
    let out_of_domain = || Error::OutOfDomain { model, kappa };
    match model {
        ModelKind::Saturated => {
            return Err(Error::InvalidParams(
                "saturated cell probabilities are free parameters".into(),
            ))
        }
        ModelKind::Independence => {}
        ModelKind::Rosner if !(kappa > 0.0) => return Err(out_of_domain()),
        ModelKind::Donner if !(-1.0..=1.0).contains(&kappa) => return Err(out_of_domain()),
        ModelKind::Dallal if !(0.0..=1.0).contains(&kappa) => return Err(out_of_domain()),
        ModelKind::ClaytonCopula if !(kappa > 0.0 && kappa <= CLAYTON_THETA_MAX) => return Err(out_of_domain()),
        _ => {}
    }
    let [p0, p1, p2] = raw_probs(model, pi, kappa);
    let ok = |p: f64| (-PROB_SLACK..=1.0 + PROB_SLACK).contains(&p);
    if !(ok(p0) && ok(p1) && ok(p2)) {
        return Err(out_of_domain());
    }
    Ok(JointProbs {
        p0: p0.clamp(0.0, 1.0),
        p1: p1.clamp(0.0, 1.0),
        p2: p2.clamp(0.0, 1.0),
    })
}

/// Unchecked cell probabilities; may fall outside [0, 1].
pub(crate) fn raw_probs(model: ModelKind, pi: f64, kappa: f64) -> [f64; 3] {
    let u = 1.0 - pi;
    match model {
        ModelKind::Independence | ModelKind::Saturated => [u * u, 2.0 * pi * u, pi * pi],
        ModelKind::Rosner => {
            let p2 = kappa * pi * pi;
            let p1 = 2.0 * pi * (1.0 - kappa * pi);
            [1.0 - 2.0 * pi + p2, p1, p2]
        }
        ModelKind::Donner => [
            u * (1.0 - (1.0 - kappa) * pi),
            2.0 * pi * u * (1.0 - kappa),
            pi * (kappa * u + pi),
        ],
        ModelKind::Dallal => [1.0 - (2.0 - kappa) * pi, 2.0 * pi * (1.0 - kappa), kappa * pi],
        ModelKind::ClaytonCopula => {
            if pi <= 0.0 {
                return [1.0, 0.0, 0.0];
            }
            if pi >= 1.0 {
                return [0.0, 0.0, 1.0];
            }
            let t = ClaytonTerms::new(pi, kappa);
            [t.c, 2.0 * t.u_minus_c, t.p2]
        }
    }
}

/// Clayton copula evaluated on the diagonal `C(u, u)` with `u = 1 - pi`.
///
/// With `x = theta ln u` and `s = ln(2 - e^x)`, the copula is
/// `C = u exp(-s / theta)`, which stays finite for large theta. `a` and
/// `h2` are the first two theta-derivatives of `ln C`.
#[derive(Debug, Clone, Copy)]
struct ClaytonTerms {
    u: f64,
    c: f64,
    u_minus_c: f64,
    p2: f64,
    /// d C / d u
    dc_du: f64,
    /// d ln C / d theta
    a: f64,
    /// d^2 ln C / d theta^2
    h2: f64,
}

/// Series coefficients of `a / ln(u)^2` in `x`.
const CLAYTON_A_SERIES: [f64; 9] = [
    1.0,
    2.0,
    13.0 / 4.0,
    5.0,
    541.0 / 72.0,
    223.0 / 20.0,
    47293.0 / 2880.0,
    36389.0 / 1512.0,
    7087261.0 / 201600.0,
];

/// Series coefficients of `h2 / ln(u)^3` in `x`.
const CLAYTON_H2_SERIES: [f64; 9] = [
    2.0,
    13.0 / 2.0,
    15.0,
    541.0 / 18.0,
    223.0 / 4.0,
    47293.0 / 480.0,
    36389.0 / 216.0,
    7087261.0 / 25200.0,
    3098411.0 / 6720.0,
];

const CLAYTON_SERIES_CUTOFF: f64 = 0.02;

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

impl ClaytonTerms {
    fn new(pi: f64, theta: f64) -> Self {
        let u = 1.0 - pi;
        let ln_u = (-pi).ln_1p();
        let x = theta * ln_u;
        let e = x.exp();
        let s = (-x.exp_m1()).ln_1p();
        let ratio_log = -s / theta;
        let c = u * ratio_log.exp();
        let u_minus_c = -u * ratio_log.exp_m1();
        let p2 = pi - u_minus_c;
        let dc_du = 2.0 * ((1.0 + theta) * ratio_log).exp();
        let (a, h2) = if x.abs() < CLAYTON_SERIES_CUTOFF {
            (
                ln_u * ln_u * horner(&CLAYTON_A_SERIES, x),
                ln_u * ln_u * ln_u * horner(&CLAYTON_H2_SERIES, x),
            )
        } else {
            let bracket = -x + s + 2.0 * x / (2.0 - e);
            let a = bracket / (theta * theta);
            let h2 = -2.0 * bracket / (theta * theta * theta) + 2.0 * ln_u * ln_u * e / (theta * (2.0 - e) * (2.0 - e));
            (a, h2)
        };
        Self {
            u,
            c,
            u_minus_c,
            p2,
            dc_du,
            a,
            h2,
        }
    }

    fn ln_probs(&self, theta: f64) -> [f64; 3] {
        let ln_c = self.u.ln() - (2.0 - (theta * self.u.ln()).exp()).ln() / theta;
        [ln_c, (2.0 * self.u_minus_c).ln(), self.p2.ln()]
    }
}

/// Implied intra-subject correlation.
pub fn correlation(model: ModelKind, pi: f64, kappa: f64) -> Result<f64> {
    let jp = joint_probs(model, pi, kappa)?;
    let var = pi * (1.0 - pi);
    Ok(match model {
        ModelKind::Independence => 0.0,
        ModelKind::Rosner => (kappa - 1.0) * pi / (1.0 - pi),
        ModelKind::Donner => kappa,
        ModelKind::Dallal => (kappa - pi) / (1.0 - pi),
        ModelKind::ClaytonCopula => {
            let u = 1.0 - pi;
            (jp.p0 - u * u) / var
        }
        ModelKind::Saturated => unreachable!("rejected by joint_probs"),
    })
}

/// Admissible nuisance region given the current marginals.
pub fn nuisance_domain(model: ModelKind, pis: &[f64]) -> Result<NuisanceInterval> {
    if !model.has_nuisance() {
        return Err(Error::NoNuisance(model));
    }
    if let Some(&bad) = pis.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::InvalidProbability(bad));
    }
    let a = pis.iter().copied().fold(f64::MIN, f64::max);
    Ok(match model {
        ModelKind::Rosner => {
            if a <= 0.5 {
                NuisanceInterval {
                    lo: 0.0,
                    hi: 1.0 / a,
                    lo_closed: false,
                    hi_closed: true,
                }
            } else {
                NuisanceInterval {
                    lo: (2.0 - 1.0 / a) / a,
                    hi: 1.0 / a,
                    lo_closed: true,
                    hi_closed: true,
                }
            }
        }
        ModelKind::Donner => {
            let lo = pis
                .iter()
                .map(|&p| (-(1.0 - p) / p).max(-p / (1.0 - p)))
                .fold(-1.0, f64::max);
            NuisanceInterval {
                lo,
                hi: 1.0,
                lo_closed: true,
                hi_closed: true,
            }
        }
        ModelKind::Dallal => NuisanceInterval {
            lo: if a <= 0.5 { 0.0 } else { 2.0 - 1.0 / a },
            hi: 1.0,
            lo_closed: true,
            hi_closed: true,
        },
        ModelKind::ClaytonCopula => NuisanceInterval {
            lo: 0.0,
            hi: CLAYTON_THETA_MAX,
            lo_closed: false,
            hi_closed: true,
        },
        ModelKind::Independence | ModelKind::Saturated => unreachable!(),
    })
}

/// `count * ln(p)` with the `0 ln 0 = 0` convention.
#[inline]
pub(crate) fn xlogy(count: f64, p: f64) -> f64 {
    if count == 0.0 {
        0.0
    } else if p <= 0.0 {
        f64::NEG_INFINITY
    } else {
        count * p.ln()
    }
}

/// Log-likelihood contribution of one group; no constant term.
pub fn group_log_likelihood(model: ModelKind, pi: f64, kappa: f64, gc: &GroupCounts) -> f64 {
    let [m0, m1, m2, n0, n1] = gc.cells().map(f64::from);
    let bilateral = if gc.m_plus() == 0 {
        0.0
    } else if model == ModelKind::ClaytonCopula && pi > 0.0 && pi < 1.0 {
        let lp = ClaytonTerms::new(pi, kappa).ln_probs(kappa);
        let term = |m: f64, l: f64| if m == 0.0 { 0.0 } else { m * l };
        term(m0, lp[0]) + term(m1, lp[1]) + term(m2, lp[2])
    } else {
        let [p0, p1, p2] = raw_probs(model, pi, kappa);
        xlogy(m0, p0) + xlogy(m1, p1) + xlogy(m2, p2)
    };
    let bilateral = if bilateral.is_nan() {
        f64::NEG_INFINITY
    } else {
        bilateral
    };
    bilateral + xlogy(n0, 1.0 - pi) + xlogy(n1, pi)
}

/// Log-likelihood of the table, without the multinomial constant.
///
/// Returns `-inf` when a positive count sits on a zero-probability cell.
pub fn log_likelihood(model: ModelKind, params: &ParamVector, table: &FrequencyTable) -> Result<f64> {
    if params.g() != table.g() {
        return Err(Error::GroupMismatch {
            expected: table.g(),
            got: params.g(),
        });
    }
    if model == ModelKind::Saturated {
        let cells = params
            .cells
            .as_ref()
            .ok_or_else(|| Error::InvalidParams("saturated parameters lack cells".into()))?;
        let mut total = 0.0;
        for (i, gc) in table.groups().iter().enumerate() {
            let [m0, m1, m2, n0, n1] = gc.cells().map(f64::from);
            if gc.m_plus() > 0 {
                let c = cells[i];
                total += xlogy(m0, c.p0) + xlogy(m1, c.p1) + xlogy(m2, c.p2);
            }
            if gc.n_plus() > 0 {
                total += xlogy(n0, 1.0 - params.pis[i]) + xlogy(n1, params.pis[i]);
            }
        }
        return Ok(total);
    }
    let kappa = params.kappa_for(model)?;
    Ok(table
        .groups()
        .iter()
        .zip(&params.pis)
        .map(|(gc, &pi)| group_log_likelihood(model, pi, kappa, gc))
        .sum())
}

/// Sum of log multinomial/binomial coefficients of the table.
pub fn log_likelihood_constant(table: &FrequencyTable) -> f64 {
    let lf = |n: u32| ln_factorial(u64::from(n));
    table
        .groups()
        .iter()
        .map(|gc| lf(gc.m_plus()) - lf(gc.m0) - lf(gc.m1) - lf(gc.m2) + lf(gc.n_plus()) - lf(gc.n0) - lf(gc.n1))
        .sum()
}

/// Per-cell log-derivatives of `(p0, p1, p2)` for one group.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CellDerivatives {
    /// d ln p_r / d pi
    pub dpi: [f64; 3],
    /// d ln p_r / d kappa
    pub dk: [f64; 3],
    /// d^2 ln p_r / d kappa^2
    pub dkk: [f64; 3],
}

pub(crate) fn cell_derivatives(model: ModelKind, pi: f64, kappa: f64) -> CellDerivatives {
    let u = 1.0 - pi;
    match model {
        ModelKind::Independence | ModelKind::Saturated => CellDerivatives {
            dpi: [-2.0 / u, (1.0 - 2.0 * pi) / (pi * u), 2.0 / pi],
            dk: [0.0; 3],
            dkk: [0.0; 3],
        },
        ModelKind::Rosner => {
            let r = kappa;
            let p0 = 1.0 - 2.0 * pi + r * pi * pi;
            let q1 = 1.0 - r * pi;
            CellDerivatives {
                dpi: [(2.0 * r * pi - 2.0) / p0, (1.0 - 2.0 * r * pi) / (pi * q1), 2.0 / pi],
                dk: [pi * pi / p0, -pi / q1, 1.0 / r],
                dkk: [-(pi * pi / p0).powi(2), -(pi / q1).powi(2), -1.0 / (r * r)],
            }
        }
        ModelKind::Donner => {
            let rho = kappa;
            let q0 = 1.0 - (1.0 - rho) * pi;
            let q2 = rho * u + pi;
            CellDerivatives {
                dpi: [
                    (2.0 * (1.0 - rho) * pi + rho - 2.0) / (u * q0),
                    (1.0 - 2.0 * pi) / (pi * u),
                    (2.0 * (1.0 - rho) * pi + rho) / (pi * q2),
                ],
                dk: [pi / q0, -1.0 / (1.0 - rho), u / q2],
                dkk: [
                    -(pi / q0).powi(2),
                    -1.0 / ((1.0 - rho) * (1.0 - rho)),
                    -(u / q2).powi(2),
                ],
            }
        }
        ModelKind::Dallal => {
            let gamma = kappa;
            let q0 = 1.0 - (2.0 - gamma) * pi;
            CellDerivatives {
                dpi: [-(2.0 - gamma) / q0, 1.0 / pi, 1.0 / pi],
                dk: [pi / q0, -1.0 / (1.0 - gamma), 1.0 / gamma],
                dkk: [
                    -(pi / q0).powi(2),
                    -1.0 / ((1.0 - gamma) * (1.0 - gamma)),
                    -1.0 / (gamma * gamma),
                ],
            }
        }
        ModelKind::ClaytonCopula => {
            let t = ClaytonTerms::new(pi, kappa);
            let e = (kappa * t.u.ln()).exp();
            let dc = t.c * t.a;
            let dcc = t.c * (t.h2 + t.a * t.a);
            CellDerivatives {
                dpi: [
                    -2.0 / (t.u * (2.0 - e)),
                    (t.dc_du - 1.0) / t.u_minus_c,
                    (2.0 - t.dc_du) / t.p2,
                ],
                dk: [t.a, -dc / t.u_minus_c, dc / t.p2],
                dkk: [
                    t.h2,
                    -dcc / t.u_minus_c - (dc / t.u_minus_c).powi(2),
                    dcc / t.p2 - (dc / t.p2).powi(2),
                ],
            }
        }
    }
}

/// `sum count * term`, skipping zero counts; errors on a singular term.
fn weighted(counts: [f64; 3], terms: [f64; 3]) -> Result<f64> {
    let mut acc = 0.0;
    for (c, t) in counts.into_iter().zip(terms) {
        if c != 0.0 {
            if !t.is_finite() {
                return Err(Error::SingularPoint);
            }
            acc += c * t;
        }
    }
    Ok(acc)
}

fn check_interior(pi: f64) -> Result<()> {
    if pi > 0.0 && pi < 1.0 {
        Ok(())
    } else {
        Err(Error::SingularPoint)
    }
}

/// Score of one group's contribution with respect to its marginal.
pub(crate) fn group_score_pi(model: ModelKind, pi: f64, kappa: f64, gc: &GroupCounts) -> Result<f64> {
    check_interior(pi)?;
    let d = cell_derivatives(model, pi, kappa);
    let [m0, m1, m2, n0, n1] = gc.cells().map(f64::from);
    Ok(weighted([m0, m1, m2], d.dpi)? - n0 / (1.0 - pi) + n1 / pi)
}

/// d l / d pi_i.
pub fn score_pi(model: ModelKind, params: &ParamVector, table: &FrequencyTable, i: usize) -> Result<f64> {
    if model == ModelKind::Saturated {
        return Err(Error::InvalidParams("saturated model has free cells".into()));
    }
    let kappa = params.kappa_for(model)?;
    group_score_pi(model, params.pis[i], kappa, table.group(i))
}

/// d l / d kappa.
pub fn score_kappa(model: ModelKind, params: &ParamVector, table: &FrequencyTable) -> Result<f64> {
    kappa_derivative(model, params, table, |d| d.dk)
}

/// d^2 l / d kappa^2.
pub fn d2_kappa(model: ModelKind, params: &ParamVector, table: &FrequencyTable) -> Result<f64> {
    kappa_derivative(model, params, table, |d| d.dkk)
}

fn kappa_derivative(
    model: ModelKind,
    params: &ParamVector,
    table: &FrequencyTable,
    pick: impl Fn(&CellDerivatives) -> [f64; 3],
) -> Result<f64> {
    if !model.has_nuisance() {
        return Err(Error::NoNuisance(model));
    }
    let kappa = params.kappa_for(model)?;
    let mut total = 0.0;
    for (gc, &pi) in table.groups().iter().zip(&params.pis) {
        if gc.m_plus() == 0 {
            continue;
        }
        if !(0.0..=1.0).contains(&pi) {
            return Err(Error::InvalidProbability(pi));
        }
        let d = cell_derivatives(model, pi, kappa);
        total += weighted(gc.bilateral().map(f64::from), pick(&d))?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn clamp_interior_on_a_sliver() {
        let d = NuisanceInterval {
            lo: 1.0 - 1e-12,
            hi: 1.0,
            lo_closed: true,
            hi_closed: true,
        };
        assert_eq!(d.clamp_interior(0.3, 1e-9), d.midpoint());
        let wide = NuisanceInterval { lo: 0.0, ..d };
        assert_eq!(wide.clamp_interior(2.0, 1e-9), 1.0 - 1e-9);
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn donner_independent_and_perfect() {
        let jp = joint_probs(ModelKind::Donner, 0.5, 0.0).unwrap();
        assert!(close(jp.p0, 0.25, 1e-15) && close(jp.p1, 0.5, 1e-15) && close(jp.p2, 0.25, 1e-15));
        let jp = joint_probs(ModelKind::Donner, 0.5, 1.0).unwrap();
        assert!(close(jp.p0, 0.5, 1e-15) && close(jp.p1, 0.0, 1e-15) && close(jp.p2, 0.5, 1e-15));
    }

    #[test]
    fn clayton_theta_one_at_half() {
        let jp = joint_probs(ModelKind::ClaytonCopula, 0.5, 1.0).unwrap();
        for p in jp.as_array() {
            assert!(close(p, 1.0 / 3.0, 1e-14), "{jp:?}");
        }
    }

    #[test]
    fn rosner_substitution() {
        let jp = joint_probs(ModelKind::Rosner, 0.4, 1.5).unwrap();
        assert!(close(jp.p0, 0.44, 1e-14) && close(jp.p1, 0.32, 1e-14) && close(jp.p2, 0.24, 1e-14));
    }

    #[test]
    fn joint_probs_rejects_out_of_domain() {
        assert!(matches!(
            joint_probs(ModelKind::Donner, 0.5, 1.2),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(joint_probs(ModelKind::Rosner, 0.6, 2.0).is_err());
        assert!(joint_probs(ModelKind::ClaytonCopula, 0.5, 0.0).is_err());
        assert!(joint_probs(ModelKind::Dallal, 1.2, 0.5).is_err());
    }

    #[test]
    fn correlation_examples() {
        assert_eq!(correlation(ModelKind::Rosner, 0.3, 1.0).unwrap(), 0.0);
        assert_eq!(correlation(ModelKind::Dallal, 0.3, 0.3).unwrap(), 0.0);
        assert_eq!(correlation(ModelKind::Donner, 0.7, 0.42).unwrap(), 0.42);
    }

    #[test]
    fn domain_examples() {
        let d = nuisance_domain(ModelKind::Rosner, &[0.3, 0.5]).unwrap();
        assert_eq!((d.lo, d.hi, d.lo_closed, d.hi_closed), (0.0, 2.0, false, true));
        let d = nuisance_domain(ModelKind::Dallal, &[0.2, 0.8]).unwrap();
        assert!(close(d.lo, 0.75, 1e-15) && d.hi == 1.0);
        let d = nuisance_domain(ModelKind::Donner, &[0.5, 0.5]).unwrap();
        assert_eq!((d.lo, d.hi), (-1.0, 1.0));
        let d = nuisance_domain(ModelKind::Donner, &[0.2, 0.5]).unwrap();
        assert!(close(d.lo, -0.25, 1e-15));
        assert_eq!(
            nuisance_domain(ModelKind::Independence, &[0.5]).unwrap_err(),
            Error::NoNuisance(ModelKind::Independence)
        );
        assert!(nuisance_domain(ModelKind::Saturated, &[0.5]).is_err());
    }

    #[test]
    fn saturated_loglik_single_group() {
        let t = FrequencyTable::new(vec![GroupCounts::new(21, 9, 14, 38, 24)]).unwrap();
        let params = ParamVector::saturated(
            vec![24.0 / 62.0],
            vec![JointProbs {
                p0: 21.0 / 44.0,
                p1: 9.0 / 44.0,
                p2: 14.0 / 44.0,
            }],
        );
        let l = log_likelihood(ModelKind::Saturated, &params, &t).unwrap();
        // 21 ln(21/44) + 9 ln(9/44) + 14 ln(14/44) + 38 ln(38/62) + 24 ln(24/62), evaluated with mpmath
        assert!(close(l, -87.228_314_764_414_34, 1e-9), "{l}");
    }

    #[test]
    fn independence_unilateral_only() {
        let t = FrequencyTable::new(vec![GroupCounts::new(0, 0, 0, 1, 1)]).unwrap();
        let l = log_likelihood(ModelKind::Independence, &ParamVector::new(vec![0.5], None), &t).unwrap();
        assert!(close(l, -1.386_294_361_119_890_6, 1e-12));
    }

    #[test]
    fn zero_group_contributes_nothing() {
        let gc = GroupCounts::default();
        for model in ModelKind::NUISANCE {
            let k = match model {
                ModelKind::Rosner => 1.2,
                ModelKind::Donner => 0.3,
                ModelKind::Dallal => 0.5,
                _ => 2.0,
            };
            assert_eq!(group_log_likelihood(model, 0.3, k, &gc), 0.0);
        }
    }

    #[test]
    fn clayton_d2_symbolic_value() {
        // d^2/dtheta^2 of ln p0 + ln p1 + ln p2 at pi = 1/2, theta = 1 (sympy).
        let t = FrequencyTable::new(vec![GroupCounts::new(1, 1, 1, 0, 0)]).unwrap();
        let p = ParamVector::new(vec![0.5], Some(1.0));
        let v = d2_kappa(ModelKind::ClaytonCopula, &p, &t).unwrap();
        assert!(close(v, -0.182_525_746_635_363_28, 1e-12), "{v}");
    }

    #[test]
    fn dallal_kappa_score_positive_without_discordant_pairs() {
        let t = FrequencyTable::new(vec![GroupCounts::new(5, 0, 7, 3, 2), GroupCounts::new(2, 0, 9, 1, 1)]).unwrap();
        for k in 1..20 {
            let gamma = k as f64 / 20.0;
            let p = ParamVector::new(vec![0.3, 0.4], Some(gamma));
            assert!(score_kappa(ModelKind::Dallal, &p, &t).unwrap() > 0.0);
            assert!(d2_kappa(ModelKind::Dallal, &p, &t).unwrap() < 0.0);
        }
    }

    #[test]
    fn singular_point_is_reported() {
        let t = FrequencyTable::new(vec![GroupCounts::new(1, 1, 1, 0, 0)]).unwrap();
        // p1 = 0 at R = 1/pi
        let p = ParamVector::new(vec![0.5], Some(2.0));
        assert_eq!(
            score_kappa(ModelKind::Rosner, &p, &t).unwrap_err(),
            Error::SingularPoint
        );
        let p = ParamVector::new(vec![0.0], Some(1.0));
        assert_eq!(
            score_pi(ModelKind::Rosner, &p, &t, 0).unwrap_err(),
            Error::SingularPoint
        );
    }

    #[test]
    fn clayton_large_theta_is_finite() {
        let jp = joint_probs(ModelKind::ClaytonCopula, 0.3, CLAYTON_THETA_MAX).unwrap();
        assert!(close(jp.p0, 0.7, 1e-2) && jp.p1 > 0.0 && jp.p1 < 0.01);
        let d = cell_derivatives(ModelKind::ClaytonCopula, 0.3, CLAYTON_THETA_MAX);
        assert!(d.dpi.iter().chain(&d.dk).chain(&d.dkk).all(|v| v.is_finite()));
    }

    #[test]
    fn clayton_series_branch_is_continuous() {
        // Straddle the switch between closed form and series.
        let ln_u = (0.6f64).ln();
        let theta_at = |x: f64| x / ln_u;
        let lo = ClaytonTerms::new(0.4, theta_at(-CLAYTON_SERIES_CUTOFF * 0.999_999_9));
        let hi = ClaytonTerms::new(0.4, theta_at(-CLAYTON_SERIES_CUTOFF * 1.000_000_1));
        assert!((lo.a - hi.a).abs() < 1e-8 * lo.a.abs());
        assert!((lo.h2 - hi.h2).abs() < 1e-7 * lo.h2.abs());
    }

    fn model_kappa(model: ModelKind, pi: f64, frac: f64) -> f64 {
        let d = nuisance_domain(model, &[pi]).unwrap();
        let hi = if model == ModelKind::ClaytonCopula { 20.0 } else { d.hi };
        d.lo + (hi - d.lo) * frac
    }

    proptest! {
        #[test]
        fn probabilities_sum_to_one(pi in 0.01f64..0.99, frac in 0.0f64..1.0, m in 0usize..5) {
            let model = [ModelKind::Independence, ModelKind::Rosner, ModelKind::Donner,
                         ModelKind::Dallal, ModelKind::ClaytonCopula][m];
            let kappa = if model.has_nuisance() { model_kappa(model, pi, frac.clamp(0.001, 0.999)) } else { 0.0 };
            let jp = joint_probs(model, pi, kappa).unwrap();
            prop_assert!((jp.p0 + jp.p1 + jp.p2 - 1.0).abs() < 1e-12);
            let corr = correlation(model, pi, kappa).unwrap();
            prop_assert!((jp.p2 - pi * (pi + (1.0 - pi) * corr)).abs() < 1e-10);
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&corr));
        }
    }
}
