//! Maximum likelihood fitting.
//!
//! The nuisance models are fitted by alternating two steps until the
//! nuisance estimate moves by less than `tol`:
//!
//! 1. for the current `kappa`, each `pi_i` solves its own normal equation
//!    (a quartic for Rosner, a cubic for Donner, a quadratic for Dallal,
//!    a bracketed scalar root for Clayton);
//! 2. `kappa` takes one damped Newton-Raphson step with the marginals held
//!    fixed.
//!
//! Independence and the saturated model have closed forms.

use serde::{Deserialize, Serialize};

use crate::data::{FrequencyTable, GroupCounts};
use crate::error::{Error, Result};
use crate::models::{
    self, group_log_likelihood, group_score_pi, log_likelihood, log_likelihood_constant, nuisance_domain, raw_probs,
    JointProbs, ModelKind, NuisanceInterval, ParamVector,
};
use crate::poly::Poly;

/// Distance kept from an open (or unusable) domain endpoint.
pub const BOUNDARY_EPS: f64 = 1e-9;

const CLAYTON_PI_EPS: f64 = 1e-10;
const MAX_HALVINGS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Convergence threshold on successive nuisance estimates.
    pub tol: f64,
    pub max_iter: usize,
    #[serde(default)]
    pub kappa_init: Option<f64>,
    #[serde(default)]
    pub pi_init: Option<Vec<f64>>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 500,
            kappa_init: None,
            pi_init: None,
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelKind,
    pub params: ParamVector,
    /// Log-likelihood without the multinomial constant.
    pub loglik: f64,
    /// The multinomial-coefficient constant of the table.
    pub loglik_const: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The nuisance estimate sits on (or next to) a domain endpoint.
    pub boundary: bool,
    /// Marginal updates where two admissible roots tied in likelihood.
    #[serde(default)]
    pub root_ties: usize,
}

/// Per-group admissible range of `pi` for a fixed nuisance value.
fn admissible_pi_range(model: ModelKind, kappa: f64) -> (f64, f64) {
    match model {
        ModelKind::Rosner => {
            let mut hi = (1.0 / kappa).min(1.0);
            if kappa < 1.0 {
                hi = hi.min((1.0 - (1.0 - kappa).sqrt()) / kappa);
            }
            (0.0, hi)
        }
        ModelKind::Donner if kappa < 0.0 => (-kappa / (1.0 - kappa), (1.0 / (1.0 - kappa)).min(1.0)),
        ModelKind::Dallal => (0.0, (1.0 / (2.0 - kappa)).min(1.0)),
        _ => (0.0, 1.0),
    }
}

/// Normal equation for `pi_i` reduced to a polynomial (ascending
/// coefficients). The numerator is the score multiplied by its positive
/// common denominator, so the roots coincide.
fn pi_polynomial(model: ModelKind, kappa: f64, gc: &GroupCounts) -> Option<Poly> {
    let [m0, m1, m2, n0, n1] = gc.cells().map(f64::from);
    let mp = m0 + m1 + m2;
    let np = n0 + n1;
    match model {
        ModelKind::Rosner => {
            let r = kappa;
            Some(Poly::new(&[
                m1 + 2.0 * m2 + n1,
                -2.0 * r * m1 - 2.0 * r * m2 - r * n1 - 2.0 * m0 - 3.0 * m1 - 6.0 * m2 - n0 - 3.0 * n1,
                4.0 * r * m0
                    + 7.0 * r * m1
                    + 8.0 * r * m2
                    + r * n0
                    + 4.0 * r * n1
                    + 2.0 * m0
                    + 2.0 * m1
                    + 4.0 * m2
                    + 2.0 * n0
                    + 2.0 * n1,
                -r * (2.0 * r * (m0 + m1 + m2) + r * n1 + 4.0 * m0 + 5.0 * m1 + 6.0 * m2 + 3.0 * n0 + 3.0 * n1),
                r * r * (2.0 * mp + np),
            ]))
        }
        ModelKind::Donner => {
            let rho = kappa;
            let q = 1.0 - rho;
            Some(Poly::new(&[
                rho * (m1 + m2 + n1),
                rho * (rho - 2.0) * m0 + (rho * (rho - 4.0) + 1.0) * m1 + (rho * (rho - 4.0) + 2.0) * m2 - rho * n0
                    + (rho * (rho - 3.0) + 1.0) * n1,
                q * ((3.0 * rho - 2.0) * m0
                    + 3.0 * (rho - 1.0) * m1
                    + (3.0 * rho - 4.0) * m2
                    + (rho - 1.0) * n0
                    + 2.0 * (rho - 1.0) * n1),
                q * q * (2.0 * mp + np),
            ]))
        }
        ModelKind::Dallal => {
            let gamma = kappa;
            Some(Poly::new(&[
                m1 + m2 + n1,
                -(2.0 - gamma) * m0 - (3.0 - gamma) * (m1 + m2 + n1) - n0,
                (2.0 - gamma) * (mp + np),
            ]))
        }
        _ => None,
    }
}

#[derive(Debug, Clone, Copy)]
struct PiSolution {
    pi: f64,
    tie: bool,
}

/// Picks the candidate with the largest group likelihood; ties go to the
/// smaller root.
fn best_candidate(
    model: ModelKind,
    kappa: f64,
    gc: &GroupCounts,
    candidates: impl IntoIterator<Item = f64>,
) -> Option<PiSolution> {
    let mut best: Option<(f64, f64)> = None;
    let mut tie = false;
    for pi in candidates {
        if !(pi > 0.0 && pi < 1.0) || !cells_admissible(model, pi, kappa, gc) {
            continue;
        }
        let l = group_log_likelihood(model, pi, kappa, gc);
        if !l.is_finite() {
            continue;
        }
        match best {
            None => best = Some((pi, l)),
            Some((_, bl)) => {
                let slack = 1e-12 * (1.0 + bl.abs());
                if l > bl + slack {
                    best = Some((pi, l));
                    tie = false;
                } else if (l - bl).abs() <= slack {
                    tie = true;
                }
            }
        }
    }
    best.map(|(pi, _)| PiSolution { pi, tie })
}

fn cells_admissible(model: ModelKind, pi: f64, kappa: f64, gc: &GroupCounts) -> bool {
    let p = raw_probs(model, pi, kappa);
    let counts = gc.bilateral();
    p.iter()
        .zip(counts)
        .all(|(&pr, c)| pr >= -models::PROB_SLACK && pr <= 1.0 + models::PROB_SLACK && (c == 0 || pr > 0.0))
}

fn solve_pi_detailed(model: ModelKind, kappa: f64, gc: &GroupCounts) -> Result<PiSolution> {
    if gc.is_degenerate() {
        return Err(Error::DegenerateGroup { group: 0 });
    }
    if model == ModelKind::Independence || gc.m_plus() == 0 {
        let num = f64::from(gc.m1 + 2 * gc.m2 + gc.n1);
        let den = f64::from(2 * gc.m_plus() + gc.n_plus());
        let pi = num / den;
        return if pi > 0.0 && pi < 1.0 {
            Ok(PiSolution { pi, tie: false })
        } else {
            Err(Error::NoAdmissibleRoot)
        };
    }
    let (lo, hi) = admissible_pi_range(model, kappa);
    match model {
        ModelKind::Rosner | ModelKind::Donner => {
            let poly = pi_polynomial(model, kappa, gc).expect("polynomial model");
            let roots = poly.real_roots_in(lo, hi);
            best_candidate(model, kappa, gc, roots).ok_or(Error::NoAdmissibleRoot)
        }
        ModelKind::Dallal => {
            // The smaller admissible root of the quadratic maximizes the likelihood.
            let poly = pi_polynomial(model, kappa, gc).expect("polynomial model");
            let roots = poly.real_roots_in(lo, hi);
            roots
                .into_iter()
                .find(|&pi| pi > 0.0 && pi < 1.0 && cells_admissible(model, pi, kappa, gc))
                .map(|pi| PiSolution { pi, tie: false })
                .ok_or(Error::NoAdmissibleRoot)
        }
        ModelKind::ClaytonCopula => solve_clayton_pi(kappa, gc),
        ModelKind::Independence | ModelKind::Saturated => unreachable!(),
    }
}

/// Root of the marginal normal equation for `model` at fixed `kappa`.
///
/// Among admissible roots in (0, 1) the one with the largest group
/// likelihood is returned (Dallal: the smaller root).
pub fn solve_pi_given_kappa(model: ModelKind, kappa: f64, gc: &GroupCounts) -> Result<f64> {
    if model == ModelKind::Saturated {
        return Err(Error::InvalidParams("saturated model has no marginal equation".into()));
    }
    solve_pi_detailed(model, kappa, gc).map(|s| s.pi)
}

fn solve_clayton_pi(theta: f64, gc: &GroupCounts) -> Result<PiSolution> {
    let f = |pi: f64| group_score_pi(ModelKind::ClaytonCopula, pi, theta, gc).unwrap_or(f64::NAN);
    // Scan in logit space so both tails are resolved.
    const STEPS: usize = 46;
    let span = -(CLAYTON_PI_EPS.ln() - (1.0 - CLAYTON_PI_EPS).ln());
    let grid: Vec<f64> = (0..=STEPS)
        .map(|k| {
            let t = -span / 2.0 + span * k as f64 / STEPS as f64;
            1.0 / (1.0 + (-t).exp())
        })
        .collect();
    let values: Vec<f64> = grid.iter().map(|&p| f(p)).collect();
    let mut roots = Vec::new();
    for k in 0..STEPS {
        let (a, b) = (grid[k], grid[k + 1]);
        let (fa, fb) = (values[k], values[k + 1]);
        if !(fa.is_finite() && fb.is_finite()) {
            continue;
        }
        if fa == 0.0 {
            roots.push(a);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            roots.push(refine_bracket(&f, a, b, fa, fb));
        }
    }
    if values[STEPS] == 0.0 {
        roots.push(grid[STEPS]);
    }
    best_candidate(ModelKind::ClaytonCopula, theta, gc, roots).ok_or(Error::NoAdmissibleRoot)
}

/// Safeguarded secant/bisection on a sign-changing bracket.
fn refine_bracket(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    for _ in 0..200 {
        if (b - a).abs() < 1e-14 {
            break;
        }
        let secant = b - fb * (b - a) / (fb - fa);
        let mid = 0.5 * (a + b);
        // Fall back to bisection when the secant leaves the middle of the bracket.
        let lo = a.min(b);
        let hi = a.max(b);
        let x = if secant.is_finite() && secant > lo + 0.05 * (hi - lo) && secant < hi - 0.05 * (hi - lo) {
            secant
        } else {
            mid
        };
        let fx = f(x);
        if !fx.is_finite() {
            return x;
        }
        if fx.abs() < 1e-12 {
            return x;
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

/// Golden-section maximization of `f` on `[lo, hi]`, endpoints included.
fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if (b - a).abs() < 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Marginal for a group whose normal equation has no admissible root: the
/// likelihood maximum over the admissible range, which may be an endpoint.
fn maximize_group_pi(model: ModelKind, kappa: f64, gc: &GroupCounts) -> f64 {
    let (lo, hi) = admissible_pi_range(model, kappa);
    golden_max(|pi| group_log_likelihood(model, pi, kappa, gc), lo, hi).0
}

fn solve_all_pis(model: ModelKind, kappa: f64, table: &FrequencyTable, ties: &mut usize) -> Vec<f64> {
    table
        .groups()
        .iter()
        .map(|gc| match solve_pi_detailed(model, kappa, gc) {
            Ok(sol) => {
                *ties += usize::from(sol.tie);
                sol.pi
            }
            Err(_) => maximize_group_pi(model, kappa, gc),
        })
        .collect()
}

/// Nuisance region implied by the groups that carry bilateral data.
fn fit_domain(model: ModelKind, pis: &[f64], table: &FrequencyTable) -> Result<NuisanceInterval> {
    let relevant: Vec<f64> = table
        .groups()
        .iter()
        .zip(pis)
        .filter(|(gc, _)| gc.m_plus() > 0)
        .map(|(_, &p)| p.clamp(1e-12, 1.0 - 1e-12))
        .collect();
    if relevant.is_empty() {
        return Err(Error::Unidentifiable);
    }
    nuisance_domain(model, &relevant)
}

fn fixed_loglik(model: ModelKind, pis: &[f64], kappa: f64, table: &FrequencyTable) -> f64 {
    let l: f64 = table
        .groups()
        .iter()
        .zip(pis)
        .map(|(gc, &pi)| group_log_likelihood(model, pi, kappa, gc))
        .sum();
    if l.is_nan() {
        f64::NEG_INFINITY
    } else {
        l
    }
}

/// Outcome of one nuisance update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaStep {
    pub kappa: f64,
    pub boundary: bool,
}

/// The endpoint reached when stepping in direction `dir`: the endpoint
/// itself when closed and usable, otherwise `BOUNDARY_EPS` inside it.
fn edge_point(domain: &NuisanceInterval, dir: f64, l_at: &impl Fn(f64) -> f64) -> f64 {
    let (end, closed) = if dir > 0.0 {
        (domain.hi, domain.hi_closed)
    } else {
        (domain.lo, domain.lo_closed)
    };
    if closed && l_at(end).is_finite() {
        end
    } else {
        end - dir.signum() * BOUNDARY_EPS
    }
}

/// Curvature of the profile likelihood in the nuisance, i.e. the partial
/// second derivative less what re-solving the marginals gives back. The
/// mixed and marginal second derivatives come from central differences of
/// the analytic group scores.
fn profile_curvature(
    model: ModelKind,
    pis: &[f64],
    kappa: f64,
    partial: f64,
    domain: &NuisanceInterval,
    table: &FrequencyTable,
) -> Option<f64> {
    let hk = 1e-6 * (1.0 + kappa.abs());
    if !(domain.contains(kappa - hk) && domain.contains(kappa + hk)) {
        return None;
    }
    let mut h = partial;
    for (gc, &pi) in table.groups().iter().zip(pis) {
        if gc.m_plus() == 0 {
            continue;
        }
        let hp = 1e-7 * pi.min(1.0 - pi);
        let s = |p: f64, k: f64| group_score_pi(model, p, k, gc).ok().filter(|v| v.is_finite());
        let spp = (s(pi + hp, kappa)? - s(pi - hp, kappa)?) / (2.0 * hp);
        let spk = (s(pi, kappa + hk)? - s(pi, kappa - hk)?) / (2.0 * hk);
        if !(spp < 0.0) {
            return None;
        }
        h -= spk * spk / spp;
    }
    (h < 0.0 && h.is_finite()).then_some(h)
}

fn newton_step_inner(
    model: ModelKind,
    pis: &[f64],
    kappa: f64,
    table: &FrequencyTable,
    profile: bool,
) -> Result<KappaStep> {
    let domain = fit_domain(model, pis, table)?;
    let params = ParamVector::new(pis.to_vec(), Some(kappa));
    // With `profile`, trial points re-solve the marginals so the line
    // search judges the same function whose curvature set the step.
    let pis_at = |k: f64| {
        if profile {
            solve_all_pis(model, k, table, &mut 0)
        } else {
            pis.to_vec()
        }
    };
    let l_at = |k: f64| fixed_loglik(model, &pis_at(k), k, table);
    let l0 = fixed_loglik(model, pis, kappa, table);
    let slack = 1e-12 * (1.0 + l0.abs());
    let score = models::score_kappa(model, &params, table)?;
    if score == 0.0 {
        return Ok(KappaStep { kappa, boundary: false });
    }
    let hess = models::d2_kappa(model, &params, table)?;
    if !(hess < 0.0 && hess.is_finite()) {
        return golden_fallback(model, pis, kappa, score, &domain, table);
    }
    let hess = if profile {
        profile_curvature(model, pis, kappa, hess, &domain, table).unwrap_or(hess)
    } else {
        hess
    };
    let full = -score / hess;
    let raw = kappa + full;

    if !domain.contains(raw) {
        let edge = edge_point(&domain, full, &l_at);
        let p_edge = ParamVector::new(pis_at(edge), Some(edge));
        let outward = models::score_kappa(model, &p_edge, table)
            .map(|s| s * full.signum() >= 0.0)
            .unwrap_or(false);
        if outward && l_at(edge) >= l0 - slack {
            return Ok(KappaStep {
                kappa: edge,
                boundary: true,
            });
        }
    }
    let mut step = full;
    for _ in 0..=MAX_HALVINGS {
        let cand = kappa + step;
        if domain.contains(cand) && l_at(cand) >= l0 - slack {
            return Ok(KappaStep {
                kappa: cand,
                boundary: false,
            });
        }
        step *= 0.5;
    }
    let clamped = domain.clamp_interior(raw, BOUNDARY_EPS);
    if l_at(clamped) >= l0 - slack {
        Ok(KappaStep {
            kappa: clamped,
            boundary: true,
        })
    } else {
        Ok(KappaStep { kappa, boundary: false })
    }
}

/// Used when the curvature is not negative: search along the score
/// direction up to the domain edge.
fn golden_fallback(
    model: ModelKind,
    pis: &[f64],
    kappa: f64,
    score: f64,
    domain: &NuisanceInterval,
    table: &FrequencyTable,
) -> Result<KappaStep> {
    let l_at = |k: f64| fixed_loglik(model, pis, k, table);
    let edge = edge_point(domain, score, &l_at);
    let (lo, hi) = if edge > kappa { (kappa, edge) } else { (edge, kappa) };
    if !(hi > lo) {
        return Err(Error::SingularHessian);
    }
    let (best, lbest) = golden_max(l_at, lo, hi);
    if lbest < l_at(kappa) {
        return Ok(KappaStep { kappa, boundary: false });
    }
    Ok(KappaStep {
        kappa: best,
        boundary: (best - edge).abs() < 1e-12,
    })
}

/// One damped Newton-Raphson update of the nuisance parameter with the
/// marginals held at `params.pis`.
///
/// A step that leaves the admissible region or lowers the likelihood is
/// halved up to 30 times. When the Newton step points past an endpoint and
/// the score there still points outward, the endpoint is returned with
/// `boundary` set.
pub fn newton_kappa_step(model: ModelKind, params: &ParamVector, table: &FrequencyTable) -> Result<KappaStep> {
    if !model.has_nuisance() {
        return Err(Error::NoNuisance(model));
    }
    let kappa = params
        .kappa
        .ok_or_else(|| Error::InvalidParams("missing nuisance value".into()))?;
    newton_step_inner(model, &params.pis, kappa, table, false)
}

fn independence_pis(table: &FrequencyTable) -> Vec<f64> {
    table
        .groups()
        .iter()
        .map(|gc| f64::from(gc.m1 + 2 * gc.m2 + gc.n1) / f64::from(2 * gc.m_plus() + gc.n_plus()))
        .collect()
}

fn initial_kappa(model: ModelKind, pis: &[f64], domain: &NuisanceInterval) -> f64 {
    let raw = match model {
        ModelKind::Rosner => 1.0,
        ModelKind::Donner => 0.25,
        ModelKind::Dallal => {
            let mean = pis.iter().sum::<f64>() / pis.len() as f64;
            mean.max(domain.lo)
        }
        ModelKind::ClaytonCopula => 1.0,
        _ => unreachable!(),
    };
    if domain.contains(raw) && raw > domain.lo && raw < domain.hi {
        raw
    } else {
        domain.clamp_interior(raw, (domain.hi - domain.lo) * 1e-3)
    }
}

/// Fits `model` to `table`; Independence and Saturated use their closed forms.
pub fn fit(model: ModelKind, table: &FrequencyTable, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    match model {
        ModelKind::Independence => return fit_independence(table),
        ModelKind::Saturated => return fit_saturated(table),
        _ => {}
    }
    if table.m_total() == 0 {
        return Err(Error::Unidentifiable);
    }
    let start: Vec<f64> = match &opts.pi_init {
        Some(p) if p.len() == table.g() => p.clone(),
        Some(p) => {
            return Err(Error::GroupMismatch {
                expected: table.g(),
                got: p.len(),
            })
        }
        None => independence_pis(table),
    };
    let start: Vec<f64> = start.iter().map(|p| p.clamp(1e-6, 1.0 - 1e-6)).collect();
    let domain = fit_domain(model, &start, table)?;
    let mut kappa = match opts.kappa_init {
        Some(k) if domain.contains(k) => k,
        Some(k) => return Err(Error::OutOfDomain { model, kappa: k }),
        None => initial_kappa(model, &start, &domain),
    };

    let mut ties = 0;
    let mut pis = solve_all_pis(model, kappa, table, &mut ties);
    let mut converged = false;
    let mut boundary = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let step = newton_step_inner(model, &pis, kappa, table, true)?;
        let delta = (step.kappa - kappa).abs();
        kappa = step.kappa;
        boundary = step.boundary;
        pis = solve_all_pis(model, kappa, table, &mut ties);
        if delta < opts.tol {
            converged = true;
            break;
        }
    }
    let params = ParamVector::new(pis, Some(kappa));
    let loglik = log_likelihood(model, &params, table)?;
    Ok(FitResult {
        model,
        params,
        loglik,
        loglik_const: log_likelihood_constant(table),
        iterations,
        converged,
        boundary,
        root_ties: ties,
    })
}

/// Closed-form fit of the independence model.
pub fn fit_independence(table: &FrequencyTable) -> Result<FitResult> {
    if let Some(i) = table.groups().iter().position(GroupCounts::is_degenerate) {
        return Err(Error::DegenerateGroup { group: i + 1 });
    }
    let params = ParamVector::new(independence_pis(table), None);
    let loglik = log_likelihood(ModelKind::Independence, &params, table)?;
    Ok(FitResult {
        model: ModelKind::Independence,
        params,
        loglik,
        loglik_const: log_likelihood_constant(table),
        iterations: 0,
        converged: true,
        boundary: false,
        root_ties: 0,
    })
}

/// Empirical proportions per group.
pub fn fit_saturated(table: &FrequencyTable) -> Result<FitResult> {
    let mut pis = Vec::with_capacity(table.g());
    let mut cells = Vec::with_capacity(table.g());
    for gc in table.groups() {
        let mp = f64::from(gc.m_plus());
        cells.push(if gc.m_plus() > 0 {
            JointProbs {
                p0: f64::from(gc.m0) / mp,
                p1: f64::from(gc.m1) / mp,
                p2: f64::from(gc.m2) / mp,
            }
        } else {
            JointProbs::undefined()
        });
        pis.push(if gc.n_plus() > 0 {
            f64::from(gc.n1) / f64::from(gc.n_plus())
        } else {
            f64::NAN
        });
    }
    let params = ParamVector::saturated(pis, cells);
    let loglik = log_likelihood(ModelKind::Saturated, &params, table)?;
    Ok(FitResult {
        model: ModelKind::Saturated,
        params,
        loglik,
        loglik_const: log_likelihood_constant(table),
        iterations: 0,
        converged: true,
        boundary: false,
        root_ties: 0,
    })
}
