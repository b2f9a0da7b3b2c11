use paired_gof::{FitResult, GofResult, ModelKind, RateReport, SelectionReport};
use serde::Serialize;

pub trait Render {
    fn json(&self) -> String;
    fn table(&self) -> String;
}

#[derive(Debug, Serialize)]
pub struct FitRow {
    pub model: ModelKind,
    pub pis: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    pub loglik: f64,
    pub loglik_const: f64,
    pub aic: f64,
    pub iterations: usize,
    pub converged: bool,
    pub boundary: bool,
}

impl FitRow {
    pub fn new(f: &FitResult, aic: f64) -> Self {
        Self {
            model: f.model,
            pis: f.params.pis.clone(),
            kappa: f.params.kappa,
            loglik: f.loglik,
            loglik_const: f.loglik_const,
            aic,
            iterations: f.iterations,
            converged: f.converged,
            boundary: f.boundary,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct GofRow {
    pub model: ModelKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    pub aic: f64,
    pub results: Vec<GofResult>,
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

fn fixed(x: f64, digits: usize) -> String {
    if x.is_finite() {
        format!("{x:.digits$}")
    } else if x.is_nan() {
        "-".into()
    } else {
        format!("{x}")
    }
}

fn opt(x: Option<f64>, digits: usize) -> String {
    x.map_or_else(|| "-".into(), |v| fixed(v, digits))
}

/// Pads columns; the first is left-aligned, the rest right-aligned.
fn grid(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = vec![line(header)];
    out.extend(rows.iter().map(|r| line(r)));
    out.join("\n")
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Render for Vec<FitRow> {
    fn json(&self) -> String {
        to_json(self)
    }

    fn table(&self) -> String {
        let g = self.iter().map(|r| r.pis.len()).max().unwrap_or(0);
        let mut header = strings(&["model", "kappa", "loglik", "AIC", "iter"]);
        header.extend((1..=g).map(|i| format!("pi_{i}")));
        let rows: Vec<Vec<String>> = self
            .iter()
            .map(|r| {
                let kappa = match (r.kappa, r.boundary) {
                    (Some(k), true) => format!("{k:.6}*"),
                    (k, _) => opt(k, 6),
                };
                let mut row = vec![
                    r.model.to_string(),
                    kappa,
                    fixed(r.loglik, 4),
                    fixed(r.aic, 4),
                    r.iterations.to_string(),
                ];
                row.extend(r.pis.iter().map(|&p| fixed(p, 6)));
                row
            })
            .collect();
        let mut out = grid(&header, &rows);
        if self.iter().any(|r| r.boundary) {
            out.push_str("\n* nuisance estimate on the boundary of its domain");
        }
        out
    }
}

impl Render for Vec<GofRow> {
    fn json(&self) -> String {
        to_json(self)
    }

    fn table(&self) -> String {
        let header = strings(&["model", "method", "statistic", "dof", "p-value", "replicates", "AIC"]);
        let rows: Vec<Vec<String>> = self
            .iter()
            .flat_map(|row| {
                row.results.iter().map(move |r| {
                    vec![
                        row.model.to_string(),
                        r.method.to_string(),
                        if r.method.is_bootstrap() {
                            "-".into()
                        } else {
                            fixed(r.statistic, 4)
                        },
                        r.dof.map_or_else(|| "-".into(), |d| d.to_string()),
                        fixed(r.p_value, 4),
                        r.n_boot.map_or_else(|| "-".into(), |n| n.to_string()),
                        fixed(row.aic, 4),
                    ]
                })
            })
            .collect();
        grid(&header, &rows)
    }
}

impl Render for SelectionReport {
    fn json(&self) -> String {
        to_json(self)
    }

    fn table(&self) -> String {
        let mut methods = Vec::new();
        for m in self.models.iter().flat_map(|s| s.pvalues.iter().map(|p| p.method)) {
            if !methods.contains(&m) {
                methods.push(m);
            }
        }
        let mut header = vec!["model".to_string()];
        header.extend(methods.iter().map(|m| m.to_string()));
        header.extend(strings(&["AIC", "pass"]));
        let rows: Vec<Vec<String>> = self
            .models
            .iter()
            .map(|s| {
                let mut row = vec![s.name.to_string()];
                row.extend(methods.iter().map(|m| {
                    let p = s.pvalues.iter().find(|p| p.method == *m).map(|p| p.p_value);
                    opt(p, 4)
                }));
                row.push(opt(s.aic, 4));
                row.push(if s.pass { "yes".into() } else { "no".into() });
                row
            })
            .collect();
        let mut out = grid(&header, &rows);
        for s in &self.models {
            if let Some(e) = &s.error {
                out.push_str(&format!("\n{}: {e}", s.name));
            }
        }
        match self.best {
            Some(m) => out.push_str(&format!("\nbest: {m}")),
            None => out.push_str(&format!(
                "\nbest: none ({})",
                self.diagnostic.as_deref().unwrap_or("no model passed")
            )),
        }
        out
    }
}

impl Render for Vec<RateReport> {
    fn json(&self) -> String {
        to_json(self)
    }

    fn table(&self) -> String {
        let header = strings(&[
            "scenario", "model", "fitted", "g", "m+", "n+", "method", "rate %", "se %", "class", "valid",
        ]);
        let rows: Vec<Vec<String>> = self
            .iter()
            .flat_map(|r| {
                let label = r.label.clone().unwrap_or_else(|| "-".into());
                r.rates.iter().map(move |m| {
                    vec![
                        label.clone(),
                        r.model.to_string(),
                        r.fitted_model.to_string(),
                        r.g.to_string(),
                        r.m_plus.to_string(),
                        r.n_plus.to_string(),
                        m.method.to_string(),
                        fixed(100.0 * m.rate, 2),
                        fixed(100.0 * m.se, 2),
                        format!("{:?}", m.class).to_lowercase(),
                        m.n_valid.to_string(),
                    ]
                })
            })
            .collect();
        grid(&header, &rows)
    }
}
