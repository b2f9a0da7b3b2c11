//! Real roots of low-degree polynomials on a bounded interval.
//!
//! Critical points (roots of the derivative, found recursively) split the
//! interval into monotone pieces; each piece holds at most one root, which
//! is located by bisection and polished with Newton steps. This avoids the
//! cancellation problems of closed-form cubic/quartic formulas near
//! repeated roots.

/// Polynomial coefficients in ascending order: `c[0] + c[1] x + ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    /// Builds a polynomial, dropping leading coefficients that are
    /// negligible relative to the largest one.
    pub fn new(ascending: &[f64]) -> Self {
        let scale = ascending.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let mut coeffs = ascending.to_vec();
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.abs() <= 1e-14 * scale) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        let d: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect();
        if d.is_empty() {
            Poly { coeffs: vec![0.0] }
        } else {
            Poly::new(&d)
        }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Sorted distinct real roots in the closed interval `[lo, hi]`.
    pub fn real_roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        if self.is_zero() || lo > hi {
            return Vec::new();
        }
        match self.degree() {
            0 => Vec::new(),
            1 => {
                let r = -self.coeffs[0] / self.coeffs[1];
                if (lo..=hi).contains(&r) {
                    vec![r]
                } else {
                    Vec::new()
                }
            }
            _ => self.roots_by_bracketing(lo, hi),
        }
    }

    fn roots_by_bracketing(&self, lo: f64, hi: f64) -> Vec<f64> {
        let deriv = self.derivative();
        let mut knots = vec![lo];
        knots.extend(deriv.real_roots_in(lo, hi).into_iter().filter(|&c| c > lo && c < hi));
        knots.push(hi);

        let scale = self.magnitude(lo, hi);
        let tiny = 1e-13 * scale;
        let mut roots: Vec<f64> = Vec::new();
        let push = |r: f64, roots: &mut Vec<f64>| {
            if roots
                .last()
                .is_none_or(|&last| (r - last).abs() > 1e-12 * (1.0 + r.abs()))
            {
                roots.push(r);
            }
        };
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fa.abs() <= tiny {
                push(a, &mut roots);
            }
            if fa.abs() > tiny && fb.abs() > tiny && fa.signum() != fb.signum() {
                let r = self.bisect(a, b, fa);
                push(self.polish(r, &deriv, a, b), &mut roots);
            }
        }
        if let Some(&last) = knots.last() {
            if self.eval(last).abs() <= tiny {
                push(last, &mut roots);
            }
        }
        roots
    }

    /// Bound on |p| over the interval, used to scale "numerically zero".
    fn magnitude(&self, lo: f64, hi: f64) -> f64 {
        let x = lo.abs().max(hi.abs()).max(1.0);
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * x.powi(k as i32))
            .sum()
    }

    fn bisect(&self, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let fm = self.eval(mid);
            if fm == 0.0 {
                return mid;
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }

    fn polish(&self, mut x: f64, deriv: &Poly, a: f64, b: f64) -> f64 {
        for _ in 0..3 {
            let d = deriv.eval(x);
            if d == 0.0 {
                break;
            }
            let next = x - self.eval(x) / d;
            if !(a..=b).contains(&next) || self.eval(next).abs() >= self.eval(x).abs() {
                break;
            }
            x = next;
        }
        x
    }
}
