//! Real polynomials and isolation of their real roots.

use alloc::vec::Vec;

/// Polynomial with coefficients in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

/// A real root located on a bracketing interval.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Root {
    pub value: f64,
    /// The polynomial touches zero without changing sign (even multiplicity).
    pub tangency: bool,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::new(alloc::vec![0.0]);
        }
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect())
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = alloc::vec![0.0];
        coeffs.extend(self.coeffs.iter().enumerate().map(|(i, c)| c / (i + 1) as f64));
        Self::new(coeffs)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    pub fn add_constant(&self, value: f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] += value;
        Self::new(coeffs)
    }

    /// Taylor coefficients about `x0`: `p(x0 + d) = sum_k t_k d^k`.
    pub fn shifted(&self, x0: f64) -> Self {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                c[j] += x0 * c[j + 1];
            }
        }
        Self::new(c)
    }

    /// Quotient of synthetic division by `(x - r)`; the remainder is dropped.
    pub fn deflate(&self, r: f64) -> Self {
        let n = self.coeffs.len();
        if n == 1 {
            return Self::new(alloc::vec![0.0]);
        }
        let mut q = alloc::vec![0.0; n - 1];
        let mut carry = 0.0;
        for i in (1..n).rev() {
            carry = self.coeffs[i] + carry * r;
            q[i - 1] = carry;
        }
        Self::new(q)
    }

    /// Magnitude used to judge when a value is numerically zero near `x`.
    fn scale_at(&self, x: f64) -> f64 {
        let ax = x.abs().max(1.0);
        self.coeffs.iter().enumerate().map(|(i, c)| c.abs() * ax.powi(i as i32)).sum::<f64>().max(1e-300)
    }

    /// All real roots in `[lo, hi]`, increasing, located to `tol` by bisection.
    ///
    /// Critical points (roots of the derivative, found recursively) split the
    /// window into intervals of monotonicity; each interval with a sign change
    /// holds exactly one simple root. A critical point where the polynomial is
    /// zero to rounding is reported as a tangency.
    pub fn real_roots(&self, lo: f64, hi: f64, tol: f64) -> Vec<Root> {
        let mut roots = Vec::new();
        if self.degree() == 0 || lo > hi {
            return roots;
        }
        let critical: Vec<f64> = self.derivative().real_roots(lo, hi, tol).into_iter().map(|r| r.value).collect();
        let mut knots = Vec::with_capacity(critical.len() + 2);
        knots.push(lo);
        knots.extend(critical.iter().copied().filter(|&c| c > lo && c < hi));
        knots.push(hi);

        let zero_tol = |x: f64| 64.0 * f64::EPSILON * self.scale_at(x);
        let is_zero = |x: f64| self.eval(x).abs() <= zero_tol(x);

        for (i, &k) in knots.iter().enumerate() {
            if is_zero(k) {
                let interior = i > 0 && i + 1 < knots.len();
                let tangency = interior && {
                    let left = self.eval(0.5 * (knots[i - 1] + k));
                    let right = self.eval(0.5 * (k + knots[i + 1]));
                    left.signum() == right.signum()
                };
                roots.push(Root { value: k, tangency });
            }
        }
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            if is_zero(a) || is_zero(b) {
                continue;
            }
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fa.signum() != fb.signum() {
                roots.push(Root { value: self.bisect(a, b, tol), tangency: false });
            }
        }
        roots.sort_by(|x, y| x.value.total_cmp(&y.value));
        roots.dedup_by(|x, y| (x.value - y.value).abs() <= tol);
        roots
    }

    fn bisect(&self, mut a: f64, mut b: f64, tol: f64) -> f64 {
        let mut fa = self.eval(a);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (b - a) <= tol || m == a || m == b {
                break;
            }
            let fm = self.eval(m);
            if fm == 0.0 {
                return m;
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}
