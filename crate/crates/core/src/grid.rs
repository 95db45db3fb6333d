//! Uniform ξ-grids, shift stencils, exponential tail extension and
//! cubic Hermite evaluation of sampled profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Scalar;

/// Symmetric grid `ξ_k = -L + k h`, `k = 0..=2L/h`, containing `ξ = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub half_width: f64,
    pub step: f64,
    pub half_points: usize,
}

impl Grid {
    pub fn new(half_width: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && half_width > step) {
            return Err(Error::Domain(format!("grid L = {half_width}, h = {step}")));
        }
        let m = (half_width / step).round();
        if ((half_width / step) - m).abs() > 1e-9 {
            return Err(Error::Domain(format!("L = {half_width} is not a multiple of h = {step}")));
        }
        Ok(Self { half_width, step, half_points: m as usize })
    }

    pub fn len(&self) -> usize {
        2 * self.half_points + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn zero_index(&self) -> usize {
        self.half_points
    }

    pub fn xi(&self, k: usize) -> f64 {
        (k as f64 - self.half_points as f64) * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.xi(k)).collect()
    }

    /// Trapezoid rule for sampled `f`.
    pub fn trapezoid(&self, f: &[f64]) -> f64 {
        let n = f.len();
        let inner: f64 = f[1..n - 1].iter().sum();
        self.step * (inner + 0.5 * (f[0] + f[n - 1]))
    }

    /// Central differences inside, one-sided second order at the ends.
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        let h = self.step;
        (0..n)
            .map(|k| {
                if k == 0 {
                    (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
                } else if k == n - 1 {
                    (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h)
                } else {
                    (f[k + 1] - f[k - 1]) / (2.0 * h)
                }
            })
            .collect()
    }
}

/// Discretisation of the `ξ`-derivative in the term `-cΦ'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Scheme {
    /// Three-point one-sided difference, reaching backwards for `c ≥ 0`
    /// and forwards for `c < 0`.
    #[default]
    Upwind,
    /// Three-point central difference.
    Central,
    /// Five-point central difference.
    Fourth,
}

impl Scheme {
    /// `(offset, weight)` pairs of the derivative stencil at speed `c`.
    pub fn derivative(self, h: f64, c: f64) -> Vec<(isize, f64)> {
        match self {
            Scheme::Upwind if c >= 0.0 => vec![(0, 1.5 / h), (-1, -2.0 / h), (-2, 0.5 / h)],
            Scheme::Upwind => vec![(0, -1.5 / h), (1, 2.0 / h), (2, -0.5 / h)],
            Scheme::Central => vec![(1, 0.5 / h), (-1, -0.5 / h)],
            Scheme::Fourth => vec![
                (2, -1.0 / (12.0 * h)),
                (1, 8.0 / (12.0 * h)),
                (-1, -8.0 / (12.0 * h)),
                (-2, 1.0 / (12.0 * h)),
            ],
        }
    }
}

/// Weights of `p(ξ + s)` in terms of grid values, as `(offset, weight)`.
/// Exact shift when `s/h` is an integer, four-point Lagrange otherwise.
pub fn shift_stencil(s: f64, h: f64) -> Vec<(isize, f64)> {
    let r = s / h;
    let m = r.round();
    if (r - m).abs() < 1e-9 {
        return vec![(m as isize, 1.0)];
    }
    let m = r.floor();
    let f = r - m;
    let m = m as isize;
    vec![
        (m - 1, -f * (f - 1.0) * (f - 2.0) / 6.0),
        (m, (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0),
        (m + 1, -(f + 1.0) * f * (f - 2.0) / 2.0),
        (m + 2, (f + 1.0) * f * (f - 1.0) / 6.0),
    ]
}

/// Exponential continuation beyond the grid: `lo + (v₀ - lo) e^{η⁻ (ξ-ξ₀)}`
/// on the left and `hi + (v_N - hi) e^{-η⁺ (ξ-ξ_N)}` on the right.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tails {
    pub lo: f64,
    pub hi: f64,
    pub eta_left: f64,
    pub eta_right: f64,
}

impl Tails {
    /// Homogeneous version for linear operators acting on decaying functions.
    pub fn homogeneous(&self) -> Self {
        Self { lo: 0.0, hi: 0.0, ..*self }
    }

    /// Factor multiplying the boundary value for ghost index `j` (may be negative or ≥ n).
    #[inline]
    pub fn ghost_factor(&self, j: isize, n: usize, h: f64) -> (usize, f64) {
        if j < 0 {
            (0, (self.eta_left * j as f64 * h).exp())
        } else {
            let d = (j - (n as isize - 1)) as f64 * h;
            (n - 1, (-self.eta_right * d).exp())
        }
    }

    /// Grid value or its exponential continuation.
    pub fn value<T: Scalar>(&self, v: &[T], j: isize, h: f64) -> T {
        let n = v.len();
        if j >= 0 && (j as usize) < n {
            return v[j as usize];
        }
        let (b, f) = self.ghost_factor(j, n, h);
        let base = if j < 0 { self.lo } else { self.hi };
        T::from_f64(base) + (v[b] - T::from_f64(base)) * T::from_f64(f)
    }
}

/// Applies a shift stencil to grid data with tail continuation.
pub fn apply_stencil(v: &[f64], stencil: &[(isize, f64)], tails: &Tails, h: f64) -> Vec<f64> {
    (0..v.len())
        .map(|k| {
            stencil
                .iter()
                .map(|&(o, w)| w * tails.value(v, k as isize + o, h))
                .sum()
        })
        .collect()
}

/// Cubic Hermite interpolant of samples with derivatives, continued by
/// exponential tails.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Hermite {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
    pub tails: Tails,
}

impl Hermite {
    /// `(f, f')` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        hermite_eval(&self.grid, &self.values, &self.slopes, &self.tails, x)
    }
}

/// Borrowing form of [`Hermite::eval`].
pub fn hermite_eval(g: &Grid, values: &[f64], slopes: &[f64], tails: &Tails, x: f64) -> (f64, f64) {
    let n = values.len();
    let s = (x + g.half_width) / g.step;
    if s <= 0.0 {
        let d = x + g.half_width;
        let e = (tails.eta_left * d).exp();
        let a = values[0] - tails.lo;
        return (tails.lo + a * e, a * tails.eta_left * e);
    }
    if s >= (n - 1) as f64 {
        let d = x - g.half_width;
        let e = (-tails.eta_right * d).exp();
        let a = values[n - 1] - tails.hi;
        return (tails.hi + a * e, -a * tails.eta_right * e);
    }
    let k = (s.floor() as usize).min(n - 2);
    let t = s - k as f64;
    let h = g.step;
    let (y0, y1) = (values[k], values[k + 1]);
    let (m0, m1) = (slopes[k] * h, slopes[k + 1] * h);
    let t2 = t * t;
    let t3 = t2 * t;
    let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * m0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * m1;
    let dv = (6.0 * t2 - 6.0 * t) * y0
        + (3.0 * t2 - 4.0 * t + 1.0) * m0
        + (-6.0 * t2 + 6.0 * t) * y1
        + (3.0 * t2 - 2.0 * t) * m1;
    (v, dv / h)
}

/// Quintic Hermite interpolant from values and first and second
/// derivatives, returning `(f, f', f'')`. The three outputs are exact
/// derivatives of one another, including on the exponential tails.
pub fn quintic_eval(g: &Grid, values: &[f64], d1: &[f64], d2: &[f64], tails: &Tails, x: f64) -> (f64, f64, f64) {
    let n = values.len();
    let s = (x + g.half_width) / g.step;
    if s <= 0.0 {
        let e = (tails.eta_left * (x + g.half_width)).exp();
        let a = values[0] - tails.lo;
        let k = tails.eta_left;
        return (tails.lo + a * e, a * k * e, a * k * k * e);
    }
    if s >= (n - 1) as f64 {
        let e = (-tails.eta_right * (x - g.half_width)).exp();
        let a = values[n - 1] - tails.hi;
        let k = tails.eta_right;
        return (tails.hi + a * e, -a * k * e, a * k * k * e);
    }
    let k = (s.floor() as usize).min(n - 2);
    let t = s - k as f64;
    let h = g.step;
    let c = [values[k], h * d1[k], h * h * d2[k], h * h * d2[k + 1], h * d1[k + 1], values[k + 1]];
    let (t2, t3) = (t * t, t * t * t);
    let (t4, t5) = (t3 * t, t3 * t2);
    let b = [
        1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
        t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
        0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5,
        0.5 * t3 - t4 + 0.5 * t5,
        -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
        10.0 * t3 - 15.0 * t4 + 6.0 * t5,
    ];
    let db = [
        -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
        1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
        t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4,
        1.5 * t2 - 4.0 * t3 + 2.5 * t4,
        -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
        30.0 * t2 - 60.0 * t3 + 30.0 * t4,
    ];
    let d2b = [
        -60.0 * t + 180.0 * t2 - 120.0 * t3,
        -36.0 * t + 96.0 * t2 - 60.0 * t3,
        1.0 - 9.0 * t + 18.0 * t2 - 10.0 * t3,
        3.0 * t - 12.0 * t2 + 10.0 * t3,
        -24.0 * t + 84.0 * t2 - 60.0 * t3,
        60.0 * t - 180.0 * t2 + 120.0 * t3,
    ];
    let dot = |w: &[f64; 6]| w.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>();
    (dot(&b), dot(&db) / h, dot(&d2b) / (h * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quintic_reproduces_quintics_and_is_self_consistent() {
        let g = Grid::new(2.0, 0.25).unwrap();
        let f = |x: f64| 0.3 - x + 0.2 * x.powi(2) + 0.1 * x.powi(3) - 0.05 * x.powi(4) + 0.01 * x.powi(5);
        let df = |x: f64| -1.0 + 0.4 * x + 0.3 * x.powi(2) - 0.2 * x.powi(3) + 0.05 * x.powi(4);
        let d2f = |x: f64| 0.4 + 0.6 * x - 0.6 * x.powi(2) + 0.2 * x.powi(3);
        let xs = g.points();
        let v: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let d: Vec<f64> = xs.iter().map(|&x| df(x)).collect();
        let d2: Vec<f64> = xs.iter().map(|&x| d2f(x)).collect();
        let tails = Tails { lo: 0.0, hi: 0.0, eta_left: 1.0, eta_right: 1.0 };
        for k in 0..80 {
            let x = -1.99 + 0.0497 * k as f64;
            let (a, b, c) = quintic_eval(&g, &v, &d, &d2, &tails, x);
            assert!((a - f(x)).abs() < 1e-13 && (b - df(x)).abs() < 1e-12 && (c - d2f(x)).abs() < 1e-11);
            let e = 1e-6;
            let fd = (quintic_eval(&g, &v, &d, &d2, &tails, x + e).0 - quintic_eval(&g, &v, &d, &d2, &tails, x - e).0) / (2.0 * e);
            assert!((fd - b).abs() < 1e-8);
        }
    }

    #[test]
    fn grid_contains_zero() {
        let g = Grid::new(40.0, 0.05).unwrap();
        assert_eq!(g.len(), 1601);
        assert_eq!(g.xi(g.zero_index()), 0.0);
        assert!(Grid::new(1.0, 0.3).is_err());
    }

    #[test]
    fn stencil_reproduces_cubics() {
        let h = 0.1;
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x - 0.3 * x * x * x;
        for s in [0.73, -1.37, 0.05, 2.0, -0.5] {
            let st = shift_stencil(s, h);
            let x0 = 0.4;
            let got: f64 = st.iter().map(|&(o, w)| w * f(x0 + o as f64 * h)).sum();
            assert!((got - f(x0 + s)).abs() < 1e-12, "s = {s}");
        }
        assert_eq!(shift_stencil(1.0, 0.05), vec![(20, 1.0)]);
    }

    #[test]
    fn stencil_transpose_is_reverse_shift() {
        let h = 0.1;
        let a = shift_stencil(0.337, h);
        let mut b = shift_stencil(-0.337, h);
        b.sort_by_key(|&(o, _)| -o);
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.0, -q.0);
            assert!((p.1 - q.1).abs() < 1e-14);
        }
    }

    #[test]
    fn hermite_is_exact_for_cubics_and_continuous_at_tails() {
        let g = Grid::new(2.0, 0.25).unwrap();
        let f = |x: f64| x * x * x - x;
        let df = |x: f64| 3.0 * x * x - 1.0;
        let pts = g.points();
        let herm = Hermite {
            grid: g,
            values: pts.iter().map(|&x| f(x)).collect(),
            slopes: pts.iter().map(|&x| df(x)).collect(),
            tails: Tails { lo: 0.0, hi: 0.0, eta_left: 1.0, eta_right: 1.0 },
        };
        for x in [-1.9, -0.13, 0.0, 0.77, 1.99] {
            let (v, d) = herm.eval(x);
            assert!((v - f(x)).abs() < 1e-12);
            assert!((d - df(x)).abs() < 1e-11);
        }
        let (a, _) = herm.eval(2.0 - 1e-12);
        let (b, _) = herm.eval(2.0 + 1e-12);
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn trapezoid_integrates_gaussian() {
        let g = Grid::new(10.0, 0.05).unwrap();
        let f: Vec<f64> = g.points().iter().map(|x| (-x * x).exp()).collect();
        assert!((g.trapezoid(&f) - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }
}
