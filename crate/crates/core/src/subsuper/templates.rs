//! Decay templates `z(t)` for the additive part of the sub/super-solutions
//! and their running integrals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `C¹` template with `z(0) = 1`.
pub trait Template: Send + Sync {
    fn value(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;
    /// `∫₀ᵗ z`.
    fn integral(&self, t: f64) -> f64;
    fn eta(&self) -> f64;
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(format!("η_z = {eta} outside (0,1)")));
    }
    Ok(())
}

/// Exponential decay that switches to a matched `(1+t)^{-3/2}` tail.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ZHom {
    pub eta: f64,
}

impl ZHom {
    pub fn new(eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self { eta })
    }

    /// `t* = 3/(2η) - 1`.
    pub fn switch_time(&self) -> f64 {
        1.5 / self.eta - 1.0
    }

    fn amplitude(&self) -> f64 {
        self.eta.powf(-1.5) * 1.5f64.powf(1.5) * (self.eta - 1.5).exp()
    }

    /// `∫₀^∞ z = η⁻¹(2e^{η-3/2} + 1)`.
    pub fn total_integral(&self) -> f64 {
        (2.0 * (self.eta - 1.5).exp() + 1.0) / self.eta
    }

    /// `inf_t (1+t)^{3/2} z(t)`, attained at `t = 0`.
    pub fn kappa(&self) -> f64 {
        1.0
    }

    /// One-sided derivatives at the switch time.
    pub fn switch_derivatives(&self) -> (f64, f64) {
        let ts = self.switch_time();
        let left = -self.eta * (-self.eta * ts).exp();
        let right = -1.5 * self.amplitude() * (1.0 + ts).powf(-2.5);
        (left, right)
    }
}

impl Template for ZHom {
    fn value(&self, t: f64) -> f64 {
        if t <= self.switch_time() {
            (-self.eta * t).exp()
        } else {
            self.amplitude() * (1.0 + t).powf(-1.5)
        }
    }

    fn derivative(&self, t: f64) -> f64 {
        if t <= self.switch_time() {
            -self.eta * (-self.eta * t).exp()
        } else {
            -1.5 * self.amplitude() * (1.0 + t).powf(-2.5)
        }
    }

    fn integral(&self, t: f64) -> f64 {
        let ts = self.switch_time();
        if t <= ts {
            return (1.0 - (-self.eta * t).exp()) / self.eta;
        }
        let head = (1.0 - (-self.eta * ts).exp()) / self.eta;
        head + 2.0 * self.amplitude() * ((1.0 + ts).powf(-0.5) - (1.0 + t).powf(-0.5))
    }

    fn eta(&self) -> f64 {
        self.eta
    }
}

/// Decreasing quadratic from `3/2` at `-ℓ` to `1` at `0` with slope `-η` there.
pub fn p_minus(x: f64, ell: f64) -> (f64, f64) {
    let y = x + ell;
    (1.5 - 0.5 * y * y / (ell * ell), -y / (ell * ell))
}

/// Quadratic with `P(0) = 1`, `P'(0) = -ν`, `P'(ℓ) = 0`.
pub fn p_plus(x: f64, nu: f64, ell: f64) -> (f64, f64) {
    let y = x - ell;
    (nu / (2.0 * ell) * y * y + 1.0 - 0.5 * nu * ell, nu / ell * y)
}

fn p_minus_integral(x0: f64, x1: f64, ell: f64) -> f64 {
    let f = |x: f64| 1.5 * x - (x + ell).powi(3) / (6.0 * ell * ell);
    f(x1) - f(x0)
}

fn p_plus_integral(x0: f64, x1: f64, nu: f64, ell: f64) -> f64 {
    let f = |x: f64| nu / (6.0 * ell) * (x - ell).powi(3) + (1.0 - 0.5 * nu * ell) * x;
    f(x1) - f(x0)
}

/// Smoothstep `3s² - 2s³` and its derivative.
fn bridge(s: f64) -> (f64, f64) {
    (s * s * (3.0 - 2.0 * s), 6.0 * s * (1.0 - s))
}

fn bridge_integral(s: f64) -> f64 {
    s.powi(3) - 0.5 * s.powi(4)
}

/// Template that follows `z_hom`, climbs back to `1` just before `t₁`
/// and then restarts as `⅔ z_hom(t - t₁)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ZObs {
    pub hom: ZHom,
    pub t1: f64,
    /// `ℓ_P = 1/η`.
    pub ell: f64,
    /// Decay rate of `z_hom` at `t₁ - 3ℓ_P`.
    pub nu: f64,
}

impl ZObs {
    pub fn new(eta: f64, t1: f64) -> Result<Self> {
        let hom = ZHom::new(eta)?;
        if !(t1 >= 0.0) {
            return Err(Error::Domain(format!("t₁ = {t1} must be ≥ 0")));
        }
        let ell = 1.0 / eta;
        let nu = if t1 > 3.0 * ell {
            let t0 = t1 - 3.0 * ell;
            -hom.derivative(t0) / hom.value(t0)
        } else {
            eta
        };
        Ok(Self { hom, t1, ell, nu })
    }

    /// `t₁ ≤ 3ℓ_P`: the template is plain `z_hom`.
    pub fn is_degenerate(&self) -> bool {
        self.t1 <= 3.0 * self.ell
    }

    /// Break points `t₁ - 3ℓ, t₁ - 2ℓ, t₁ - ℓ, t₁`.
    pub fn knots(&self) -> [f64; 4] {
        let (t1, l) = (self.t1, self.ell);
        [t1 - 3.0 * l, t1 - 2.0 * l, t1 - l, t1]
    }

    /// `κ_obs` in `z ≥ κ_obs (1 + t - t₁)^{-3/2}` for `t ≥ t₁`. Depends on
    /// `η` only: the degenerate case `t₁ ≤ 3ℓ_P` is bounded by `z_hom(3ℓ_P)`.
    pub fn kappa(&self) -> f64 {
        (2.0 / 3.0 * self.hom.kappa()).min(self.hom.value(3.0 * self.ell))
    }

    /// Bound on `∫₀^∞ z` that is uniform in `t₁`.
    pub fn integral_bound(&self) -> f64 {
        2.0 * self.hom.total_integral() + 3.0 * self.ell
    }

    fn anchor(&self) -> f64 {
        self.hom.value(self.knots()[0])
    }

    fn eval(&self, t: f64) -> (f64, f64) {
        if self.is_degenerate() {
            return (self.hom.value(t), self.hom.derivative(t));
        }
        let [k0, k1, k2, k3] = self.knots();
        if t <= k0 {
            (self.hom.value(t), self.hom.derivative(t))
        } else if t <= k1 {
            let (p, dp) = p_plus(t - k0, self.nu, self.ell);
            (self.anchor() * p, self.anchor() * dp)
        } else if t <= k2 {
            let lo = self.anchor() * p_plus(self.ell, self.nu, self.ell).0;
            let (b, db) = bridge((t - k1) / self.ell);
            (lo + (1.0 - lo) * b, (1.0 - lo) * db / self.ell)
        } else if t <= k3 {
            let (p, dp) = p_minus(t - k3, self.ell);
            (2.0 / 3.0 * p, 2.0 / 3.0 * dp)
        } else {
            (2.0 / 3.0 * self.hom.value(t - k3), 2.0 / 3.0 * self.hom.derivative(t - k3))
        }
    }
}

impl Template for ZObs {
    fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    fn derivative(&self, t: f64) -> f64 {
        self.eval(t).1
    }

    fn integral(&self, t: f64) -> f64 {
        if self.is_degenerate() {
            return self.hom.integral(t);
        }
        let [k0, k1, k2, k3] = self.knots();
        let l = self.ell;
        let mut acc = self.hom.integral(t.min(k0));
        if t <= k0 {
            return acc;
        }
        acc += self.anchor() * p_plus_integral(0.0, t.min(k1) - k0, self.nu, l);
        if t <= k1 {
            return acc;
        }
        let lo = self.anchor() * p_plus(l, self.nu, l).0;
        let s = (t.min(k2) - k1) / l;
        acc += l * (lo * s + (1.0 - lo) * bridge_integral(s));
        if t <= k2 {
            return acc;
        }
        acc += 2.0 / 3.0 * p_minus_integral(-l, t.min(k3) - k3, l);
        if t <= k3 {
            return acc;
        }
        acc + 2.0 / 3.0 * self.hom.integral(t - k3)
    }

    fn eta(&self) -> f64 {
        self.hom.eta
    }
}

/// `ε z(t - t₀)` on `t ≥ t₀`, with `Z(t) = K_Z ∫_{t₀}^t ε z`.
#[derive(Clone, Copy, Debug)]
pub struct Scaled<T> {
    pub template: T,
    pub amplitude: f64,
    pub start: f64,
    pub k_z: f64,
}

impl<T: Template> Scaled<T> {
    pub fn z(&self, t: f64) -> f64 {
        self.amplitude * self.template.value(t - self.start)
    }

    pub fn dz(&self, t: f64) -> f64 {
        self.amplitude * self.template.derivative(t - self.start)
    }

    pub fn big_z(&self, t: f64) -> f64 {
        self.k_z * self.amplitude * self.template.integral(t - self.start)
    }

    pub fn eta(&self) -> f64 {
        self.template.eta()
    }
}

/// Result of checking the template properties on a grid.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TemplateCheck {
    pub samples: usize,
    /// `min (z' + ηz)`, should be ≥ 0.
    pub decay_slack: f64,
    /// `max z - z(0)`, should be ≤ 0.
    pub max_over_start: f64,
    pub min_value: f64,
    /// `min (1+t)^{3/2} z` (or `(1+t-t₁)^{3/2} z` past `t₁`).
    pub kappa_observed: f64,
    /// `min (z_obs - ½ z_hom)`; zero for `z_hom` itself.
    pub half_hom_slack: f64,
    /// `|∫ - closed form|` against a Romberg-extrapolated trapezoid sum.
    pub integral_error: f64,
    /// Largest jump of `z` or `z'` across the break points.
    pub c1_jump: f64,
}

impl TemplateCheck {
    pub fn passes(&self, kappa: f64) -> bool {
        self.decay_slack >= -1e-12
            && self.max_over_start <= 1e-12
            && self.min_value > 0.0
            && self.kappa_observed >= kappa * (1.0 - 1e-9)
            && self.half_hom_slack >= -1e-12
            && self.integral_error < 1e-6
            && self.c1_jump < 1e-9
    }
}

fn jump<T: Template>(z: &T, t: f64) -> f64 {
    let e = 1e-9;
    let dv = (z.value(t + e) - z.value(t - e)).abs();
    let dd = (z.derivative(t + e) - z.derivative(t - e)).abs();
    dv.max(dd)
}

/// Dense-grid verification of the template properties on `[0, t_max]`.
pub fn check_template<T: Template>(z: &T, hom: &ZHom, t1: f64, t_max: f64, step: f64, knots: &[f64]) -> TemplateCheck {
    let n = (t_max / step).ceil() as usize;
    let z0 = z.value(0.0);
    let mut out = TemplateCheck {
        samples: n + 1,
        decay_slack: f64::INFINITY,
        max_over_start: f64::NEG_INFINITY,
        min_value: f64::INFINITY,
        kappa_observed: f64::INFINITY,
        half_hom_slack: f64::INFINITY,
        ..TemplateCheck::default()
    };
    let mut trap = 0.0;
    let mut coarse = 0.0;
    let mut prev = z0;
    let mut prev2 = z0;
    for k in 0..=n {
        let t = k as f64 * step;
        let v = z.value(t);
        out.decay_slack = out.decay_slack.min(z.derivative(t) + z.eta() * v);
        out.max_over_start = out.max_over_start.max(v - z0);
        out.min_value = out.min_value.min(v);
        let base = if t >= t1 { 1.0 + t - t1 } else { 1.0 + t };
        if t >= t1 {
            out.kappa_observed = out.kappa_observed.min(base.powf(1.5) * v);
        }
        out.half_hom_slack = out.half_hom_slack.min(v - 0.5 * hom.value(t));
        if k > 0 {
            trap += 0.5 * step * (v + prev);
        }
        if k > 0 && k % 2 == 0 {
            coarse += step * (v + prev2);
            prev2 = v;
        }
        prev = v;
    }
    let m = 2 * (n / 2);
    let fine: f64 = trap - if m < n { 0.5 * step * (prev + z.value((n - 1) as f64 * step)) } else { 0.0 };
    let romberg = (4.0 * fine - coarse) / 3.0;
    out.integral_error = (romberg - z.integral(m as f64 * step)).abs();
    out.c1_jump = knots.iter().filter(|&&t| t > 0.0).map(|&t| jump(z, t)).fold(0.0, f64::max);
    out
}
