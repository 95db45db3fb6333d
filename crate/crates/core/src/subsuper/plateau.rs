//! Gaussian plateau `v_l(t)`, the phase function `θ_l(t) = β t^{-α} v_l(t)`
//! and their transverse differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PlateauParams {
    pub beta: f64,
    pub gamma: f64,
    pub nu1: f64,
    pub nu2: f64,
}

impl PlateauParams {
    pub fn new(beta: f64, gamma: f64, nu1: f64, nu2: f64) -> Result<Self> {
        if !(beta >= 1.0 && gamma >= 1.0) {
            return Err(Error::Domain(format!("plateau needs β, γ ≥ 1 (got {beta}, {gamma})")));
        }
        if !(nu2 > 0.0) {
            return Err(Error::Precondition(format!("ν₂ = {nu2} must be positive")));
        }
        Ok(Self { beta, gamma, nu1, nu2 })
    }

    /// `α = 1/(4γ)`.
    pub fn alpha(&self) -> f64 {
        0.25 / self.gamma
    }

    /// `ρ = (l + ν₁t) / (2ν₂γt)`.
    pub fn rho(&self, l: f64, t: f64) -> f64 {
        (l + self.nu1 * t) / (2.0 * self.nu2 * self.gamma * t)
    }

    /// `sup_l v = √(π/ν₂)`.
    pub fn peak(&self) -> f64 {
        (std::f64::consts::PI / self.nu2).sqrt()
    }

    pub fn v(&self, l: f64, t: f64) -> f64 {
        let s = l + self.nu1 * t;
        self.peak() * (-s * s / (4.0 * self.nu2 * self.gamma * t)).exp()
    }

    /// `∂_t v = (-ν₁ρ + γν₂ρ²) v`.
    pub fn dv(&self, l: f64, t: f64) -> f64 {
        let r = self.rho(l, t);
        (-self.nu1 * r + self.gamma * self.nu2 * r * r) * self.v(l, t)
    }

    pub fn theta(&self, l: f64, t: f64) -> f64 {
        self.beta * t.powf(-self.alpha()) * self.v(l, t)
    }

    /// `β t^{-α} [-¼(γt)^{-1} v + v̇]`.
    pub fn dtheta(&self, l: f64, t: f64) -> f64 {
        self.beta * t.powf(-self.alpha()) * (-0.25 / (self.gamma * t) * self.v(l, t) + self.dv(l, t))
    }
}

/// `π◇_ν f = f(l + σ_ν) - f(l)`.
pub fn first_differences(f: impl Fn(i64) -> f64, l: i64, sigma: &[i64; 5]) -> [f64; 5] {
    let f0 = f(l);
    sigma.map(|s| f(l + s) - f0)
}

/// `π◇◇_{νν'} f = f(l+σ_ν+σ_ν') - f(l+σ_ν') - f(l+σ_ν) + f(l)`.
pub fn second_differences(f: impl Fn(i64) -> f64, l: i64, sigma: &[i64; 5]) -> [[f64; 5]; 5] {
    let f0 = f(l);
    let single = sigma.map(|s| f(l + s));
    let mut out = [[0.0; 5]; 5];
    for a in 0..5 {
        for b in 0..5 {
            out[a][b] = f(l + sigma[a] + sigma[b]) - single[b] - single[a] + f0;
        }
    }
    out
}

/// `π◇◇◇_{νν'ν''} f`, flattened row-major.
pub fn third_differences(f: impl Fn(i64) -> f64, l: i64, sigma: &[i64; 5]) -> Vec<f64> {
    let mut out = Vec::with_capacity(125);
    for a in 0..5 {
        for b in 0..5 {
            for c in 0..5 {
                let g = |m: i64| f(m + sigma[a] + sigma[b]) - f(m + sigma[b]) - f(m + sigma[a]) + f(m);
                out.push(g(l + sigma[c]) - g(l));
            }
        }
    }
    out
}

/// Least-squares slope of `log sup_l θ` against `log t`.
pub fn theta_decay_exponent(p: &PlateauParams, times: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = times.iter().map(|&t| (t.ln(), p.theta(-p.nu1 * t, t).ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|q| q.0).sum::<f64>() / n;
    let my = pts.iter().map(|q| q.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|q| (q.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> PlateauParams {
        PlateauParams::new(1.5, 4.0, -0.3, 0.8).unwrap()
    }

    #[test]
    fn peak_sits_on_the_drifting_centre() {
        let p = params();
        for t in [1.0, 3.0, 17.0] {
            assert!((p.v(-p.nu1 * t, t) - p.peak()).abs() < 1e-14);
            for l in [-40.0, -3.0, 0.0, 5.0, 60.0] {
                assert!(p.v(l, t) <= p.peak() + 1e-15);
                assert!(p.theta(l, t) >= 0.0);
            }
        }
    }

    #[test]
    fn time_derivatives_match_central_differences() {
        let p = params();
        for &(l, t) in &[(0.0, 1.5), (4.0, 3.0), (-7.0, 10.0), (20.0, 25.0)] {
            let mut errs = Vec::new();
            for h in [1e-2, 5e-3] {
                let fd_v = (p.v(l, t + h) - p.v(l, t - h)) / (2.0 * h);
                let fd_t = (p.theta(l, t + h) - p.theta(l, t - h)) / (2.0 * h);
                errs.push(((fd_v - p.dv(l, t)).abs(), (fd_t - p.dtheta(l, t)).abs()));
            }
            assert!(errs[1].0 < 1e-5 && errs[1].1 < 1e-5);
            assert!(errs[1].0 < 0.3 * errs[0].0 + 1e-12);
            assert!(errs[1].1 < 0.3 * errs[0].1 + 1e-12);
        }
    }

    #[test]
    fn theta_decays_at_rate_alpha() {
        let p = params();
        let k = theta_decay_exponent(&p, &[10.0, 1e2, 1e3, 1e4]);
        assert!((k + p.alpha()).abs() < 1e-10, "{k}");
    }

    #[test]
    fn neighbour_jumps_shrink_with_gamma() {
        let sigma = [1, -2, -1, 2, 0];
        let mut prev = f64::INFINITY;
        for gamma in [1.0, 4.0, 16.0, 64.0] {
            let p = PlateauParams::new(1.0, gamma, 0.1, 1.0).unwrap();
            let worst = (1..20)
                .flat_map(|t| (-30..30).map(move |l| (l, t as f64)))
                .map(|(l, t)| (p.theta((l + 1) as f64, t) - p.theta(l as f64, t)).abs())
                .fold(0.0, f64::max);
            assert!(worst < prev);
            prev = worst;
            let d = first_differences(|m| p.theta(m as f64, 2.0), 3, &sigma);
            assert_eq!(d[4], 0.0);
        }
        assert!(prev <= 1.0);
    }

    #[test]
    fn differences_of_a_quadratic() {
        let sigma = [1, -2, -1, 2, 0];
        let f = |m: i64| (m * m) as f64;
        let d2 = second_differences(f, 5, &sigma);
        for a in 0..5 {
            for b in 0..5 {
                assert_eq!(d2[a][b], 2.0 * (sigma[a] * sigma[b]) as f64);
            }
        }
        assert!(third_differences(f, -3, &sigma).iter().all(|&x| x == 0.0));
    }
}
