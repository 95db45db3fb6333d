//! Bistable cubic `g(u) = u(1-u)(u-a)`, the cutoff maps `τ±` and the
//! distorted branches `g±δ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest cutoff width accepted by [`tau`].
pub const NU_MAX: f64 = 1.0 / 12.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// Pushes the lower zero up (`τ⁺`), giving `g⁻δ ≤ g`.
    Minus,
    /// Pushes the lower zero down (`τ⁻`), giving `g⁺δ ≥ g`.
    Plus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Kind {
    Cubic,
    Distorted { delta: f64, branch: Branch },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    pub a: f64,
    pub kind: Kind,
}

/// Anything the profile solvers can use as a reaction term.
pub trait Reaction: Sync {
    fn g(&self, u: f64) -> f64;
    fn dg(&self, u: f64) -> f64;
    /// Stable zeros `(lower, upper)`.
    fn limits(&self) -> (f64, f64);
}

fn cubic(a: f64, u: f64) -> f64 {
    u * (1.0 - u) * (u - a)
}

fn dcubic(a: f64, u: f64) -> f64 {
    -3.0 * u * u + 2.0 * (1.0 + a) * u - a
}

fn d2cubic(a: f64, u: f64) -> f64 {
    -6.0 * u + 2.0 * (1.0 + a)
}

impl Nonlinearity {
    pub fn cubic(a: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::Domain(format!("detuning a = {a} outside (0,1)")));
        }
        Ok(Self { a, kind: Kind::Cubic })
    }

    pub fn distorted(a: f64, delta: f64, branch: Branch) -> Result<Self> {
        let base = Self::cubic(a)?;
        if delta < 0.0 || delta.sqrt() > NU_MAX {
            return Err(Error::Domain(format!(
                "δ = {delta} needs 0 ≤ √δ ≤ 1/12"
            )));
        }
        if delta == 0.0 {
            return Ok(base);
        }
        Ok(Self { a, kind: Kind::Distorted { delta, branch } })
    }

    pub fn delta(&self) -> f64 {
        match self.kind {
            Kind::Cubic => 0.0,
            Kind::Distorted { delta, .. } => delta,
        }
    }

    /// Cubic with the same detuning.
    pub fn base(&self) -> Self {
        Self { a: self.a, kind: Kind::Cubic }
    }

    /// Second derivative of the undistorted cubic.
    pub fn d2g_cubic(&self, u: f64) -> f64 {
        d2cubic(self.a, u)
    }

    /// Lower and upper critical points of the cubic.
    pub fn critical_points(&self) -> (f64, f64) {
        let b = 1.0 + self.a;
        let disc = (b * b - 3.0 * self.a).sqrt();
        ((b - disc) / 3.0, (b + disc) / 3.0)
    }

    fn cutoff(&self, u: f64) -> (f64, f64) {
        match self.kind {
            Kind::Cubic => (u, 1.0),
            Kind::Distorted { delta, branch } => {
                let nu = delta.sqrt();
                let s = match branch {
                    Branch::Minus => Sign::Plus,
                    Branch::Plus => Sign::Minus,
                };
                tau_with_slope(u, nu, s)
            }
        }
    }
}

impl Reaction for Nonlinearity {
    fn g(&self, u: f64) -> f64 {
        cubic(self.a, self.cutoff(u).0)
    }

    fn dg(&self, u: f64) -> f64 {
        let (v, dv) = self.cutoff(u);
        dcubic(self.a, v) * dv
    }

    fn limits(&self) -> (f64, f64) {
        match self.kind {
            Kind::Cubic => (0.0, 1.0),
            Kind::Distorted { delta, branch: Branch::Minus } => (-delta, 1.0 - delta),
            Kind::Distorted { delta, branch: Branch::Plus } => (delta, 1.0 + delta),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// Cutoff map `τ±(u, ν)`.
pub fn tau(u: f64, nu: f64, sign: Sign) -> Result<f64> {
    if nu > NU_MAX {
        return Err(Error::Domain(format!("ν = {nu} exceeds 1/12")));
    }
    Ok(tau_with_slope(u, nu, sign).0)
}

/// `∂_u τ±(u, ν)`.
pub fn dtau(u: f64, nu: f64, sign: Sign) -> Result<f64> {
    if nu > NU_MAX {
        return Err(Error::Domain(format!("ν = {nu} exceeds 1/12")));
    }
    Ok(tau_with_slope(u, nu, sign).1)
}

/// Quartic bridge `∫_{-ν²}^{u} [1 + 6ν⁻¹(1+ν)⁻³ (s+ν²)(s-ν)] ds` on `[-ν², ν]`.
pub fn tau3(u: f64, nu: f64) -> f64 {
    let k = 6.0 / (nu * (1.0 + nu).powi(3));
    let x = u + nu * nu;
    // (s+ν²)(s-ν) = x (x - w) with x = s+ν², w = ν+ν²
    let w = nu + nu * nu;
    x + k * (x * x * x / 3.0 - w * x * x / 2.0)
}

fn dtau3(u: f64, nu: f64) -> f64 {
    let k = 6.0 / (nu * (1.0 + nu).powi(3));
    let x = u + nu * nu;
    1.0 + k * x * (x - nu - nu * nu)
}

/// Bridge used by `τ⁻` on `[ν², ν]`, slope one at both ends.
fn bridge_down(u: f64, nu: f64) -> (f64, f64) {
    let k = 6.0 / (nu * (1.0 - nu).powi(3));
    let x = u - nu * nu;
    let w = nu - nu * nu;
    (
        x - k * (x * x * x / 3.0 - w * x * x / 2.0),
        1.0 - k * x * (x - w),
    )
}

fn near_zero(u: f64, nu: f64, sign: Sign) -> (f64, f64) {
    let nu2 = nu * nu;
    match sign {
        Sign::Plus => {
            if u < -nu2 {
                (u + nu2, 1.0)
            } else if u < nu {
                (tau3(u, nu), dtau3(u, nu))
            } else {
                (u, 1.0)
            }
        }
        Sign::Minus => {
            if u < nu2 {
                (u - nu2, 1.0)
            } else if u < nu {
                bridge_down(u, nu)
            } else {
                (u, 1.0)
            }
        }
    }
}

pub(crate) fn tau_with_slope(u: f64, nu: f64, sign: Sign) -> (f64, f64) {
    if nu <= 0.0 {
        return (u, 1.0);
    }
    if u <= 0.5 {
        near_zero(u, nu, sign)
    } else {
        let other = match sign {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        };
        let (v, dv) = near_zero(1.0 - u, nu, other);
        (1.0 - v, dv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
        (0..=n).map(move |k| lo + (hi - lo) * k as f64 / n as f64)
    }

    #[test]
    fn cubic_zeros_and_slopes() {
        let nl = Nonlinearity::cubic(0.3).unwrap();
        for u in [0.0, 0.3, 1.0] {
            assert_eq!(nl.g(u), 0.0);
        }
        assert!((nl.dg(0.0) + 0.3).abs() < 1e-15);
        assert!((nl.dg(1.0) - (0.3 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn half_detuning_is_odd_about_one_half() {
        let nl = Nonlinearity::cubic(0.5).unwrap();
        for u in grid(-1.0, 2.0, 300) {
            assert!((nl.g(1.0 - u) + nl.g(u)).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let nl = Nonlinearity::distorted(0.1, 1e-3, Branch::Minus).unwrap();
        let h = 1e-6;
        for u in grid(-0.5, 1.5, 997) {
            let fd = (nl.g(u + h) - nl.g(u - h)) / (2.0 * h);
            assert!((fd - nl.dg(u)).abs() < 1e-6, "u = {u}");
        }
    }

    #[test]
    fn tau_identity_in_the_middle_and_shift_outside() {
        let nu = 0.05;
        for u in grid(nu, 1.0 - nu, 200) {
            assert_eq!(tau(u, nu, Sign::Plus).unwrap(), u);
            assert_eq!(tau(u, nu, Sign::Minus).unwrap(), u);
        }
        for u in grid(-1.0, -nu * nu - 1e-9, 50) {
            assert!((tau(u, nu, Sign::Plus).unwrap() - (u + nu * nu)).abs() < 1e-15);
        }
        assert!(tau(0.3, 0.1, Sign::Plus).is_err());
    }

    #[test]
    fn bridge_endpoints() {
        for nu in [0.01, 0.05, NU_MAX] {
            assert!(tau3(-nu * nu, nu).abs() < 1e-15);
            assert!((tau3(nu, nu) - nu).abs() < 1e-14);
        }
    }

    #[test]
    fn tau_is_continuous_with_continuous_slope() {
        let nu = 0.07;
        let eps = 1e-9;
        for s in [Sign::Plus, Sign::Minus] {
            for u0 in [-nu * nu, nu * nu, nu, 1.0 - nu, 1.0 - nu * nu, 1.0 + nu * nu, 0.5] {
                let (a, da) = tau_with_slope(u0 - eps, nu, s);
                let (b, db) = tau_with_slope(u0 + eps, nu, s);
                assert!((a - b).abs() < 1e-8);
                assert!((da - db).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn distorted_zeros() {
        let d = 1e-3;
        let m = Nonlinearity::distorted(0.1, d, Branch::Minus).unwrap();
        let p = Nonlinearity::distorted(0.1, d, Branch::Plus).unwrap();
        for u in [-d, 0.1, 1.0 - d] {
            assert!(m.g(u).abs() < 1e-15, "g⁻({u}) = {}", m.g(u));
        }
        for u in [d, 0.1, 1.0 + d] {
            assert!(p.g(u).abs() < 1e-15);
        }
        assert_eq!(m.limits(), (-d, 1.0 - d));
        let zero = Nonlinearity::distorted(0.1, 0.0, Branch::Minus).unwrap();
        assert_eq!(zero.kind, Kind::Cubic);
    }

    #[test]
    fn distorted_slope_matches_cubic_slope_at_shifted_zero() {
        let d = 1e-3;
        let m = Nonlinearity::distorted(0.1, d, Branch::Minus).unwrap();
        let h = 1e-7;
        let fd = (m.g(-d + h) - m.g(-d - h)) / (2.0 * h);
        assert!((fd - (-0.1)).abs() < 1e-6);
    }

    #[test]
    fn ordering_on_dense_grid() {
        for (a, d) in [(0.1, 1e-3), (0.5, 5e-3), (0.5, 1e-3)] {
            let m = Nonlinearity::distorted(a, d, Branch::Minus).unwrap();
            let p = Nonlinearity::distorted(a, d, Branch::Plus).unwrap();
            let c = Nonlinearity::cubic(a).unwrap();
            for u in grid(-1.0, 2.0, 30_000) {
                assert!(m.g(u) <= c.g(u) + 1e-15, "a={a} δ={d} u={u}");
                assert!(c.g(u) <= p.g(u) + 1e-15, "a={a} δ={d} u={u}");
            }
        }
    }

    #[test]
    fn separation_near_lower_zero() {
        for (a, d) in [(0.1, 1e-3), (0.1, 2e-3), (0.5, 5e-3)] {
            let m = Nonlinearity::distorted(a, d, Branch::Minus).unwrap();
            let c = Nonlinearity::cubic(a).unwrap();
            let worst = grid(-d, 0.0, 2000)
                .map(|u| (m.g(u) - c.g(u)) / d)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(worst < -0.5 * a, "κ estimate {worst}");
        }
    }

    #[test]
    fn too_large_delta_is_rejected() {
        assert!(Nonlinearity::distorted(0.5, 1e-2, Branch::Minus).is_err());
    }
}
