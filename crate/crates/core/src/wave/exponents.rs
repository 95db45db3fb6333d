//! Spatial decay exponents from the characteristic equations of the MFDE
//! linearised at the two stable states.

use crate::error::{Error, Result};

/// `Σ_s e^{z s}` over the four shifts, minus four.
pub fn shift_symbol(shifts: &[f64; 4], z: f64) -> f64 {
    shifts.iter().map(|&s| (z * s).exp()).sum::<f64>() - 4.0
}

fn shift_symbol_dz(shifts: &[f64; 4], z: f64) -> f64 {
    shifts.iter().map(|&s| s * (z * s).exp()).sum()
}

/// `Δ⁻(z) = cz − (Σ e^{zs} − 4) − g'(lower)`; its positive root is `η⁻`.
pub fn delta_minus(c: f64, shifts: &[f64; 4], dg0: f64, z: f64) -> f64 {
    c * z - shift_symbol(shifts, z) - dg0
}

/// `Δ⁺(z) = −cz − (Σ e^{zs} − 4) − g'(upper)`; its positive root is `η⁺`.
pub fn delta_plus(c: f64, shifts: &[f64; 4], dg1: f64, z: f64) -> f64 {
    -c * z - shift_symbol(shifts, z) - dg1
}

fn positive_root(f: impl Fn(f64) -> f64) -> Result<f64> {
    if f(0.0) <= 0.0 {
        return Err(Error::Domain("characteristic function not positive at 0".into()));
    }
    let mut hi = 1.0;
    let mut grown = 0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        grown += 1;
        if grown > 60 {
            return Err(Error::Domain("no sign change for characteristic equation".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `(η⁻, η⁺)` for shifts `{±σ_h, ±σ_v}` (or any symmetric set of four).
pub fn char_exponents(c: f64, shifts: &[f64; 4], dg0: f64, dg1: f64) -> Result<(f64, f64)> {
    if !(dg0 < 0.0 && dg1 < 0.0) {
        return Err(Error::Domain(format!("need g'(lower) < 0 and g'(upper) < 0, got {dg0}, {dg1}")));
    }
    let em = positive_root(|z| delta_minus(c, shifts, dg0, z))?;
    let ep = positive_root(|z| delta_plus(c, shifts, dg1, z))?;
    Ok((em, ep))
}

/// `(dη⁻/dc, dη⁺/dc)` by implicit differentiation.
pub fn exponent_sensitivity(c: f64, shifts: &[f64; 4], eta: (f64, f64)) -> (f64, f64) {
    let (em, ep) = eta;
    let dm = -em / (c - shift_symbol_dz(shifts, em));
    let dp = -ep / (c + shift_symbol_dz(shifts, ep));
    (dm, dp)
}

/// Shifts `{σ_h, σ_v, −σ_h, −σ_v}` for an integer direction.
pub fn lattice_shifts(sh: i64, sv: i64) -> [f64; 4] {
    [sh as f64, sv as f64, -(sh as f64), -(sv as f64)]
}

/// Shifts `{cos ζ, sin ζ, −cos ζ, −sin ζ}`.
pub fn angle_shifts(zeta: f64) -> [f64; 4] {
    let (s, c) = zeta.sin_cos();
    [c, s, -c, -s]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_satisfy_the_equations() {
        for (c, dir) in [(0.5, (1, 0)), (-0.3, (1, 1)), (0.0, (2, 1)), (1.7, (3, -2))] {
            let s = lattice_shifts(dir.0, dir.1);
            let (em, ep) = char_exponents(c, &s, -0.1, -0.9).unwrap();
            assert!(delta_minus(c, &s, -0.1, em).abs() < 1e-10);
            assert!(delta_plus(c, &s, -0.9, ep).abs() < 1e-10);
            assert!(em > 0.0 && ep > 0.0);
        }
    }

    #[test]
    fn value_at_zero_is_minus_slope() {
        let s = lattice_shifts(1, 0);
        assert_eq!(delta_minus(0.4, &s, -0.1, 0.0), 0.1);
    }

    #[test]
    fn hand_bracket_for_unit_speed() {
        // 2cosh(z) − 2.1 − z changes sign on (1.0, 1.2)
        let s = lattice_shifts(1, 0);
        let (em, _) = char_exponents(1.0, &s, -0.1, -0.9).unwrap();
        assert!(em > 1.0 && em < 1.2, "η⁻ = {em}");
        assert!((2.0 * em.cosh() - 2.1 - em).abs() < 1e-10);
    }

    #[test]
    fn rescaling_scales_exponents() {
        let (c, lam) = (0.37, 2.5);
        let s = lattice_shifts(2, 1);
        let scaled = s.map(|v| v / lam);
        let (a, b) = char_exponents(c, &s, -0.2, -0.6).unwrap();
        let (p, q) = char_exponents(c / lam, &scaled, -0.2, -0.6).unwrap();
        assert!((p - a * lam).abs() < 1e-9 && (q - b * lam).abs() < 1e-9);
    }

    #[test]
    fn sensitivity_matches_finite_differences() {
        let s = lattice_shifts(1, 1);
        let c = 0.4;
        let e = char_exponents(c, &s, -0.1, -0.9).unwrap();
        let (dm, dp) = exponent_sensitivity(c, &s, e);
        let hh = 1e-6;
        let a = char_exponents(c + hh, &s, -0.1, -0.9).unwrap();
        let b = char_exponents(c - hh, &s, -0.1, -0.9).unwrap();
        assert!((dm - (a.0 - b.0) / (2.0 * hh)).abs() < 1e-6);
        assert!((dp - (a.1 - b.1) / (2.0 * hh)).abs() < 1e-6);
    }
}
