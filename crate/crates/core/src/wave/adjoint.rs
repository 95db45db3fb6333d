//! Kernel of the transposed linearisation, normalised against `Φ'`.

use serde::{Deserialize, Serialize};

use super::exponents::char_exponents;
use super::operator::{adjoint_stencil, assemble, transpose_stencil};
use super::WaveProfile;
use crate::error::{Error, Result};
use crate::grid::{Grid, Scheme, Tails};
use crate::linalg::{dot, norm2, Banded, BandedLu};
use crate::nonlinearity::Reaction;

/// Ratio `σ₂/σ_max` below which the kernel is not considered simple.
pub const SIMPLE_KERNEL_RATIO: f64 = 1e-6;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdjointProfile {
    pub grid: Grid,
    pub psi: Vec<f64>,
    /// `σ₂/σ_max` of the discrete linearisation.
    pub singular_ratio: f64,
    /// `‖Bψ‖_∞ / ‖ψ‖_∞` for the discrete adjoint matrix `B`.
    pub discrete_residual: f64,
}

impl AdjointProfile {
    pub fn is_positive(&self) -> bool {
        self.psi.iter().all(|&v| v > 0.0)
    }

    /// Trapezoid `∫ Ψ f`.
    pub fn pair(&self, f: &[f64]) -> f64 {
        let prod: Vec<f64> = self.psi.iter().zip(f).map(|(a, b)| a * b).collect();
        self.grid.trapezoid(&prod)
    }
}

fn normalize(v: &mut [f64]) {
    let n = norm2(v);
    v.iter_mut().for_each(|x| *x /= n);
}

fn inverse_iteration(lu: &BandedLu<f64>, start: &[f64], rounds: usize) -> Vec<f64> {
    let mut x = start.to_vec();
    normalize(&mut x);
    for _ in 0..rounds {
        x = lu.solve(&x);
        normalize(&mut x);
    }
    x
}

/// `(σ₂, σ_max)` of `a`, with `v1` the right singular vector of the
/// smallest singular value.
fn singular_gap(a: &Banded<f64>, at: &Banded<f64>, lu: &BandedLu<f64>, lu_t: &BandedLu<f64>, v1: &[f64]) -> (f64, f64) {
    let n = a.n();
    let mut x: Vec<f64> = (0..n).map(|k| ((k * 7919 % 104729) as f64 / 104729.0) - 0.5).collect();
    let mut y = x.clone();
    normalize(&mut y);
    for _ in 0..40 {
        y = at.matvec(&a.matvec(&y));
        normalize(&mut y);
    }
    let smax = norm2(&a.matvec(&y));
    let deflate = |x: &mut Vec<f64>| {
        let p = dot(x, v1);
        x.iter_mut().zip(v1).for_each(|(a, b)| *a -= p * b);
    };
    deflate(&mut x);
    normalize(&mut x);
    for _ in 0..30 {
        x = lu.solve(&lu_t.solve(&x));
        deflate(&mut x);
        normalize(&mut x);
    }
    (norm2(&a.matvec(&x)), smax)
}

/// Discrete `𝓛₀*`: the transposed solver stencil in the interior, with
/// exponential tails from the adjoint characteristic equations (those of
/// `𝓛₀` at speed `-c`).
pub fn adjoint_matrix(profile: &WaveProfile) -> Result<Banded<f64>> {
    let (lo, hi) = profile.limits();
    let nl = &profile.nl;
    let (el, er) = char_exponents(-profile.c, &profile.shifts(), nl.dg(lo), nl.dg(hi))?;
    let tails = Tails { lo: 0.0, hi: 0.0, eta_left: el, eta_right: er };
    let st = transpose_stencil(&profile.stencil(profile.scheme));
    let diag: Vec<f64> = profile.phi.iter().map(|&u| nl.dg(u)).collect();
    Ok(assemble(&st, &diag, &tails, profile.h()))
}

/// `Ψ` spanning the kernel of the discrete `𝓛₀*`, positive and scaled so
/// that `∫ΨΦ' = 1`.
pub fn solve_adjoint(profile: &WaveProfile) -> Result<AdjointProfile> {
    let b = adjoint_matrix(profile)?;
    let bt = b.transpose();
    let lu = b.factor()?;
    let lu_t = bt.factor()?;
    let mut psi = inverse_iteration(&lu, &vec![1.0; b.n()], 6);
    let v1 = inverse_iteration(&lu_t, &profile.dphi, 4);
    let (s2, smax) = singular_gap(&bt, &b, &lu_t, &lu, &v1);
    let ratio = s2 / smax;
    if ratio < SIMPLE_KERNEL_RATIO {
        return Err(Error::KernelNotSimple(ratio));
    }
    let pairing = profile.grid.trapezoid(&psi.iter().zip(&profile.dphi).map(|(a, b)| a * b).collect::<Vec<_>>());
    if pairing == 0.0 || !pairing.is_finite() {
        return Err(Error::Singular("adjoint kernel orthogonal to Φ'".into()));
    }
    psi.iter_mut().for_each(|v| *v /= pairing);
    let r = b.matvec(&psi);
    let scale = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let discrete_residual = r.iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale;
    Ok(AdjointProfile { grid: profile.grid, psi, singular_ratio: ratio, discrete_residual })
}

/// `‖𝓛₀*Ψ‖_∞` over grid points whose five-point stencil stays on the grid,
/// with `𝓛₀* q = c q' + Σ_s q(ξ - s) - 4q + g'(Φ) q`.
pub fn adjoint_residual(profile: &WaveProfile, adjoint: &AdjointProfile) -> f64 {
    let h = profile.h();
    let st = adjoint_stencil(profile.c, &profile.shifts(), Scheme::Fourth, h);
    let reach = st.iter().map(|e| e.0.unsigned_abs()).max().unwrap_or(0);
    let psi = &adjoint.psi;
    let n = psi.len();
    (reach..n - reach)
        .map(|k| {
            let mut acc = profile.nl.dg(profile.phi[k]) * psi[k];
            for &(o, w) in &st {
                acc += w * psi[(k as isize + o) as usize];
            }
            acc.abs()
        })
        .fold(0.0, f64::max)
}
