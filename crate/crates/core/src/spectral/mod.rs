//! Transverse operators `𝓛_ω`, the eigenvalue branch through `λ₀ = 0`,
//! and the solvability coefficients and correctors of the 2D Ansatz.

mod branch;
mod correctors;

use num_complex::Complex64;

use crate::grid::shift_stencil;
use crate::linalg::Banded;
use crate::nonlinearity::Reaction;
use crate::wave::operator::{assemble, merge, Stencil};
use crate::wave::WaveProfile;

pub use branch::{eigen_branch, eigen_near, BranchOptions, SpectralBranch};
pub use correctors::{alpha_and_correctors, Corrector, CorrectorSet};

/// Phase weights `σ_μ` and ξ-shifts `τ_μ`, `μ = 1..5`, of the rotated
/// stencil for direction `(σ_h, σ_v)`.
pub fn cross_weights(sh: i64, sv: i64) -> ([f64; 5], [f64; 5]) {
    let (a, b) = (sh as f64, sv as f64);
    ([b, -a, -b, a, 0.0], [a, b, -a, -b, 0.0])
}

/// Row stencil of `𝓛_ω` without the `g'(Φ)` diagonal:
/// `-cD + Σ_{μ≤4} e^{iσ_μω} τ_μ - 4`.
pub fn l_omega_stencil(profile: &WaveProfile, sigma: &[f64; 5], tau: &[f64; 5], omega: f64) -> Stencil<Complex64> {
    let h = profile.h();
    let mut all: Vec<(isize, Complex64)> = profile
        .scheme
        .derivative(h, profile.c)
        .into_iter()
        .map(|(o, w)| (o, Complex64::new(-profile.c * w, 0.0)))
        .collect();
    for mu in 0..4 {
        let phase = Complex64::from_polar(1.0, sigma[mu] * omega);
        all.extend(shift_stencil(tau[mu], h).into_iter().map(|(o, w)| (o, phase * w)));
    }
    all.push((0, Complex64::new(-4.0, 0.0)));
    merge(all)
}

/// `𝓛_ω` on the profile grid with the solver's stencils.
pub fn build_l_omega(profile: &WaveProfile, omega: f64) -> Banded<Complex64> {
    let (sh, sv) = profile.direction().expect("integer direction");
    let (sigma, tau) = cross_weights(sh, sv);
    let st = l_omega_stencil(profile, &sigma, &tau, omega);
    let diag: Vec<Complex64> = profile.phi.iter().map(|&u| Complex64::new(profile.nl.dg(u), 0.0)).collect();
    assemble(&st, &diag, &profile.tails().homogeneous(), profile.h())
}
