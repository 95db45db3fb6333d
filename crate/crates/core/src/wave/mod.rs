//! Travelling-wave profiles of the MFDE
//! `-cΦ' + Σ_s Φ(ξ+s) - 4Φ + g(Φ) = 0`, their decay data, the adjoint
//! kernel and direction scans.

mod adjoint;
pub mod exponents;
mod io;
pub mod operator;
mod scan;
mod solver;
mod tails;

use serde::{Deserialize, Serialize};

use crate::grid::{apply_stencil, quintic_eval, Grid, Scheme, Tails};
use crate::linalg::Banded;
use crate::nonlinearity::{Nonlinearity, Reaction};

pub use adjoint::{adjoint_matrix, adjoint_residual, solve_adjoint, AdjointProfile};
pub use exponents::char_exponents;
pub use io::{read_profile_csv, write_profile_csv, ProfileHeader};
pub use scan::{direction_scan, ScanEntry};
pub use solver::{plateau_fraction, solve_angle, solve_distorted, solve_mfde, solve_profile, Phase, SolveOptions};
pub use tails::{fit_tails, TailFit};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WaveProfile {
    pub grid: Grid,
    pub phi: Vec<f64>,
    /// `Φ'` on the grid (the discrete derivative used by the solver).
    pub dphi: Vec<f64>,
    /// `Φ''` from the differentiated MFDE.
    pub d2phi: Vec<f64>,
    pub c: f64,
    pub eta_minus: f64,
    pub eta_plus: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    pub tail_fit: TailFit,
    /// `(σ_h, σ_v)`; integer for lattice directions, `(cos ζ, sin ζ)` for angles.
    pub sigma: (f64, f64),
    pub scheme: Scheme,
    pub nl: Nonlinearity,
    /// Sup norm of the discrete MFDE residual at exit.
    pub residual: f64,
    pub iterations: usize,
}

impl WaveProfile {
    pub fn shifts(&self) -> [f64; 4] {
        let (a, b) = self.sigma;
        [a, b, -a, -b]
    }

    pub fn limits(&self) -> (f64, f64) {
        self.nl.limits()
    }

    pub fn tails(&self) -> Tails {
        let (lo, hi) = self.limits();
        Tails { lo, hi, eta_left: self.eta_minus, eta_right: self.eta_plus }
    }

    /// Integer direction, if the shifts are integers.
    pub fn direction(&self) -> Option<(i64, i64)> {
        let (a, b) = self.sigma;
        let int = |x: f64| ((x - x.round()).abs() < 1e-12).then_some(x.round() as i64);
        Some((int(a)?, int(b)?))
    }

    pub fn h(&self) -> f64 {
        self.grid.step
    }

    /// `(Φ, Φ', Φ'')` at `x` by quintic Hermite interpolation, exponential
    /// tails off the grid.
    pub fn interpolate(&self, x: f64) -> (f64, f64, f64) {
        quintic_eval(&self.grid, &self.phi, &self.dphi, &self.d2phi, &self.tails(), x)
    }

    pub fn phi_at(&self, x: f64) -> f64 {
        self.interpolate(x).0
    }

    /// `(Φ, Φ')` at `x`; `Φ'` is the exact derivative of [`Self::phi_at`].
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let (v, d, _) = self.interpolate(x);
        (v, d)
    }

    /// `(Φ', Φ'')` at `x`.
    pub fn eval_derivatives(&self, x: f64) -> (f64, f64) {
        let (_, d, d2) = self.interpolate(x);
        (d, d2)
    }

    pub fn is_monotone(&self) -> bool {
        self.phi.windows(2).all(|w| w[1] > w[0])
    }

    /// Transition-region plateau fraction, see [`plateau_fraction`].
    pub fn plateau_fraction(&self) -> f64 {
        plateau_fraction(&self.phi, self.limits())
    }

    /// Row stencil of `-cD + Σ S_s - 4`.
    pub fn stencil(&self, scheme: Scheme) -> operator::Stencil<f64> {
        operator::mfde_stencil(self.c, &self.shifts(), scheme, self.h())
    }

    /// Discrete `𝓛₀` with the solver's stencils and decaying tails.
    pub fn linearization(&self) -> Banded<f64> {
        let diag: Vec<f64> = self.phi.iter().map(|&u| self.nl.dg(u)).collect();
        operator::assemble(&self.stencil(self.scheme), &diag, &self.tails().homogeneous(), self.h())
    }

    /// `𝓛₀ p` with the given derivative scheme and decaying tails.
    pub fn apply_l0(&self, p: &[f64], scheme: Scheme) -> Vec<f64> {
        let st = self.stencil(scheme);
        let mut out = apply_stencil(p, &st, &self.tails().homogeneous(), self.h());
        for ((o, &u), &v) in out.iter_mut().zip(&self.phi).zip(p) {
            *o += self.nl.dg(u) * v;
        }
        out
    }

    /// Largest `|offset|` of the solver stencil.
    pub fn reach(&self) -> usize {
        let (kl, ku) = operator::bandwidths(&self.stencil(Scheme::Fourth));
        kl.max(ku)
    }

    /// MFDE residual of the interpolated profile at an arbitrary point.
    pub fn continuous_residual(&self, x: f64) -> f64 {
        let (v, d) = self.eval(x);
        let s: f64 = self.shifts().iter().map(|&s| self.phi_at(x + s)).sum();
        -self.c * d + s - 4.0 * v + self.nl.g(v)
    }
}
