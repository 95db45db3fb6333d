//! Solvability coefficients `α◇`, `α◇◇` and the correctors `p◇`, `p◇◇`,
//! `q◇◇` of the transverse Ansatz.

use serde::{Deserialize, Serialize};

use super::cross_weights;
use crate::error::{Error, Result};
use crate::grid::{apply_stencil, hermite_eval, shift_stencil, Scheme, Tails};
use crate::linalg::{Banded, BandedLu, Bordered};
use crate::wave::{AdjointProfile, WaveProfile};

/// Grid function with slopes for Hermite evaluation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Corrector {
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
    /// `‖𝓛₀x - f‖_∞` with the five-point derivative, away from the ends.
    pub residual: f64,
}

impl Corrector {
    fn zero(n: usize) -> Self {
        Self { values: vec![0.0; n], slopes: vec![0.0; n], residual: 0.0 }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `|x(±L)| ≤ 1e-3 · max|x|`, or `x ≡ 0`.
    pub fn decays(&self) -> bool {
        let m = self.max_abs();
        let n = self.values.len();
        m == 0.0 || (self.values[0].abs() <= 1e-3 * m && self.values[n - 1].abs() <= 1e-3 * m)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrectorSet {
    pub sigma: [f64; 5],
    pub tau: [f64; 5],
    pub alpha1: [f64; 5],
    pub alpha2_p: [[f64; 5]; 5],
    pub alpha2_q: [[f64; 5]; 5],
    pub p1: Vec<Corrector>,
    /// Row-major `5 × 5`.
    pub p2: Vec<Corrector>,
    pub q2: Vec<Corrector>,
    /// Largest bordering multiplier `|s|` in `𝓛₀x + sΦ' = f` over all solves.
    pub max_multiplier: f64,
}

impl CorrectorSet {
    pub fn p2(&self, nu: usize, nup: usize) -> &Corrector {
        &self.p2[5 * nu + nup]
    }

    pub fn q2(&self, nu: usize, nup: usize) -> &Corrector {
        &self.q2[5 * nu + nup]
    }

    /// `i Σ σ_μ α◇_μ`, returned as its imaginary part.
    pub fn melnikov_d1(&self) -> f64 {
        (0..5).map(|m| self.sigma[m] * self.alpha1[m]).sum()
    }

    /// `-Σ σ_μ² α◇_μ - 2 Σ σ_μ σ_μ' α◇◇_{p;μμ'}`.
    pub fn melnikov_d2(&self) -> f64 {
        let mut s = 0.0;
        for m in 0..5 {
            s -= self.sigma[m] * self.sigma[m] * self.alpha1[m];
            for mp in 0..5 {
                s -= 2.0 * self.sigma[m] * self.sigma[mp] * self.alpha2_p[m][mp];
            }
        }
        s
    }

    pub fn all(&self) -> impl Iterator<Item = &Corrector> {
        self.p1.iter().chain(&self.p2).chain(&self.q2)
    }
}

struct Solver<'a> {
    profile: &'a WaveProfile,
    a: Banded<f64>,
    lu: BandedLu<f64>,
    tails: Tails,
    h: f64,
}

impl Solver<'_> {
    fn shift(&self, v: &[f64], s: f64) -> Vec<f64> {
        if s == 0.0 {
            return v.to_vec();
        }
        apply_stencil(v, &shift_stencil(s, self.h), &self.tails, self.h)
    }

    fn derivative(&self, v: &[f64]) -> Vec<f64> {
        apply_stencil(v, &Scheme::Fourth.derivative(self.h, 0.0), &self.tails, self.h)
    }

    /// `x ⟂ Φ'` with `𝓛₀x + sΦ' = f`.
    fn solve(&self, f: &[f64]) -> Result<(Corrector, f64)> {
        let dphi = &self.profile.dphi;
        let b = Bordered { a: &self.a, lu: &self.lu, b: vec![dphi.clone()], c: vec![dphi.clone()], d: vec![vec![0.0]] };
        let (x, s) = b.solve(f, &[0.0], 3)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular("corrector bordered system".into()));
        }
        let lx = self.profile.apply_l0(&x, Scheme::Fourth);
        let reach = self.profile.reach();
        let n = x.len();
        let residual = (reach..n - reach).map(|k| (lx[k] - f[k]).abs()).fold(0.0, f64::max);
        let slopes = self.derivative(&x);
        Ok((Corrector { values: x, slopes, residual }, s[0]))
    }
}

fn is_zero(v: &[f64]) -> bool {
    v.iter().all(|&x| x == 0.0)
}

/// All correctors for `ν, ν' ∈ {1..5}`.
pub fn alpha_and_correctors(profile: &WaveProfile, adjoint: &AdjointProfile) -> Result<CorrectorSet> {
    let (sh, sv) = profile
        .direction()
        .ok_or_else(|| Error::Precondition("correctors need an integer direction".into()))?;
    let (sigma, tau) = cross_weights(sh, sv);
    let a = profile.linearization();
    let lu = a.factor()?;
    let sv_ = Solver { profile, a, lu, tails: profile.tails().homogeneous(), h: profile.h() };
    let n = profile.phi.len();
    let dphi = &profile.dphi;
    let mut max_multiplier: f64 = 0.0;

    let mut alpha1 = [0.0; 5];
    let mut p1 = Vec::with_capacity(5);
    for nu in 0..5 {
        let t = sv_.shift(dphi, tau[nu]);
        alpha1[nu] = adjoint.pair(&t);
        let f: Vec<f64> = t.iter().zip(dphi).map(|(a, b)| a - alpha1[nu] * b).collect();
        if nu == 4 || is_zero(&f) {
            p1.push(Corrector::zero(n));
            continue;
        }
        let (c, s) = sv_.solve(&f)?;
        max_multiplier = max_multiplier.max(s.abs());
        p1.push(c);
    }
    let dp1: Vec<Vec<f64>> = p1.iter().map(|c| c.slopes.clone()).collect();

    let mut alpha2_p = [[0.0; 5]; 5];
    let mut alpha2_q = [[0.0; 5]; 5];
    let mut p2 = Vec::with_capacity(25);
    let mut q2 = Vec::with_capacity(25);
    for nu in 0..5 {
        for nup in 0..5 {
            let shifted = sv_.shift(&p1[nu].values, tau[nup]);
            let fp: Vec<f64> = (0..n).map(|k| alpha1[nu] * p1[nup].values[k] - shifted[k]).collect();
            alpha2_p[nu][nup] = adjoint.pair(&fp);
            let fp: Vec<f64> = (0..n).map(|k| fp[k] - alpha2_p[nu][nup] * dphi[k]).collect();
            let shifted_d = sv_.shift(&dp1[nu], tau[nup]);
            let fq: Vec<f64> = (0..n).map(|k| -alpha1[nu] * dp1[nup][k] + shifted_d[k]).collect();
            alpha2_q[nu][nup] = adjoint.pair(&fq);
            let fq: Vec<f64> = (0..n).map(|k| fq[k] - alpha2_q[nu][nup] * dphi[k]).collect();
            for (f, out) in [(fp, &mut p2), (fq, &mut q2)] {
                if is_zero(&f) {
                    out.push(Corrector::zero(n));
                } else {
                    let (c, s) = sv_.solve(&f)?;
                    max_multiplier = max_multiplier.max(s.abs());
                    out.push(c);
                }
            }
        }
    }
    Ok(CorrectorSet { sigma, tau, alpha1, alpha2_p, alpha2_q, p1, p2, q2, max_multiplier })
}

impl Corrector {
    /// `(x, x')` at `ξ`, decaying exponentially off the grid.
    pub fn eval(&self, profile: &WaveProfile, xi: f64) -> (f64, f64) {
        let t = profile.tails().homogeneous();
        hermite_eval(&profile.grid, &self.values, &self.slopes, &t, xi)
    }
}
