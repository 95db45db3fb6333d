//! Shift-invert tracking of the eigenvalue branch `ω ↦ λ_ω` and the
//! Melnikov coefficients `ν₁ = Im λ'(0)`, `ν₂ = -½ Re λ''(0)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::build_l_omega;
use crate::error::{Error, Result};
use crate::linalg::{dotc, norm2, Banded};
use crate::wave::WaveProfile;

#[derive(Clone, Debug)]
pub struct BranchOptions {
    /// Half-width `δ_ω` of the reported frequency grid.
    pub omega_max: f64,
    pub omega_points: usize,
    /// Base step of the finite differences at `ω = 0`.
    pub omega_fd: f64,
    /// Minimum `|⟨x_prev, x⟩|` between neighbouring eigenvectors.
    pub min_correlation: f64,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self { omega_max: 0.2, omega_points: 21, omega_fd: 1e-2, min_correlation: 0.9 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralBranch {
    pub omega: Vec<f64>,
    #[serde(with = "complex_pairs")]
    pub lambda: Vec<Complex64>,
    pub nu1: f64,
    pub nu2: f64,
    /// `λ'(0)` and `λ''(0)` (Richardson-extrapolated central differences).
    #[serde(with = "complex_pair")]
    pub d1: Complex64,
    #[serde(with = "complex_pair")]
    pub d2: Complex64,
    /// `ν₂ > 0`.
    pub hs: bool,
}

impl SpectralBranch {
    pub fn lambda0(&self) -> Complex64 {
        let k = self.omega.iter().position(|&w| w == 0.0).expect("ω grid contains 0");
        self.lambda[k]
    }
}

mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

mod complex_pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let v = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

fn unit(v: &mut [Complex64]) {
    let n = norm2(v);
    v.iter_mut().for_each(|x| *x /= n);
}

/// Eigenpair of `l` near `mu`, by shift-invert iteration. The shift is
/// moved to the current estimate every few rounds.
pub fn eigen_near(l: &Banded<Complex64>, mu: Complex64, start: &[Complex64]) -> Result<(Complex64, Vec<Complex64>)> {
    const ROUNDS: usize = 80;
    const REFACTOR: usize = 8;
    let mut x = start.to_vec();
    unit(&mut x);
    let factor = |shift: Complex64| {
        let mut m = l.clone();
        m.shift_diagonal(-shift);
        m.factor()
    };
    let mut shift = mu;
    let mut lu = factor(shift)?;
    let mut lambda = mu;
    for it in 0..ROUNDS {
        let y = lu.solve(&x);
        let next = shift + dotc(&y, &x) / dotc(&y, &y);
        x = y;
        unit(&mut x);
        let done = (next - lambda).norm() <= 1e-15 * (1.0 + next.norm());
        lambda = next;
        if done {
            break;
        }
        if it % REFACTOR == REFACTOR - 1 && (lambda - shift).norm() > 1e-10 {
            match factor(lambda) {
                Ok(f) => {
                    lu = f;
                    shift = lambda;
                }
                Err(_) => break,
            }
        }
    }
    let r: Vec<Complex64> = l.matvec(&x).iter().zip(&x).map(|(a, b)| a - lambda * b).collect();
    if norm2(&r) > 1e-8 {
        return Err(Error::NoConvergence { iterations: ROUNDS, residual: norm2(&r) });
    }
    Ok((lambda, x))
}

fn correlation(a: &[Complex64], b: &[Complex64]) -> f64 {
    dotc(a, b).norm() / (norm2(a) * norm2(b))
}

/// Follows `λ_ω` outward from `ω = 0` in both directions.
fn track(profile: &WaveProfile, omegas: &[f64], min_corr: f64) -> Result<Vec<(f64, Complex64)>> {
    let seed: Vec<Complex64> = profile.dphi.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let (l0, x0) = eigen_near(&build_l_omega(profile, 0.0), Complex64::new(0.0, 0.0), &seed)?;
    let mut pos: Vec<f64> = omegas.iter().copied().filter(|&w| w > 0.0).collect();
    pos.sort_by(f64::total_cmp);
    let mut neg: Vec<f64> = omegas.iter().copied().filter(|&w| w < 0.0).collect();
    neg.sort_by(|a, b| b.total_cmp(a));
    let sweep = |ws: Vec<f64>| -> Result<Vec<(f64, Complex64)>> {
        let mut out = Vec::new();
        let (mut lam, mut x) = (l0, x0.clone());
        for w in ws {
            let (nl, nx) = eigen_near(&build_l_omega(profile, w), lam, &x)?;
            let corr = correlation(&x, &nx);
            if corr < min_corr {
                return Err(Error::BranchLost { omega: w, correlation: corr });
            }
            lam = nl;
            x = nx;
            out.push((w, lam));
        }
        Ok(out)
    };
    let (a, b) = rayon::join(|| sweep(pos), || sweep(neg));
    let mut all = a?;
    all.extend(b?);
    if omegas.contains(&0.0) {
        all.push((0.0, l0));
    }
    all.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(all)
}

/// Branch on a uniform grid of `[-δ_ω, δ_ω]` plus `ν₁`, `ν₂`.
pub fn eigen_branch(profile: &WaveProfile, opts: &BranchOptions) -> Result<SpectralBranch> {
    if profile.direction().is_none() {
        return Err(Error::Precondition("spectral data needs an integer direction".into()));
    }
    let m = opts.omega_points.max(3) | 1;
    let half = (m / 2) as f64;
    let mut omegas: Vec<f64> = (0..m).map(|k| opts.omega_max * (k as f64 - half) / half).collect();
    omegas[m / 2] = 0.0;
    let hfd = opts.omega_fd;
    let fd = [-hfd, -0.5 * hfd, 0.5 * hfd, hfd];
    let grid = track(profile, &omegas, opts.min_correlation)?;
    let fd_vals: Vec<Complex64> = fd
        .par_iter()
        .map(|&w| track(profile, &[w], opts.min_correlation).map(|v| v[0].1))
        .collect::<Result<_>>()?;
    let l0 = grid.iter().find(|p| p.0 == 0.0).map(|p| p.1).unwrap_or_default();
    let (lm, lmh, lph, lp) = (fd_vals[0], fd_vals[1], fd_vals[2], fd_vals[3]);
    let d1_h = (lp - lm) / (2.0 * hfd);
    let d1_half = (lph - lmh) / hfd;
    let d2_h = (lp - 2.0 * l0 + lm) / (hfd * hfd);
    let d2_half = (lph - 2.0 * l0 + lmh) / (0.25 * hfd * hfd);
    let d1 = (4.0 * d1_half - d1_h) / 3.0;
    let d2 = (4.0 * d2_half - d2_h) / 3.0;
    let nu2 = -0.5 * d2.re;
    Ok(SpectralBranch {
        omega: grid.iter().map(|p| p.0).collect(),
        lambda: grid.iter().map(|p| p.1).collect(),
        nu1: d1.im,
        nu2,
        d1,
        d2,
        hs: nu2 > 0.0,
    })
}
