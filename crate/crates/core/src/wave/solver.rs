//! Newton iteration for `(Φ, c)` with a phase condition.

use serde::{Deserialize, Serialize};

use super::exponents::{char_exponents, exponent_sensitivity};
use super::operator::{apply, assemble, mfde_stencil};
use super::tails::fit_tails;
use super::WaveProfile;
use crate::error::{Error, Result};
use crate::grid::{apply_stencil, shift_stencil, Grid, Scheme, Tails};
use crate::linalg::{norm_inf, Bordered};
use crate::nonlinearity::{Branch, Nonlinearity, Reaction};

/// Value imposed at `ξ = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
pub enum Phase {
    /// Midpoint of the two limits (½ for the cubic).
    #[default]
    Midpoint,
    Value(f64),
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub half_width: f64,
    pub step: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub scheme: Scheme,
    pub phase: Phase,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { half_width: 40.0, step: 0.05, tol: 1e-10, max_iter: 60, scheme: Scheme::Upwind, phase: Phase::Midpoint }
    }
}

impl SolveOptions {
    pub fn new(half_width: f64, step: f64, tol: f64) -> Self {
        Self { half_width, step, tol, ..Self::default() }
    }
}

const PIN_SPEED: f64 = 1e-6;
const PIN_PLATEAU: f64 = 0.05;

/// Fraction of grid intervals inside the transition region (values between
/// 1% and 99% of the way across) on which the profile gains less than a
/// thousandth of the mean increment there.
pub fn plateau_fraction(phi: &[f64], limits: (f64, f64)) -> f64 {
    let (lo, hi) = limits;
    let span = hi - lo;
    let inside: Vec<f64> = phi
        .windows(2)
        .filter(|w| {
            let r = (w[0] - lo) / span;
            r > 0.01 && r < 0.99
        })
        .map(|w| w[1] - w[0])
        .collect();
    if inside.is_empty() {
        return 1.0;
    }
    let mean = inside.iter().sum::<f64>() / inside.len() as f64;
    inside.iter().filter(|&&d| d < 1e-3 * mean).count() as f64 / inside.len() as f64
}

/// Failure to converge at (numerically) zero speed is reported as pinning.
fn stalled(phi: &[f64], c: f64, limits: (f64, f64), iterations: usize, residual: f64) -> Error {
    if c.abs() < PIN_SPEED {
        Error::Pinning { speed: c, plateau: plateau_fraction(phi, limits) }
    } else {
        Error::NoConvergence { iterations, residual }
    }
}

struct Problem<'a> {
    nl: &'a Nonlinearity,
    shifts: [f64; 4],
    grid: Grid,
    scheme: Scheme,
    target: f64,
}

struct State {
    f: Vec<f64>,
    tails: Tails,
    deta: (f64, f64),
    norm: f64,
}

impl Problem<'_> {
    fn state(&self, phi: &[f64], c: f64) -> Result<State> {
        let (lo, hi) = self.nl.limits();
        let eta = char_exponents(c, &self.shifts, self.nl.dg(lo), self.nl.dg(hi))?;
        let deta = exponent_sensitivity(c, &self.shifts, eta);
        let tails = Tails { lo, hi, eta_left: eta.0, eta_right: eta.1 };
        let h = self.grid.step;
        let st = mfde_stencil(c, &self.shifts, self.scheme, h);
        let mut f = apply(&st, phi, &tails, h);
        for (fk, &u) in f.iter_mut().zip(phi) {
            *fk += self.nl.g(u);
        }
        let k0 = self.grid.zero_index();
        let norm = norm_inf(&f).max((phi[k0] - self.target).abs());
        if !norm.is_finite() {
            return Err(Error::Domain("non-finite MFDE residual".into()));
        }
        Ok(State { f, tails, deta, norm })
    }

    /// `∂F/∂c`, including the dependence of the tail exponents on `c`.
    fn speed_column(&self, phi: &[f64], c: f64, s: &State) -> Vec<f64> {
        let h = self.grid.step;
        let n = phi.len();
        let d = apply_stencil(phi, &self.scheme.derivative(h, c), &s.tails, h);
        let st = mfde_stencil(c, &self.shifts, self.scheme, h);
        let (lo, hi) = (s.tails.lo, s.tails.hi);
        (0..n)
            .map(|k| {
                let mut acc = -d[k];
                for &(o, w) in &st {
                    let j = k as isize + o;
                    if j < 0 {
                        let x = j as f64 * h;
                        acc += w * (phi[0] - lo) * x * (s.tails.eta_left * x).exp() * s.deta.0;
                    } else if j as usize >= n {
                        let x = (j - n as isize + 1) as f64 * h;
                        acc -= w * (phi[n - 1] - hi) * x * (-s.tails.eta_right * x).exp() * s.deta.1;
                    }
                }
                acc
            })
            .collect()
    }
}

fn seed(grid: &Grid, sigma: f64, a: f64, limits: (f64, f64), target: f64) -> (Vec<f64>, f64) {
    let (lo, hi) = limits;
    let w = 2.0 * std::f64::consts::SQRT_2 * sigma;
    let r = ((target - lo) / (hi - lo)).clamp(1e-6, 1.0 - 1e-6);
    let x0 = -w * (2.0 * r - 1.0).atanh();
    let phi = grid
        .points()
        .iter()
        .map(|&x| lo + (hi - lo) * 0.5 * (1.0 + ((x - x0) / w).tanh()))
        .collect();
    (phi, sigma * std::f64::consts::SQRT_2 * (0.5 - a))
}

/// Solves the MFDE for shifts `{±σ_h, ±σ_v}` (real), starting from `start`
/// when given and from a tanh front otherwise.
pub fn solve_mfde(
    nl: &Nonlinearity,
    sigma: (f64, f64),
    opts: &SolveOptions,
    start: Option<&WaveProfile>,
) -> Result<WaveProfile> {
    let smax = sigma.0.abs().max(sigma.1.abs());
    if opts.half_width < 20.0 * smax.max(1.0) - 1e-9 {
        return Err(Error::Precondition(format!("L = {} < 20·max(1, σ)", opts.half_width)));
    }
    if opts.step > 0.1 + 1e-12 {
        return Err(Error::Precondition(format!("h = {} > 0.1", opts.step)));
    }
    let grid = Grid::new(opts.half_width, opts.step)?;
    let (lo, hi) = nl.limits();
    let target = match opts.phase {
        Phase::Midpoint => 0.5 * (lo + hi),
        Phase::Value(v) => v,
    };
    let shifts = [sigma.0, sigma.1, -sigma.0, -sigma.1];
    let pb = Problem { nl, shifts, grid, scheme: opts.scheme, target };
    let norm_sigma = sigma.0.hypot(sigma.1);
    let (mut phi, mut c) = match start {
        Some(p) => {
            let (plo, phi_) = p.limits();
            let map = |v: f64| lo + (hi - lo) * (v - plo) / (phi_ - plo);
            (grid.points().iter().map(|&x| map(p.phi_at(x))).collect(), p.c)
        }
        None => seed(&grid, norm_sigma, nl.a, (lo, hi), target),
    };
    let h = grid.step;
    let k0 = grid.zero_index();
    let mut state = pb.state(&phi, c)?;
    let mut iterations = 0;
    while state.norm >= opts.tol {
        if iterations >= opts.max_iter {
            return Err(stalled(&phi, c, (lo, hi), iterations, state.norm));
        }
        iterations += 1;
        let diag: Vec<f64> = phi.iter().map(|&u| nl.dg(u)).collect();
        let jac = assemble(&mfde_stencil(c, &shifts, opts.scheme, h), &diag, &state.tails, h);
        let lu = jac.factor()?;
        let mut pin = vec![0.0; phi.len()];
        pin[k0] = 1.0;
        let bordered = Bordered {
            a: &jac,
            lu: &lu,
            b: vec![pb.speed_column(&phi, c, &state)],
            c: vec![pin],
            d: vec![vec![0.0]],
        };
        let rhs: Vec<f64> = state.f.iter().map(|v| -v).collect();
        let (dx, dc) = bordered.solve(&rhs, &[target - phi[k0]], 2)?;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = phi.iter().zip(&dx).map(|(p, d)| p + lambda * d).collect();
            let tc = c + lambda * dc[0];
            if let Ok(s) = pb.state(&trial, tc) {
                if s.norm < (1.0 - 1e-4 * lambda) * state.norm || (s.norm < state.norm && lambda < 1e-2) {
                    phi = trial;
                    c = tc;
                    state = s;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-4 {
                return Err(stalled(&phi, c, (lo, hi), iterations, state.norm));
            }
        }
    }
    if c.abs() < PIN_SPEED {
        let plateau = plateau_fraction(&phi, (lo, hi));
        if plateau > PIN_PLATEAU {
            return Err(Error::Pinning { speed: c, plateau });
        }
    }
    Ok(finish(nl, sigma, opts.scheme, grid, phi, c, state, iterations))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    nl: &Nonlinearity,
    sigma: (f64, f64),
    scheme: Scheme,
    grid: Grid,
    phi: Vec<f64>,
    c: f64,
    state: State,
    iterations: usize,
) -> WaveProfile {
    let h = grid.step;
    let tails = state.tails;
    let dphi = apply_stencil(&phi, &scheme.derivative(h, c), &tails, h);
    let hom = tails.homogeneous();
    let d2phi = if c.abs() > PIN_SPEED {
        let mut shifted = vec![0.0; phi.len()];
        for s in [sigma.0, sigma.1, -sigma.0, -sigma.1] {
            let st = shift_stencil(s, h);
            for (acc, v) in shifted.iter_mut().zip(apply_stencil(&dphi, &st, &hom, h)) {
                *acc += v;
            }
        }
        (0..phi.len()).map(|k| (shifted[k] - 4.0 * dphi[k] + nl.dg(phi[k]) * dphi[k]) / c).collect()
    } else {
        apply_stencil(&dphi, &Scheme::Central.derivative(h, c), &hom, h)
    };
    let tail_fit = fit_tails(&grid, &phi, nl.limits(), (tails.eta_left, tails.eta_right));
    WaveProfile {
        grid,
        phi,
        dphi,
        d2phi,
        c,
        eta_minus: tails.eta_left,
        eta_plus: tails.eta_right,
        c_minus: tail_fit.c_minus,
        c_plus: tail_fit.c_plus,
        tail_fit,
        sigma,
        scheme,
        nl: *nl,
        residual: state.norm,
        iterations,
    }
}

/// Profile for the integer direction `(σ_h, σ_v)`.
pub fn solve_profile(nl: &Nonlinearity, sh: i64, sv: i64, half_width: f64, step: f64, tol: f64) -> Result<WaveProfile> {
    if crate::lattice::gcd(sh, sv) != 1 {
        return Err(Error::Domain(format!("direction ({sh},{sv}) needs gcd 1")));
    }
    solve_mfde(nl, (sh as f64, sv as f64), &SolveOptions::new(half_width, step, tol), None)
}

/// Profile for the distorted nonlinearity `g±δ`, continued from the
/// undistorted profile.
pub fn solve_distorted(
    a: f64,
    delta: f64,
    branch: Branch,
    sigma: (f64, f64),
    opts: &SolveOptions,
    start: Option<&WaveProfile>,
) -> Result<WaveProfile> {
    let nl = Nonlinearity::distorted(a, delta, branch)?;
    solve_mfde(&nl, sigma, opts, start)
}

/// Profile with shifts `{±cos ζ, ±sin ζ}`.
pub fn solve_angle(nl: &Nonlinearity, zeta: f64, opts: &SolveOptions, start: Option<&WaveProfile>) -> Result<WaveProfile> {
    let (s, c) = zeta.sin_cos();
    solve_mfde(nl, (c, s), opts, start)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_fraction_flags_staircases() {
        let smooth: Vec<f64> = (0..200).map(|k| 0.5 * (1.0 + ((k as f64 - 100.0) / 20.0).tanh())).collect();
        assert!(plateau_fraction(&smooth, (0.0, 1.0)) < 1e-9);
        let stairs: Vec<f64> = smooth.iter().map(|v| (v * 10.0).floor() / 10.0).collect();
        assert!(plateau_fraction(&stairs, (0.0, 1.0)) > 0.5);
    }

    #[test]
    fn converges_on_a_coarse_grid() {
        let nl = Nonlinearity::cubic(0.25).unwrap();
        let opts = SolveOptions { step: 0.1, half_width: 20.0, ..SolveOptions::default() };
        let p = solve_mfde(&nl, (1.0, 0.0), &opts, None).unwrap();
        assert!(p.c > 0.0 && p.residual < 1e-10);
        assert!(p.is_monotone());
        assert!((p.phi[p.grid.zero_index()] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_short_domains() {
        let nl = Nonlinearity::cubic(0.25).unwrap();
        let opts = SolveOptions { half_width: 30.0, ..SolveOptions::default() };
        assert!(matches!(solve_mfde(&nl, (2.0, 1.0), &opts, None), Err(Error::Precondition(_))));
    }
}
