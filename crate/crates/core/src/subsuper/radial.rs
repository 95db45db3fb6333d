//! Expanding radial sub-solution from distorted angle-dependent profiles,
//! composed with a stretch `h` that flattens the inside to a plateau.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::residual::{linspace, residual_pairs, Candidate, CandidateKind, Neighbourhood, ResidualSummary, Side};
use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::nonlinearity::{Branch, Nonlinearity, Reaction};
use crate::wave::{solve_angle, SolveOptions, WaveProfile};

/// `h(ξ) = 3 + ξ + ℓ` for `ξ ≤ -ℓ`, `3 + ℓ/2 + ½ℓ⁻³(ξ⁴ + 2ℓξ³)` on
/// `[-ℓ, 0]`, `h∞ = 3 + ℓ/2` for `ξ ≥ 0`, with `ℓ = 3/(2δ_h)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Stretch {
    pub delta_h: f64,
    pub ell: f64,
    /// `h(-L) = 0`, `L = ℓ + 3`.
    pub big_l: f64,
    pub h_inf: f64,
}

impl Stretch {
    pub fn new(delta_h: f64) -> Result<Self> {
        if !(delta_h > 0.0 && delta_h <= 0.5) {
            return Err(Error::Domain(format!("δ_h = {delta_h} outside (0, 1/2]")));
        }
        let ell = 1.5 / delta_h;
        Ok(Self { delta_h, ell, big_l: ell + 3.0, h_inf: 3.0 + 0.5 * ell })
    }

    /// `(h, h', h'')`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let l = self.ell;
        if x <= -l {
            (3.0 + x + l, 1.0, 0.0)
        } else if x < 0.0 {
            let k = 0.5 / (l * l * l);
            (
                3.0 + 0.5 * l + k * (x.powi(4) + 2.0 * l * x.powi(3)),
                k * (4.0 * x.powi(3) + 6.0 * l * x * x),
                k * (12.0 * x * x + 12.0 * l * x),
            )
        } else {
            (self.h_inf, 0.0, 0.0)
        }
    }
}

/// Distorted profiles `Φ⁻_{ζ;δ}` on `ζ ∈ [0, π/4]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AngleTable {
    pub delta: f64,
    pub zetas: Vec<f64>,
    pub profiles: Vec<WaveProfile>,
}

/// `ζ` folded into `[0, π/4]` by the lattice symmetries.
pub fn fold_angle(zeta: f64) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let z = zeta.rem_euclid(FRAC_PI_2);
    z.min(FRAC_PI_2 - z)
}

impl AngleTable {
    pub fn build(a: f64, delta: f64, n_angles: usize, opts: &SolveOptions) -> Result<Self> {
        if n_angles < 2 {
            return Err(Error::Config("angle table needs at least two angles".into()));
        }
        let nl = Nonlinearity::distorted(a, delta, Branch::Minus)?;
        let zetas = linspace(0.0, std::f64::consts::FRAC_PI_4, n_angles);
        let seed = solve_angle(&nl, 0.0, opts, None)?;
        let mut profiles: Vec<WaveProfile> =
            zetas[1..].par_iter().map(|&z| solve_angle(&nl, z, opts, Some(&seed))).collect::<Result<_>>()?;
        profiles.insert(0, seed);
        Ok(Self { delta, zetas, profiles })
    }

    pub fn min_speed(&self) -> f64 {
        self.profiles.iter().map(|p| p.c).fold(f64::INFINITY, f64::min)
    }

    /// Bracketing index and weight of the folded angle.
    fn locate(&self, zeta: f64) -> (usize, f64) {
        let z = fold_angle(zeta);
        let n = self.zetas.len();
        let step = self.zetas[n - 1] / (n - 1) as f64;
        let k = ((z / step).floor() as usize).min(n - 2);
        (k, ((z - self.zetas[k]) / step).clamp(0.0, 1.0))
    }
}

/// The table shifted so every profile takes the common value `Φ_∞` at
/// `h∞` and is concave on `ξ ≥ 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShiftedTable {
    pub table: AngleTable,
    pub h_inf: f64,
    pub tau_star: f64,
    pub phi_inf: f64,
    pub taus: Vec<f64>,
}

/// First grid point beyond which `Φ'' ≤ 0` and `Φ ≥ 1 - 2δ`. Curvature is
/// only trusted while `Φ` is resolvably below its upper limit; beyond that
/// the exponential tail is concave.
fn concave_start(p: &WaveProfile, delta: f64) -> f64 {
    let xs = p.grid.points();
    let (_, hi) = p.limits();
    let n = xs.len();
    let resolved = |k: usize| hi - p.phi[k] > 1e-8;
    let last_convex = (0..n).rev().find(|&k| resolved(k) && p.d2phi[k] > 0.0).map_or(0, |k| (k + 1).min(n - 1));
    let high = (0..n).find(|&k| p.phi[k] >= 1.0 - 2.0 * delta).unwrap_or(n - 1);
    xs[last_convex.max(high)]
}

fn solve_level(p: &WaveProfile, level: f64, lo: f64) -> Result<f64> {
    let mut a = lo;
    let mut b = lo + 1.0;
    while p.phi_at(b) < level {
        b += 2.0 * (b - a);
        if b - lo > 1e4 {
            return Err(Error::NoConvergence { iterations: 0, residual: level - p.phi_at(b) });
        }
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if p.phi_at(m) < level {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-13 * (1.0 + m.abs()) {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

impl ShiftedTable {
    pub fn new(table: AngleTable, h_inf: f64) -> Result<Self> {
        let delta = table.delta;
        let tau_star = table.profiles.iter().map(|p| concave_start(p, delta)).fold(f64::NEG_INFINITY, f64::max);
        let phi_inf = table.profiles.iter().map(|p| p.phi_at(tau_star + h_inf)).fold(f64::NEG_INFINITY, f64::max);
        let taus = table
            .profiles
            .iter()
            .map(|p| solve_level(p, phi_inf, tau_star).map(|x| x - h_inf))
            .collect::<Result<_>>()?;
        Ok(Self { table, h_inf, tau_star, phi_inf, taus })
    }

    /// `(Φ_{ζ;δ,h∞}, Φ'_{ζ;δ,h∞})` at `x`, linear in `ζ` between table angles.
    pub fn eval(&self, zeta: f64, x: f64) -> (f64, f64) {
        let (k, w) = self.table.locate(zeta);
        let (a, da) = self.table.profiles[k].eval(x + self.taus[k]);
        if w == 0.0 {
            return (a, da);
        }
        let (b, db) = self.table.profiles[k + 1].eval(x + self.taus[k + 1]);
        ((1.0 - w) * a + w * b, (1.0 - w) * da + w * db)
    }
}

/// `u_ij(t) = Φ_{ζ_ij;δ,h∞}(h(ρ + ct - R_ij))`.
pub struct PlateauRadial<'a> {
    pub shifted: &'a ShiftedTable,
    pub stretch: Stretch,
    pub rho: f64,
    pub c: f64,
}

impl<'a> PlateauRadial<'a> {
    pub fn new(shifted: &'a ShiftedTable, delta_h: f64, rho: f64, c_target: f64) -> Result<Self> {
        let cmin = shifted.table.min_speed();
        if !(c_target > 0.0 && c_target < cmin) {
            return Err(Error::Precondition(format!("target speed {c_target} must lie in (0, {cmin})")));
        }
        let stretch = Stretch::new(delta_h)?;
        if (stretch.h_inf - shifted.h_inf).abs() > 1e-12 {
            return Err(Error::Config("stretch and shifted table disagree on h∞".into()));
        }
        Ok(Self { shifted, stretch, rho, c: c_target })
    }

    fn polar((i, j): Site) -> (f64, f64) {
        let (x, y) = (i as f64, j as f64);
        (x.hypot(y), y.atan2(x))
    }

    /// Radius where `h = 0` at time `t`.
    pub fn front_radius(&self, t: f64) -> f64 {
        self.rho + self.c * t + self.stretch.big_l
    }

    /// Radius beyond `front_radius` where the shifted profiles cross ½.
    pub fn midpoint_offset(&self) -> f64 {
        self.shifted.taus.iter().fold(0.0, |m: f64, &t| m.max(t))
    }
}

impl Candidate for PlateauRadial<'_> {
    fn kind(&self) -> CandidateKind {
        CandidateKind::PlateauRadial
    }

    fn side(&self) -> Side {
        Side::Sub
    }

    fn lattice(&self) -> Neighbourhood {
        Neighbourhood::Plus
    }

    fn value(&self, s: Site, t: f64) -> f64 {
        let (r, zeta) = Self::polar(s);
        let (h, _, _) = self.stretch.eval(self.rho + self.c * t - r);
        self.shifted.eval(zeta, h).0
    }

    fn time_derivative(&self, s: Site, t: f64) -> f64 {
        let (r, zeta) = Self::polar(s);
        let (h, dh, _) = self.stretch.eval(self.rho + self.c * t - r);
        self.c * dh * self.shifted.eval(zeta, h).1
    }

    fn time_domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

/// Sites in the sector `0 ≤ j ≤ i` with radius from `inner` inside the
/// point `h = 0` to `outer` beyond the transition layer.
pub fn sector_samples(cand: &PlateauRadial<'_>, times: &[f64], inner: f64, outer: f64) -> Vec<(Site, f64)> {
    let mut out = Vec::new();
    for &t in times {
        let rf = cand.front_radius(t);
        let (r0, r1) = ((rf - inner).max(0.0), rf + cand.midpoint_offset() + outer);
        let imax = r1.ceil() as i64;
        for i in 0..=imax {
            for j in 0..=i {
                let r = (i as f64).hypot(j as f64);
                if r >= r0 && r <= r1 {
                    out.push(((i, j), t));
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialSearch {
    pub delta_h: f64,
    pub rho: f64,
    pub c_target: f64,
    pub min_speed: f64,
    pub phi_inf: f64,
    pub summary: ResidualSummary,
    pub passed: bool,
    /// `(δ_h, ρ, max margin, passed)`.
    pub attempts: Vec<(f64, f64, f64, bool)>,
}

/// Scans `δ_h` (outer) and `ρ` (inner) until the sampled residual is
/// non-positive. The table is re-shifted for each `δ_h`.
#[allow(clippy::too_many_arguments)]
pub fn search_radial(
    table: &AngleTable,
    nl: &dyn Reaction,
    c_target: f64,
    delta_hs: &[f64],
    rhos: &[f64],
    times: &[f64],
    outer: f64,
    tolerance: f64,
) -> Result<RadialSearch> {
    let mut attempts = Vec::new();
    let mut last: Option<RadialSearch> = None;
    'outer: for &dh in delta_hs {
        let stretch = Stretch::new(dh)?;
        let shifted = ShiftedTable::new(table.clone(), stretch.h_inf)?;
        for &rho in rhos {
            let cand = PlateauRadial::new(&shifted, dh, rho, c_target)?;
            let pairs = sector_samples(&cand, times, stretch.big_l + 8.0, outer);
            let report = residual_pairs(&cand, &Neighbourhood::Plus, nl, &pairs, tolerance)?;
            let passed = report.passed();
            attempts.push((dh, rho, report.summary.max_margin, passed));
            last = Some(RadialSearch {
                delta_h: dh,
                rho,
                c_target,
                min_speed: table.min_speed(),
                phi_inf: shifted.phi_inf,
                summary: report.summary,
                passed,
                attempts: Vec::new(),
            });
            if passed {
                break 'outer;
            }
        }
    }
    let mut out = last.ok_or_else(|| Error::Config("radial search needs at least one δ_h and ρ".into()))?;
    out.attempts = attempts;
    Ok(out)
}
