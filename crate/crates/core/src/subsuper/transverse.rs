//! Two-dimensional candidates built from the transverse plateau `θ_l`, the
//! correctors and a `z` template, in the rotated frame `(n, l)`.

use serde::{Deserialize, Serialize};

use super::plateau::{first_differences, second_differences, PlateauParams};
use super::residual::{residual_pairs, Candidate, CandidateKind, Neighbourhood, ResidualReport, Side};
use super::templates::{Scaled, Template};
use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::nonlinearity::Reaction;
use crate::spectral::CorrectorSet;
use crate::wave::WaveProfile;

/// Plateau plus the `z`-coupling constants.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TransverseParams {
    pub plateau: PlateauParams,
    pub k_z: f64,
    pub eta_z: f64,
    /// Amplitude `ε` of `z`.
    pub amplitude: f64,
}

/// Site value in the rotated frame:
///
/// `W = Φ(ξ) - sΣ π◇θ p◇ - sΣ π◇◇θ p◇◇ + Σ π◇θ π◇θ q◇◇ + s z`,
/// `ξ = n + ct + ϑ + s(θ_l + Z)`, with `s = -1` for the sub-solution.
pub struct Transverse2d<'a, T: Template> {
    profile: &'a WaveProfile,
    correctors: Option<&'a CorrectorSet>,
    plateau: Option<PlateauParams>,
    z: Scaled<T>,
    phase: f64,
    side: Side,
    direction: (i64, i64),
    sigma: [i64; 5],
    gap_factor: f64,
}

/// Corrector sums at one `(n, l, t)`.
struct Terms {
    xi: f64,
    w: f64,
    dw: f64,
}

impl<'a, T: Template> Transverse2d<'a, T> {
    /// `plateau = None` switches the transverse structure off and leaves the
    /// squeeze Ansatz `Φ(n + ct + ϑ + sZ) + s z`.
    pub fn new(
        profile: &'a WaveProfile,
        correctors: Option<&'a CorrectorSet>,
        plateau: Option<PlateauParams>,
        z: Scaled<T>,
        eta_z: f64,
        phase: f64,
        side: Side,
    ) -> Result<Self> {
        let direction = profile
            .direction()
            .ok_or_else(|| Error::Precondition("transverse candidate needs an integer direction".into()))?;
        if plateau.is_some() && correctors.is_none() {
            return Err(Error::Config("transverse candidate needs correctors".into()));
        }
        if let Some(p) = plateau {
            if !(p.nu2 > 0.0) {
                return Err(Error::Precondition(format!("ν₂ = {} must be positive", p.nu2)));
            }
        }
        if !(eta_z > 0.0 && eta_z < 1.0) {
            return Err(Error::Domain(format!("η_z = {eta_z} outside (0, 1)")));
        }
        let (sh, sv) = direction;
        let sigma = [sv, -sh, -sv, sh, 0];
        Ok(Self { profile, correctors, plateau, z, phase, side, direction, sigma, gap_factor: 0.5 * eta_z })
    }

    pub fn from_params(
        profile: &'a WaveProfile,
        correctors: &'a CorrectorSet,
        params: &TransverseParams,
        template: T,
        phase: f64,
        side: Side,
    ) -> Result<Self> {
        let z = Scaled { template, amplitude: params.amplitude, start: 1.0, k_z: params.k_z };
        Self::new(profile, Some(correctors), Some(params.plateau), z, params.eta_z, phase, side)
    }

    fn theta(&self, l: i64, t: f64) -> f64 {
        self.plateau.map_or(0.0, |p| p.theta(l as f64, t))
    }

    fn terms(&self, n: i64, l: i64, t: f64) -> Terms {
        let s = self.side.sign();
        let c = self.profile.c;
        let (z, dz, big_z) = (self.z.z(t), self.z.dz(t), self.z.big_z(t));
        let (theta, dtheta) = match self.plateau {
            Some(p) => (p.theta(l as f64, t), p.dtheta(l as f64, t)),
            None => (0.0, 0.0),
        };
        let xi = n as f64 + c * t + self.phase + s * (theta + big_z);
        let dxi = c + s * (dtheta + self.z.k_z * z);
        let (phi, dphi) = self.profile.eval(xi);
        let (mut w, mut shape) = (phi, dphi);
        let mut dw_rest = s * dz;
        if let (Some(p), Some(cs)) = (self.plateau, self.correctors) {
            let a = first_differences(|m| p.theta(m as f64, t), l, &self.sigma);
            let da = first_differences(|m| p.dtheta(m as f64, t), l, &self.sigma);
            let b = second_differences(|m| p.theta(m as f64, t), l, &self.sigma);
            let db = second_differences(|m| p.dtheta(m as f64, t), l, &self.sigma);
            for nu in 0..4 {
                let (x, dx) = cs.p1[nu].eval(self.profile, xi);
                w -= s * a[nu] * x;
                shape -= s * a[nu] * dx;
                dw_rest -= s * da[nu] * x;
                for nup in 0..4 {
                    let (x2, dx2) = cs.p2(nu, nup).eval(self.profile, xi);
                    let (y2, dy2) = cs.q2(nu, nup).eval(self.profile, xi);
                    w += -s * b[nu][nup] * x2 + a[nu] * a[nup] * y2;
                    shape += -s * b[nu][nup] * dx2 + a[nu] * a[nup] * dy2;
                    dw_rest += -s * db[nu][nup] * x2 + (da[nu] * a[nup] + a[nu] * da[nup]) * y2;
                }
            }
        }
        w += s * z;
        Terms { xi, w, dw: dxi * shape + dw_rest }
    }

    /// `ξ̇ = c + s(θ̇ + K_Z z)` at `(l, t)`.
    pub fn xi_rate(&self, l: i64, t: f64) -> f64 {
        let s = self.side.sign();
        let dtheta = self.plateau.map_or(0.0, |p| p.dtheta(l as f64, t));
        self.profile.c + s * (dtheta + self.z.k_z * self.z.z(t))
    }

    /// `ξ_{nl}(t)`.
    pub fn xi(&self, n: i64, l: i64, t: f64) -> f64 {
        let s = self.side.sign();
        n as f64 + self.profile.c * t + self.phase + s * (self.theta(l, t) + self.z.big_z(t))
    }

    /// `|W - s z - Φ(ξ)|`, the size of the corrector terms.
    pub fn deviation(&self, n: i64, l: i64, t: f64) -> f64 {
        let tm = self.terms(n, l, t);
        (tm.w - self.side.sign() * self.z.z(t) - self.profile.phi_at(tm.xi)).abs()
    }

    pub fn direction(&self) -> (i64, i64) {
        self.direction
    }
}

impl<T: Template> Candidate for Transverse2d<'_, T> {
    fn kind(&self) -> CandidateKind {
        CandidateKind::Transverse2d
    }

    fn side(&self) -> Side {
        self.side
    }

    fn lattice(&self) -> Neighbourhood {
        Neighbourhood::Cross { sh: self.direction.0, sv: self.direction.1 }
    }

    fn value(&self, (n, l): Site, t: f64) -> f64 {
        self.terms(n, l, t).w
    }

    fn time_derivative(&self, (n, l): Site, t: f64) -> f64 {
        self.terms(n, l, t).dw
    }

    fn time_domain(&self) -> (f64, f64) {
        (self.z.start.max(1.0), f64::INFINITY)
    }

    fn gap(&self, t: f64) -> f64 {
        self.gap_factor * self.z.z(t)
    }
}

/// `K_Z = factor · max_ξ (g'(Φ) + 1.5η_z + slack)⁺ / Φ'`, at least `1 + slack`.
///
/// Where `g'(Φ) > -1.5η_z` the `z` offset pushes the wrong way and the
/// phase shift `K_Z Z` has to beat it. That region must stay away from the
/// stable states, which needs `1.5η_z + slack < -g'` at both limits.
pub fn choose_kz(profile: &WaveProfile, eta_z: f64, slack: f64, factor: f64) -> Result<f64> {
    let (lo, hi) = profile.limits();
    let room = -profile.nl.dg(lo).max(profile.nl.dg(hi));
    if !(1.5 * eta_z + slack < room) {
        return Err(Error::Precondition(format!(
            "1.5 η_z + slack = {} must stay below -g' = {room} at the stable states",
            1.5 * eta_z + slack
        )));
    }
    let worst = profile
        .phi
        .iter()
        .zip(&profile.dphi)
        .filter(|(_, &d)| d > 0.0)
        .map(|(&u, &d)| (profile.nl.dg(u) + 1.5 * eta_z + slack).max(0.0) / d)
        .fold(0.0, f64::max);
    Ok((factor * worst).max(1.0 + slack))
}

/// Sampling plan in the rotated frame.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransverseSampling {
    pub times: Vec<f64>,
    /// Sites with `|ξ| ≤ xi_half_width` are kept.
    pub xi_half_width: f64,
    /// Transverse extent in units of `√(4ν₂γt)` about `-ν₁t`.
    pub l_spread: f64,
    pub l_points: usize,
    /// `ξ̇ ≥ c/2` is required on `|l| ≤ omega_perp`.
    pub omega_perp: i64,
}

impl Default for TransverseSampling {
    fn default() -> Self {
        Self { times: super::residual::linspace(1.0, 50.0, 25), xi_half_width: 25.0, l_spread: 3.0, l_points: 41, omega_perp: 10 }
    }
}

impl TransverseSampling {
    pub fn pairs<T: Template>(&self, cand: &Transverse2d<'_, T>) -> Vec<(Site, f64)> {
        let c = cand.profile.c;
        let mut out = Vec::new();
        for &t in &self.times {
            let (centre, width) = match cand.plateau {
                Some(p) => (-p.nu1 * t, self.l_spread * (4.0 * p.nu2 * p.gamma * t).sqrt()),
                None => (0.0, 5.0),
            };
            let (lo, hi) = ((centre - width).floor() as i64, (centre + width).ceil() as i64);
            let stride = (((hi - lo) as usize) / self.l_points.max(1)).max(1);
            let mut ls: Vec<i64> = (lo..=hi).step_by(stride).collect();
            ls.push(centre.round() as i64);
            ls.sort_unstable();
            ls.dedup();
            let n0 = -(c * t + cand.phase).round() as i64;
            let w = self.xi_half_width.ceil() as i64 + 1;
            for &l in &ls {
                for n in n0 - w..=n0 + w {
                    if cand.xi(n, l, t).abs() <= self.xi_half_width {
                        out.push(((n, l), t));
                    }
                }
            }
        }
        out
    }
}

/// Outcome of the `γ` search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GammaSearch {
    pub params: TransverseParams,
    /// `(γ, min margin, max margin, passed)` per attempt.
    pub attempts: Vec<(f64, f64, f64, bool)>,
    pub passed: bool,
    /// Residual margin test alone.
    pub margin_passed: bool,
    /// `min ξ̇` over `|l| ≤ Ω_⊥` and the sampled times, to compare with `c/2`.
    pub min_xi_rate: f64,
    /// `sup √t |W - s z - Φ(ξ)|` over the samples.
    pub deviation_scale: f64,
}

/// Doubles `γ` from `params.plateau.gamma` until the margin test passes for
/// the given side and `ξ̇ ≥ c/2` on `|l| ≤ Ω_⊥`, or `gamma_max` is exceeded.
#[allow(clippy::too_many_arguments)]
pub fn tune_gamma<T: Template + Clone>(
    profile: &WaveProfile,
    correctors: &CorrectorSet,
    mut params: TransverseParams,
    template: T,
    side: Side,
    nl: &dyn Reaction,
    sampling: &TransverseSampling,
    tolerance: f64,
    gamma_max: f64,
) -> Result<(GammaSearch, Option<ResidualReport>)> {
    let mut attempts = Vec::new();
    loop {
        let cand = Transverse2d::from_params(profile, correctors, &params, template.clone(), 0.0, side)?;
        let pairs = sampling.pairs(&cand);
        let report = residual_pairs(&cand, &cand.lattice(), nl, &pairs, tolerance)?;
        let w = sampling.omega_perp;
        let min_xi_rate = sampling
            .times
            .iter()
            .flat_map(|&t| (-w..=w).map(move |l| (l, t)))
            .map(|(l, t)| cand.xi_rate(l, t))
            .fold(f64::INFINITY, f64::min);
        let margin_passed = report.passed();
        let passed = margin_passed && min_xi_rate >= 0.5 * profile.c;
        let s = &report.summary;
        attempts.push((params.plateau.gamma, s.min_margin, s.max_margin, passed));
        if passed || 2.0 * params.plateau.gamma > gamma_max {
            let deviation_scale =
                pairs.iter().map(|&((n, l), t)| t.sqrt() * cand.deviation(n, l, t)).fold(0.0, f64::max);
            let search = GammaSearch { params, attempts, passed, margin_passed, min_xi_rate, deviation_scale };
            return Ok((search, Some(report)));
        }
        params.plateau.gamma *= 2.0;
    }
}
