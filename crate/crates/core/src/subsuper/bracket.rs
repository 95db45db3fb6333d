//! Entire-solution bracket: two counter-propagating waves glued at `n = 0`,
//! with the phase correction `Ξ(t)` that blows up at `t = -T₀`.

use serde::{Deserialize, Serialize};

use super::residual::{residual, Candidate, CandidateKind, Neighbourhood, ResidualSummary, Side};
use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::nonlinearity::Reaction;
use crate::wave::WaveProfile;

/// Normalisation data: the profile is used as `Φ̃(ξ) = Φ(ξ + offset)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BracketShift {
    pub offset: f64,
    /// Largest `ξ₀` with `Φ'' > 0` on `(-∞, ξ₀]` (unshifted).
    pub convex_end: f64,
    /// `Φ⁻¹(a)` (unshifted).
    pub detuning_point: f64,
    /// Decay rate of `Φ - C⁻e^{η⁻ξ}` in excess of `η⁻`.
    pub kappa_fit: f64,
    /// `η₀ = min(η⁻, κ_fit)`.
    pub eta0: f64,
}

fn crossing(xs: &[f64], ys: &[f64], level: f64) -> Option<f64> {
    let k = ys.windows(2).position(|w| (w[0] - level) * (w[1] - level) <= 0.0 && w[0] != w[1])?;
    let s = (level - ys[k]) / (ys[k + 1] - ys[k]);
    Some(xs[k] + s * (xs[k + 1] - xs[k]))
}

fn slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 8 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Rate `κ` of `Φ - C⁻e^{ηξ} ∝ e^{(η+κ)ξ}` in the left tail, from the
/// log-slope of `d/dξ [(Φ - lo) e^{-ηξ}]`. Here `η` is the decay rate of
/// the grid solution in its far tail, which differs from `η⁻` at the
/// scheme's order and would otherwise swamp the fit.
pub fn fit_kappa(profile: &WaveProfile) -> Option<f64> {
    let (lo, _) = profile.limits();
    let xs = profile.grid.points();
    let h = profile.h();
    let far: Vec<(f64, f64)> = xs
        .iter()
        .zip(&profile.phi)
        .filter(|(_, &u)| u - lo > 1e-11 && u - lo < 1e-8)
        .map(|(&x, &u)| (x, (u - lo).ln()))
        .collect();
    let eta = slope(&far)?;
    let scaled: Vec<f64> = xs.iter().zip(&profile.phi).map(|(&x, &u)| (u - lo) * (-eta * x).exp()).collect();
    let pts: Vec<(f64, f64)> = (1..xs.len() - 1)
        .filter_map(|k| {
            let u = profile.phi[k] - lo;
            let d = (scaled[k + 1] - scaled[k - 1]) / (2.0 * h);
            let resolved = d.abs() * h > 1e-9 * scaled[k];
            (u > 1e-7 && u < 1e-2 && d != 0.0 && resolved).then(|| (xs[k], d.abs().ln()))
        })
        .collect();
    slope(&pts)
}

/// Places `Φ̃(0) = a` and checks `Φ̃'' > 0` on `ξ ≤ 0`.
pub fn bracket_shift(profile: &WaveProfile) -> Result<BracketShift> {
    if !(profile.c > 0.0) {
        return Err(Error::Precondition(format!("bracket needs c > 0 (got {})", profile.c)));
    }
    let xs = profile.grid.points();
    let first_bad = profile.d2phi.iter().position(|&v| !(v > 0.0)).unwrap_or(xs.len());
    if first_bad == 0 {
        return Err(Error::Precondition("Φ'' is not positive at the left end".into()));
    }
    let convex_end = xs[first_bad - 1];
    let detuning_point = crossing(&xs, &profile.phi, profile.nl.a)
        .ok_or_else(|| Error::Precondition("profile does not cross the detuning".into()))?;
    if convex_end < detuning_point {
        return Err(Error::Precondition(format!(
            "convexity ends at ξ₀ = {convex_end:.4} before Φ⁻¹(a) = {detuning_point:.4}"
        )));
    }
    // without a resolvable second-order tail, fall back to η⁻
    let kappa_fit = fit_kappa(profile).unwrap_or(profile.eta_minus).max(0.0);
    Ok(BracketShift {
        offset: detuning_point,
        convex_end,
        detuning_point,
        kappa_fit,
        eta0: profile.eta_minus.min(kappa_fit),
    })
}

/// `u⁻_n = Φ̃(n+ct-Ξ) - Φ̃(-n+ct-Ξ)` for `n ≥ 0`, `0` for `n < 0`;
/// `u⁺_n = Φ̃(n+ct+Ξ) + Φ̃(-n+ct+Ξ)` for `n ≥ 0`, `2Φ̃(ct+Ξ)` for `n < 0`.
pub struct EntireBracket<'a> {
    pub profile: &'a WaveProfile,
    pub shift: BracketShift,
    pub m0: f64,
    pub side: Side,
    direction: (i64, i64),
}

impl<'a> EntireBracket<'a> {
    pub fn new(profile: &'a WaveProfile, shift: BracketShift, m0: f64, side: Side) -> Result<Self> {
        let direction = profile
            .direction()
            .ok_or_else(|| Error::Precondition("bracket needs an integer direction".into()))?;
        if !(m0 > 0.0) {
            return Err(Error::Domain(format!("M₀ = {m0} must be positive")));
        }
        Ok(Self { profile, shift, m0, side, direction })
    }

    /// `-T₀ = ln(c/M₀)/(η₀c)`.
    pub fn blowup_time(&self) -> f64 {
        (self.profile.c / self.m0).ln() / (self.shift.eta0 * self.profile.c)
    }

    /// `Ξ(t) = -(1/η₀) ln(1 - (M₀/c) e^{η₀ct})`.
    pub fn big_xi(&self, t: f64) -> f64 {
        let (c, e) = (self.profile.c, self.shift.eta0);
        -(-(self.m0 / c) * (e * c * t).exp()).ln_1p() / e
    }

    /// `Ξ̇ = M₀ e^{η₀(ct + Ξ)}`.
    pub fn dbig_xi(&self, t: f64) -> f64 {
        let e = self.shift.eta0;
        self.m0 * (e * (self.profile.c * t + self.big_xi(t))).exp()
    }

    fn phi(&self, x: f64) -> (f64, f64) {
        self.profile.eval(x + self.shift.offset)
    }
}

impl Candidate for EntireBracket<'_> {
    fn kind(&self) -> CandidateKind {
        CandidateKind::EntireBracket
    }

    fn side(&self) -> Side {
        self.side
    }

    fn lattice(&self) -> Neighbourhood {
        Neighbourhood::Cross { sh: self.direction.0, sv: self.direction.1 }
    }

    fn value(&self, (n, _): Site, t: f64) -> f64 {
        let base = self.profile.c * t + self.side.sign() * self.big_xi(t);
        let nf = n as f64;
        match self.side {
            Side::Sub if n < 0 => 0.0,
            Side::Sub => self.phi(nf + base).0 - self.phi(-nf + base).0,
            Side::Super if n < 0 => 2.0 * self.phi(base).0,
            Side::Super => self.phi(nf + base).0 + self.phi(-nf + base).0,
        }
    }

    fn time_derivative(&self, (n, _): Site, t: f64) -> f64 {
        let s = self.side.sign();
        let base = self.profile.c * t + s * self.big_xi(t);
        let rate = self.profile.c + s * self.dbig_xi(t);
        let nf = n as f64;
        rate * match self.side {
            Side::Sub if n < 0 => 0.0,
            Side::Sub => self.phi(nf + base).1 - self.phi(-nf + base).1,
            Side::Super if n < 0 => 2.0 * self.phi(base).1,
            Side::Super => self.phi(nf + base).1 + self.phi(-nf + base).1,
        }
    }

    fn time_domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, self.blowup_time())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BracketSearch {
    pub shift: BracketShift,
    pub m0: f64,
    /// Residual checked on `t ≤ -T*`.
    pub t_star: f64,
    pub blowup_time: f64,
    pub sub: ResidualSummary,
    pub sup: ResidualSummary,
    pub passed: bool,
    /// `(M₀, T*, sub passed, super passed)` per attempt.
    pub attempts: Vec<(f64, f64, bool, bool)>,
}

/// Sites and times of one bracket check: `t ∈ [-T* - span, -T*]`, `n` from
/// just behind the glue line to beyond both fronts.
pub fn bracket_samples(profile: &WaveProfile, t_star: f64, span: f64, n_times: usize, reach: f64) -> (Vec<Site>, Vec<f64>) {
    let times = super::residual::linspace(-t_star - span, -t_star, n_times);
    let far = (profile.c * (t_star + span)).abs() + reach;
    let sites = (-4..=far.ceil() as i64).map(|n| (n, 0)).collect();
    (sites, times)
}

/// Scans `M₀` (outer) and `T*` (inner, as offsets past `T₀`) until both
/// sides pass. Returns the last attempt if none does.
pub fn search_bracket(
    profile: &WaveProfile,
    nl: &dyn Reaction,
    m0s: &[f64],
    t_offsets: &[f64],
    span: f64,
    tolerance: f64,
) -> Result<BracketSearch> {
    let shift = bracket_shift(profile)?;
    let mut attempts = Vec::new();
    let mut last = None;
    for &m0 in m0s {
        for &dt in t_offsets {
            let sub = EntireBracket::new(profile, shift, m0, Side::Sub)?;
            let sup = EntireBracket::new(profile, shift, m0, Side::Super)?;
            let t_star = -sub.blowup_time() + dt;
            let (sites, times) = bracket_samples(profile, t_star, span, 41, 30.0);
            let rs = residual(&sub, &sub.lattice(), nl, &sites, &times, tolerance)?;
            let rp = residual(&sup, &sup.lattice(), nl, &sites, &times, tolerance)?;
            attempts.push((m0, t_star, rs.passed(), rp.passed()));
            let passed = rs.passed() && rp.passed();
            let found = BracketSearch {
                shift,
                m0,
                t_star,
                blowup_time: sub.blowup_time(),
                sub: rs.summary,
                sup: rp.summary,
                passed,
                attempts: Vec::new(),
            };
            last = Some(found);
            if passed {
                break;
            }
        }
        if last.as_ref().is_some_and(|s| s.passed) {
            break;
        }
    }
    let mut out = last.ok_or_else(|| Error::Config("bracket search needs at least one M₀ and T*".into()))?;
    out.attempts = attempts;
    Ok(out)
}
