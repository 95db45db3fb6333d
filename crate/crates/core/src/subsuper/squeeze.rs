//! Planar candidates `Φ(ξ + sZ(t)) + s z(t)` on the square lattice.

use super::residual::{Candidate, CandidateKind, Neighbourhood, Side};
use super::templates::{Scaled, Template, ZHom};
use crate::lattice::Site;
use crate::wave::WaveProfile;

/// `W_ij = Φ(σ_h i + σ_v j + ct + ϑ + sZ(t)) + s z(t)` with `s = ±1` by side.
///
/// Without a template this is the plain translate of `Φ`; with a distorted
/// profile `Φ^±_δ` it gives the distorted-wave bracket.
pub struct Squeeze1d<'a, T: Template = ZHom> {
    pub profile: &'a WaveProfile,
    pub side: Side,
    pub phase: f64,
    pub z: Option<Scaled<T>>,
}

impl<'a> Squeeze1d<'a, ZHom> {
    pub fn wave(profile: &'a WaveProfile, side: Side, phase: f64) -> Self {
        Self { profile, side, phase, z: None }
    }
}

impl<T: Template> Squeeze1d<'_, T> {
    fn xi(&self, (i, j): Site, t: f64) -> f64 {
        let (a, b) = self.profile.sigma;
        let s = self.side.sign();
        let big_z = self.z.as_ref().map_or(0.0, |z| z.big_z(t));
        a * i as f64 + b * j as f64 + self.profile.c * t + self.phase + s * big_z
    }
}

impl<T: Template> Candidate for Squeeze1d<'_, T> {
    fn kind(&self) -> CandidateKind {
        CandidateKind::Squeeze1d
    }

    fn side(&self) -> Side {
        self.side
    }

    fn lattice(&self) -> Neighbourhood {
        Neighbourhood::Plus
    }

    fn value(&self, site: Site, t: f64) -> f64 {
        let s = self.side.sign();
        let z = self.z.as_ref().map_or(0.0, |z| z.z(t));
        self.profile.phi_at(self.xi(site, t)) + s * z
    }

    fn time_derivative(&self, site: Site, t: f64) -> f64 {
        let s = self.side.sign();
        let (dxi, dz) = match &self.z {
            Some(z) => (self.profile.c + s * z.k_z * z.z(t), z.dz(t)),
            None => (self.profile.c, 0.0),
        };
        let (_, d) = self.profile.eval(self.xi(site, t));
        dxi * d + s * dz
    }

    fn time_domain(&self) -> (f64, f64) {
        match &self.z {
            Some(z) => (z.start, f64::INFINITY),
            None => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

/// `max |continuous residual|` of the interpolated profile on `[-w, w]`,
/// sampled off the grid nodes. This is the floor under which residual
/// signs are not resolved.
pub fn profile_noise(profile: &WaveProfile, half_width: f64) -> f64 {
    let h = profile.h();
    let n = (2.0 * half_width / (0.37 * h)).ceil() as usize;
    (0..=n)
        .map(|k| -half_width + 2.0 * half_width * k as f64 / n as f64)
        .map(|x| profile.continuous_residual(x).abs())
        .fold(0.0, f64::max)
}
