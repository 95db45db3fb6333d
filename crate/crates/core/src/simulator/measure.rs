//! Deviation from a travelling wave, front positions and radial speeds.

use serde::{Deserialize, Serialize};

use crate::lattice::{Field, ObstacleLattice};
use crate::wave::WaveProfile;

/// `sup |u_ij(t) - Φ(σ·(i,j) + ct + ϑ)|` over active sites.
pub fn measure_deviation(state: &Field, lattice: &ObstacleLattice, profile: &WaveProfile, phase: f64) -> f64 {
    let (a, b) = profile.sigma;
    let shift = profile.c * state.time + phase;
    lattice
        .active_sites()
        .iter()
        .zip(&state.values)
        .map(|(&(i, j), &u)| (u - profile.phi_at(a * i as f64 + b * j as f64 + shift)).abs())
        .fold(0.0, f64::max)
}

/// Same as [`measure_deviation`], restricted to sites with `σ·(i,j) ≥ n_min`.
pub fn measure_deviation_beyond(state: &Field, lattice: &ObstacleLattice, profile: &WaveProfile, phase: f64, n_min: f64) -> f64 {
    let (a, b) = profile.sigma;
    let shift = profile.c * state.time + phase;
    lattice
        .active_sites()
        .iter()
        .zip(&state.values)
        .filter(|(&(i, j), _)| a * i as f64 + b * j as f64 >= n_min)
        .map(|(&(i, j), &u)| (u - profile.phi_at(a * i as f64 + b * j as f64 + shift)).abs())
        .fold(0.0, f64::max)
}

/// Per row `j`, the first `i` (scanning upward) where `u` crosses `level`,
/// linearly interpolated. Rows without a crossing are omitted.
pub fn measure_front(state: &Field, lattice: &ObstacleLattice, level: f64) -> Vec<(i64, f64)> {
    let w = lattice.window();
    let mut out = Vec::new();
    for j in w.j_min..=w.j_max {
        let mut prev: Option<(i64, f64)> = None;
        for i in w.i_min..=w.i_max {
            let Some(u) = state.get(lattice, (i, j)) else {
                prev = None;
                continue;
            };
            if let Some((ip, up)) = prev {
                if (up - level) * (u - level) <= 0.0 && up != u {
                    out.push((j, ip as f64 + (level - up) / (u - up) * (i - ip) as f64));
                    break;
                }
            }
            prev = Some((i, u));
        }
    }
    out
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Bilinear interpolation of the field at a real point, `None` if a corner
/// is missing.
pub fn sample_bilinear(state: &Field, lattice: &ObstacleLattice, x: f64, y: f64) -> Option<f64> {
    let (i0, j0) = (x.floor() as i64, y.floor() as i64);
    let (s, t) = (x - i0 as f64, y - j0 as f64);
    let f = |i, j| state.get(lattice, (i, j));
    Some(
        (1.0 - s) * (1.0 - t) * f(i0, j0)?
            + s * (1.0 - t) * f(i0 + 1, j0)?
            + (1.0 - s) * t * f(i0, j0 + 1)?
            + s * t * f(i0 + 1, j0 + 1)?,
    )
}

/// Radius along the ray at angle `phi` from the origin where `u` first
/// drops below `level`.
pub fn ray_crossing(state: &Field, lattice: &ObstacleLattice, phi: f64, level: f64, dr: f64) -> Option<f64> {
    let (s, c) = phi.sin_cos();
    let mut r = 0.0;
    let mut prev = sample_bilinear(state, lattice, 0.0, 0.0)?;
    if prev < level {
        return None;
    }
    loop {
        let r1 = r + dr;
        let u = sample_bilinear(state, lattice, r1 * c, r1 * s)?;
        if u < level {
            return Some(r + (prev - level) / (prev - u) * dr);
        }
        prev = u;
        r = r1;
    }
}

/// Front radius per angle bin over time.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RadialHistory {
    pub bins: usize,
    pub level: f64,
    pub rays_per_bin: usize,
    pub times: Vec<f64>,
    /// `radii[k][b]`: mean crossing radius in bin `b` at `times[k]`.
    pub radii: Vec<Vec<Option<f64>>>,
}

impl RadialHistory {
    pub fn new(bins: usize, rays_per_bin: usize, level: f64) -> Self {
        Self { bins, level, rays_per_bin: rays_per_bin.max(1), ..Self::default() }
    }

    /// Centre angle of bin `b`.
    pub fn bin_angle(&self, b: usize) -> f64 {
        (b as f64 + 0.5) * std::f64::consts::TAU / self.bins as f64
    }

    pub fn record(&mut self, state: &Field, lattice: &ObstacleLattice) {
        let width = std::f64::consts::TAU / self.bins as f64;
        let row = (0..self.bins)
            .map(|b| {
                let rs: Option<Vec<f64>> = (0..self.rays_per_bin)
                    .map(|r| {
                        let phi = (b as f64 + (r as f64 + 0.5) / self.rays_per_bin as f64) * width;
                        ray_crossing(state, lattice, phi, self.level, 0.05)
                    })
                    .collect();
                rs.map(|v| v.iter().sum::<f64>() / v.len() as f64)
            })
            .collect();
        self.times.push(state.time);
        self.radii.push(row);
    }

    /// Least-squares speed per bin over records with `t ≥ t_min`.
    pub fn speeds(&self, t_min: f64) -> Vec<Option<f64>> {
        (0..self.bins)
            .map(|b| {
                let pts: Vec<(f64, f64)> = self
                    .times
                    .iter()
                    .zip(&self.radii)
                    .filter(|(&t, _)| t >= t_min)
                    .filter_map(|(&t, row)| row[b].map(|r| (t, r)))
                    .collect();
                ls_slope(&pts)
            })
            .collect()
    }
}

/// Least-squares speed per angle bin of a recorded radial history.
pub fn measure_radial_speed(history: &RadialHistory, t_min: f64) -> Vec<Option<f64>> {
    history.speeds(t_min)
}
