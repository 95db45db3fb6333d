//! Initial fields.

use crate::lattice::{Field, ObstacleLattice, Site};
use crate::wave::WaveProfile;

/// `u_ij(0) = Φ(σ·(i,j) + ϑ)`.
pub fn init_planar_wave(lattice: &ObstacleLattice, profile: &WaveProfile, phase: f64) -> Field {
    let (a, b) = profile.sigma;
    Field::from_fn(lattice, 0.0, |(i, j)| profile.phi_at(a * i as f64 + b * j as f64 + phase))
}

/// `height` on `√(i²+j²) ≤ R`, zero elsewhere.
pub fn init_disk(lattice: &ObstacleLattice, radius: f64, height: f64) -> Field {
    Field::from_fn(lattice, 0.0, |(i, j)| if (i as f64).hypot(j as f64) <= radius { height } else { 0.0 })
}

/// Planar wave with prescribed values on `bumps`; sites outside `Λ` are
/// ignored.
pub fn init_perturbed_wave(lattice: &ObstacleLattice, profile: &WaveProfile, phase: f64, bumps: &[(Site, f64)]) -> Field {
    let mut f = init_planar_wave(lattice, profile, phase);
    for &(s, v) in bumps {
        if let Some(k) = lattice.index(s) {
            f.values[k] = v;
        }
    }
    f
}

/// `lo` on `σ·(i,j) < 0`, `hi` elsewhere.
pub fn init_step(lattice: &ObstacleLattice, lo: f64, hi: f64) -> Field {
    let (sh, sv) = lattice.direction();
    Field::from_fn(lattice, 0.0, |(i, j)| if i * sh + j * sv < 0 { lo } else { hi })
}
