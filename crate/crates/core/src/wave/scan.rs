//! Speeds over a list of rational directions, normalised to `|σ| = 1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::solver::{solve_mfde, SolveOptions};
use super::WaveProfile;
use crate::nonlinearity::Nonlinearity;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanEntry {
    pub direction: (i64, i64),
    /// Angle of `(σ_h, σ_v)` in radians.
    pub zeta: f64,
    /// Speed of the integer-direction MFDE.
    pub c_raw: f64,
    /// `c_raw / |σ|`.
    pub c_zeta: f64,
    pub eta_minus: f64,
    pub eta_plus: f64,
    pub monotone: bool,
    pub residual: f64,
    pub error: Option<String>,
    #[serde(skip)]
    pub profile: Option<WaveProfile>,
}

impl ScanEntry {
    pub fn ok(&self) -> bool {
        self.error.is_none() && self.monotone
    }
}

/// Solves each direction independently (in parallel). Failed or pinned
/// directions are kept with their error and excluded by [`ScanEntry::ok`].
/// The half-width is raised to `20·max(1, σ)` where needed.
pub fn direction_scan(nl: &Nonlinearity, directions: &[(i64, i64)], opts: &SolveOptions) -> Vec<ScanEntry> {
    directions
        .par_iter()
        .map(|&(sh, sv)| {
            let sigma = (sh as f64).hypot(sv as f64);
            let smax = sh.abs().max(sv.abs()).max(1) as f64;
            let mut o = opts.clone();
            if o.half_width < 20.0 * smax {
                o.half_width = 20.0 * smax;
            }
            let zeta = (sv as f64).atan2(sh as f64);
            match solve_mfde(nl, (sh as f64, sv as f64), &o, None) {
                Ok(p) => ScanEntry {
                    direction: (sh, sv),
                    zeta,
                    c_raw: p.c,
                    c_zeta: p.c / sigma,
                    eta_minus: p.eta_minus,
                    eta_plus: p.eta_plus,
                    monotone: p.is_monotone(),
                    residual: p.residual,
                    error: None,
                    profile: Some(p),
                },
                Err(e) => ScanEntry {
                    direction: (sh, sv),
                    zeta,
                    c_raw: f64::NAN,
                    c_zeta: f64::NAN,
                    eta_minus: f64::NAN,
                    eta_plus: f64::NAN,
                    monotone: false,
                    residual: f64::NAN,
                    error: Some(e.to_string()),
                    profile: None,
                },
            }
        })
        .collect()
}
