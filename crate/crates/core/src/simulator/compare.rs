//! Two fields stepped in lockstep with an ordering check.

use serde::{Deserialize, Serialize};

use super::Simulator;
use crate::error::{Error, Result};
use crate::lattice::{Field, Site};

/// Integrator noise allowed in the ordering check.
pub const ORDER_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Violation {
    pub site: Site,
    pub time: f64,
    /// `v - u > 0` at the offending site.
    pub magnitude: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub ordered: bool,
    /// `min (u - v)` over all checked sites and times.
    pub min_gap: f64,
    pub checks: usize,
    pub first_violation: Option<Violation>,
}

fn worst(u: &Field, v: &Field) -> (usize, f64) {
    u.values
        .iter()
        .zip(&v.values)
        .map(|(a, b)| a - b)
        .enumerate()
        .fold((0, f64::INFINITY), |m, (k, d)| if d < m.1 { (k, d) } else { m })
}

/// Evolves `u0 ≥ v0` to the configured end time and checks `u ≥ v - tol`
/// after every step.
pub fn comparison_harness(sim: &Simulator, u0: Field, v0: Field) -> Result<ComparisonReport> {
    if u0.values.len() != v0.values.len() {
        return Err(Error::Precondition("fields differ in size".into()));
    }
    let in_range = |f: &Field| f.values.iter().all(|&x| (-1.0..=2.0).contains(&x));
    if !in_range(&u0) || !in_range(&v0) {
        return Err(Error::Precondition("initial data must lie in [-1, 2]".into()));
    }
    if u0.values.iter().zip(&v0.values).any(|(a, b)| a < b) {
        return Err(Error::Precondition("comparison needs u0 ≥ v0".into()));
    }
    let sites = sim.lattice().active_sites();
    let (mut u, mut v) = (u0, v0);
    let mut report = ComparisonReport { ordered: true, min_gap: worst(&u, &v).1, checks: 1, first_violation: None };
    for _ in 0..sim.steps_to(u.time, sim.config().t_end) {
        let (nu, nv) = rayon::join(|| sim.step(&u), || sim.step(&v));
        u = nu?;
        v = nv?;
        let (k, d) = worst(&u, &v);
        report.checks += 1;
        report.min_gap = report.min_gap.min(d);
        if d < -ORDER_TOLERANCE && report.first_violation.is_none() {
            report.ordered = false;
            report.first_violation = Some(Violation { site: sites[k], time: u.time, magnitude: -d });
        }
    }
    Ok(report)
}
