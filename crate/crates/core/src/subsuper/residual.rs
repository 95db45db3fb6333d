//! Candidate interface and the residual `𝓙 = Ẇ - ΔW - g(W)` on sampled
//! sites and times.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{cross_offsets, Site};
use crate::nonlinearity::Reaction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    Squeeze1d,
    EntireBracket,
    PlateauRadial,
    Transverse2d,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Sub,
    Super,
}

impl Side {
    /// `-1` for sub-solutions, `+1` for super-solutions.
    pub fn sign(self) -> f64 {
        match self {
            Side::Sub => -1.0,
            Side::Super => 1.0,
        }
    }
}

/// Nearest-neighbour geometry the residual is taken on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Neighbourhood {
    /// `(i±1, j)`, `(i, j±1)`.
    Plus,
    /// Rotated coordinates `(n,l)` for the direction `(σ_h, σ_v)`.
    Cross { sh: i64, sv: i64 },
}

impl Neighbourhood {
    pub fn offsets(&self) -> [Site; 4] {
        match *self {
            Neighbourhood::Plus => [(1, 0), (0, 1), (-1, 0), (0, -1)],
            Neighbourhood::Cross { sh, sv } => cross_offsets(sh, sv),
        }
    }
}

/// A closed-form field `W(t)` with an analytic time derivative.
pub trait Candidate: Sync {
    fn kind(&self) -> CandidateKind;
    fn side(&self) -> Side;
    fn lattice(&self) -> Neighbourhood;
    fn value(&self, s: Site, t: f64) -> f64;
    fn time_derivative(&self, s: Site, t: f64) -> f64;
    /// Times at which the candidate is defined.
    fn time_domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    /// Required strict gap: the margin is `𝓙 + gap` for sub-solutions and
    /// `𝓙 - gap` for super-solutions.
    fn gap(&self, _t: f64) -> f64 {
        0.0
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ResidualSample {
    pub site: Site,
    pub t: f64,
    pub j: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub kind: CandidateKind,
    pub side: Side,
    pub samples: usize,
    pub min_margin: f64,
    pub max_margin: f64,
    /// Allowance for discretisation noise in the wave profiles.
    pub tolerance: f64,
    pub passed: bool,
    /// First offending sample, if any.
    pub worst: Option<ResidualSample>,
}

#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub samples: Vec<ResidualSample>,
    pub summary: ResidualSummary,
}

impl ResidualReport {
    pub fn passed(&self) -> bool {
        self.summary.passed
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["i", "j", "t", "J", "margin"])?;
        for s in &self.samples {
            w.write_record(&[
                s.site.0.to_string(),
                s.site.1.to_string(),
                format!("{:.17e}", s.t),
                format!("{:.17e}", s.j),
                format!("{:.17e}", s.margin),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut f, &self.summary)?;
        writeln!(f)?;
        Ok(())
    }
}

/// `𝓙` at one site.
pub fn residual_at<C: Candidate + ?Sized>(cand: &C, lattice: &Neighbourhood, nl: &dyn Reaction, s: Site, t: f64) -> f64 {
    let w = cand.value(s, t);
    let lap: f64 = lattice.offsets().iter().map(|&(di, dj)| cand.value((s.0 + di, s.1 + dj), t) - w).sum();
    cand.time_derivative(s, t) - lap - nl.g(w)
}

/// `𝓙` and margins on `sites × times`. Sub-solutions pass when every
/// margin is `≤ tolerance`, super-solutions when every margin is
/// `≥ -tolerance`.
pub fn residual<C: Candidate + ?Sized>(
    cand: &C,
    lattice: &Neighbourhood,
    nl: &dyn Reaction,
    sites: &[Site],
    times: &[f64],
    tolerance: f64,
) -> Result<ResidualReport> {
    let pairs: Vec<(Site, f64)> = times.iter().flat_map(|&t| sites.iter().map(move |&s| (s, t))).collect();
    residual_pairs(cand, lattice, nl, &pairs, tolerance)
}

/// As [`residual`], on an explicit list of `(site, t)` samples.
pub fn residual_pairs<C: Candidate + ?Sized>(
    cand: &C,
    lattice: &Neighbourhood,
    nl: &dyn Reaction,
    pairs: &[(Site, f64)],
    tolerance: f64,
) -> Result<ResidualReport> {
    let (t0, t1) = cand.time_domain();
    if let Some(&(_, t)) = pairs.iter().find(|p| !(p.1 >= t0 && p.1 <= t1)) {
        return Err(Error::Domain(format!("t = {t} outside the candidate's domain [{t0}, {t1}]")));
    }
    let side = cand.side();
    let samples: Vec<ResidualSample> = pairs
        .par_iter()
        .map(|&(site, t)| {
            let j = residual_at(cand, lattice, nl, site, t);
            let margin = j - side.sign() * cand.gap(t);
            ResidualSample { site, t, j, margin }
        })
        .collect();
    let min_margin = samples.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min);
    let max_margin = samples.iter().map(|s| s.margin).fold(f64::NEG_INFINITY, f64::max);
    let bad = |s: &&ResidualSample| match side {
        Side::Sub => !(s.margin <= tolerance),
        Side::Super => !(s.margin >= -tolerance),
    };
    let worst = samples.iter().find(bad).copied();
    let summary = ResidualSummary {
        kind: cand.kind(),
        side,
        samples: samples.len(),
        min_margin,
        max_margin,
        tolerance,
        passed: worst.is_none() && !samples.is_empty(),
        worst,
    };
    Ok(ResidualReport { samples, summary })
}

/// `max |(W(t+h) - W(t-h))/2h - Ẇ(t)|` over the given samples.
pub fn derivative_mismatch<C: Candidate + ?Sized>(cand: &C, samples: &[(Site, f64)], h: f64) -> f64 {
    samples
        .iter()
        .map(|&(s, t)| {
            let fd = (cand.value(s, t + h) - cand.value(s, t - h)) / (2.0 * h);
            (fd - cand.time_derivative(s, t)).abs()
        })
        .fold(0.0, f64::max)
}

/// Sites of `[i0, i1] × [j0, j1]` with the given strides.
pub fn site_box(i: (i64, i64), j: (i64, i64), stride: (usize, usize)) -> Vec<Site> {
    let mut out = Vec::new();
    for a in (i.0..=i.1).step_by(stride.0.max(1)) {
        for b in (j.0..=j.1).step_by(stride.1.max(1)) {
            out.push((a, b));
        }
    }
    out
}

/// `n` evenly spaced times on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}
