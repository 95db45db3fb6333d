//! Fixed-step integration of `u̇ = Δ⁺_Λ u + g(u)` on the windowed,
//! obstructed lattice, initial data, measurements and snapshots.

mod compare;
mod init;
mod io;
mod measure;

pub use compare::*;
pub use init::*;
pub use io::*;
pub use measure::*;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Field, ObstacleLattice, Site, PLUS};
use crate::nonlinearity::{Nonlinearity, Reaction};
use crate::wave::WaveProfile;

/// Largest accepted time step.
pub const DT_MAX: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Rk4,
    Euler,
}

/// Values at plus-neighbours outside the window.
#[derive(Clone, Debug)]
pub enum BoundaryRule {
    /// `Φ(σ·(i,j) + ct + ϑ)`.
    PlanarWave { profile: Box<WaveProfile>, phase: f64 },
    /// `minus` where `σ·(i,j) < 0`, `plus` elsewhere (`σ` the lattice direction).
    Constants { minus: f64, plus: f64 },
    /// Outside neighbours are dropped, like obstacle sites.
    NoFlux,
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub lattice: ObstacleLattice,
    pub nl: Nonlinearity,
    pub dt: f64,
    pub t_end: f64,
    pub boundary: BoundaryRule,
    pub integrator: Integrator,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= DT_MAX) {
            return Err(Error::Config(format!("dt = {} outside (0, {DT_MAX}]", self.dt)));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::Config(format!("t_end = {} must be non-negative", self.t_end)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
enum Link {
    Active(usize),
    Ghost(usize),
}

/// Neighbour tables for one lattice and boundary rule.
pub struct Simulator {
    config: SimConfig,
    links: Vec<[Option<Link>; 4]>,
    ghosts: Vec<Site>,
}

impl Simulator {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let lat = &config.lattice;
        let window = *lat.window();
        let keep_ghosts = !matches!(config.boundary, BoundaryRule::NoFlux);
        let mut ghosts: Vec<Site> = Vec::new();
        let mut ghost_index = std::collections::HashMap::new();
        let links = lat
            .active_sites()
            .iter()
            .map(|&(i, j)| {
                PLUS.map(|(di, dj)| {
                    let n = (i + di, j + dj);
                    if let Some(k) = lat.index(n) {
                        Some(Link::Active(k))
                    } else if !window.contains(n) && keep_ghosts {
                        let g = *ghost_index.entry(n).or_insert_with(|| {
                            ghosts.push(n);
                            ghosts.len() - 1
                        });
                        Some(Link::Ghost(g))
                    } else {
                        None
                    }
                })
            })
            .collect();
        Ok(Self { config, links, ghosts })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn lattice(&self) -> &ObstacleLattice {
        &self.config.lattice
    }

    fn ghost_values(&self, t: f64) -> Vec<f64> {
        let (sh, sv) = self.config.lattice.direction();
        match &self.config.boundary {
            BoundaryRule::PlanarWave { profile, phase } => {
                let (a, b) = profile.sigma;
                self.ghosts
                    .iter()
                    .map(|&(i, j)| profile.phi_at(a * i as f64 + b * j as f64 + profile.c * t + phase))
                    .collect()
            }
            BoundaryRule::Constants { minus, plus } => {
                self.ghosts.iter().map(|&(i, j)| if i * sh + j * sv < 0 { *minus } else { *plus }).collect()
            }
            BoundaryRule::NoFlux => Vec::new(),
        }
    }

    /// `Δ⁺_Λ u + g(u)` at time `t`.
    pub fn rhs(&self, u: &[f64], t: f64, out: &mut [f64]) {
        let ghost = self.ghost_values(t);
        let nl = &self.config.nl;
        out.par_iter_mut().zip(u.par_iter()).zip(self.links.par_iter()).for_each(|((o, &uk), links)| {
            let mut lap = 0.0;
            for link in links.iter().flatten() {
                lap += match *link {
                    Link::Active(m) => u[m],
                    Link::Ghost(g) => ghost[g],
                } - uk;
            }
            *o = lap + nl.g(uk);
        });
    }

    /// One step of the configured integrator.
    pub fn step(&self, state: &Field) -> Result<Field> {
        let n = state.values.len();
        if n != self.lattice().n_active() {
            return Err(Error::Precondition(format!(
                "field has {n} values, lattice has {} active sites",
                self.lattice().n_active()
            )));
        }
        let (dt, t, u) = (self.config.dt, state.time, &state.values);
        let mut next = vec![0.0; n];
        match self.config.integrator {
            Integrator::Euler => {
                self.rhs(u, t, &mut next);
                next.par_iter_mut().zip(u.par_iter()).for_each(|(x, &v)| *x = v + dt * *x);
            }
            Integrator::Rk4 => {
                let mut k1 = vec![0.0; n];
                let mut k2 = vec![0.0; n];
                let mut k3 = vec![0.0; n];
                let mut k4 = vec![0.0; n];
                let mut tmp = vec![0.0; n];
                let axpy = |tmp: &mut [f64], k: &[f64], h: f64| {
                    tmp.par_iter_mut().zip(u.par_iter()).zip(k.par_iter()).for_each(|((x, &v), &d)| *x = v + h * d);
                };
                self.rhs(u, t, &mut k1);
                axpy(&mut tmp, &k1, 0.5 * dt);
                self.rhs(&tmp, t + 0.5 * dt, &mut k2);
                axpy(&mut tmp, &k2, 0.5 * dt);
                self.rhs(&tmp, t + 0.5 * dt, &mut k3);
                axpy(&mut tmp, &k3, dt);
                self.rhs(&tmp, t + dt, &mut k4);
                next.par_iter_mut().enumerate().for_each(|(k, x)| {
                    *x = u[k] + dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
                });
            }
        }
        if let Some(k) = next.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { site: self.lattice().active_sites()[k], time: t + dt });
        }
        Ok(Field { values: next, time: t + dt })
    }

    /// Steps from `state` to `t_end`, calling `observe` on the initial field
    /// and after every `every` steps (and at the end).
    pub fn run(&self, mut state: Field, every: usize, mut observe: impl FnMut(&Field) -> Result<()>) -> Result<Field> {
        let steps = self.steps_to(state.time, self.config.t_end);
        let every = every.max(1);
        observe(&state)?;
        for s in 1..=steps {
            state = self.step(&state)?;
            if s % every == 0 || s == steps {
                observe(&state)?;
            }
        }
        Ok(state)
    }

    /// Number of whole steps from `t0` to `t1`.
    pub fn steps_to(&self, t0: f64, t1: f64) -> usize {
        ((t1 - t0) / self.config.dt - 1e-9).ceil().max(0.0) as usize
    }
}
