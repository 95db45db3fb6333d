//! Simulation scenarios: defect recovery, obstacle passage, radial
//! spreading and ordering of random pairs.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{param, Config, Param};
use super::report::{num, write_rows, Check, Report};
use crate::error::{Error, Result};
use crate::lattice::{parse_obstacle, Field, ObstacleLattice, Site, Window};
use crate::nonlinearity::Nonlinearity;
use crate::simulator::{
    comparison_harness, init_disk, init_perturbed_wave, measure_deviation, measure_front, measure_radial_speed,
    write_snapshot, BoundaryRule, Integrator, RadialHistory, SimConfig, Simulator,
};
use crate::wave::{direction_scan, solve_profile, SolveOptions, WaveProfile};

const PLANAR_RUN: &[Param] = &[
    param("wave.a", "0.1", "detuning of the cubic"),
    param("wave.direction", "-1,0", "propagation direction σ (the wave is Φ(σ·(i,j) + ct + ϑ))"),
    param("wave.phase", "-40", "initial phase ϑ"),
    param("wave.step", "0.05", "profile grid step"),
    param("window.i_min", "-60", "first column"),
    param("window.i_max", "400", "last column"),
    param("window.j_half", "20", "rows -j_half..=j_half"),
    param("sim.dt", "0.2", "time step"),
    param("sim.t_end", "600", "end time"),
    param("sim.record_every", "5", "time between recorded deviations"),
    param("sim.level", "0.5", "level defining the front"),
    param("sensitivity.j_half", "40", "second, wider window for the sensitivity report (0 disables)"),
    param("output.final_snapshot", "true", "write the final field"),
];

pub const STABILITY: &[Param] = &{
    let mut out = [param("", "", ""); PLANAR_RUN.len() + 5];
    let mut k = 0;
    while k < PLANAR_RUN.len() {
        out[k] = PLANAR_RUN[k];
        k += 1;
    }
    out[k] = param("defect.corner", "-50,-5", "lower-left site of the forced block");
    out[k + 1] = param("defect.size", "10", "side of the forced block");
    out[k + 2] = param("defect.value", "0", "value forced on the block");
    out[k + 3] = param("checks.max_final_deviation", "1e-2", "sup deviation bound at t_end");
    out[k + 4] = param("checks.max_phase_shift", "0.1", "bound on the mean front lag at t_end");
    out
};

pub const OBSTACLE: &[Param] = &{
    let mut out = [param("", "", ""); PLANAR_RUN.len() + 9];
    let mut k = 0;
    while k < PLANAR_RUN.len() {
        out[k] = PLANAR_RUN[k];
        k += 1;
    }
    out[k] = param("obstacle.sites", "0,-1 0,0 0,1", "obstacle sites `i,j` separated by spaces");
    out[k + 1] = param("obstacle.file", "", "file with one `i j` per line (replaces obstacle.sites when set)");
    out[k + 2] = param("obstacle.contact_margin", "15", "the wave meets the obstacle once σ·site + ct + ϑ > -margin");
    out[k + 3] = param("obstacle.behind", "10", "sites with σ·site + ct + ϑ ≥ behind count as invaded");
    out[k + 4] = param("checks.max_final_deviation", "1e-2", "sup deviation bound at t_end");
    out[k + 5] = param("checks.min_rise", "1e-3", "least rise of the deviation over its pre-contact level");
    out[k + 6] = param("checks.max_decay_ratio", "0.5", "final over peak deviation");
    out[k + 7] = param("checks.max_excess", "1e-2", "final minus pre-contact deviation");
    out[k + 8] = param("checks.min_behind", "0.99", "lower bound on invaded sites at t_end");
    out
};

pub const SPREADING: &[Param] = &[
    param("wave.a", "0.1", "detuning of the cubic"),
    param("wave.step", "0.05", "profile grid step for the speed scan"),
    param("scan.directions", "1,0 4,1 3,1 2,1 3,2 1,1", "directions of the speed scan"),
    param("disk.radius", "25", "initial radius"),
    param("disk.height", "0.9", "initial height"),
    param("window.half", "100", "window [-half, half]^2"),
    param("sim.dt", "0.2", "time step"),
    param("sim.t_end", "110", "end time"),
    param("sim.record_every", "5", "time between recorded radii"),
    param("sim.fit_from", "30", "fit radii from this time on"),
    param("measure.bins", "24", "angle bins"),
    param("measure.rays_per_bin", "5", "rays averaged per bin"),
    param("measure.level", "0.5", "level defining the front"),
    param("checks.speed_fraction", "0.9", "required speed as a fraction of min c"),
];

pub const COMPARISON: &[Param] = &[
    param("wave.a", "0.1", "detuning of the cubic"),
    param("window.size", "60", "window side"),
    param("obstacle.sites", "0,0", "obstacle sites `i,j` separated by spaces"),
    param("pairs.count", "200", "number of random ordered pairs"),
    param("pairs.seed", "7", "seed of the first pair (pair k uses seed + k)"),
    param("sim.dt", "0.2", "time step"),
    param("sim.t_end", "50", "end time"),
    param("checks.tolerance", "1e-9", "allowed ordering defect"),
];

fn nonlinearity(cfg: &Config) -> Result<Nonlinearity> {
    Nonlinearity::cubic(cfg.f64("wave.a")?)
}

fn obstacle_sites(cfg: &Config) -> Result<Vec<Site>> {
    let file = cfg.raw("obstacle.file").unwrap_or("");
    if !file.is_empty() {
        return ObstacleLattice::read_obstacle(Path::new(file));
    }
    parse_obstacle(&cfg.raw("obstacle.sites")?.split_whitespace().map(|p| p.replace(',', " ")).collect::<Vec<_>>().join("\n"))
}

/// Recorded quantities of a planar run.
#[derive(Clone, Debug, Default)]
pub struct PlanarRecord {
    pub times: Vec<f64>,
    pub deviation: Vec<f64>,
    pub phase_shift: Vec<f64>,
    /// `min u` over sites with `σ·site + ct + ϑ ≥ behind`.
    pub min_behind: Vec<f64>,
    pub final_field: Option<Field>,
}

impl PlanarRecord {
    fn write(&self, path: &Path) -> Result<()> {
        write_rows(
            path,
            &["t", "deviation", "phase_shift", "min_behind"],
            (0..self.times.len()).map(|k| {
                vec![num(self.times[k]), num(self.deviation[k]), num(self.phase_shift[k]), num(self.min_behind[k])]
            }),
        )
    }
}

/// Mean over rows of the front position of `state` minus that of the exact
/// translate, so lattice interpolation of the crossing cancels.
pub fn phase_shift(state: &Field, lattice: &ObstacleLattice, profile: &WaveProfile, phase: f64, level: f64) -> f64 {
    let exact = Field::from_fn(lattice, state.time, |(i, j)| {
        profile.phi_at(profile.sigma.0 * i as f64 + profile.sigma.1 * j as f64 + profile.c * state.time + phase)
    });
    let sim = measure_front(state, lattice, level);
    let reference = measure_front(&exact, lattice, level);
    let diffs: Vec<f64> = sim
        .iter()
        .filter_map(|&(j, x)| reference.iter().find(|r| r.0 == j).map(|r| x - r.1))
        .collect();
    if diffs.is_empty() {
        return f64::NAN;
    }
    diffs.iter().sum::<f64>() / diffs.len() as f64
}

struct PlanarSetup {
    profile: WaveProfile,
    phase: f64,
    level: f64,
    dt: f64,
    t_end: f64,
    every: usize,
}

impl PlanarSetup {
    fn new(cfg: &Config) -> Result<Self> {
        let (sh, sv) = cfg.pair("wave.direction")?;
        if sh == 0 {
            return Err(Error::Config("fronts are measured along rows; the direction needs σ_h ≠ 0".into()));
        }
        let step = cfg.f64("wave.step")?;
        let hw = 40.0 * sh.abs().max(sv.abs()) as f64;
        let profile = solve_profile(&nonlinearity(cfg)?, sh, sv, hw, step, 1e-10)?;
        let dt = cfg.f64("sim.dt")?;
        Ok(Self {
            profile,
            phase: cfg.f64("wave.phase")?,
            level: cfg.f64("sim.level")?,
            dt,
            t_end: cfg.f64("sim.t_end")?,
            every: ((cfg.f64("sim.record_every")? / dt).round() as usize).max(1),
        })
    }

    fn lattice(&self, cfg: &Config, j_half: i64, obstacle: &[Site]) -> Result<ObstacleLattice> {
        let window = Window::new(cfg.i64("window.i_min")?, cfg.i64("window.i_max")?, -j_half, j_half)?;
        let (sh, sv) = cfg.pair("wave.direction")?;
        ObstacleLattice::new(window, obstacle.iter().copied(), (sh, sv))
    }

    fn run(&self, lattice: &ObstacleLattice, bumps: &[(Site, f64)], behind: f64) -> Result<PlanarRecord> {
        let p = &self.profile;
        let sim = Simulator::new(SimConfig {
            lattice: lattice.clone(),
            nl: p.nl,
            dt: self.dt,
            t_end: self.t_end,
            boundary: BoundaryRule::PlanarWave { profile: Box::new(p.clone()), phase: self.phase },
            integrator: Integrator::Rk4,
        })?;
        let mut rec = PlanarRecord::default();
        let u0 = init_perturbed_wave(lattice, p, self.phase, bumps);
        let last = sim.run(u0, self.every, |f| {
            rec.times.push(f.time);
            rec.deviation.push(measure_deviation(f, lattice, p, self.phase));
            rec.phase_shift.push(phase_shift(f, lattice, p, self.phase, self.level));
            let shift = p.c * f.time + self.phase;
            let min_behind = lattice
                .active_sites()
                .iter()
                .zip(&f.values)
                .filter(|(&(i, j), _)| p.sigma.0 * i as f64 + p.sigma.1 * j as f64 + shift >= behind)
                .map(|(_, &u)| u)
                .fold(f64::INFINITY, f64::min);
            rec.min_behind.push(min_behind);
            Ok(())
        })?;
        rec.final_field = Some(last);
        Ok(rec)
    }
}

fn sensitivity(
    cfg: &Config,
    setup: &PlanarSetup,
    obstacle: &[Site],
    bumps: &[(Site, f64)],
    behind: f64,
    r: &mut Report,
) -> Result<()> {
    let wide = cfg.i64("sensitivity.j_half")?;
    if wide <= 0 {
        return Ok(());
    }
    let lattice = setup.lattice(cfg, wide, obstacle)?;
    let rec = setup.run(&lattice, bumps, behind)?;
    r.value("wide_final_deviation", *rec.deviation.last().unwrap_or(&f64::NAN));
    r.value("wide_final_phase_shift", *rec.phase_shift.last().unwrap_or(&f64::NAN));
    r.note(format!("sensitivity run on rows ±{wide} reported in values (not checked)"));
    Ok(())
}

pub fn stability(cfg: &Config, out: &Path) -> Result<Report> {
    let mut r = Report::new("stability");
    let setup = PlanarSetup::new(cfg)?;
    let lattice = setup.lattice(cfg, cfg.i64("window.j_half")?, &[])?;
    let (ci, cj) = cfg.pair("defect.corner")?;
    let size = cfg.i64("defect.size")?;
    let value = cfg.f64("defect.value")?;
    let bumps: Vec<(Site, f64)> = (ci..ci + size).flat_map(|i| (cj..cj + size).map(move |j| ((i, j), value))).collect();
    if bumps.iter().any(|(s, _)| !lattice.is_active(*s)) {
        return Err(Error::Config("defect block leaves the window".into()));
    }
    let rec = setup.run(&lattice, &bumps, f64::INFINITY)?;
    rec.write(&out.join("deviation.csv"))?;
    if cfg.bool("output.final_snapshot")? {
        write_snapshot(rec.final_field.as_ref().expect("final field"), &lattice, &out.join("final.csv"))?;
    }
    let final_dev = *rec.deviation.last().unwrap_or(&f64::NAN);
    let shift = *rec.phase_shift.last().unwrap_or(&f64::NAN);
    r.value("initial_deviation", rec.deviation[0]);
    r.value("peak_phase_lag", rec.phase_shift.iter().fold(0.0, |m: f64, v| m.max(v.abs())));
    r.check(Check::below("final_deviation", final_dev, cfg.f64("checks.max_final_deviation")?));
    r.check(Check::below("final_phase_shift", shift.abs(), cfg.f64("checks.max_phase_shift")?));
    sensitivity(cfg, &setup, &[], &bumps, f64::INFINITY, &mut r)?;
    Ok(r)
}

pub fn obstacle(cfg: &Config, out: &Path) -> Result<Report> {
    let mut r = Report::new("obstacle");
    let setup = PlanarSetup::new(cfg)?;
    let sites = obstacle_sites(cfg)?;
    let lattice = setup.lattice(cfg, cfg.i64("window.j_half")?, &sites)?;
    r.check(Check::flag("hk1_connected", lattice.check_hk1()));
    let hk2 = lattice.hk2_line();
    r.check(Check::flag("hk2_convex", hk2.is_some()));
    let behind = cfg.f64("obstacle.behind")?;
    let rec = setup.run(&lattice, &[], behind)?;
    rec.write(&out.join("deviation.csv"))?;
    if cfg.bool("output.final_snapshot")? {
        write_snapshot(rec.final_field.as_ref().expect("final field"), &lattice, &out.join("final.csv"))?;
    }
    let p = &setup.profile;
    let nearest = sites.iter().map(|&(i, j)| p.sigma.0 * i as f64 + p.sigma.1 * j as f64).fold(f64::NEG_INFINITY, f64::max);
    let margin = cfg.f64("obstacle.contact_margin")?;
    let t_contact = (-margin - nearest - setup.phase) / p.c;
    let pre = rec.times.iter().zip(&rec.deviation).filter(|(t, _)| **t <= t_contact).map(|(_, d)| *d).fold(0.0, f64::max);
    let (k_peak, peak) = rec.deviation.iter().enumerate().fold((0, 0.0), |m, (k, &d)| if d > m.1 { (k, d) } else { m });
    let final_dev = *rec.deviation.last().unwrap_or(&f64::NAN);
    r.value("contact_time", t_contact);
    r.value("pre_contact_deviation", pre);
    r.value("peak_deviation", peak);
    r.value("peak_time", rec.times[k_peak]);
    r.check(Check::at_least("deviation_rise", peak - pre, cfg.f64("checks.min_rise")?));
    r.check(Check::below("decay_ratio", final_dev / peak, cfg.f64("checks.max_decay_ratio")?));
    r.check(Check::below("final_deviation", final_dev, cfg.f64("checks.max_final_deviation")?));
    r.check(Check::below("final_excess", final_dev - pre, cfg.f64("checks.max_excess")?));
    r.check(Check::at_least("min_behind_front", *rec.min_behind.last().unwrap_or(&f64::NAN), cfg.f64("checks.min_behind")?));
    sensitivity(cfg, &setup, &sites, &[], behind, &mut r)?;
    Ok(r)
}

pub fn spreading(cfg: &Config, out: &Path) -> Result<Report> {
    let mut r = Report::new("spreading");
    let nl = nonlinearity(cfg)?;
    let step = cfg.f64("wave.step")?;
    let scan = direction_scan(&nl, &cfg.pairs("scan.directions")?, &SolveOptions::new(40.0, step, 1e-10));
    write_rows(
        &out.join("scan.csv"),
        &["sh", "sv", "zeta", "c_zeta", "ok"],
        scan.iter().map(|e| {
            vec![e.direction.0.to_string(), e.direction.1.to_string(), num(e.zeta), num(e.c_zeta), e.ok().to_string()]
        }),
    )?;
    if let Some(bad) = scan.iter().find(|e| !e.ok()) {
        return Err(Error::Precondition(format!("direction {:?} failed: {:?}", bad.direction, bad.error)));
    }
    let cmin = scan.iter().map(|e| e.c_zeta).fold(f64::INFINITY, f64::min);
    let lattice = ObstacleLattice::unobstructed(Window::centered(cfg.i64("window.half")?), (1, 0))?;
    let dt = cfg.f64("sim.dt")?;
    let sim = Simulator::new(SimConfig {
        lattice: lattice.clone(),
        nl,
        dt,
        t_end: cfg.f64("sim.t_end")?,
        boundary: BoundaryRule::Constants { minus: 0.0, plus: 0.0 },
        integrator: Integrator::Rk4,
    })?;
    let mut hist = RadialHistory::new(cfg.usize("measure.bins")?, cfg.usize("measure.rays_per_bin")?, cfg.f64("measure.level")?);
    let every = ((cfg.f64("sim.record_every")? / dt).round() as usize).max(1);
    sim.run(init_disk(&lattice, cfg.f64("disk.radius")?, cfg.f64("disk.height")?), every, |f| {
        hist.record(f, &lattice);
        Ok(())
    })?;
    write_rows(
        &out.join("radii.csv"),
        &["t", "bin", "angle", "radius"],
        hist.times.iter().zip(&hist.radii).flat_map(|(t, row)| {
            let h = &hist;
            row.iter().enumerate().map(move |(b, rad)| {
                vec![num(*t), b.to_string(), num(h.bin_angle(b)), rad.map(num).unwrap_or_default()]
            })
        }),
    )?;
    let speeds = measure_radial_speed(&hist, cfg.f64("sim.fit_from")?);
    write_rows(
        &out.join("speeds.csv"),
        &["bin", "angle", "speed", "ratio"],
        speeds.iter().enumerate().map(|(b, s)| {
            vec![b.to_string(), num(hist.bin_angle(b)), s.map(num).unwrap_or_default(), s.map(|v| num(v / cmin)).unwrap_or_default()]
        }),
    )?;
    let worst = speeds.iter().map(|s| s.map_or(f64::NEG_INFINITY, |v| v / cmin)).fold(f64::INFINITY, f64::min);
    r.value("min_c_zeta", cmin);
    r.check(Check::flag("all_bins_measured", speeds.iter().all(Option::is_some)));
    r.check(Check::at_least("min_speed_ratio", worst, cfg.f64("checks.speed_fraction")?));
    Ok(r)
}

/// One random ordered pair `u0 ≥ v0` with values in `[-0.5, 1.5]`.
pub fn random_pair(lattice: &ObstacleLattice, kind: usize, rng: &mut ChaCha8Rng) -> (Field, Field) {
    let n = lattice.n_active();
    let (u, v): (Vec<f64>, Vec<f64>) = match kind % 4 {
        0 => {
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let v = u.iter().map(|x| x - rng.gen_range(0.0..0.1)).collect();
            (u, v)
        }
        1 => {
            let (a, b) = (rng.gen_range(-20i64..0), rng.gen_range(0i64..20));
            let noise = rng.gen_range(0.0..0.2);
            let step = |i: i64, at: i64| if i < at { 1.0 } else { 0.0 };
            let sites = lattice.active_sites();
            let u: Vec<f64> = sites.iter().map(|&(i, _)| step(i, b) + noise * rng.gen_range(-1.0..1.0)).collect();
            let v = sites.iter().zip(&u).map(|(&(i, _), &x)| x.min(step(i, a) + noise * rng.gen_range(-1.0..1.0))).collect();
            (u, v)
        }
        2 => {
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..1.5)).collect();
            let v = u.iter().map(|&x| x.min(rng.gen_range(-0.5..1.5))).collect();
            (u, v)
        }
        _ => {
            let r0 = rng.gen_range(3.0..20.0);
            let height = rng.gen_range(0.3..1.0);
            let u = init_disk(lattice, r0, height).values;
            let v = u.iter().map(|&x| if rng.gen_bool(0.5) { x - 0.1 } else { x }).collect();
            (u, v)
        }
    };
    let clip = |w: Vec<f64>| w.into_iter().map(|x| x.clamp(-0.5, 1.5)).collect::<Vec<f64>>();
    let u = clip(u);
    let v: Vec<f64> = clip(v).iter().zip(&u).map(|(a, b)| a.min(*b)).collect();
    (Field { values: u, time: 0.0 }, Field { values: v, time: 0.0 })
}

pub fn comparison(cfg: &Config, out: &Path) -> Result<Report> {
    let mut r = Report::new("comparison");
    let size = cfg.i64("window.size")?;
    let lo = -size / 2;
    let window = Window::new(lo, lo + size - 1, lo, lo + size - 1)?;
    let lattice = ObstacleLattice::new(window, obstacle_sites(cfg)?, (1, 0))?;
    let sim = Simulator::new(SimConfig {
        lattice: lattice.clone(),
        nl: nonlinearity(cfg)?,
        dt: cfg.f64("sim.dt")?,
        t_end: cfg.f64("sim.t_end")?,
        boundary: BoundaryRule::NoFlux,
        integrator: Integrator::Rk4,
    })?;
    let tol = cfg.f64("checks.tolerance")?;
    let seed = cfg.u64("pairs.seed")?;
    let mut rows = Vec::new();
    let mut worst = f64::INFINITY;
    let mut ordered = 0usize;
    let count = cfg.usize("pairs.count")?;
    let reports = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed + k as u64);
            let (u0, v0) = random_pair(&lattice, k, &mut rng);
            comparison_harness(&sim, u0, v0)
        })
        .collect::<Result<Vec<_>>>()?;
    for (k, rep) in reports.into_iter().enumerate() {
        let holds = rep.min_gap >= -tol;
        ordered += holds as usize;
        worst = worst.min(rep.min_gap);
        let (vi, vj, vt, vm) = match rep.first_violation {
            Some(v) => (v.site.0.to_string(), v.site.1.to_string(), num(v.time), num(v.magnitude)),
            None => Default::default(),
        };
        rows.push(vec![k.to_string(), (k % 4).to_string(), holds.to_string(), num(rep.min_gap), rep.checks.to_string(), vi, vj, vt, vm]);
    }
    write_rows(&out.join("pairs.csv"), &["pair", "kind", "ordered", "min_gap", "checks", "violation_i", "violation_j", "violation_t", "violation"], rows)?;
    r.value("pairs", count as f64);
    r.check(Check::at_least("ordered_pairs", ordered as f64, count as f64));
    r.check(Check::at_least("min_gap", worst, -tol));
    Ok(r)
}
