//! Profile, spectral and corrector scenarios.

use std::path::Path;

use super::config::{param, Config, Param};
use super::report::{num, write_rows, Check, Report};
use crate::error::{Error, Result};
use crate::lattice::{ObstacleLattice, Window};
use crate::nonlinearity::{Nonlinearity, Reaction};
use crate::simulator::{init_step, ls_slope, measure_front, BoundaryRule, Integrator, SimConfig, Simulator};
use crate::spectral::{alpha_and_correctors, eigen_branch, BranchOptions, SpectralBranch};
use crate::wave::exponents::{delta_minus, delta_plus};
use crate::wave::{
    adjoint_residual, char_exponents, direction_scan, solve_adjoint, solve_profile, write_profile_csv, SolveOptions,
    WaveProfile,
};

pub const WAVE_SCAN: &[Param] = &[
    param("wave.a", "0.1", "detuning of the cubic"),
    param("wave.direction", "1,0", "lattice direction of the main profile"),
    param("wave.half_width", "40", "computational half-width L"),
    param("wave.step", "0.05", "grid step h"),
    param("wave.tol", "1e-10", "Newton tolerance"),
    param("scan.directions", "1,0 2,1 1,1 1,2 0,1", "directions of the speed scan"),
    param("sim.sites", "400", "sites of the 1D run (0 disables it)"),
    param("sim.t_end", "100", "end time of the 1D run"),
    param("sim.dt", "0.1", "time step"),
    param("sim.fit_from", "20", "fit the front position from this time on"),
    param("sim.level", "0.5", "level defining the front"),
    param("checks.max_residual", "1e-8", "profile residual bound"),
    param("checks.max_exponent_defect", "1e-10", "characteristic equation defect bound"),
    param("checks.speed_rel_tol", "0.01", "relative tolerance on the simulated speed"),
    param("checks.symmetric_speed", "1e-8", "speed bound at a = 1/2"),
];

pub const SPECTRAL: &[Param] = &[
    param("wave.a", "0.1", "detuning of the cubic"),
    param("wave.direction", "2,1", "lattice direction"),
    param("wave.half_width", "60", "computational half-width L"),
    param("wave.step", "0.05", "default grid step"),
    param("wave.coarse_step", "0.1", "coarse grid step for the refinement study"),
    param("wave.tol", "1e-10", "Newton tolerance"),
    param("branch.omega_max", "0.2", "half-width of the frequency grid"),
    param("branch.omega_points", "21", "frequency grid points"),
    param("branch.omega_fd", "0.01", "finite-difference step at zero frequency"),
    param("checks.melnikov_rel_tol", "0.02", "relative agreement of the two routes"),
    param("checks.melnikov_floor", "1e-6", "absolute floor of the relative error denominator"),
    param("checks.min_adjoint_order", "1.7", "observed order of the adjoint residual"),
    param("checks.pairing_tol", "1e-8", "tolerance on the adjoint normalisation"),
];

pub const CORRECTORS: &[Param] = &[
    param("wave.a", "0.1", "detuning of the cubic"),
    param("wave.direction", "1,1", "lattice direction"),
    param("wave.half_width", "40", "computational half-width L"),
    param("wave.step", "0.05", "grid step h"),
    param("wave.tol", "1e-10", "Newton tolerance"),
    param("checks.max_multiplier", "1e-6", "largest bordering multiplier (solvability defect)"),
    param("checks.max_scheme_gap", "1e-3", "largest gap between the upwind solve and the fourth-order operator"),
];

fn profile(cfg: &Config, step: f64) -> Result<WaveProfile> {
    let nl = Nonlinearity::cubic(cfg.f64("wave.a")?)?;
    let (sh, sv) = cfg.pair("wave.direction")?;
    solve_profile(&nl, sh, sv, cfg.f64("wave.half_width")?, step, cfg.f64("wave.tol")?)
}

/// `max(|Δ⁻(η⁻)|, |Δ⁺(η⁺)|)` with the exponents recomputed from `c`.
pub fn exponent_defect(p: &WaveProfile) -> Result<f64> {
    let (lo, hi) = p.nl.limits();
    let (dg0, dg1) = (p.nl.dg(lo), p.nl.dg(hi));
    let s = p.shifts();
    let (em, ep) = char_exponents(p.c, &s, dg0, dg1)?;
    Ok(delta_minus(p.c, &s, dg0, em).abs().max(delta_plus(p.c, &s, dg1, ep).abs()))
}

/// Front speed of a one-row run started from step data. With no-flux ends
/// and a single row, the lattice reduces to the 1D chain.
pub fn front_speed_1d(nl: &Nonlinearity, sites: usize, t_end: f64, dt: f64, fit_from: f64, level: f64) -> Result<(f64, Vec<(f64, f64)>)> {
    let half = (sites / 2) as i64;
    let window = Window::new(-half, sites as i64 - half - 1, 0, 0)?;
    let lattice = ObstacleLattice::unobstructed(window, (1, 0))?;
    let sim = Simulator::new(SimConfig {
        lattice: lattice.clone(),
        nl: *nl,
        dt,
        t_end,
        boundary: BoundaryRule::NoFlux,
        integrator: Integrator::Rk4,
    })?;
    let every = ((1.0 / dt).round() as usize).max(1);
    let mut track = Vec::new();
    sim.run(init_step(&lattice, 0.0, 1.0), every, |f| {
        if let Some(&(_, x)) = measure_front(f, &lattice, level).first() {
            track.push((f.time, x));
        }
        Ok(())
    })?;
    let fit: Vec<(f64, f64)> = track.iter().copied().filter(|p| p.0 >= fit_from).collect();
    let slope = ls_slope(&fit).ok_or_else(|| Error::Precondition("front left the window or never formed".into()))?;
    Ok((slope.abs(), track))
}

pub fn wave_scan(cfg: &Config, out: &Path) -> Result<Report> {
    let mut r = Report::new("wave-scan");
    let a = cfg.f64("wave.a")?;
    let nl = Nonlinearity::cubic(a)?;
    let symmetric = a == 0.5;
    let step = cfg.f64("wave.step")?;
    match profile(cfg, step) {
        Ok(p) => {
            write_profile_csv(&p, &out.join("profile.csv"))?;
            r.value("c", p.c);
            r.value("eta_minus", p.eta_minus);
            r.value("eta_plus", p.eta_plus);
            r.check(Check::below("profile_residual", p.residual, cfg.f64("checks.max_residual")?));
            r.check(Check::below("exponent_defect", exponent_defect(&p)?, cfg.f64("checks.max_exponent_defect")?));
            if symmetric {
                r.check(Check::below("symmetric_speed", p.c.abs(), cfg.f64("checks.symmetric_speed")?));
            }
            let sites = cfg.usize("sim.sites")?;
            if sites > 0 {
                let (speed, track) = front_speed_1d(
                    &nl,
                    sites,
                    cfg.f64("sim.t_end")?,
                    cfg.f64("sim.dt")?,
                    cfg.f64("sim.fit_from")?,
                    cfg.f64("sim.level")?,
                )?;
                write_rows(&out.join("front_1d.csv"), &["t", "front"], track.iter().map(|&(t, x)| vec![num(t), num(x)]))?;
                r.value("speed_1d", speed);
                let rel = (speed - p.c).abs() / p.c.abs();
                r.check(Check::below("front_speed_rel_error", rel, cfg.f64("checks.speed_rel_tol")?));
            }
        }
        Err(Error::Pinning { speed, plateau }) => {
            r.value("c", speed);
            r.note(format!("solver stopped at |c| = {:.3e} (plateau fraction {plateau:.3})", speed.abs()));
            if symmetric {
                r.check(Check::below("symmetric_speed", speed.abs(), cfg.f64("checks.symmetric_speed")?));
            } else {
                r.check(Check::flag("profile_solved", false).with_detail("pinned"));
            }
        }
        Err(e) => return Err(e),
    }
    let opts = SolveOptions { step, ..SolveOptions::new(cfg.f64("wave.half_width")?, step, cfg.f64("wave.tol")?) };
    let scan = direction_scan(&nl, &cfg.pairs("scan.directions")?, &opts);
    write_rows(
        &out.join("scan.csv"),
        &["sh", "sv", "zeta", "c_raw", "c_zeta", "eta_minus", "eta_plus", "monotone", "residual", "error"],
        scan.iter().map(|e| {
            vec![
                e.direction.0.to_string(),
                e.direction.1.to_string(),
                num(e.zeta),
                num(e.c_raw),
                num(e.c_zeta),
                num(e.eta_minus),
                num(e.eta_plus),
                e.monotone.to_string(),
                num(e.residual),
                e.error.clone().unwrap_or_default(),
            ]
        }),
    )?;
    for e in scan.iter().filter(|e| !e.ok()) {
        r.note(format!("direction {:?}: {}", e.direction, e.error.as_deref().unwrap_or("not monotone")));
    }
    Ok(r)
}

/// Spectral data of one resolution.
pub struct SpectralRun {
    pub profile: WaveProfile,
    pub branch: SpectralBranch,
    pub adjoint_residual: f64,
    pub pairing: f64,
    /// `λ'(0)` and `λ''(0)` by the solvability route.
    pub route_d1: f64,
    pub route_d2: f64,
}

impl SpectralRun {
    pub fn new(cfg: &Config, step: f64) -> Result<Self> {
        let profile = profile(cfg, step)?;
        let adjoint = solve_adjoint(&profile)?;
        let prod: Vec<f64> = adjoint.psi.iter().zip(&profile.dphi).map(|(a, b)| a * b).collect();
        let pairing = profile.grid.trapezoid(&prod);
        let opts = BranchOptions {
            omega_max: cfg.f64("branch.omega_max")?,
            omega_points: cfg.usize("branch.omega_points")?,
            omega_fd: cfg.f64("branch.omega_fd")?,
            ..BranchOptions::default()
        };
        let branch = eigen_branch(&profile, &opts)?;
        let cs = alpha_and_correctors(&profile, &adjoint)?;
        Ok(Self {
            adjoint_residual: adjoint_residual(&profile, &adjoint),
            pairing,
            route_d1: cs.melnikov_d1(),
            route_d2: cs.melnikov_d2(),
            profile,
            branch,
        })
    }

    /// Relative gaps `|λ'(0) - i·route₁|` and `|λ''(0) - route₂|`.
    pub fn melnikov_gaps(&self, floor: f64) -> (f64, f64) {
        let d1 = self.branch.d1;
        let g1 = (d1.re.powi(2) + (d1.im - self.route_d1).powi(2)).sqrt() / d1.norm().max(floor);
        let d2 = self.branch.d2;
        let g2 = (d2.im.powi(2) + (d2.re - self.route_d2).powi(2)).sqrt() / d2.norm().max(floor);
        (g1, g2)
    }
}

pub fn spectral(cfg: &Config, out: &Path) -> Result<Report> {
    let mut r = Report::new("spectral");
    let (h_fine, h_coarse) = (cfg.f64("wave.step")?, cfg.f64("wave.coarse_step")?);
    let (fine, coarse) = rayon::join(|| SpectralRun::new(cfg, h_fine), || SpectralRun::new(cfg, h_coarse));
    let (fine, coarse) = (fine?, coarse?);
    let floor = cfg.f64("checks.melnikov_floor")?;
    let b = &fine.branch;
    write_rows(
        &out.join("branch.csv"),
        &["omega", "re", "im"],
        b.omega.iter().zip(&b.lambda).map(|(w, l)| vec![num(*w), num(l.re), num(l.im)]),
    )?;
    write_rows(
        &out.join("melnikov.csv"),
        &["step", "d1_re", "d1_im", "route_d1", "d2_re", "d2_im", "route_d2", "nu1", "nu2"],
        [(h_coarse, &coarse), (h_fine, &fine)].iter().map(|(h, s)| {
            vec![
                num(*h),
                num(s.branch.d1.re),
                num(s.branch.d1.im),
                num(s.route_d1),
                num(s.branch.d2.re),
                num(s.branch.d2.im),
                num(s.route_d2),
                num(s.branch.nu1),
                num(s.branch.nu2),
            ]
        }),
    )?;
    let order = (coarse.adjoint_residual / fine.adjoint_residual).ln() / (h_coarse / h_fine).ln();
    r.value("adjoint_residual", fine.adjoint_residual);
    r.value("adjoint_residual_coarse", coarse.adjoint_residual);
    r.value("nu1", b.nu1);
    r.value("nu2", b.nu2);
    r.value("c", fine.profile.c);
    r.check(Check::at_least("adjoint_order", order, cfg.f64("checks.min_adjoint_order")?));
    r.check(Check::below("adjoint_pairing_error", (fine.pairing - 1.0).abs(), cfg.f64("checks.pairing_tol")?));
    let (g1, g2) = fine.melnikov_gaps(floor);
    let (c1, c2) = coarse.melnikov_gaps(floor);
    let tol = cfg.f64("checks.melnikov_rel_tol")?;
    r.check(Check::below("melnikov_first_rel_gap", g1, tol));
    r.check(Check::below("melnikov_second_rel_gap", g2, tol));
    // gaps already at rounding level cannot improve further
    let improves = |f: f64, c: f64| f <= c || f < 1e-9;
    r.check(
        Check::flag("melnikov_improves", improves(g1, c1) && improves(g2, c2))
            .with_detail(format!("first {c1:.2e} -> {g1:.2e}, second {c2:.2e} -> {g2:.2e}")),
    );
    r.check(Check::flag("nu2_positive", b.hs).with_detail(format!("nu2 = {:.6}", b.nu2)));
    Ok(r)
}

pub fn correctors(cfg: &Config, out: &Path) -> Result<Report> {
    let mut r = Report::new("correctors");
    let p = profile(cfg, cfg.f64("wave.step")?)?;
    let adjoint = solve_adjoint(&p)?;
    let cs = alpha_and_correctors(&p, &adjoint)?;
    write_rows(
        &out.join("alpha1.csv"),
        &["mu", "sigma", "tau", "alpha1"],
        (0..5).map(|m| vec![(m + 1).to_string(), num(cs.sigma[m]), num(cs.tau[m]), num(cs.alpha1[m])]),
    )?;
    write_rows(
        &out.join("alpha2.csv"),
        &["mu", "mu2", "alpha2_p", "alpha2_q"],
        (0..25).map(|k| {
            let (m, n) = (k / 5, k % 5);
            vec![(m + 1).to_string(), (n + 1).to_string(), num(cs.alpha2_p[m][n]), num(cs.alpha2_q[m][n])]
        }),
    )?;
    let mut header = vec!["xi".to_string()];
    header.extend((1..=5).map(|m| format!("p1_{m}")));
    for name in ["p2", "q2"] {
        header.extend((0..25).map(|k| format!("{name}_{}{}", k / 5 + 1, k % 5 + 1)));
    }
    let cols: Vec<&Vec<f64>> = cs.all().map(|c| &c.values).collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_rows(
        &out.join("correctors.csv"),
        &header_refs,
        (0..p.phi.len()).map(|k| std::iter::once(num(p.grid.xi(k))).chain(cols.iter().map(|c| num(c[k]))).collect()),
    )?;
    let gap = cs.all().map(|c| c.residual).fold(0.0, f64::max);
    let scale = cs.all().map(|c| c.max_abs()).fold(0.0, f64::max).max(1.0);
    r.value("melnikov_first", cs.melnikov_d1());
    r.value("melnikov_second", cs.melnikov_d2());
    r.value("largest_corrector", scale);
    r.check(Check::below("max_multiplier", cs.max_multiplier, cfg.f64("checks.max_multiplier")?));
    r.check(Check::below("scheme_gap", gap / scale, cfg.f64("checks.max_scheme_gap")?));
    r.check(Check::flag("correctors_decay", cs.all().all(|c| c.decays())));
    Ok(r)
}
