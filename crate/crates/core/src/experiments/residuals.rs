//! Residual sign suites for the sub/super-solution families and the
//! dense-grid template checks.

use std::path::Path;
use std::time::Instant;

use super::config::{param, Config, Param};
use super::report::{num, write_rows, Check, Report};
use crate::error::Result;
use crate::nonlinearity::{Branch, Nonlinearity};
use crate::spectral::{alpha_and_correctors, eigen_branch, BranchOptions};
use crate::subsuper::{
    check_template, choose_kz, linspace, profile_noise, residual, search_bracket, search_radial, site_box, tune_gamma,
    AngleTable, Neighbourhood, PlateauParams, ResidualSummary, Side, Squeeze1d, Template, TransverseParams,
    TransverseSampling, ZHom, ZObs,
};
use crate::wave::{solve_adjoint, solve_mfde, solve_profile, SolveOptions};

pub const RESIDUALS: &[Param] = &[
    param("wave.a", "0.1", "detuning of the cubic"),
    param("wave.step", "0.05", "grid step h"),
    param("distorted.delta", "1e-3", "distortion δ"),
    param("distorted.angle", "0.4", "propagation angle of the distorted waves"),
    param("distorted.half_width", "40", "computational half-width"),
    param("distorted.box", "40", "sites sampled on [-box, box]^2"),
    param("distorted.times", "0 1 2", "sample times"),
    param("radial.delta", "1e-3", "distortion δ of the angle table"),
    param("radial.angles", "7", "angles on [0, π/4]"),
    param("radial.half_width", "60", "computational half-width of the angle table"),
    param("radial.speed_fraction", "0.75", "target speed as a fraction of min c"),
    param("radial.delta_h", "0.2 0.1", "stretch parameters to try"),
    param("radial.rho", "50 100", "initial radii to try"),
    param("radial.times", "0 5 10", "sample times"),
    param("radial.outer", "20", "sampled distance beyond the front"),
    param("bracket.m0_fractions", "0.5 0.2 0.1", "amplitudes M0 as fractions of c"),
    param("bracket.t_offsets", "1 5 20", "offsets of T* past the blow-up time"),
    param("bracket.span", "40", "length of the sampled time window"),
    param("transverse.direction", "1,1", "lattice direction"),
    param("transverse.eta_z", "0.05", "template decay rate"),
    param("transverse.beta", "1", "plateau amplitude"),
    param("transverse.gamma", "1", "starting plateau width parameter"),
    param("transverse.gamma_max", "4096", "largest width parameter tried"),
    param("transverse.amplitude", "0.01", "template amplitude"),
    param("transverse.kz_slack", "0.02", "slack in the choice of K_Z"),
    param("transverse.kz_factor", "1.2", "safety factor in the choice of K_Z"),
    param("transverse.t_max", "40", "last sample time"),
    param("transverse.times", "12", "number of sample times"),
    param("templates.etas", "0.1 0.3", "template decay rates"),
    param("templates.t1", "0 10 200", "obstacle passage times"),
    param("templates.horizon", "400", "checked time past t1"),
    param("templates.step", "0.01", "grid spacing of the dense check"),
    param("checks.noise_factor", "10", "tolerance in units of the profile interpolation noise"),
    param("checks.min_samples", "10000", "minimum samples of the distorted suite"),
    param("checks.max_suite_seconds", "120", "runtime budget per suite"),
];

fn write_summary_row(rows: &mut Vec<Vec<String>>, suite: &str, s: &ResidualSummary) {
    rows.push(vec![
        suite.to_string(),
        format!("{:?}", s.side).to_lowercase(),
        s.samples.to_string(),
        num(s.min_margin),
        num(s.max_margin),
        num(s.tolerance),
        s.passed.to_string(),
    ]);
}

pub fn residuals(cfg: &Config, out: &Path) -> Result<Report> {
    let mut r = Report::new("residuals");
    let a = cfg.f64("wave.a")?;
    let nl = Nonlinearity::cubic(a)?;
    let step = cfg.f64("wave.step")?;
    let factor = cfg.f64("checks.noise_factor")?;
    let budget = cfg.f64("checks.max_suite_seconds")?;
    let mut rows = Vec::new();

    // distorted waves against the true nonlinearity
    let clock = Instant::now();
    let delta = cfg.f64("distorted.delta")?;
    let angle = cfg.f64("distorted.angle")?;
    let hw = cfg.f64("distorted.half_width")?;
    let b = cfg.i64("distorted.box")?;
    let sites = site_box((-b, b), (-b, b), (1, 1));
    let times = cfg.f64_list("distorted.times")?;
    let opts = SolveOptions::new(hw, step, 1e-10);
    let mut ok = true;
    let mut samples = usize::MAX;
    for (branch, side, name) in [(Branch::Minus, Side::Sub, "sub"), (Branch::Plus, Side::Super, "super")] {
        let dnl = Nonlinearity::distorted(a, delta, branch)?;
        let p = solve_mfde(&dnl, (angle.cos(), angle.sin()), &opts, None)?;
        let w = Squeeze1d::wave(&p, side, 0.0);
        let rep = residual(&w, &Neighbourhood::Plus, &nl, &sites, &times, factor * profile_noise(&p, hw))?;
        rep.write_csv(&out.join(format!("residuals_distorted_{name}.csv")))?;
        write_summary_row(&mut rows, "distorted", &rep.summary);
        ok &= rep.passed();
        samples = samples.min(rep.summary.samples);
    }
    r.check(Check::flag("distorted_signs", ok));
    r.check(Check::at_least("distorted_samples", samples as f64, cfg.f64("checks.min_samples")?));
    r.check(Check::below("distorted_seconds", clock.elapsed().as_secs_f64(), budget));

    // radial sub-solution
    let clock = Instant::now();
    let rhw = cfg.f64("radial.half_width")?;
    let table = AngleTable::build(a, cfg.f64("radial.delta")?, cfg.usize("radial.angles")?, &SolveOptions::new(rhw, step, 1e-10))?;
    let noise = table.profiles.iter().map(|p| profile_noise(p, rhw)).fold(0.0, f64::max);
    let cmin = table.min_speed();
    let radial = search_radial(
        &table,
        &nl,
        cfg.f64("radial.speed_fraction")? * cmin,
        &cfg.f64_list("radial.delta_h")?,
        &cfg.f64_list("radial.rho")?,
        &cfg.f64_list("radial.times")?,
        cfg.f64("radial.outer")?,
        factor * noise,
    )?;
    write_summary_row(&mut rows, "radial", &radial.summary);
    write_rows(
        &out.join("radial_attempts.csv"),
        &["delta_h", "rho", "max_margin", "passed"],
        radial.attempts.iter().map(|a| vec![num(a.0), num(a.1), num(a.2), a.3.to_string()]),
    )?;
    r.value("radial_delta_h", radial.delta_h);
    r.value("radial_rho", radial.rho);
    r.value("radial_min_speed", cmin);
    r.check(Check::flag("radial_margin", radial.passed).with_detail(format!("δ_h = {}, ρ = {}", radial.delta_h, radial.rho)));
    r.check(Check::below("radial_seconds", clock.elapsed().as_secs_f64(), budget));

    // entire bracket
    let clock = Instant::now();
    let p = solve_profile(&nl, 1, 0, 40.0, step, 1e-10)?;
    let m0s: Vec<f64> = cfg.f64_list("bracket.m0_fractions")?.iter().map(|f| f * p.c).collect();
    let bracket = search_bracket(&p, &nl, &m0s, &cfg.f64_list("bracket.t_offsets")?, cfg.f64("bracket.span")?, factor * profile_noise(&p, 40.0))?;
    write_summary_row(&mut rows, "bracket", &bracket.sub);
    write_summary_row(&mut rows, "bracket", &bracket.sup);
    write_rows(
        &out.join("bracket_attempts.csv"),
        &["m0", "t_star", "sub_passed", "super_passed"],
        bracket.attempts.iter().map(|a| vec![num(a.0), num(a.1), a.2.to_string(), a.3.to_string()]),
    )?;
    r.value("bracket_m0", bracket.m0);
    r.value("bracket_t_star", bracket.t_star);
    r.value("bracket_eta0", bracket.shift.eta0);
    r.check(Check::flag("bracket_signs", bracket.passed).with_detail(format!("M0 = {:.4}, T* = {:.3}", bracket.m0, bracket.t_star)));
    r.check(Check::below("bracket_seconds", clock.elapsed().as_secs_f64(), budget));

    // transverse sub-solution
    let clock = Instant::now();
    let (sh, sv) = cfg.pair("transverse.direction")?;
    let tw = 20.0 * sh.abs().max(sv.abs()).max(1) as f64;
    let tp = solve_profile(&nl, sh, sv, tw.max(40.0), step, 1e-10)?;
    let branch = eigen_branch(&tp, &BranchOptions::default())?;
    let cs = alpha_and_correctors(&tp, &solve_adjoint(&tp)?)?;
    let eta_z = cfg.f64("transverse.eta_z")?;
    let params = TransverseParams {
        plateau: PlateauParams::new(cfg.f64("transverse.beta")?, cfg.f64("transverse.gamma")?, branch.nu1, branch.nu2)?,
        k_z: choose_kz(&tp, eta_z, cfg.f64("transverse.kz_slack")?, cfg.f64("transverse.kz_factor")?)?,
        eta_z,
        amplitude: cfg.f64("transverse.amplitude")?,
    };
    let sampling = TransverseSampling {
        times: linspace(1.0, cfg.f64("transverse.t_max")?, cfg.usize("transverse.times")?),
        ..TransverseSampling::default()
    };
    let (search, rep) = tune_gamma(
        &tp,
        &cs,
        params,
        ZHom::new(eta_z)?,
        Side::Sub,
        &nl,
        &sampling,
        factor * profile_noise(&tp, 40.0),
        cfg.f64("transverse.gamma_max")?,
    )?;
    if let Some(rep) = rep {
        rep.write_csv(&out.join("residuals_transverse_sub.csv"))?;
        write_summary_row(&mut rows, "transverse", &rep.summary);
    }
    write_rows(
        &out.join("transverse_attempts.csv"),
        &["gamma", "min_margin", "max_margin", "passed"],
        search.attempts.iter().map(|a| vec![num(a.0), num(a.1), num(a.2), a.3.to_string()]),
    )?;
    r.value("transverse_gamma", search.params.plateau.gamma);
    r.value("transverse_k_z", search.params.k_z);
    r.value("transverse_min_xi_rate", search.min_xi_rate);
    r.check(Check::flag("transverse_margin", search.margin_passed).with_detail(format!("γ = {}", search.params.plateau.gamma)));
    r.check(Check::at_least("transverse_phase_rate", search.min_xi_rate, 0.5 * tp.c));
    r.check(Check::below("transverse_seconds", clock.elapsed().as_secs_f64(), budget));

    write_rows(&out.join("residual_summary.csv"), &["suite", "side", "samples", "min_margin", "max_margin", "tolerance", "passed"], rows)?;

    // templates
    let clock = Instant::now();
    let (all_ok, trows) = template_suite(
        &cfg.f64_list("templates.etas")?,
        &cfg.f64_list("templates.t1")?,
        cfg.f64("templates.horizon")?,
        cfg.f64("templates.step")?,
    )?;
    write_rows(
        &out.join("templates.csv"),
        &["template", "eta", "t1", "samples", "decay_slack", "max_over_start", "min_value", "kappa_observed", "kappa", "half_hom_slack", "integral_error", "c1_jump", "passed"],
        trows,
    )?;
    r.check(Check::flag("template_properties", all_ok));
    r.check(Check::below("template_seconds", clock.elapsed().as_secs_f64(), budget));
    Ok(r)
}

/// Checks the homogeneous and obstacle templates for every `(η, t₁)`.
pub fn template_suite(etas: &[f64], t1s: &[f64], horizon: f64, step: f64) -> Result<(bool, Vec<Vec<String>>)> {
    let mut rows = Vec::new();
    let mut ok = true;
    for &eta in etas {
        let hom = ZHom::new(eta)?;
        let c = check_template(&hom, &hom, 0.0, horizon, step, &[hom.switch_time()]);
        let passed = c.passes(hom.kappa()) && (hom.integral(1e9) - hom.total_integral()).abs() < 1e-3;
        ok &= passed;
        rows.push(template_row("hom", eta, 0.0, &c, hom.kappa(), passed));
        for &t1 in t1s {
            let z = ZObs::new(eta, t1)?;
            let knots = [z.knots().to_vec(), vec![hom.switch_time(), t1 + hom.switch_time()]].concat();
            let c = check_template(&z, &hom, t1, t1 + horizon, step, &knots);
            let passed = c.passes(z.kappa()) && z.integral(1e9) < z.integral_bound();
            ok &= passed;
            rows.push(template_row("obs", eta, t1, &c, z.kappa(), passed));
        }
    }
    Ok((ok, rows))
}

fn template_row(name: &str, eta: f64, t1: f64, c: &crate::subsuper::TemplateCheck, kappa: f64, passed: bool) -> Vec<String> {
    vec![
        name.to_string(),
        num(eta),
        num(t1),
        c.samples.to_string(),
        num(c.decay_slack),
        num(c.max_over_start),
        num(c.min_value),
        num(c.kappa_observed),
        num(kappa),
        num(c.half_hom_slack),
        num(c.integral_error),
        num(c.c1_jump),
        passed.to_string(),
    ]
}
