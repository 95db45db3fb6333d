use std::sync::OnceLock;

use lattice_waves::nonlinearity::{Branch, Nonlinearity};
use lattice_waves::spectral::{alpha_and_correctors, eigen_branch, BranchOptions, CorrectorSet, SpectralBranch};
use lattice_waves::subsuper::*;
use lattice_waves::wave::{solve_adjoint, solve_mfde, SolveOptions, WaveProfile};
use lattice_waves::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cubic() -> Nonlinearity {
    Nonlinearity::cubic(0.1).unwrap()
}

fn horizontal() -> &'static WaveProfile {
    static P: OnceLock<WaveProfile> = OnceLock::new();
    P.get_or_init(|| solve_mfde(&cubic(), (1.0, 0.0), &SolveOptions::default(), None).unwrap())
}

fn diagonal() -> &'static (WaveProfile, SpectralBranch, CorrectorSet) {
    static D: OnceLock<(WaveProfile, SpectralBranch, CorrectorSet)> = OnceLock::new();
    D.get_or_init(|| {
        let p = solve_mfde(&cubic(), (1.0, 1.0), &SolveOptions::default(), None).unwrap();
        let b = eigen_branch(&p, &BranchOptions::default()).unwrap();
        let cs = alpha_and_correctors(&p, &solve_adjoint(&p).unwrap()).unwrap();
        (p, b, cs)
    })
}

fn angle_table() -> &'static AngleTable {
    static T: OnceLock<AngleTable> = OnceLock::new();
    T.get_or_init(|| {
        let opts = SolveOptions { half_width: 60.0, ..SolveOptions::default() };
        AngleTable::build(0.1, 1e-3, 7, &opts).unwrap()
    })
}

/// Finite-difference mismatch at `h` and `h/2`; second order means the
/// ratio is close to 4 unless both are at rounding level.
fn assert_second_order<C: Candidate>(cand: &C, samples: &[((i64, i64), f64)], h: f64) {
    let e1 = derivative_mismatch(cand, samples, h);
    let e2 = derivative_mismatch(cand, samples, 0.5 * h);
    assert!(e2 < 1e-5, "mismatch {e2:.2e}");
    assert!(e2 < 1e-9 || e1 / e2 > 3.0, "ratio {:.2} ({e1:.2e}, {e2:.2e})", e1 / e2);
}

fn random_samples(n: usize, i: (i64, i64), j: (i64, i64), t: (f64, f64), seed: u64) -> Vec<((i64, i64), f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| ((rng.gen_range(i.0..=i.1), rng.gen_range(j.0..=j.1)), rng.gen_range(t.0..t.1))).collect()
}

#[test]
fn exact_wave_residual_is_at_noise_level() {
    let p = horizontal();
    let noise = profile_noise(p, 40.0);
    let w = Squeeze1d::wave(p, Side::Sub, 0.37);
    let r = residual(&w, &Neighbourhood::Plus, &cubic(), &site_box((-30, 30), (-2, 2), (1, 1)), &linspace(0.0, 4.0, 5), 0.0)
        .unwrap();
    let sup = r.samples.iter().map(|s| s.j.abs()).fold(0.0, f64::max);
    assert!(sup <= 10.0 * noise, "{sup:.2e} vs noise {noise:.2e}");
}

#[test]
fn distorted_waves_bracket_the_true_dynamics() {
    let sites = site_box((-40, 40), (-40, 40), (1, 1));
    let times = linspace(0.0, 2.0, 3);
    for (branch, side) in [(Branch::Minus, Side::Sub), (Branch::Plus, Side::Super)] {
        let nl = Nonlinearity::distorted(0.1, 1e-3, branch).unwrap();
        let p = solve_mfde(&nl, (0.4f64.cos(), 0.4f64.sin()), &SolveOptions::default(), None).unwrap();
        let w = Squeeze1d::wave(&p, side, 0.0);
        let r = residual(&w, &Neighbourhood::Plus, &cubic(), &sites, &times, 10.0 * profile_noise(&p, 40.0)).unwrap();
        assert!(r.summary.samples >= 10_000);
        assert!(r.passed(), "{:?}", r.summary);
    }
}

#[test]
fn squeeze_with_template_has_consistent_derivative() {
    let p = horizontal();
    for side in [Side::Sub, Side::Super] {
        let z = Scaled { template: ZHom::new(0.05).unwrap(), amplitude: 0.02, start: 0.0, k_z: 2.0 };
        let w = Squeeze1d { profile: p, side, phase: 0.0, z: Some(z) };
        assert_second_order(&w, &random_samples(100, (-30, 30), (-3, 3), (0.5, 40.0), 1), 1e-3);
    }
}

#[test]
fn transverse_without_plateau_is_the_squeeze() {
    let (p, _, cs) = diagonal();
    let z = Scaled { template: ZHom::new(0.05).unwrap(), amplitude: 0.01, start: 1.0, k_z: 3.0 };
    let flat = Transverse2d::new(p, Some(cs), None, z, 0.05, 0.2, Side::Sub).unwrap();
    for &((n, l), t) in &random_samples(50, (-20, 20), (-20, 20), (1.0, 30.0), 2) {
        let expect = p.phi_at(n as f64 + p.c * t + 0.2 - z.big_z(t)) - z.z(t);
        assert!((flat.value((n, l), t) - expect).abs() < 1e-15);
        assert!(flat.deviation(n, l, t) < 1e-15);
    }
}

#[test]
fn transverse_needs_correctors_with_a_plateau() {
    let (p, b, _) = diagonal();
    let z = Scaled { template: ZHom::new(0.05).unwrap(), amplitude: 0.01, start: 1.0, k_z: 3.0 };
    let plateau = PlateauParams::new(1.0, 4.0, b.nu1, b.nu2).unwrap();
    let r = Transverse2d::new(p, None, Some(plateau), z, 0.05, 0.0, Side::Sub);
    assert!(matches!(r, Err(Error::Config(_))));
}

fn transverse_params(b: &SpectralBranch, p: &WaveProfile, eta_z: f64) -> TransverseParams {
    TransverseParams {
        plateau: PlateauParams::new(1.0, 1.0, b.nu1, b.nu2).unwrap(),
        k_z: choose_kz(p, eta_z, 0.02, 1.2).unwrap(),
        eta_z,
        amplitude: 0.01,
    }
}

#[test]
fn transverse_derivative_is_consistent() {
    let (p, b, cs) = diagonal();
    let mut params = transverse_params(b, p, 0.05);
    params.plateau.gamma = 4.0;
    for side in [Side::Sub, Side::Super] {
        let cand = Transverse2d::from_params(p, cs, &params, ZHom::new(0.05).unwrap(), 0.0, side).unwrap();
        let samples: Vec<_> = random_samples(100, (-30, 30), (-15, 15), (1.5, 30.0), 3)
            .into_iter()
            .map(|((n, l), t)| ((n - (p.c * t).round() as i64, l), t))
            .collect();
        assert_second_order(&cand, &samples, 1e-3);
    }
}

#[test]
fn tuned_transverse_pair_passes_with_phase_rate() {
    let (p, b, cs) = diagonal();
    let noise = profile_noise(p, 40.0);
    let sampling = TransverseSampling { times: linspace(1.0, 40.0, 12), ..TransverseSampling::default() };
    for side in [Side::Sub, Side::Super] {
        let (s, _) = tune_gamma(p, cs, transverse_params(b, p, 0.05), ZHom::new(0.05).unwrap(), side, &cubic(), &sampling, 10.0 * noise, 4096.0)
            .unwrap();
        assert!(s.passed, "{side:?}: {:?}", s.attempts);
        assert!(s.min_xi_rate >= 0.5 * p.c);
        assert!(s.deviation_scale < 0.05);
    }
}

#[test]
fn transverse_fails_when_the_template_decays_too_fast() {
    // the far-field margin needs η_z below 2a/3
    let (p, b, cs) = diagonal();
    assert!(matches!(choose_kz(p, 0.3, 0.02, 1.2), Err(Error::Precondition(_))));
    let sampling = TransverseSampling { times: linspace(1.0, 20.0, 6), ..TransverseSampling::default() };
    let mut params = transverse_params(b, p, 0.05);
    params.eta_z = 0.3;
    let (s, _) =
        tune_gamma(p, cs, params, ZHom::new(0.3).unwrap(), Side::Sub, &cubic(), &sampling, 1e-8, 64.0).unwrap();
    assert!(!s.margin_passed);
}

#[test]
fn bracket_phase_solves_its_ode() {
    let p = horizontal();
    let shift = bracket_shift(p).unwrap();
    let b = EntireBracket::new(p, shift, 0.3 * p.c, Side::Sub).unwrap();
    let f = |t: f64, x: f64| b.m0 * (shift.eta0 * (p.c * t + x)).exp();
    let (mut t, mut x) = (-400.0, 0.0);
    let end = b.blowup_time() - 2.0;
    let h = 1e-2;
    while t < end - 1e-12 {
        let k1 = f(t, x);
        let k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
        let k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
        let k4 = f(t + h, x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
        if (t.fract()).abs() < 1e-9 {
            assert!((x - b.big_xi(t)).abs() < 1e-8 * (1.0 + x.abs()), "t={t}: {x} vs {}", b.big_xi(t));
        }
    }
    assert!((x - b.big_xi(t)).abs() < 1e-8 * (1.0 + x.abs()));
    assert!(b.big_xi(-1e3).abs() < 1e-100);
    for t in linspace(-60.0, end, 30) {
        assert!((f(t, b.big_xi(t)) - b.dbig_xi(t)).abs() < 1e-12 * b.dbig_xi(t));
    }
}

#[test]
fn bracket_is_ordered_and_stops_at_blowup() {
    let p = horizontal();
    let shift = bracket_shift(p).unwrap();
    let lo = EntireBracket::new(p, shift, 0.2, Side::Sub).unwrap();
    let hi = EntireBracket::new(p, shift, 0.2, Side::Super).unwrap();
    for t in linspace(-80.0, lo.blowup_time() - 0.1, 40) {
        for n in -5..80 {
            assert!(lo.value((n, 0), t) <= hi.value((n, 0), t) + 1e-14);
        }
    }
    assert_second_order(&lo, &random_samples(100, (-5, 40), (0, 0), (-60.0, lo.blowup_time() - 1.0), 4), 1e-3);
    assert_second_order(&hi, &random_samples(100, (-5, 40), (0, 0), (-60.0, hi.blowup_time() - 1.0), 5), 1e-3);
    let r = residual(&lo, &lo.lattice(), &cubic(), &[(3, 0)], &[lo.blowup_time() + 1.0], 0.0);
    assert!(matches!(r, Err(Error::Domain(_))));
}

#[test]
fn bracket_search_passes() {
    let p = horizontal();
    let noise = profile_noise(p, 40.0);
    let m0s: Vec<f64> = [0.5, 0.2, 0.1].iter().map(|f| f * p.c).collect();
    let s = search_bracket(p, &cubic(), &m0s, &[1.0, 5.0, 20.0], 40.0, 10.0 * noise).unwrap();
    assert!(s.passed, "{:?}", s.attempts);
    assert!(s.shift.eta0 > 0.0 && s.shift.eta0 <= p.eta_minus);
}

#[test]
fn stretch_shape() {
    for dh in [0.2, 0.1, 0.05] {
        let st = Stretch::new(dh).unwrap();
        assert!(st.eval(-st.big_l).0.abs() < 1e-12);
        assert_eq!(st.eval(-st.big_l + 3.0).1, 1.0);
        assert!((st.eval(0.0).0 - st.h_inf).abs() < 1e-12);
        for x in linspace(-st.big_l - 5.0, 5.0, 2001) {
            let (_, d, d2) = st.eval(x);
            assert!((-1e-12..=1.0 + 1e-12).contains(&d));
            assert!(d2 <= 1e-12 && d2 >= -dh - 1e-12);
            let e = 1e-5;
            assert!(((st.eval(x + e).0 - st.eval(x - e).0) / (2.0 * e) - d).abs() < 1e-6);
        }
    }
}

#[test]
fn shifted_profiles_meet_at_the_plateau() {
    let table = angle_table();
    let st = Stretch::new(0.1).unwrap();
    let sh = ShiftedTable::new(table.clone(), st.h_inf).unwrap();
    for z in linspace(0.0, std::f64::consts::TAU, 37) {
        assert!((sh.eval(z, st.h_inf).0 - sh.phi_inf).abs() < 1e-9);
    }
    assert!(sh.phi_inf >= 1.0 - 2.0 * table.delta);
    assert!((fold_angle(0.1) - fold_angle(std::f64::consts::FRAC_PI_2 - 0.1)).abs() < 1e-15);
}

#[test]
fn radial_search_passes_and_discriminates() {
    let table = angle_table();
    let noise = table.profiles.iter().map(|p| profile_noise(p, 60.0)).fold(0.0, f64::max);
    let cmin = table.min_speed();
    let times = linspace(0.0, 10.0, 3);
    let ok = search_radial(table, &cubic(), 0.75 * cmin, &[0.2, 0.1], &[50.0, 100.0], &times, 20.0, 10.0 * noise).unwrap();
    assert!(ok.passed, "{:?}", ok.attempts);
    // at nearly the critical speed, curvature at small radius breaks it
    let tight = search_radial(table, &cubic(), 0.995 * cmin, &[0.2], &[50.0], &times, 20.0, 10.0 * noise).unwrap();
    assert!(!tight.passed);
    let st = ShiftedTable::new(table.clone(), Stretch::new(0.2).unwrap().h_inf).unwrap();
    let cand = PlateauRadial::new(&st, 0.2, 60.0, 0.75 * cmin).unwrap();
    assert_second_order(&cand, &random_samples(100, (0, 120), (0, 120), (0.0, 20.0), 6), 1e-3);
    assert!(matches!(PlateauRadial::new(&st, 0.2, 60.0, cmin), Err(Error::Precondition(_))));
}
