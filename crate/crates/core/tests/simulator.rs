use std::sync::OnceLock;

use lattice_waves::lattice::{Field, ObstacleLattice, Window};
use lattice_waves::nonlinearity::Nonlinearity;
use lattice_waves::simulator::*;
use lattice_waves::subsuper::{Candidate, Side, Squeeze1d};
use lattice_waves::wave::{solve_mfde, SolveOptions, WaveProfile};
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

fn diagonal() -> &'static WaveProfile {
    static P: OnceLock<WaveProfile> = OnceLock::new();
    P.get_or_init(|| solve_mfde(&cubic(), (1.0, 1.0), &SolveOptions::default(), None).unwrap())
}

fn sim(lattice: &ObstacleLattice, dt: f64, t_end: f64, boundary: BoundaryRule) -> Simulator {
    Simulator::new(SimConfig { lattice: lattice.clone(), nl: cubic(), dt, t_end, boundary, integrator: Integrator::Rk4 }).unwrap()
}

fn planar(profile: &WaveProfile, phase: f64) -> BoundaryRule {
    BoundaryRule::PlanarWave { profile: Box::new(profile.clone()), phase }
}

fn sup_diff(a: &Field, b: &Field) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn equilibria_are_fixed_points() {
    let lat = ObstacleLattice::new(Window::centered(6), [(0, 0), (1, 0)], (1, 0)).unwrap();
    for v in [0.0, 0.1, 1.0] {
        for boundary in [BoundaryRule::NoFlux, BoundaryRule::Constants { minus: v, plus: v }] {
            let s = sim(&lat, 0.1, 1.0, boundary);
            let u0 = Field::constant(&lat, v);
            let u1 = s.step(&u0).unwrap();
            assert!(sup_diff(&u0, &u1) <= 1e-14, "u ≡ {v}");
        }
    }
}

#[test]
fn planar_waves_are_reproduced() {
    for (profile, dir, phase) in [(horizontal(), (1, 0), 0.0), (diagonal(), (1, 1), 3.3)] {
        let lat = ObstacleLattice::unobstructed(Window::new(-40, 40, -12, 12).unwrap(), dir).unwrap();
        let s = sim(&lat, 0.1, 20.0, planar(profile, phase));
        let mut worst: f64 = 0.0;
        s.run(init_planar_wave(&lat, profile, phase), 10, |f| {
            worst = worst.max(measure_deviation(f, &lat, profile, phase));
            Ok(())
        })
        .unwrap();
        assert!(worst < 5e-3, "direction {dir:?}: {worst}");
    }
}

#[test]
fn rk4_error_shrinks_at_fourth_order() {
    let p = horizontal();
    let lat = ObstacleLattice::new(Window::new(-20, 20, -6, 6).unwrap(), [(0, 0)], (1, 0)).unwrap();
    let u0 = init_planar_wave(&lat, p, 0.0);
    let end = |dt: f64| sim(&lat, dt, 4.0, planar(p, 0.0)).run(u0.clone(), usize::MAX, |_| Ok(())).unwrap();
    let (a, b, c) = (end(0.2), end(0.1), end(0.05));
    let ratio = sup_diff(&a, &b) / sup_diff(&b, &c);
    assert!((12.0..=20.0).contains(&ratio), "{ratio}");
}

#[test]
fn unit_interval_is_invariant() {
    let lat = ObstacleLattice::new(Window::centered(15), [(2, 3), (2, 4), (-5, 0)], (1, 0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u0 = Field::from_fn(&lat, 0.0, |_| rng.gen::<f64>());
    let s = sim(&lat, 0.2, 20.0, BoundaryRule::Constants { minus: 0.0, plus: 1.0 });
    s.run(u0, 1, |f| {
        assert!(f.values.iter().all(|&v| (0.0..=1.0).contains(&v)), "t = {}", f.time);
        Ok(())
    })
    .unwrap();
}

#[test]
fn monotone_data_stay_monotone() {
    let p = horizontal();
    let lat = ObstacleLattice::unobstructed(Window::new(-30, 30, -5, 5).unwrap(), (1, 0)).unwrap();
    let s = sim(&lat, 0.2, 15.0, planar(p, 0.0));
    // A raised step on one row keeps the data monotone in `i` but not planar.
    let u0 = Field::from_fn(&lat, 0.0, |(i, j)| {
        let v = p.phi_at(i as f64);
        if j == 0 && i >= -3 { v.max(0.95) } else { v }
    });
    s.run(u0, 5, |f| {
        for &(i, j) in lat.active_sites() {
            if let (Some(a), Some(b)) = (f.get(&lat, (i, j)), f.get(&lat, (i + 1, j))) {
                assert!(b >= a - 1e-12, "({i},{j}) at t = {}", f.time);
            }
        }
        Ok(())
    })
    .unwrap();
}

#[test]
fn initial_data_builders() {
    let lat = ObstacleLattice::unobstructed(Window::centered(8), (1, 0)).unwrap();
    let disk = init_disk(&lat, 0.0, 0.9);
    assert_eq!(disk.values.iter().filter(|&&v| v != 0.0).count(), 1);
    assert_eq!(disk.get(&lat, (0, 0)), Some(0.9));

    let p = horizontal();
    let a = init_planar_wave(&lat, p, 1.0);
    let b = init_planar_wave(&lat, p, 0.0);
    for &(i, j) in lat.active_sites() {
        if let Some(v) = b.get(&lat, (i + 1, j)) {
            assert!((a.get(&lat, (i, j)).unwrap() - v).abs() < 1e-15);
        }
    }

    let bumps = [((1, 1), 0.3), ((-2, 5), 0.7), ((4, -4), 0.0)];
    let c = init_perturbed_wave(&lat, p, 0.0, &bumps);
    let changed = c.values.iter().zip(&b.values).filter(|(x, y)| x != y).count();
    assert_eq!(changed, bumps.len());
}

#[test]
fn non_finite_states_abort() {
    let lat = ObstacleLattice::unobstructed(Window::centered(3), (1, 0)).unwrap();
    let s = sim(&lat, 0.2, 10.0, BoundaryRule::NoFlux);
    let mut u0 = Field::constant(&lat, 0.0);
    u0.values[7] = 1e120;
    let err = s.run(u0, 1, |_| Ok(())).unwrap_err();
    assert!(matches!(err, Error::NonFinite { .. }), "{err}");
}

#[test]
fn config_rejects_large_steps() {
    let lat = ObstacleLattice::unobstructed(Window::centered(3), (1, 0)).unwrap();
    let cfg = SimConfig { lattice: lat, nl: cubic(), dt: 0.25, t_end: 1.0, boundary: BoundaryRule::NoFlux, integrator: Integrator::Rk4 };
    assert!(matches!(Simulator::new(cfg), Err(Error::Config(_))));
}

#[test]
fn exact_wave_has_no_deviation_and_moves_at_c() {
    let p = horizontal();
    let lat = ObstacleLattice::unobstructed(Window::new(-80, 40, -2, 2).unwrap(), (1, 0)).unwrap();
    let mut pts = Vec::new();
    for k in 0..=20 {
        let t = 5.0 * k as f64;
        let mut f = init_planar_wave(&lat, p, p.c * t);
        f.time = t;
        assert!(measure_deviation(&f, &lat, p, 0.0) < 1e-15);
        let fronts = measure_front(&f, &lat, 0.5);
        assert_eq!(fronts.len(), 5);
        pts.push((t, fronts[2].1));
    }
    let slope = ls_slope(&pts).unwrap();
    assert!((slope.abs() - p.c).abs() < 0.01 * p.c, "{slope} vs {}", p.c);
}

#[test]
fn simulated_front_speed_matches_profile() {
    let p = horizontal();
    let lat = ObstacleLattice::unobstructed(Window::new(-200, 199, 0, 0).unwrap(), (1, 0)).unwrap();
    let s = sim(&lat, 0.1, 100.0, BoundaryRule::NoFlux);
    let mut pts = Vec::new();
    s.run(init_step(&lat, 0.0, 1.0), 10, |f| {
        if f.time >= 20.0 {
            pts.push((f.time, measure_front(f, &lat, 0.5)[0].1));
        }
        Ok(())
    })
    .unwrap();
    let slope = ls_slope(&pts).unwrap();
    assert!((slope.abs() - p.c).abs() < 0.01 * p.c, "{slope}");
}

#[test]
fn disk_radius_grows() {
    let lat = ObstacleLattice::unobstructed(Window::centered(30), (1, 0)).unwrap();
    let s = sim(&lat, 0.2, 10.0, BoundaryRule::Constants { minus: 0.0, plus: 0.0 });
    let mut hist = RadialHistory::new(8, 3, 0.5);
    s.run(init_disk(&lat, 8.0, 0.9), 10, |f| {
        hist.record(f, &lat);
        Ok(())
    })
    .unwrap();
    let speeds = measure_radial_speed(&hist, 4.0);
    assert_eq!(speeds.len(), 8);
    assert!(speeds.iter().all(|s| s.is_some_and(|v| v > 0.3)), "{speeds:?}");
}

#[test]
fn comparison_of_identical_fields() {
    let lat = ObstacleLattice::new(Window::centered(10), [(0, 0)], (1, 0)).unwrap();
    let s = sim(&lat, 0.2, 10.0, BoundaryRule::Constants { minus: 0.0, plus: 1.0 });
    let u0 = init_step(&lat, 0.0, 1.0);
    let r = comparison_harness(&s, u0.clone(), u0).unwrap();
    assert!(r.ordered && r.min_gap == 0.0 && r.first_violation.is_none());
}

#[test]
fn comparison_of_shifted_random_fields() {
    let lat = ObstacleLattice::new(Window::centered(12), [(0, 0)], (1, 0)).unwrap();
    let s = sim(&lat, 0.2, 50.0, BoundaryRule::NoFlux);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u0 = Field::from_fn(&lat, 0.0, |_| rng.gen_range(0.0..1.0));
    let v0 = Field { values: u0.values.iter().map(|v| v - 0.1).collect(), time: 0.0 };
    let r = comparison_harness(&s, u0, v0).unwrap();
    assert!(r.ordered, "{:?}", r.first_violation);
    assert_eq!(r.checks, 251);
}

#[test]
fn comparison_rejects_unordered_data() {
    let lat = ObstacleLattice::unobstructed(Window::centered(4), (1, 0)).unwrap();
    let s = sim(&lat, 0.2, 1.0, BoundaryRule::NoFlux);
    let u0 = Field::constant(&lat, 0.2);
    let v0 = Field::constant(&lat, 0.3);
    assert!(matches!(comparison_harness(&s, u0, v0), Err(Error::Precondition(_))));
}

#[test]
fn true_solution_stays_above_the_sub_wave() {
    // The sub-wave lags the true start by two lattice units; the simulated
    // solution must stay above it on the window.
    let p = horizontal();
    let lat = ObstacleLattice::unobstructed(Window::new(-40, 40, -4, 4).unwrap(), (1, 0)).unwrap();
    let s = sim(&lat, 0.1, 30.0, planar(p, 0.0));
    let sub = Squeeze1d::wave(p, Side::Sub, -2.0);
    s.run(init_planar_wave(&lat, p, 0.0), 5, |f| {
        for (&site, &u) in lat.active_sites().iter().zip(&f.values) {
            assert!(u >= sub.value(site, f.time) - ORDER_TOLERANCE);
        }
        Ok(())
    })
    .unwrap();
}

#[test]
fn snapshots_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let lat = ObstacleLattice::new(Window::new(-5, 6, -3, 4).unwrap(), [(1, 1), (1, 2)], (1, 0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut series = SnapshotSeries::new(dir.path(), "snap").unwrap();
    let mut fields = Vec::new();
    for k in 0..3 {
        let f = Field { values: (0..lat.n_active()).map(|_| rng.gen::<f64>()).collect(), time: 0.5 * k as f64 };
        series.push(&f, &lat).unwrap();
        fields.push(f);
    }
    let index = series.finish().unwrap();
    let text = std::fs::read_to_string(index).unwrap();
    assert_eq!(text.lines().count(), 4);
    for (k, f) in fields.iter().enumerate() {
        let back = read_snapshot(&lat, &dir.path().join(format!("snap_{k:05}.csv"))).unwrap();
        assert_eq!(back.time, f.time);
        assert_eq!(back.values, f.values);
    }
}
