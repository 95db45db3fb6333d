use lattice_waves::experiments::{Config, Scenario};
use lattice_waves::lattice::{rotate_from_wave_frame, rotate_to_wave_frame};
use lattice_waves::nonlinearity::{dtau, tau, Reaction, Sign};
use lattice_waves::simulator::{comparison_harness, BoundaryRule, Integrator, SimConfig, Simulator};
use lattice_waves::{Branch, Field, Nonlinearity, ObstacleLattice, Window};
use proptest::prelude::*;

fn small_sim(obstacle: Vec<(i64, i64)>, t_end: f64) -> Simulator {
    let lattice = ObstacleLattice::new(Window::new(-6, 6, -6, 6).unwrap(), obstacle, (1, 0)).unwrap();
    Simulator::new(SimConfig {
        lattice,
        nl: Nonlinearity::cubic(0.3).unwrap(),
        dt: 0.2,
        t_end,
        boundary: BoundaryRule::NoFlux,
        integrator: Integrator::Rk4,
    })
    .unwrap()
}

fn obstacles() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-3i64..=3, -3i64..=3), 0..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rotation_round_trips(i in -50i64..50, j in -50i64..50, sh in -4i64..=4, sv in -4i64..=4) {
        prop_assume!(sh != 0 || sv != 0);
        let (n, l) = rotate_to_wave_frame(i, j, sh, sv);
        prop_assert_eq!(rotate_from_wave_frame(n, l, sh, sv), Some((i, j)));
    }

    #[test]
    fn distorted_nonlinearities_bracket_the_cubic(a in 0.05f64..0.45, delta in 1e-4f64..2e-3, u in -0.2f64..1.2) {
        let g = Nonlinearity::cubic(a).unwrap().g(u);
        let lo = Nonlinearity::distorted(a, delta, Branch::Minus).unwrap().g(u);
        let hi = Nonlinearity::distorted(a, delta, Branch::Plus).unwrap().g(u);
        prop_assert!(lo <= g + 1e-15 && g <= hi + 1e-15, "{lo} {g} {hi}");
    }

    #[test]
    fn cutoff_slope_matches_differences(u in -0.1f64..1.1, nu in 0.01f64..0.08, plus in any::<bool>()) {
        let s = if plus { Sign::Plus } else { Sign::Minus };
        let h = 1e-6;
        let fd = (tau(u + h, nu, s).unwrap() - tau(u - h, nu, s).unwrap()) / (2.0 * h);
        prop_assert!((fd - dtau(u, nu, s).unwrap()).abs() < 1e-5, "{fd}");
    }

    #[test]
    fn unit_box_is_invariant(obstacle in obstacles(), seed in prop::collection::vec(0.0f64..=1.0, 169)) {
        let sim = small_sim(obstacle, 10.0);
        let lat = sim.lattice().clone();
        let mut k = 0;
        let u0 = Field::from_fn(&lat, 0.0, |_| { k += 1; seed[k - 1] });
        sim.run(u0, 5, |f| {
            assert!(f.values.iter().all(|&u| (-1e-12..=1.0 + 1e-12).contains(&u)));
            Ok(())
        }).unwrap();
    }

    #[test]
    fn ordered_pairs_stay_ordered(
        obstacle in obstacles(),
        u in prop::collection::vec(-0.5f64..1.5, 169),
        gap in prop::collection::vec(0.0f64..0.5, 169),
    ) {
        let sim = small_sim(obstacle, 6.0);
        let lat = sim.lattice().clone();
        let n = lat.n_active();
        let u0 = Field { values: u[..n].to_vec(), time: 0.0 };
        let v0 = Field { values: u[..n].iter().zip(&gap).map(|(a, b)| a - b).collect(), time: 0.0 };
        let rep = comparison_harness(&sim, u0, v0).unwrap();
        prop_assert!(rep.ordered, "{:?}", rep.first_violation);
    }

    #[test]
    fn overrides_round_trip_through_rendering(seed in 0u64..1_000_000, t_end in 1.0f64..500.0) {
        let s = Scenario::Comparison;
        let overrides = vec![format!("pairs.seed={seed}"), format!("sim.t_end={t_end:?}")];
        let c = Config::resolve(s.schema(), None, &overrides).unwrap();
        let back = Config::resolve(s.schema(), Some(&c.to_text()), &[]).unwrap();
        prop_assert_eq!(back.u64("pairs.seed").unwrap(), seed);
        prop_assert_eq!(back.f64("sim.t_end").unwrap(), t_end);
        prop_assert_eq!(back, c);
    }
}
