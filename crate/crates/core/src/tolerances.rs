//! Numerical tolerances shared by checks. Scenario config defaults must
//! agree with these; a unit test in `experiments` enforces it.

/// Profile residual after Newton convergence.
pub const PROFILE_RESIDUAL: f64 = 1e-8;
/// Relative error of the simulated front speed against `c`.
pub const FRONT_SPEED_REL: f64 = 0.01;
/// `|c|` at the symmetric detuning.
pub const SYMMETRIC_SPEED: f64 = 1e-8;
/// Characteristic-equation defect of the tail exponents.
pub const EXPONENT_DEFECT: f64 = 1e-10;
/// Least observed convergence order of the adjoint residual.
pub const ADJOINT_ORDER: f64 = 1.7;
/// Normalisation error of the adjoint pairing.
pub const ADJOINT_PAIRING: f64 = 1e-8;
/// Relative agreement of the two Melnikov routes.
pub const MELNIKOV_REL: f64 = 0.02;
/// Minimum number of sampled sites in the distorted-wave suite.
pub const MIN_RESIDUAL_SAMPLES: usize = 10_000;
/// Runtime budget of each residual suite, seconds.
pub const SUITE_SECONDS: f64 = 120.0;
/// Ordering defect allowed by the comparison harness.
pub const COMPARISON: f64 = 1e-9;
/// Radial speed as a fraction of the slowest planar speed.
pub const SPREADING_FRACTION: f64 = 0.9;
/// Sup deviation from the translated wave at the end of a recovery run.
pub const FINAL_DEVIATION: f64 = 1e-2;
/// `1 - u` allowed behind the front after obstacle passage.
pub const INVADED: f64 = 1e-2;
/// Asymptotic phase shift, lattice units.
pub const PHASE_SHIFT: f64 = 0.1;
