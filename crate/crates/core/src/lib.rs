//! Bistable lattice differential equations on punctured `Z^2`.
//!
//! Travelling-wave profiles for the mixed-type functional differential
//! equation, transverse spectral data, closed-form sub- and super-solutions
//! with residual checks, and a fixed-step simulator for the obstructed lattice.

pub mod error;
pub mod experiments;
pub mod grid;
pub mod lattice;
pub mod linalg;
pub mod nonlinearity;
pub mod simulator;
pub mod spectral;
pub mod subsuper;
pub mod tolerances;
pub mod wave;

pub use error::{Error, Result};
pub use lattice::{Field, ObstacleLattice, Site, Window};
pub use nonlinearity::{Branch, Nonlinearity};
pub use wave::{AdjointProfile, WaveProfile};
