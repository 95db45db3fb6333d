//! Closed-form sub- and super-solutions and their residual checks.

mod bracket;
mod plateau;
mod radial;
mod residual;
mod squeeze;
mod templates;
mod transverse;

pub use bracket::*;
pub use plateau::*;
pub use radial::*;
pub use residual::*;
pub use squeeze::*;
pub use templates::*;
pub use transverse::*;
