//! Numerical building blocks: quadrature, scalar minimisation and seeded
//! random number generation.

pub mod golden;
pub mod quadrature;
pub mod rng;

pub use golden::{golden_section, Minimum};
pub use quadrature::{simpson_richardson, Quadrature};
pub use rng::seeded_rng;
