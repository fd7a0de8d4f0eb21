//! Concrete model families.

pub mod boundary;
pub mod hilbert;
pub mod lp_circle;
pub mod spin;
pub mod weighted;
