//! Acoustic obstacle scattering in the plane, and the reconstruction of an
//! obstacle's boundary, boundary-condition type and impedance from
//! multi-frequency backscattering far-field data.

pub mod error;
pub mod export;
pub mod geometry;
pub mod inversion;
pub mod oracle;
pub mod profile;
pub mod solver;
pub mod special;
pub mod synthesis;

pub use error::{Error, Result};
pub use geometry::{BoundaryCurve, Direction, HalfPlane, Vec2};
pub use num_complex::Complex64;
