//! Numerics for the stable Faltings height of elliptic curves viewed as a
//! function of the j-invariant, and for bounding its essential minimum.

pub mod certificate;
pub mod distortion;
pub mod error;
pub mod heights;
pub mod inversion;
pub mod modular;
pub mod optimize;
pub mod poly;
pub mod roots;
pub mod sampling;
pub mod section;
pub mod spectrum;
pub mod upper;

pub use error::{Error, Result};
