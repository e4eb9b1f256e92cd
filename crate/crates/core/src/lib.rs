//! Gamma-function products, Kontorovich-Lebedev identities and the
//! Fokker-Planck transition density built on them.

pub mod bessel;
pub mod error;
pub mod fokker_planck;
pub mod gamma;
pub mod identities;
pub mod kernel;
pub mod quadrature;
pub mod serde_complex;
pub mod sum;
pub mod verify;

pub use error::{Error, Result};

pub type Complex = num_complex::Complex64;
