#![no_std]
// Modules import `num_traits::Float` for float methods; it goes unused
// whenever std is linked into the build.
extern crate alloc;

pub mod basis;
pub mod elements;
pub mod error;
pub mod fock;
pub mod lattice;
pub mod potential;
pub mod quadrature;
pub mod roots;
pub mod sum;
pub mod vacuum;

pub use error::{Error, Result};
pub use num_complex::Complex64;
