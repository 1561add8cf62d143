//! Numerical building blocks for the link models.

mod quadrature;
mod special;

pub use quadrature::{integrate, integrate_to_infinity, Tolerance};
pub use special::{bessel_k, ln_bessel_k, ln_gamma, regularized_gamma_lower, regularized_gamma_upper};
