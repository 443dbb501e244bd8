//! Special functions, implemented in-crate: everything downstream (kernels,
//! scalar products, bases) is calibrated against these, so they carry their
//! own frozen high-precision reference values in the unit tests.

mod bessel;
mod gamma;
mod gegenbauer;
mod sph_harm;

pub use bessel::{bessel_j, bessel_j_zero, bessel_y, n_alpha, sph_bessel_j};
pub(crate) use bessel::{bessel_j_raw, sph_bessel_j_raw};
pub use gamma::{binomial, double_factorial_odd, factorial, gamma, ln_gamma};
pub use gegenbauer::{gegenbauer, gegenbauer_coeffs, gegenbauer_deriv, gegenbauer_zero_arg};
pub use sph_harm::sph_harm;

/// Truncated ramp (1 - u^2)^alpha restricted to |u| < 1; zero outside.
/// For negative alpha the value diverges toward the edge, which is the
/// honest behavior of the corresponding Fourier multipliers.
pub fn ramp_power(alpha: f64, u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - u * u).powf(alpha)
    }
}
