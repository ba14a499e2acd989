//! Implied volatility asymptotics for extreme strikes and short maturities,
//! together with the exact pricers used to check them.
//!
//! The crate is layered bottom-up:
//! - [`specfun`]: Gaussian tails, Mills ratio and the `D` function with its inverse.
//! - [`blackscholes`]: normalized call price, its log-domain OTM form and the inverse in total volatility.
//! - [`models`]: Black&Scholes, Carr-Wu, Merton and Heston laws (cf, mgf, tails, scaling data).
//! - [`pricing`]: Fourier contour pricing, the Merton Poisson mixture and seeded Monte Carlo.
//! - [`asymptotics`]: model-free price/tail to volatility maps and the per-model smile formulas.
//! - [`harness`]: path families, experiment runs, convergence metrics and CSV output.

// `!(x > 0.0)` is used deliberately so that NaN inputs are rejected too;
// quadrature nodes and frozen reference values keep all printed digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod asymptotics;
pub mod blackscholes;
pub mod error;
pub mod harness;
pub mod models;
pub mod numeric;
pub mod pricing;
pub mod specfun;

pub use error::{Error, Result};
