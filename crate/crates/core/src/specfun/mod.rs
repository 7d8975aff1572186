//! Special functions: overflow-safe real Airy functions, the complex Airy
//! combination `Ci = Bi + i·Ai`, and Bessel `J₀`.
//!
//! All functions are pure and reentrant.

mod airy;
mod bessel;
mod ddouble;
mod scaled;

pub use airy::{
    airy, airy_ai, airy_aip, airy_bi, airy_bip, airy_ci, airy_ci_scaled, AiryValues,
    SERIES_SWITCH, WRONSKIAN,
};
pub use bessel::{bessel_j0, sph_j1_over_arg};
pub use scaled::{ScaledAiry, ScaledComplex};

pub(crate) use airy::{ai_unscaled, ci_unscaled};
pub(crate) use bessel::j0;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SpecFunError {
    #[error("argument {x} is not finite")]
    Domain { x: f64 },
    #[error("{function}({x}) overflows f64; use the scaled form")]
    Overflow { function: &'static str, x: f64 },
}
