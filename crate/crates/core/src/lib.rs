//! Radio-frequency atom laser outcoupling from a Thomas-Fermi condensate in
//! gravity.
//!
//! The crate evaluates the outcoupled matter-wave amplitude of a
//! cylindrically symmetric condensate in two formulations:
//!
//! * the Airy-basis expansion ([`outcoupling::f_intuitive`]), where the drive
//!   selects a shell of free-fall eigenstates, and
//! * the Green-function solution ([`outcoupling::f_scattering`]), which uses
//!   the outgoing-wave boundary condition below the source.
//!
//! From either amplitude the [`spectra`] module builds the spectral
//! resolution function of the condensate and convolves it with a magnetic
//! noise spectrum.
//!
//! Everything runs in the dimensionless frame of the gravitational Airy
//! problem: lengths in units of `l0 = (ħ²/2M²g)^(1/3)`, energies in `M g l0`,
//! frequencies in `M g l0 / ħ`. See [`model::DimensionlessFrame`].
//!
//! The crate only needs `core` and `alloc`. File formats, configuration and
//! parallel orchestration live in the `atomlaser` companion crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod model;
pub mod outcoupling;
pub mod quadrature;
pub mod specfun;
pub mod spectra;

pub use num_complex::Complex64;
