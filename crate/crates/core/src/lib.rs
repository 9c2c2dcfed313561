//! Parabolic (zero-energy) scattering orbits of the planar generalized N-centre problem.
//!
//! The particle moves under `ẍ = ∇U(x)` with
//! `U(x) = Σ m_i / (α |x − c_i|^α)` and `α ∈ [1, 2)`. Orbits are built in two stages:
//!
//! 1. [`variational`] minimizes the Maupertuis functional `∫|u̇|² · ∫U(u)` over discrete
//!    paths joining two points of equal norm, inside a prescribed winding-parity class
//!    ([`homotopy`]). The minimizer, rescaled in time, is a zero-energy solution of the
//!    fixed-endpoint problem.
//! 2. [`entire`] continues those solutions as the endpoint radius grows, extends the tails
//!    with the ODE integrator ([`integrator`]), and measures the asymptotic quantities:
//!    directions, radial growth law, action scaling and the collapsing-centres limit.
//!
//! The crate is `no_std` and only needs `alloc`; all IO lives in the companion CLI crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod entire;
mod error;
pub mod fit;
pub mod geometry;
pub mod homotopy;
pub mod integrator;
pub mod math;
pub mod potentials;
pub mod variational;

pub use error::{Error, Result};
pub use math::Vec2;
pub use potentials::{Centre, ProblemConfig};
