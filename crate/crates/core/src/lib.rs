//! Quantum/semiclassical Smoluchowski dynamics of a Brownian particle.
//!
//! The library covers three layers of the same physics:
//!
//! * position-space drift-diffusion PDEs with the semiclassical effective
//!   diffusion coefficient `D_eff = D(1 + β²ħ²V″/12m)` ([`pde`]),
//! * the Gaussian-ansatz dispersion equations for free and harmonic
//!   particles, from the β-resolved integro-ODE family down to the exact
//!   Lambert-W closed form `σ² = λ_T²{−1 − W₋₁[−exp(−1 − 2Dt/λ_T²)]}`
//!   ([`dispersion`]),
//! * diagnostics of the quantum-to-classical crossover: local diffusion
//!   exponents α = d ln σ/d ln t and the de Broglie length/time scales
//!   ([`analysis`]).
//!
//! Everything numeric is generic over the scalar type through [`Real`]
//! (`f64` for production, `f32` compiles and is smoke-tested); concrete
//! `f64` aliases live at the crate root.

// `!(x > 0)` rather than `x <= 0`: the negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dispersion;
pub mod error;
pub mod model;
pub mod pde;
pub mod scalar;
pub mod specfun;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` concrete aliases for the main domain types.
pub type PhysicalParams64 = model::PhysicalParams<f64>;
pub type ArrheniusModel64 = model::ArrheniusModel<f64>;
pub type Potential64 = model::Potential<f64>;
pub type Trajectory64 = dispersion::DispersionTrajectory<f64>;
pub type GridState64 = pde::GridState<f64>;

/// `f32` aliases; the whole stack instantiates at single precision too.
pub type PhysicalParams32 = model::PhysicalParams<f32>;
pub type Trajectory32 = dispersion::DispersionTrajectory<f32>;
