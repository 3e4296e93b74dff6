// SPDX-License-Identifier: Apache-2.0

//! Bogoliubov transformations of a massless scalar field confined between two
//! moving boundaries, in flat space or outside a Schwarzschild mass.
//!
//! The field lives in a 1+1 dimensional cavity written in conformally flat
//! coordinates `(t, x)`. Boundary motion mixes the stationary modes (`alpha`)
//! and creates particles from the vacuum (`beta`). Three independent routes
//! compute the transformation:
//!
//! * [`perturbative::dyson_transform`]: first-order Dyson coefficients from
//!   oscillatory time integrals of the boundary velocities.
//! * [`integrator::integrate`]: direct solution of the matrix ODE
//!   `dS/dt = [i Omega + M1 dx1/dt + M2 dx2/dt] S`, valid beyond first order.
//! * [`scattering::evolve`] + [`scattering::extract_coefficients`]: the
//!   instantaneous-mode method for rigid translations of the cavity.
//!
//! For the oscillating-wall experiment near a massive body,
//! [`perturbative::oscillating_beta_closed_form`] evaluates the closed form,
//! including the curvature-induced subharmonic resonance.

pub mod cli;
pub mod error;
pub mod integrator;
pub mod linalg;
pub mod modes;
pub mod perturbative;
pub mod quadrature;
pub mod scattering;
pub mod spacetime;
pub mod symplectic;
pub mod trajectories;

pub use error::{Error, Result};
pub use modes::{CavityConfig, CouplingMatrices, ModeFunction};
pub use spacetime::SchwarzschildSpacetime;
pub use symplectic::{BogoliubovTransform, FrequencyMatrix, ParticleSpectrum};
pub use trajectories::{Boundary, OscillatingScenario, Trajectory};

pub use num_complex::Complex64;
