//! Shock profiles and spectral stability for a one-dimensional
//! dissipative-dispersive hydrodynamic model.
//!
//! The model is an isentropic Euler system with pressure law `P^gamma`,
//! a viscous flux `mu * m_xx` and a quantum (Bohm) dispersion term with
//! coefficient `k^2`. In the frame of a traveling shock the profile is a
//! heteroclinic orbit of a planar ODE; its spectral stability is decided
//! by an Evans function evaluated on a compound-matrix (wedge) system,
//! with winding numbers on right-half-plane contours as the verdict.
//!
//! Pipeline, one module per stage:
//!
//! * [`model`]: end states, Rankine-Hugoniot constants, existence and
//!   monotonicity of profiles via a planar potential.
//! * [`profile`]: shooting the heteroclinic connection and resampling it
//!   onto a uniform grid.
//! * [`linearize`]: the linearized operator around the profile as a
//!   first-order 4x4 system in the density perturbation, plus essential
//!   spectrum curves and a resolvent symbol bound at the end states.
//! * [`evans`]: the 6x6 wedge system, asymptotic frames, analytic
//!   continuation of the frames in the spectral parameter, and Evans
//!   function evaluation.
//! * [`contour`]: node placement on right-half-plane contours, winding
//!   numbers and a Cauchy-integral consistency check.
//! * [`oracle`]: an independent finite-difference discretization of the
//!   linearized operator whose eigenvalues cross-check the Evans verdict.
//! * [`presets`]: the parameter sets exercised throughout the test suite.
//!
//! The crate is `no_std` (with `alloc`); everything downstream of the
//! model formulas is plain `f64`/`Complex64` arithmetic.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod contour;
pub mod evans;
pub mod linalg;
pub mod linearize;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod presets;
pub mod profile;

pub use num_complex::Complex64;
