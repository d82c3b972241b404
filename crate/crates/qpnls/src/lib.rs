//! Spectral simulation and verification engine for the two-dimensional cubic
//! nonlinear Schroedinger equation with quasi-periodic initial data.
//!
//! The equation `i u_t + (u_xx + u_yy) + eps |u|^2 u = 0` with data
//! `u(0,x,y) = sum c(m,n) e^{i(<m,omega>x + <n,omega'>y)}` reduces, mode by
//! mode, to an infinite coupled ODE system. This crate realizes that system
//! on a finite truncation box and provides:
//!
//! * [`lattice`] — dual-lattice geometry, dispersion phases, non-resonance
//!   margins, and the orthogonality averages behind the mode expansion;
//! * [`fields`] — coefficient fields, decay-profile initial data, weighted
//!   norms, physical-space synthesis, and the snapshot wire format;
//! * [`picard`] — the Duhamel/Picard iteration built on a cubic lattice
//!   convolution and a cumulative fourth-order quadrature;
//! * [`combin`] — the ternary label trees that control the iteration:
//!   counting functions, capped enumeration, majorant sums, the existence
//!   horizon and amplitude constants, and explicit small-depth tree terms;
//! * [`verify`] — empirical checks of the decay, Cauchy, and asymptotic
//!   estimates on computed iterates;
//! * [`oracle`] — an independent RK4 integration of the same truncated
//!   system with mass/energy conservation diagnostics.

pub mod combin;
pub mod error;
pub mod fields;
pub mod lattice;
pub mod oracle;
pub mod picard;
pub mod quad;
pub mod verify;

pub use error::{Error, Result};
