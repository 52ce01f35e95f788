//! Subsystem entropy and correlation statistics over global unitary orbits
//! `{U rho U^dag}` of a bipartite state, with Haar Monte Carlo estimators for
//! every closed form.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: complex matrices, density matrices, partial traces, the map
//!   `Gamma(X) = Tr_B(X) (x) 1_B` and the entropy/distance functionals.
//! - [`haar`]: reproducible Haar unitaries (Ginibre + QR with phase fix),
//!   induced-measure states and flat Dirichlet spectra.
//! - [`weingarten`]: Weingarten functions for `k <= 3`, the second-moment
//!   twirl, the sixth-moment integral `E[U A U^dag B U X U^dag C U D U^dag]`
//!   and Kraus channel helpers.
//! - [`orbit`]: closed-form averages and bounds (Page, a1/a2, c0..c2,
//!   mutual-information and fidelity sandwiches, two-qubit formulas).
//! - [`montecarlo`]: batched, stream-split Monte Carlo estimators.
//! - [`verify`] and [`figures`]: gate suites and figure datasets used by the
//!   `haar-orbit` command-line tool.
//!
//! All logarithms are natural.

#![forbid(unsafe_code)]

pub mod error;
pub mod figures;
pub mod haar;
pub mod linalg;
pub mod montecarlo;
pub mod orbit;
pub mod verify;
pub mod weingarten;

pub use error::{Error, Result};
pub use linalg::{BipartiteDims, Complex64, ComplexMatrix, DensityMatrix, Spectrum};
pub use montecarlo::{MCConfig, MCEstimate, MCMatrixEstimate};
