//! Exact norming constants and Remez-type inequalities for finite-dimensional
//! function spaces on the cube `[-1, 1]^n`.
//!
//! A compact set `Z` in the cube is *norming* for a space `V` when
//! `max_Q |f| <= C * max_Z |f|` holds for every `f` in `V`; the least such `C`
//! is the norming constant `N_V(Z)`. This crate computes `N_V(Z)` for finite
//! `Z` (certified by a Markov-factor bracket), evaluates the classical
//! closed-form bounds on it (Remez, Brudnyi–Ganzburg, metric-span, lacunary
//! curves, nested hypersurfaces, Turán–Nazarov and fewnomial bounds) and
//! audits those bounds against the exact constants.
//!
//! Module map:
//!
//! - [`spaces`]: space descriptors, bases, Markov constants.
//! - [`norming`]: interpolation matrices, Lagrange bases, Fekete subsets,
//!   LP-grid norming constants and certified sup-norms.
//! - [`entropy`]: `l^inf` covering numbers and the metric `(d, n)`-span.
//! - [`bounds`]: Chebyshev machinery, polynomial Remez-type bounds, the auditor.
//! - [`fewnomial`]: exponential sums, log-convex bodies, fewnomial bounds.
//! - [`stability`]: Hausdorff distance and Lipschitz stability of `1 / N_V`.

pub mod bounds;
pub mod entropy;
mod error;
pub mod fewnomial;
mod grid;
pub mod linalg;
pub mod lp;
pub mod norming;
pub mod spaces;
pub mod stability;

pub use error::{Error, Result};

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
