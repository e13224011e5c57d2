//! Numerical toolkit for weighted Bergman spaces on the unit disk.
//!
//! The crate turns a family of function-theoretic objects into computable,
//! testable artifacts:
//!
//! - [`geometry`] — the pseudohyperbolic metric, Möbius transforms,
//!   pseudohyperbolic disks, and sampling lattices with covering audits;
//! - [`weights`] — admissible radial weights and their validity checks;
//! - [`kernels`] — reproducing kernels of the standard weighted Bergman
//!   spaces, norm estimates, and growth bounds;
//! - [`measure`] — finite positive measures on the disk (densities, atoms,
//!   pull-backs under weighted composition), deterministic polar quadrature
//!   with error estimates, and a Monte Carlo cross-check oracle;
//! - [`transforms`] — averaging functions over pseudohyperbolic disks and
//!   `t`-Berezin transforms, plus the operator-bound panels built on them;
//! - [`carleson`] — Carleson-embedding diagnostics: ratio statistics,
//!   lattice sequences, kernel probes, vanishing profiles, and verdicts;
//! - [`compop`] — weighted composition operators, their iterates and
//!   pull-back measures, and power-boundedness / power-compactness
//!   diagnostics;
//! - [`expr`] — a small expression language for analytic symbols and radial
//!   densities, so experiments can be configured from text;
//! - [`numerics`] — deterministic summation and reduction helpers shared by
//!   the numerical modules;
//! - [`selftest`] — the oracle-backed acceptance suite, runnable from the
//!   CLI at two resolutions.
//!
//! Everything numerical is deterministic: quadrature rules are fixed by a
//! [`measure::QuadratureSpec`], random audits use seeded generators, and all
//! parallel reductions are performed in a fixed order so results do not
//! depend on thread count.
//!
//! ```
//! use bergman_lab::geometry::{DiskPoint, rho};
//!
//! let a = DiskPoint::new(0.5, 0.0).unwrap();
//! let z = DiskPoint::new(0.8, 0.0).unwrap();
//! assert!((rho(a, z) - 0.5).abs() < 1e-15);
//! ```

// Validation guards are written `!(x > 0.0)` on purpose: the negated form
// also rejects NaN, which `x <= 0.0` would silently admit.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod carleson;
pub mod compop;
pub mod expr;
pub mod geometry;
pub mod kernels;
pub mod measure;
pub mod numerics;
pub mod selftest;
pub mod transforms;
pub mod weights;

pub use num_complex::Complex64;
