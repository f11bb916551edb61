//! Exact weak solutions of Burgers' equation `∂ₜu + ∂ₓ(u²/2) = 0` with controlled
//! entropy production, together with the Hamilton-Jacobi machinery used to compare
//! them against entropy solutions.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`] and [`measure`]: sampled fields on rectangular `(t, x)` grids, open squares
//!   `Q_r(z)` and discrete signed measures with mass queries.
//! * [`solution`]: Riemann problems, front tracking and weak-form residuals.
//! * [`entropy`]: entropy/flux pairs, exact and discrete entropy production, the kinetic
//!   measure and upper-density fits.
//! * [`hj`]: potentials, the Hopf-Lax formula, sup-convolution and the comparison probes.
//! * [`estimates`]: verifiers that turn each quantitative estimate into a report.
//! * [`runner`]: scenario catalog, config parsing and the end-to-end pipeline.
//!
//! Heavy loops run through [`par`], which uses rayon when the `parallel` feature is
//! enabled (the default) and plain iterators otherwise. All reductions are sequential
//! over a fixed order, so results are bit-identical between the two builds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entropy;
pub mod error;
pub mod estimates;
pub mod grid;
pub mod hj;
pub mod measure;
pub mod par;
pub mod runner;
pub mod solution;

pub use error::{Error, Result};
pub use grid::{GridSpec, Rect, ScalarField, Square};
pub use measure::{Atom, DiscreteMeasure, Segment};
