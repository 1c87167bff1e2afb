//! Continuum Monte Carlo for planar polygonal Markov fields.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: points, lines and the isometry-invariant line measure,
//!   Poisson line sampling, contours, admissibility and distances.
//! * [`free_ensembles`]: enumeration of admissible configurations on a
//!   finite line set, the partition-function estimator, and walk-closure
//!   proposals for the free contour and path measures.
//! * [`arak`]: exact sampler of the basic (free-boundary) Arak process via
//!   the time-space particle system.
//! * [`gibbs`]: contour birth-and-death graphical construction for the
//!   length-interacting field and its modifications.
//! * [`observables`]: colouring, magnetisation, large contours, skeletons,
//!   Wulff reports.
//! * [`tension`]: killed self-avoiding random walks and surface-tension
//!   estimators.
//! * [`harness`]: experiment configuration, seeding, records, rendering.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arak;
pub mod error;
pub mod free_ensembles;
pub mod geometry;
pub mod gibbs;
pub mod harness;
pub mod observables;
pub mod par;
pub mod rng;
pub mod stats;
pub mod tension;

pub use error::{Error, Result};
pub use geometry::{Contour, Line, Point, PolygonalConfiguration, Region, Window};
