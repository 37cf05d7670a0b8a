//! finsler-lab: a numerical laboratory for Finsler metric measure spaces on
//! flat 2-tori.
//!
//! The crate evaluates the geometry of Randers-type metrics (fundamental and
//! Cartan tensors, Chern connection, flag/Ricci/S-curvature, weighted and
//! mixed weighted Ricci curvature, misalignment), computes forward distance
//! fields and geodesic balls, integrates the nonlinear parabolic equation
//!
//! ```text
//! du/dt = Lap^{grad u} u + a u log u + b u
//! ```
//!
//! and verifies the gradient-estimate machinery attached to it: Li-Yau bounds
//! (compact and local), Harnack inequalities, gap/boundedness theorems for
//! stationary solutions, the Bochner inequality, the Laplacian comparison
//! theorem, and the log-Sobolev energy descent.
//!
//! Entry points:
//! * [`metric::Space`] — a validated metric measure space; all geometry hangs
//!   off it.
//! * [`solver::solve`] — time integration producing a [`solver::Trajectory`].
//! * [`checks`] — one checker per estimate, each returning a
//!   [`checks::CheckReport`].
//! * [`config`] / [`driver`] — the file-driven CLI pipeline.
//!
//! The `examples/` directory walks through every capability end to end.

pub mod checks;
pub mod config;
pub mod curvature;
pub mod distance;
pub mod driver;
pub mod error;
pub mod fd;
pub mod geodesics;
pub mod grid;
pub mod metric;
pub mod sampling;
pub mod solver;
pub mod vec2;

pub use error::{Error, Result};
pub use grid::{ScalarGrid, TorusDomain, VecGrid};
pub use metric::{FourierParam, MeasureSpec, MetricSpec, Space};
pub use vec2::{Cartan3, SymMatrix2, Vec2};
