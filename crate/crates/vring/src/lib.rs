//! Lagrangian vortex-particle solver for incompressible axisymmetric flow
//! without swirl.
//!
//! Vorticity lives on the half-plane `{(z, r) : r > 0}`; a point of the
//! half-plane stands for a circular filament around the symmetry axis.
//! The solver discretizes the vorticity into particles, moves them with the
//! velocity field they induce on each other (an N-body sum of the
//! axisymmetric Biot–Savart kernel), and tracks the diagnostics that make
//! thin-ring behavior visible: center of vorticity, concentration moment,
//! mass outside a window, conserved quantities.
//!
//! The fastest way in is the `examples/` directory — one runnable program
//! per capability:
//!
//! * `kernel_decomposition` — the velocity kernel split `H = K + L + R`:
//!   planar singular part, axial log part, bounded remainder.
//! * `single_ring` — a thin ring translating at its self-induced speed,
//!   compared against the classical thin-core prediction.
//! * `convergence_study` — shrinking the core radius across a grid and
//!   extrapolating the speed to the concentrated limit `a/(4π r*)`.
//! * `two_rings_reduced` — several rings coupled exactly vs. through a
//!   bounded cut-off interaction field; the two stay in lockstep while the
//!   rings keep their distance.
//! * `point_vortex_limits` — the limiting ODE models: planar point vortices
//!   and the large-ring variant with unit-direction self-propulsion.
//!
//! The same machinery is scriptable through the `vring` binary
//! (`simulate`, `study`, `kernel-probe`, `limit` subcommands) documented in
//! the repository README.
//!
//! Module map: [`kernels`] evaluates the pair interaction, [`field`] builds
//! particle discretizations of ring blobs, [`dynamics`] integrates them,
//! [`diagnostics`] measures trajectories, [`limits`] integrates the limiting
//! ODE models, and [`config`]/[`study`]/[`output`]/[`cli`] form the
//! experiment harness.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod kernels;
pub mod limits;
pub mod output;
pub mod quadrature;
pub mod study;
pub mod vec2;

pub use error::{Error, Result};
pub use vec2::Vec2;
