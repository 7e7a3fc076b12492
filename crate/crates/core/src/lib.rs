//! Signaling in Bayesian zero-sum games.
//!
//! The crate covers the full experimental pipeline around symmetric signaling
//! schemes for two-player Bayesian zero-sum games:
//!
//! * [`game`]: explicit Bayesian zero-sum games, signaling schemes and their
//!   convex-decomposition form.
//! * [`graph`]: dense bitset graphs, density measures and the planted
//!   clique-cover generators.
//! * [`equilibrium`]: minimax solvers, both for explicit matrix games and for
//!   the implicitly represented network security game.
//! * [`signaling`]: scheme evaluation, the clique-partition scheme and a grid
//!   based concave-envelope oracle for small explicit games.
//! * [`recovery`]: turning a good signaling scheme into recovered planted
//!   cliques.
//! * [`harness`]: experiment presets, statistical validators and the CLI.
//!
//! Data-parallel loops (graph rows, per-signal solves, seeds) go through
//! [`exec`], which uses rayon when the `parallel` feature is enabled and
//! falls back to plain iteration otherwise.

// Negated comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod equilibrium;
pub mod error;
pub mod exec;
pub mod game;
pub mod graph;
pub mod harness;
pub mod lp;
pub mod recovery;
pub mod rng;
pub mod signaling;

pub use error::{Error, Result};
pub use exec::Parallelism;
