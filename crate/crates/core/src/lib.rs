//! Numerical laboratory for the probabilistic Schwarzian field theory.
//!
//! Circle diffeomorphisms are carried on a uniform grid as the log-derivative
//! profile `ξ = log φ′ − log φ′(0)` plus the base angle `φ(0)`. On top of that
//! representation the crate provides the Schwarzian action and its constrained
//! minimizers, the cross-ratio observable and the Hölder classes built from it,
//! exact Brownian-bridge sampling with Schwarzian reweighting, and quadratures
//! of the closed-form partition function and moment formulas.
//!
//! Each capability has a runnable example:
//!
//! ```text
//! cargo run --release --example partition_function
//! cargo run --release --example kernel_expansion
//! cargo run --release --example moments
//! cargo run --release --example action_minimum
//! cargo run --release --example constrained_minimizer
//! cargo run --release --example gauge_and_cross_ratio
//! cargo run --release --example holder_equivalence
//! cargo run --release --example bridge_sampling
//! cargo run --release --example ldp_rate
//! cargo run --release --example concentration
//! cargo run --release --example holder_tail
//! cargo run --release --example appendix_inequalities
//! ```

pub mod action;
pub mod cli;
pub mod diffeo;
pub mod error;
pub mod holder;
pub mod inequalities;
pub mod mobius;
pub mod quadrature;
pub mod rng;
pub mod sampler;
pub mod specfun;

pub use action::{BoundaryConstraints, MinimizerSolution, Regime};
pub use diffeo::{circle_dist, cross_ratio, GridDiffeo};
pub use error::{Error, Result};
pub use mobius::MobiusMap;
pub use specfun::QuadratureSpec;
