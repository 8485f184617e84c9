//! Optimal estimation of the relative rotation angle between two spin systems.
//!
//! Alice prepares a state of fixed projection `m1` over several total spins
//! `j1`; Bob holds a spin-`j2` coherent state. Averaging over the unknown
//! global orientation leaves a block-diagonal signal `ρ̄(β)` over total
//! angular momentum `J`. The crate builds that signal, the utility-weighted
//! score operators `A_μ`, covariant POVMs and their Helstrom certificates,
//! and the classical-reference limit `j2 → ∞`.

pub mod cli;
pub mod error;
pub mod estimator;
pub mod halfint;
pub mod limits;
pub mod optimizer;
pub mod states;
pub mod su2;

pub use error::{Error, Result};
pub use halfint::HalfInt;
