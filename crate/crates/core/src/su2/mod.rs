//! SU(2) representation numerics: Wigner small-d functions and
//! Clebsch–Gordan coefficients with exact half-integer labels.

mod clebsch;
mod factorial;
mod wigner;

pub use crate::halfint::{couple_range, HalfInt};
pub use clebsch::clebsch_gordan;
pub use wigner::{wigner_d, wigner_d_highest, wigner_d_highest_sq, WignerSmallD};

pub(crate) use factorial::{binomial, factorial_ratio, ln_ratio};
