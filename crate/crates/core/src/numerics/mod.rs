//! Dense matrices and the seeded random source.

mod matrix;
mod rng;

pub use matrix::{euclidean_distance, rand_uniform, Matrix};
pub use rng::{derive_seed, SeededRng};
