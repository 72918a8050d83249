//! Discriminative encoder feature learning.
//!
//! An encoder/decoder network is trained to map every sample onto a fixed
//! "ideal input" of its class; the narrowest hidden layer then provides
//! compact, class-discriminative features. The crate also carries the
//! comparison baselines (raw input space, PCA, autoencoder), the downstream
//! classifiers (kNN, MLP) and a deterministic experiment harness.

pub mod baselines;
pub mod bench;
pub mod classifiers;
pub mod data;
pub mod encoders;
pub mod error;
mod jsonfile;
pub mod network;
pub mod numerics;

pub use error::{Error, Result};
pub use network::{Activation, Network, NetworkSpec, TrainConfig, TrainLog};
pub use numerics::{Matrix, SeededRng};
