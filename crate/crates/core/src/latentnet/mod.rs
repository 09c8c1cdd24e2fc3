//! Forward and loss kernels of the set-latent shape autoencoder and its conditioned
//! latent diffusion. Parameters are seeded or loaded; nothing here trains.
//!
//! Row convention: a set of `n` vectors is an `n x width` array and linear maps act on
//! the right.

mod attention;
mod bottleneck;
mod condition;
mod edm;
mod params;

pub use attention::*;
pub use bottleneck::*;
pub use condition::*;
pub use edm::*;
pub use params::*;
