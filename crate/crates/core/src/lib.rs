//! Ensemble belief-propagation decoding of short LDPC codes.
//!
//! Several BP decoders run side by side on differently perturbed versions of
//! the same received word, and the most likely valid candidate is kept.

pub mod automorphisms;
pub mod bp;
pub mod channel;
pub mod cli;
pub mod codes;
pub mod ensemble;
pub mod error;
pub mod gf2;
pub mod sim;

pub use error::{Error, Result};
