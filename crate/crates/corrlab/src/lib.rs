//! Correlation-attack laboratory for LFSR keystream generators whose
//! output reaches an eavesdropper through binary symmetric channels.
//!
//! The crate simulates the full pipeline (register sequence, keystream
//! noise, ciphertext, wiretap noise), runs a non-iterative reliability
//! attack and an iterative bit-flipping attack against the recovered
//! keystream, and diagnoses the iterative attack's prospects with an
//! information-transfer chart.

pub mod attack1;
pub mod attack2;
pub mod bits;
pub mod channel;
pub mod checks;
pub mod config;
pub mod error;
pub mod exitchart;
pub mod gf2;
pub mod harness;
pub mod info;
pub mod numeric;
pub mod rng;

pub use error::{Error, Result};
