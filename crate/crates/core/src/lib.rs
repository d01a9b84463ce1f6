//! Temporal-mode analysis of digital continuous-variable QKD receive chains.
//!
//! The crate models the signal path end to end: pulse shaping and Gaussian
//! I/Q modulation at the transmitter, dispersive fiber propagation, and a
//! receiver made of a local oscillator, a band-limited detector, integral
//! sampling and a linear DSP kernel. The receiver jointly induces a
//! normalized temporal mode; its overlap with the incoming wavepacket acts
//! as an extra beamsplitter that feeds into asymptotic key-rate estimates.
//!
//! All times are in seconds unless a field name says otherwise.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod keyrate;
pub mod montecarlo;
pub mod receiver;
pub mod signal;
pub mod transmitter;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use signal::{TimeGrid, Wavepacket};

/// One picosecond in seconds.
pub const PS: f64 = 1e-12;
