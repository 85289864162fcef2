//! Transmitter/receiver chain for a non-RLL visible-light beacon link.
//!
//! The transmit path wraps a 128-bit ID into a 158-bit beacon frame, runs it
//! through a 4-register additive scrambler, inserts frozen bits and encodes
//! it with a (256;158) polar code. The receive path quantizes OOK samples
//! with a 3-bit soft-decision filter, runs successive-cancellation decoding,
//! descrambles and decapsulates. [`metrics`] holds the flicker statistics and
//! the Monte-Carlo harness that drives the whole chain.

pub mod bits;
pub mod chain;
pub mod channel;
pub mod error;
pub mod frame;
pub mod metrics;
pub mod polar;
pub mod quantizer;
pub mod scrambler;

pub use bits::BitVector;
pub use error::{Error, Result};
