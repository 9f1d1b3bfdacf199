//! Polar codes over binary-input memoryless channels.
//!
//! The crate covers the whole transmit/receive chain used in link-level
//! simulation of polar codes:
//!
//! * [`polar`]: the Arıkan transform, bit-reversal permutation and source-block
//!   assembly.
//! * [`construction`]: bit-channel reliability (Bhattacharyya, Gaussian
//!   approximation, polarization weight) and information-set selection.
//! * [`crc`]: the outer CRC code of CRC-polar concatenation.
//! * [`rate_match`]: quasi-uniform puncturing and reversal quasi-uniform shortening.
//! * [`decoders`]: SC, SCL, SCS and the CRC-aided list/stack decoders.
//! * [`channel`]: BEC and BPSK/AWGN channels and SNR conventions.
//! * [`analysis`]: exhaustive weight enumeration, union bound and an ML oracle.
//! * [`sim`]: the Monte-Carlo BLER campaign runner.
//!
//! Channel indices in every public interface are 1-based, matching the usual
//! notation `W_N^(i)`, `i = 1..N`. LLRs are positive when bit 0 is more likely.

pub mod analysis;
pub mod channel;
pub mod construction;
pub mod crc;
pub mod decoders;
pub mod error;
pub mod polar;
pub mod rate_match;
pub mod sim;

pub use error::{Error, Result};
pub use polar::CodeSpec;

/// Finite stand-in for an infinite LLR. Every f/g evaluation is clamped to
/// `±LLR_SAT`.
pub const LLR_SAT: f64 = 300.0;

/// A hard bit. Values other than 0 and 1 are rejected at API boundaries.
pub type Bit = u8;
