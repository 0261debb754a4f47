//! Link model and receiver/code optimization for two-hop amplify-and-forward
//! cooperative MIMO relaying with randomized distributed space-time coding.
//!
//! The crate is `no_std` (it needs `alloc`). Everything random takes an
//! explicit [`rand::Rng`], so callers own seeding and stream separation.
//!
//! Module map:
//!
//! * [`numerics`]: small dense complex matrices and a Cholesky solver.
//! * [`modem`]: Gray-mapped 4-QAM and bit error counting.
//! * [`channel`]: block-fading channel draws, AWGN and the binary symmetric channel.
//! * [`stc`]: relay amplification, Alamouti encoding, randomized codes and the
//!   equivalent channel seen by the destination.
//! * [`receiver`]: Wiener filters, the closed-form code design and the joint
//!   stochastic-gradient adaptation.
//! * [`feedback`]: quantized code feedback over a binary symmetric channel.
#![no_std]
// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channel;
mod error;
pub mod feedback;
pub mod modem;
pub mod numerics;
pub mod receiver;
pub mod stc;

pub use error::{Error, Result};
pub use numerics::{ComplexMat, C64};

/// Average energy of a transmitted symbol. Every power in the crate is
/// measured relative to it.
pub const SIGNAL_POWER: f64 = 1.0;
