//! Numerics for discriminating two noisy single-qubit rotation channels.
//!
//! Each hypothesis channel applies `exp(iθσ_x)` with θ drawn afresh from a
//! Gaussian on every query. The crate compares three families of strategies
//! for deciding which hypothesis is active:
//!
//! * coherent: a single QSP sequence of channel calls interleaved with
//!   z-rotations, measured once ([`protocols::qsp`]);
//! * incoherent: repeated one-shot Helstrom measurements combined by majority
//!   vote, or an adaptive Bayesian variant ([`protocols::vote`],
//!   [`protocols::adaptive`]);
//! * hybrid: coherent segments of length ξ combined by majority vote
//!   ([`hybrid`]).
//!
//! The crate is `no_std` (it needs `alloc`); elementary functions come from
//! `libm` so results do not depend on the platform math library.
//! The optional `oracle` feature ships independent brute-force backends used
//! to verify every closed form.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod hybrid;
pub(crate) mod math;
pub mod noise;
pub mod optimizer;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod protocols;
pub mod quadrature;
pub mod qubit;

pub use error::Error;
pub use noise::{AngleDistribution, RdgInstance, SeededRng};
pub use protocols::{ProtocolResult, QspProtocol};
pub use qubit::{Complex, PureState, Unitary2};

pub type Result<T> = core::result::Result<T, Error>;
