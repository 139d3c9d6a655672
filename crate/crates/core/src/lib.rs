//! Monte-Carlo simulator for RIS-assisted physical-layer key generation.
//!
//! Alice and Bob probe a time-division-duplexed OFDM link that is partly
//! reflected through a reconfigurable intelligent surface (RIS). Hardware
//! fingerprints break the reciprocity of the measured CSI, and an attacker
//! re-randomizes part of the RIS between the uplink and downlink probes.
//! Three probing schemes are simulated:
//!
//! * [`Scheme::NonLoopback`]: classical two-way TDD probing.
//! * [`Scheme::TraditionalLoopback`]: each party re-transmits what it received
//!   on a second band so that both observe the product of both directions.
//! * [`Scheme::LoCKey`]: loop-back followed by MMSE scalar compensation.
//!
//! The crate is organised bottom-up: [`fading`] and [`ris`] produce channel
//! realizations, [`ofdm`] turns them into least-squares CSI estimates,
//! [`protocol`] orchestrates a probing round, [`analysis`] holds the
//! closed-form correlation/MSE expressions and their empirical counterparts,
//! [`keygen`] quantizes CSI into key bits, and [`harness`] runs seeded sweeps.

pub mod analysis;
pub mod csi;
pub mod error;
pub mod fading;
pub mod harness;
pub mod keygen;
pub mod ofdm;
pub mod protocol;
pub mod ris;
pub mod stream;

pub use csi::{Band, CsiVector};
pub use error::{Error, Result};
pub use protocol::Scheme;
pub use stream::StreamId;

pub use num_complex::Complex64;
