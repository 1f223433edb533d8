//! Smith-Purcell radiation from vortex-electron wave packets.
//!
//! `kinematics` holds constants and geometry, `wavepacket` the momentum-space
//! packet models, `farfield` the line intensities with multipole
//! corrections, `prewave` the finite-distance and beam-averaged
//! distributions, and `numerics` the shared kernels and oracles.

pub mod error;
pub mod farfield;
pub mod kinematics;
pub mod numerics;
pub mod prewave;
pub mod wavepacket;

pub use error::{Error, Result};
