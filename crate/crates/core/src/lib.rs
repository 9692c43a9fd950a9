//! Simulation laboratory for random phase coupling channels: exact and
//! sampled output-purity bounds, Holevo and coherent information, and the
//! entanglement-assisted protocols built on the channel.

pub mod ensembles;
pub mod error;
pub mod info;
pub mod phasechannel;
pub mod protocols;
pub mod qstate;
pub mod schur;
pub mod stats;

pub use error::{LabError, Result};
