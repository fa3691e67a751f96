//! Construction, verification, counting, layout mapping and noise-aware
//! variant selection for deterministic Dicke-state preparation circuits.
//!
//! Qubits are numbered from 1 and qubit 1 is the most significant bit of a
//! basis index. Physical qubits of an [`topology::Architecture`] are numbered
//! from 0.

pub mod circuit;
pub mod dicke;
pub mod error;
pub mod error_model;
pub mod par;
pub mod sim;
pub mod sweep;
pub mod synth;
pub mod topology;

pub use circuit::{cancel_adjacent_cnots, Circuit, Gate, GateCounts};
pub use dicke::{DickeParams, VariantMask, Wiring};
pub use error::{DickeError, Result};
