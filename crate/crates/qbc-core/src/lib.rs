//! Simulation laboratory for a steering-based quantum bit-commitment
//! protocol over evenly distributed high-dimensional states.
//!
//! The crate is organized in layers:
//!
//! - [`tensor`]: exact complex linear algebra (state vectors, operators,
//!   density matrices, partial traces, Hermitian eigendecomposition).
//! - [`states`]: constructors and closed-form scalars for every state family
//!   the protocol uses, so each identity is a named, testable function.
//! - [`substrate`]: the simulated quantum world — registers with ownership
//!   tracking, Born-rule measurements, POVMs and the pretty-good measurement.
//! - [`protocol`]: the commit/unveil protocol as explicit Alice/Bob state
//!   machines with a bit-exact wire codec and pluggable transports.
//! - [`adversary`]: dishonest strategies for both parties and the device
//!   precision model that bounds them.
//! - [`analysis`]: closed-form security arithmetic, parameter planning and
//!   Monte Carlo sweep experiments.

pub mod adversary;
pub mod analysis;
pub mod protocol;
pub mod states;
pub mod stats;
pub mod substrate;
pub mod tensor;

pub use protocol::{Bit, ProtocolParams};
pub use substrate::{Party, QuantumWorld, RegisterId};
pub use tensor::{Complex64, DensityMatrix, Operator, StateVector, SubsystemShape};

/// Default master seed used by every command-line entry point, so default
/// runs are reproducible without any configuration.
pub const DEFAULT_SEED: u64 = 0xA11C_EB0B;
