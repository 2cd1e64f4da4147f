//! Thermodynamic query complexity toolkit.
//!
//! Boolean functions are encoded into the energy gaps of a product of thermal
//! qubits (a *thermal machine oracle*). A probe qubit queries the oracle by a
//! single heat exchange and the answer is read from the probe's temperature.
//!
//! Modules:
//! - [`thermal`]: thermal qubits, gap vectors, partition functions and oracle construction.
//! - [`query`]: the swap, mixed-input and kickback query models and their energetics.
//! - [`problems`]: Deutsch–Jozsa and Bernstein–Vazirani instance generation.
//! - [`readout`]: divergences, sample bounds, likelihood-ratio readout and classical baselines.
//! - [`exact`]: brute-force diagonal joint-state simulator used as ground truth.
//! - [`detuning`]: detuned Rabi flip-flop model and the 3-bit secret-string sweep.
//! - [`figures`]: plot-data generators shared by the CLI and the test suites.
//! - [`verify`]: analytic-versus-exact cross-check suite.

pub mod bits;
pub mod detuning;
pub mod error;
pub mod exact;
pub mod figures;
pub mod numeric;
pub mod problems;
pub mod query;
pub mod readout;
pub mod thermal;
pub mod verify;

pub use bits::BitString;
pub use error::{Error, Result};
pub use thermal::{BooleanFunctionTable, GapVector, ThermalMachineOracle, ThermalQubit};
