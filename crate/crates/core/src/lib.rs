//! Behavioral simulator for an N-bit, 1-bit-per-stage pipelined ADC.
//!
//! The crate is split along the signal path:
//!
//! - [`stage`]: comparator decision and ideal multiply-by-two residue.
//! - [`impairments`]: finite op-amp gain, capacitor mismatch, settling,
//!   kT/C noise and rail saturation.
//! - [`pipeline`]: the stage cascade, both as a plain sequential conversion
//!   and as a half-cycle clocked pipeline with a controller FSM.
//! - [`signal`]: ramp, coherent sine and DC stimuli.
//! - [`metrology`]: code-density and transition-level linearity, power
//!   spectrum, SNDR/SFDR/ENOB.
//! - [`oracle`]: independent references used for equivalence checks.
//! - [`budget`]: camera readout throughput arithmetic.

pub mod budget;
pub mod config;
pub mod error;
pub mod impairments;
pub mod metrology;
pub mod noise;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod signal;
pub mod stage;
pub mod testbench;

pub use config::{AdcConfig, Preset};
pub use error::{AdcError, Result};
pub use impairments::{NoiseSpec, StageModel, StageParams};
pub use pipeline::{CodeStream, Converter, Pipeline};
pub use stage::{ReferencePair, StageDecision};
