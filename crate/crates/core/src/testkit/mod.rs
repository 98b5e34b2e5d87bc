//! Synthetic inputs and an independent reference implementation.
//!
//! [`oracle_compress`] re-implements every method with naive loops over f64
//! vectors and shares no code with the engine; [`compare`] checks engine
//! output against it.

mod oracle;
mod retention;
mod rng;
mod synth;

pub use oracle::{compare, oracle_compress, Mismatch, OracleOutput, ORACLE_MAX_LEN};
pub use retention::event_retention;
pub use rng::SplitMix64;
pub use synth::{generate, EventParams, Profile, SynthSpec};
