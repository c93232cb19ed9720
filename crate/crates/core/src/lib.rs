//! Privacy-preserving synthetic tabular data.
//!
//! The pipeline oversamples a minority class with SMOTE, perturbs the merged
//! table with Gaussian noise scaled to each attribute's spread, audits the
//! result for k-anonymity over generalized quasi-identifiers, and measures
//! how much classification utility the released table keeps.
//!
//! ```no_run
//! use synthpriv::{pipeline::PipelineConfig, surrogate};
//!
//! let data = surrogate::generate(&surrogate::SurrogateConfig::default());
//! let cfg = PipelineConfig::headline();
//! let outcome = synthpriv::pipeline::run_on(&data, &cfg).unwrap();
//! println!("risk = {:.3}", outcome.risk.risk);
//! ```

pub mod anonymity;
pub mod data;
pub mod error;
pub mod eval;
pub mod noise;
pub mod pipeline;
pub mod smote;
pub mod surrogate;

pub use data::{Dataset, Label, Provenance, Record, RngSeed, Schema};
pub use error::{Error, Result};
