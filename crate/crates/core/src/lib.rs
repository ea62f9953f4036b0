//! Bootstrap percolation with excitatory and inhibitory vertices on directed
//! Erdős–Rényi graphs.
//!
//! Two engines share one graph realization: [`sync_engine`] runs rounds
//! with unit delays, [`async_engine`] delivers signals over random
//! delays. [`theory`] holds the closed-form predictions they are checked
//! against, [`random_walk`] the hitting-probability oracle for the late
//! asynchronous phase, and [`experiments`] the trial and sweep harness.
//!
//! ```
//! use perclab::{theory, ModelParams};
//!
//! let params = ModelParams::new(1_000_000, 1e-4, 2, 0.0, 1.0, 100, 1);
//! let a_c = theory::compute_threshold(&params).unwrap();
//! assert!((a_c - 50.0).abs() < 1e-9);
//! ```

pub mod async_engine;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod output;
pub mod params;
pub mod random_walk;
pub mod realization;
pub mod record;
pub mod rng;
pub mod sync_engine;
pub mod theory;

pub use async_engine::AsyncConfig;
pub use error::{Error, Result};
pub use params::ModelParams;
pub use realization::{
    DelayLaw, EagerRealization, LabelledGraph, LazyRealization, Realization, SamplingMode,
    ScriptedRealization, VertexSign,
};
pub use record::{EngineKind, Termination, TrajectoryRecord};
pub use theory::{FinalPrediction, Regime, TheoryConfig, TheoryReport};
