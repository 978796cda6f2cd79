//! LT codes under inactivation decoding.
//!
//! - [`degree`]: output degree distributions and the MBMS presets.
//! - [`graph`]: LT code instances and the reduced-graph view.
//! - [`decoder`]: triangularization and the full inactivation decoder.
//! - [`analysis`]: exact recursions for `E[N]` and the PMF of `N`, the
//!   number of inactivations.
//! - [`sim`]: seeded Monte Carlo experiments and analytic comparisons.

pub mod analysis;
pub mod combinatorics;
pub mod decoder;
pub mod degree;
pub mod error;
pub mod graph;
pub mod matrix;
pub mod sim;

pub use analysis::{
    expected_inactivations, failure_lower_bound, inactivation_distribution, AnalysisOptions,
    DistAnalysis, MeanAnalysis,
};
pub use decoder::{
    assemble_permuted, decode, ge_solve, triangularize, triangularize_with, ChoiceKind,
    DecodeOutcome, InactivationReport, PartitionedSystem, StepRecord,
};
pub use degree::{DegreeDistribution, Preset};
pub use error::{Error, Result};
pub use graph::{BipartiteGraph, InputState, ReducedView, Symbol};
pub use matrix::BinaryMatrix;
pub use sim::{AggregateStats, ExperimentPlan, Mode, Overhead};
