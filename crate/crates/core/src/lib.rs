//! Choosing recovery actions for a collaborative AI system that trade off
//! greenness (CO₂ footprint, human labor) against resilience (recovery time).
//!
//! Two interchangeable techniques pick between a Learning and an Operating
//! action after a disruption:
//!
//! * [`wsm`]: a single agent maximizing a weighted-sum score,
//! * [`game`]: a resilience player and a greenness player in a two-action
//!   coordination game, resolved through its mixed equilibrium.
//!
//! The decision math in [`measurement`], [`wsm`] and [`game`] is generic over
//! [`Scalar`] (`f32` or `f64`). The aliases at the crate root fix it to `f64`,
//! with `*32` variants for single precision. [`sim`] and [`harness`] run the
//! techniques against a simulated robot and log every recovery iteration.

pub mod error;
pub mod fsm;
pub mod game;
pub mod harness;
pub mod measurement;
pub mod report;
pub mod scalar;
pub mod sim;
pub mod wsm;

pub use error::{Error, Result};
pub use fsm::{transition, EpisodeTimeline, RecoveryEvent, RecoveryState};
pub use harness::{run_experiment, ExperimentLog, IterationRecord, RunOptions, Technique, TechniqueOptions};
pub use measurement::{ActionId, ActionKind};
pub use report::{compare, ComparisonReport, OutputFormat};
pub use scalar::Scalar;
pub use sim::{ScenarioConfig, SimState};

pub type AttributeVector = measurement::AttributeVector<f64>;
pub type Confidence = measurement::Confidence<f64>;
pub type CandidateAction = measurement::CandidateAction<f64>;
pub type NormalizationContext = measurement::NormalizationContext<f64>;
pub type WeightVector = wsm::WeightVector<f64>;
pub type WsmMode = wsm::WsmMode<f64>;
pub type WsmDecision = wsm::WsmDecision<f64>;
pub type PayoffMatrix = game::PayoffMatrix<f64>;
pub type MixedStrategy = game::MixedStrategy<f64>;
pub type GameSolution = game::GameSolution<f64>;

pub type AttributeVector32 = measurement::AttributeVector<f32>;
pub type Confidence32 = measurement::Confidence<f32>;
pub type CandidateAction32 = measurement::CandidateAction<f32>;
pub type WeightVector32 = wsm::WeightVector<f32>;
pub type PayoffMatrix32 = game::PayoffMatrix<f32>;
pub type MixedStrategy32 = game::MixedStrategy<f32>;
