//! Intrinsically motivated goal babbling, optionally guided by demonstrations, on a
//! deterministic fishing-rod surrogate.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the aliases at the crate root
//! fix the scalar for the common cases.

// Validation uses negated comparisons so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod env;
pub mod error;
pub mod format;
pub mod grid;
pub mod harness;
pub mod highlevel;
mod kdtree;
pub mod lowlevel;
pub mod memory;
pub mod rng;
pub mod scalar;
pub mod similarity;
pub mod social;
pub mod space;

pub use env::{simulate, EnvironmentConfig, FishingEnv, Landing};
pub use error::{Error, Result};
pub use grid::Grid;
pub use harness::{
    evaluate, generate_benchmark, run_experiment, Benchmark, EvaluationRecord, ExperimentConfig, RunArtifact, Strategy,
};
pub use highlevel::{HighLevelConfig, RegionTree};
pub use lowlevel::{LowLevel, LowLevelConfig, Regime};
pub use memory::EpisodicMemory;
pub use scalar::Scalar;
pub use similarity::{competence, sim, SimilarityContext};
pub use social::{build_teaching_set, TeacherConfig, TeachingItem};
pub use space::{Action, Episode, Origin, Rect, TaskPoint, ACTION_DIM, JOINTS};

pub type Action64 = Action<f64>;
pub type TaskPoint64 = TaskPoint<f64>;
pub type Episode64 = Episode<f64>;
pub type Memory64 = EpisodicMemory<f64>;
pub type Env64 = FishingEnv<f64>;
pub type Experiment64 = ExperimentConfig<f64>;

pub type Action32 = Action<f32>;
pub type TaskPoint32 = TaskPoint<f32>;
pub type Episode32 = Episode<f32>;
pub type Memory32 = EpisodicMemory<f32>;
pub type Env32 = FishingEnv<f32>;
pub type Experiment32 = ExperimentConfig<f32>;
