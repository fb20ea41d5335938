//! Novelty detection by habituation, and a simulated robot that turns towards
//! whatever it finds most novel.
//!
//! Each of the robot's four light sensors feeds its own [`NoveltyFilter`]: a
//! clustering network whose winning neuron drives a habituable synapse. The
//! synapse's efficacy is the novelty of the input. An [`Attention`] stage picks
//! the most novel sensor and the robot turns to face it.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which the simulator uses.

pub mod arena;
pub mod attention;
pub mod clustering;
pub mod error;
pub mod filter;
pub mod habituation;
pub mod harness;
pub mod scalar;

pub use arena::{FlashPattern, LightSource, World, WorldEvent};
pub use attention::{select, Action, Attention, AttentionConfig, AttentionDecision};
pub use clustering::{ClassifyResult, Clusterer, ClustererConfig, ClustererKind};
pub use error::{Error, Result};
pub use filter::{FilterConfig, NoveltyFilter, NoveltyReport};
pub use habituation::{simulate_trace, Discretization, HabituationParams, StimulusSegment, SynapseState};
pub use scalar::Scalar;

pub type Real = f64;
pub type Params = HabituationParams<Real>;
pub type Synapse = SynapseState<Real>;
pub type Network = Clusterer<Real>;
pub type NetworkConfig = ClustererConfig<Real>;
pub type Filter = NoveltyFilter<Real>;
pub type Report = NoveltyReport<Real>;
pub type Decision = AttentionDecision<Real>;
