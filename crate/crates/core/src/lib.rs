//! Event-driven simulator for a simplified spiking neural network.
//!
//! The network is a full mesh of rate-coded inputs feeding a single layer of
//! simplified leaky integrate-and-fire neurons. Learning is unsupervised
//! STDP with a lookup-table reinforcement curve and soft weight bounds;
//! competition comes from a per-image variable threshold and one-shot
//! winner-take-all lateral inhibition. Every simulated Time Unit is billed
//! against a cycle cost model that charges the expensive processes only when
//! their triggering spike activity occurs, which is what makes the simulator
//! useful for studying sparsity-dependent processing cost.
//!
//! The crate is organised bottom-up:
//!
//! - [`neuron`]: membrane potential dynamics of a single output neuron
//! - [`stdp`]: the weight change rule and its precomputed lookup table
//! - [`encoder`]: image -> receptive field -> firing rates -> spike schedule
//! - [`engine`]: the per-Time-Unit simulation loop, cost accounting and a
//!   dense reference simulator used as a testing oracle
//! - [`mnist`]: IDX container parsing and writing
//! - [`pipeline`]: training, neuron labeling, classification, persistence
//! - [`config`]: flat key/value configuration with validation

pub mod config;
pub mod encoder;
pub mod engine;
pub mod error;
pub mod mnist;
pub mod neuron;
pub mod pipeline;
pub mod stdp;

pub use config::Config;
pub use encoder::{EncodedStimulus, EncoderParams, Kernel};
pub use engine::{Mode, Network, RunStats, SimParams, TimeUnitCost};
pub use error::{Error, Result};
pub use mnist::Dataset;
pub use neuron::{NeuronParams, NeuronState};
pub use pipeline::{ClassifyReport, ModelSnapshot, NeuronLabeling, TrainReport};
pub use stdp::{StdpParams, StdpTable};

/// Discrete simulation time index. Presentations run over t = 1..=T.
pub type TimeUnit = u32;
