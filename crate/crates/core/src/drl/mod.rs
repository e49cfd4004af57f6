//! Hybrid DDPG-DDQN agent for joint beamforming and AP clustering, built on
//! an in-crate neural micro-stack: dense feed-forward networks with explicit
//! backpropagation, an adaptive-moment optimizer, an experience replay
//! buffer, and Polyak-averaged target networks. The continuous beamforming
//! action is handled by the deterministic-policy-gradient actor-critic; the
//! discrete cluster choice by a double Q-network that decouples action
//! selection (target net) from evaluation (online net).

pub mod env;
pub mod net;
pub mod replay;
pub mod tabular;
pub mod train;

pub use env::{state_features, CellFreeEnv, EnvConfig, HybridAction, StepInfo};
pub use net::{polyak_update, Activation, Adam, DenseNet, Grads};
pub use replay::{ReplayBuffer, Transition};
pub use tabular::{ddqn_tabular_update, TabularQ};
pub use train::{train_hybrid, AgentBundle, DdpgDiagnostics, Hyperparams, LogRow, TrainingLog};
