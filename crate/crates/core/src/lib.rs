//! Numerical laboratory for uplink cell-free massive MIMO networks.
//!
//! The crate models an uplink network of `M` single-antenna access points
//! serving `K` single-antenna users over Nakagami fading, and provides three
//! layers on top of the channel model:
//!
//! * closed-form per-user outage probability for the static network
//!   (Welch-Satterthwaite reduction of the SINR's Gamma sums, Whittaker-W
//!   density, Gauss-₂F₁ CDF), together with seeded Monte-Carlo estimators
//!   that cross-validate every closed form;
//! * a dynamic architecture in which the APs are partitioned into clusters
//!   acting as virtual multi-antenna receivers, with SIC detection,
//!   IUI-aware Wiener-Hopf combining, and baseline solvers (exhaustive grid
//!   search, projected gradient ascent) for the joint clustering/beamforming
//!   problem;
//! * a hybrid DDPG-DDQN agent, built on an in-crate dense-network stack,
//!   that learns cluster configuration and beamforming weights jointly.

pub mod analytics;
pub mod channel;
pub mod clustering;
pub mod combining;
pub mod drl;
pub mod error;
pub mod montecarlo;
pub mod optimize;
pub mod presets;
pub mod rng;
pub mod sinr;
pub mod special;

pub use error::{Error, Result};
