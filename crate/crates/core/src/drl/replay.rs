//! Fixed-capacity experience replay with FIFO overwrite and uniform
//! without-replacement minibatch sampling.

use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// One stored interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    /// Beamforming action as executed (clipped to [0, 1]).
    pub action_weights: Vec<f64>,
    /// Cluster-configuration index.
    pub action_cluster: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

/// Ring buffer of transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    data: Vec<Transition>,
    capacity: usize,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidConfig("replay capacity must be positive".into()));
        }
        Ok(ReplayBuffer { data: Vec::with_capacity(capacity.min(1 << 20)), capacity, cursor: 0 })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Stores a transition, overwriting the oldest once full.
    pub fn push(&mut self, t: Transition) {
        if self.data.len() < self.capacity {
            self.data.push(t);
        } else {
            self.data[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Uniform sample of `count` distinct stored transitions.
    pub fn sample<'a>(&'a self, count: usize, rng: &mut ChaCha12Rng) -> Result<Vec<&'a Transition>> {
        if count == 0 || count > self.data.len() {
            return Err(Error::Domain(format!(
                "cannot sample {count} transitions from a buffer of {}",
                self.data.len()
            )));
        }
        let idx = rand::seq::index::sample(rng, self.data.len(), count);
        Ok(idx.iter().map(|i| &self.data[i]).collect())
    }
}
