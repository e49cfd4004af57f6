//! The hybrid DDPG-DDQN training loop.
//!
//! Per step: the actor proposes beamforming weights (plus clipped Gaussian
//! exploration noise), the clustering Q-network picks a configuration
//! ε-greedily, the environment returns the reward and next state, and one
//! minibatch update runs for each family — the DDPG critic regresses on the
//! target-network TD value, the actor ascends the deterministic policy
//! gradient, and the clustering network applies the double-Q rule (target
//! network selects, online network evaluates). Both target families blend
//! toward the online parameters every `target_period` steps.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::env::{state_features, CellFreeEnv, HybridAction};
use super::net::{polyak_update, Activation, Adam, DenseNet, Grads};
use super::replay::{ReplayBuffer, Transition};
use crate::error::{Error, Result};

/// Training hyperparameters. `paper()` matches the published setup;
/// `desk()` shrinks widths and horizons for laptop-scale runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Discount ζ.
    pub discount: f64,
    /// Learning rate ν (all three optimizers).
    pub learning_rate: f64,
    /// Polyak blend τ.
    pub polyak: f64,
    /// Replay capacity R.
    pub buffer_capacity: usize,
    /// Minibatch size ℒ.
    pub minibatch: usize,
    pub episodes: usize,
    pub steps_per_episode: usize,
    /// Target update period P (steps).
    pub target_period: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    /// Gaussian exploration noise on the beamforming action, linearly
    /// decayed over the first half of training.
    pub noise_sigma_start: f64,
    pub noise_sigma_end: f64,
    /// ε-greedy schedule for the cluster action, same decay window.
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Hard-copy targets instead of Polyak blending.
    pub hard_copy_targets: bool,
    pub actor_hidden: (usize, usize),
    pub critic_hidden: (usize, usize),
    pub ddqn_hidden: (usize, usize),
}

impl Hyperparams {
    /// Published configuration: 256/128 actor-critic hidden layers, 64/64
    /// clustering layers, ζ = 0.99, ν = 5e-5, τ = 1e-3, R = 20000, 2500
    /// episodes of 500 steps.
    pub fn paper() -> Self {
        Hyperparams {
            discount: 0.99,
            learning_rate: 5e-5,
            polyak: 1e-3,
            buffer_capacity: 20_000,
            minibatch: 64,
            episodes: 2500,
            steps_per_episode: 500,
            target_period: 1,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            noise_sigma_start: 0.2,
            noise_sigma_end: 0.02,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            hard_copy_targets: false,
            actor_hidden: (256, 128),
            critic_hidden: (256, 128),
            ddqn_hidden: (64, 64),
        }
    }

    /// Desk-scale preset: smaller networks, shorter horizon, faster
    /// learning rate. Appropriate for K·M̃ ≤ 16.
    pub fn desk() -> Self {
        Hyperparams {
            learning_rate: 1e-3,
            episodes: 320,
            steps_per_episode: 120,
            actor_hidden: (64, 32),
            critic_hidden: (64, 32),
            ddqn_hidden: (64, 64),
            ..Hyperparams::paper()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.discount) {
            return Err(Error::InvalidConfig("discount must lie in [0, 1)".into()));
        }
        if !(self.polyak > 0.0 && self.polyak <= 1.0) {
            return Err(Error::InvalidConfig("polyak tau must lie in (0, 1]".into()));
        }
        if !(self.learning_rate >= 0.0) {
            return Err(Error::InvalidConfig("learning rate must be nonnegative".into()));
        }
        if self.minibatch == 0 || self.buffer_capacity < self.minibatch {
            return Err(Error::InvalidConfig("buffer must hold at least one minibatch".into()));
        }
        if self.target_period == 0 {
            return Err(Error::InvalidConfig("target period must be positive".into()));
        }
        Ok(())
    }
}

/// Actor/critic/clustering networks with their targets and optimizer state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentBundle {
    pub version: u32,
    pub state_dim: usize,
    pub action_dim: usize,
    /// Cluster-configuration count; 1 means static mode (no DDQN).
    pub num_cluster_actions: usize,
    pub hyper: Hyperparams,
    pub actor: DenseNet,
    pub actor_target: DenseNet,
    pub critic: DenseNet,
    pub critic_target: DenseNet,
    pub actor_opt: Adam,
    pub critic_opt: Adam,
    pub qc: Option<DenseNet>,
    pub qc_target: Option<DenseNet>,
    pub qc_opt: Option<Adam>,
}

pub const CHECKPOINT_VERSION: u32 = 1;

impl AgentBundle {
    /// Fresh networks; targets start as exact copies of their online nets.
    pub fn new(
        state_dim: usize,
        action_dim: usize,
        num_cluster_actions: usize,
        hyper: &Hyperparams,
        seed: u64,
    ) -> Result<Self> {
        hyper.validate()?;
        let dynamic = num_cluster_actions > 1;
        let mut rng_actor = crate::rng::stream(seed, 0xA1);
        let mut rng_critic = crate::rng::stream(seed, 0xA2);
        let mut rng_qc = crate::rng::stream(seed, 0xA3);
        let (ah1, ah2) = hyper.actor_hidden;
        let actor = DenseNet::new(
            &[state_dim, ah1, ah2, action_dim],
            &[Activation::Relu, Activation::Relu, Activation::Logistic],
            &mut rng_actor,
        )?;
        let critic_in = state_dim + action_dim + if dynamic { num_cluster_actions } else { 0 };
        let (ch1, ch2) = hyper.critic_hidden;
        let critic = DenseNet::new(
            &[critic_in, ch1, ch2, 1],
            &[Activation::Relu, Activation::Relu, Activation::Linear],
            &mut rng_critic,
        )?;
        let (qc, qc_target, qc_opt) = if dynamic {
            let (qh1, qh2) = hyper.ddqn_hidden;
            let net = DenseNet::new(
                &[state_dim, qh1, qh2, num_cluster_actions],
                &[Activation::Relu, Activation::Relu, Activation::Linear],
                &mut rng_qc,
            )?;
            let opt = Adam::new(&net, hyper.learning_rate, hyper.adam_beta1, hyper.adam_beta2);
            (Some(net.clone()), Some(net), Some(opt))
        } else {
            (None, None, None)
        };
        Ok(AgentBundle {
            version: CHECKPOINT_VERSION,
            state_dim,
            action_dim,
            num_cluster_actions,
            hyper: *hyper,
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor_opt: Adam::new(&actor, hyper.learning_rate, hyper.adam_beta1, hyper.adam_beta2),
            critic_opt: Adam::new(&critic, hyper.learning_rate, hyper.adam_beta1, hyper.adam_beta2),
            actor,
            critic,
            qc,
            qc_target,
            qc_opt,
        })
    }

    fn dynamic(&self) -> bool {
        self.num_cluster_actions > 1
    }

    fn critic_input(&self, features: &[f64], action: &[f64], cluster: usize) -> Vec<f64> {
        let mut input = Vec::with_capacity(self.critic.input_dim());
        input.extend_from_slice(features);
        input.extend_from_slice(action);
        if self.dynamic() {
            let mut onehot = vec![0.0; self.num_cluster_actions];
            onehot[cluster] = 1.0;
            input.extend_from_slice(&onehot);
        }
        input
    }

    fn greedy_cluster(net: &DenseNet, features: &[f64]) -> Result<usize> {
        let q = net.forward(features)?;
        let mut best = 0;
        for (i, &v) in q.iter().enumerate() {
            if v > q[best] {
                best = i;
            }
        }
        Ok(best)
    }

    /// Deterministic (noise-free, greedy) action for a raw SINR state.
    pub fn greedy_action(&self, sinrs: &[f64]) -> Result<HybridAction> {
        let features = state_features(sinrs);
        let weights = self.actor.forward(&features)?;
        let cluster_index = match &self.qc {
            Some(qc) => Self::greedy_cluster(qc, &features)?,
            None => 0,
        };
        Ok(HybridAction { weights, cluster_index })
    }

    /// One DDPG minibatch update: the critic regresses on
    /// `y = r + ζ Q'(s', μ'(s'))` and the actor follows the
    /// deterministic-policy gradient `∇_a Q · ∇_θ μ`. Returns diagnostics.
    pub fn ddpg_update(&mut self, batch: &[&Transition]) -> Result<DdpgDiagnostics> {
        let n = batch.len();
        if n == 0 {
            return Err(Error::Domain("empty minibatch".into()));
        }
        let zeta = self.hyper.discount;

        // TD targets from the target networks (held fixed during the step).
        let mut targets = Vec::with_capacity(n);
        for t in batch {
            let next_features = state_features(&t.next_state);
            let next_action = self.actor_target.forward(&next_features)?;
            let next_cluster = match &self.qc_target {
                Some(qct) => Self::greedy_cluster(qct, &next_features)?,
                None => 0,
            };
            let q_next = self
                .critic_target
                .forward(&self.critic_input(&next_features, &next_action, next_cluster))?[0];
            targets.push(t.reward + zeta * q_next);
        }

        // Critic regression toward the TD targets on the executed actions.
        let mut critic_grads = Grads::zeros_like(&self.critic);
        let mut critic_loss = 0.0;
        for (t, &y) in batch.iter().zip(&targets) {
            let features = state_features(&t.state);
            let input = self.critic_input(&features, &t.action_weights, t.action_cluster);
            let cache = self.critic.forward_cached(&input)?;
            let err = cache.output()[0] - y;
            critic_loss += err * err;
            let (g, _) = self.critic.backward(&cache, &[2.0 * err / n as f64])?;
            critic_grads.accumulate(&g);
        }
        critic_loss /= n as f64;
        if !critic_loss.is_finite() {
            return Err(Error::NonFinite(format!("critic TD loss {critic_loss}")));
        }
        self.critic_opt.step(&mut self.critic, &critic_grads)?;

        // Actor ascent: dQ/da through the (updated) critic, chained into μ.
        let mut actor_grads = Grads::zeros_like(&self.actor);
        let mut actor_value = 0.0;
        for t in batch {
            let features = state_features(&t.state);
            let actor_cache = self.actor.forward_cached(&features)?;
            let action = actor_cache.output().to_vec();
            let input = self.critic_input(&features, &action, t.action_cluster);
            let critic_cache = self.critic.forward_cached(&input)?;
            actor_value += critic_cache.output()[0];
            let (_, input_grad) = self.critic.backward(&critic_cache, &[1.0])?;
            let dq_da = &input_grad[self.state_dim..self.state_dim + self.action_dim];
            // minimize -Q: upstream is -dQ/da, averaged over the batch
            let upstream: Vec<f64> = dq_da.iter().map(|g| -g / n as f64).collect();
            let (g, _) = self.actor.backward(&actor_cache, &upstream)?;
            actor_grads.accumulate(&g);
        }
        actor_value /= n as f64;
        if !actor_value.is_finite() {
            return Err(Error::NonFinite(format!("actor objective {actor_value}")));
        }
        self.actor_opt.step(&mut self.actor, &actor_grads)?;

        Ok(DdpgDiagnostics { critic_loss, actor_value })
    }

    /// One double-Q minibatch update for the clustering network: the target
    /// network selects `a* = argmax Q'_c(s', ·)`, the online network
    /// evaluates it, and the online table regresses on the taken action.
    pub fn ddqn_update(&mut self, batch: &[&Transition]) -> Result<f64> {
        let n = batch.len();
        if n == 0 {
            return Err(Error::Domain("empty minibatch".into()));
        }
        let zeta = self.hyper.discount;
        let (Some(qc), Some(qc_target), Some(qc_opt)) =
            (self.qc.as_mut(), self.qc_target.as_ref(), self.qc_opt.as_mut())
        else {
            return Err(Error::InvalidConfig("DDQN update requested in static mode".into()));
        };
        // Targets first, so the update does not feed back into them.
        let mut targets = Vec::with_capacity(n);
        for t in batch {
            let next_features = state_features(&t.next_state);
            let selected = Self::greedy_cluster(qc_target, &next_features)?;
            let eval = qc.forward(&next_features)?[selected];
            targets.push(t.reward + zeta * eval);
        }
        let mut grads = Grads::zeros_like(qc);
        let mut loss = 0.0;
        for (t, &y) in batch.iter().zip(&targets) {
            let features = state_features(&t.state);
            let cache = qc.forward_cached(&features)?;
            let err = cache.output()[t.action_cluster] - y;
            loss += err * err;
            let mut upstream = vec![0.0; self.num_cluster_actions];
            upstream[t.action_cluster] = 2.0 * err / n as f64;
            let (g, _) = qc.backward(&cache, &upstream)?;
            grads.accumulate(&g);
        }
        loss /= n as f64;
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!("DDQN loss {loss}")));
        }
        qc_opt.step(qc, &grads)?;
        Ok(loss)
    }

    /// Blends every target family toward its online network.
    pub fn update_targets(&mut self) -> Result<()> {
        let tau = if self.hyper.hard_copy_targets { 1.0 } else { self.hyper.polyak };
        polyak_update(&mut self.actor_target, &self.actor, tau)?;
        polyak_update(&mut self.critic_target, &self.critic, tau)?;
        if let (Some(qc), Some(qct)) = (self.qc.as_ref(), self.qc_target.as_mut()) {
            polyak_update(qct, qc, tau)?;
        }
        Ok(())
    }

    /// Versioned JSON checkpoint (layer shapes, parameters, optimizer
    /// moments).
    pub fn to_checkpoint(&self) -> String {
        serde_json::to_string(self).expect("bundle serializes")
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let bundle: AgentBundle =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("checkpoint: {e}")))?;
        if bundle.version != CHECKPOINT_VERSION {
            return Err(Error::Parse(format!(
                "checkpoint version {} unsupported (expected {CHECKPOINT_VERSION})",
                bundle.version
            )));
        }
        Ok(bundle)
    }
}

/// Diagnostics of one DDPG update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdpgDiagnostics {
    pub critic_loss: f64,
    /// Mean critic value of the actor's on-policy actions.
    pub actor_value: f64,
}

/// One logged training step.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub episode: usize,
    pub step: usize,
    pub reward: f64,
    pub per_user_rates: Vec<f64>,
    pub noise_sigma: f64,
    pub epsilon: f64,
    pub critic_loss: Option<f64>,
    pub ddqn_loss: Option<f64>,
}

/// Append-only training log.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingLog {
    pub num_users: usize,
    /// Static mode omits the clustering (DDQN) columns.
    pub static_mode: bool,
    pub rows: Vec<LogRow>,
}

impl TrainingLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("episode,step,reward");
        for k in 0..self.num_users {
            out.push_str(&format!(",rate_{k}"));
        }
        out.push_str(",noise_sigma,critic_loss");
        if !self.static_mode {
            out.push_str(",epsilon,ddqn_loss");
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{},{},{:.10e}", row.episode, row.step, row.reward));
            for r in &row.per_user_rates {
                out.push_str(&format!(",{r:.10e}"));
            }
            out.push_str(&format!(",{:.6e}", row.noise_sigma));
            match row.critic_loss {
                Some(l) => out.push_str(&format!(",{l:.6e}")),
                None => out.push(','),
            }
            if !self.static_mode {
                out.push_str(&format!(",{:.6e}", row.epsilon));
                match row.ddqn_loss {
                    Some(l) => out.push_str(&format!(",{l:.6e}")),
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Mean reward per episode, in episode order.
    pub fn episode_rewards(&self) -> Vec<f64> {
        let mut sums: Vec<(f64, usize)> = Vec::new();
        for row in &self.rows {
            if row.episode >= sums.len() {
                sums.resize(row.episode + 1, (0.0, 0));
            }
            sums[row.episode].0 += row.reward;
            sums[row.episode].1 += 1;
        }
        sums.into_iter().map(|(s, n)| s / n.max(1) as f64).collect()
    }

    /// Trailing moving average of the per-episode rewards.
    pub fn smoothed_episode_rewards(&self, window: usize) -> Vec<f64> {
        let rewards = self.episode_rewards();
        rewards
            .iter()
            .enumerate()
            .map(|(i, _)| {
                let lo = i.saturating_sub(window - 1);
                let slice = &rewards[lo..=i];
                slice.iter().sum::<f64>() / slice.len() as f64
            })
            .collect()
    }

    /// Mean per-user rate over the last `episodes` episodes.
    pub fn final_mean_rate(&self, episodes: usize) -> f64 {
        let last = self.rows.last().map_or(0, |r| r.episode);
        let from = last.saturating_sub(episodes.saturating_sub(1));
        let mut total = 0.0;
        let mut count = 0usize;
        for row in &self.rows {
            if row.episode >= from {
                total += row.per_user_rates.iter().sum::<f64>();
                count += row.per_user_rates.len();
            }
        }
        total / count.max(1) as f64
    }
}

fn linear_decay(start: f64, end: f64, step: u64, horizon: u64) -> f64 {
    if horizon == 0 || step >= horizon {
        return end;
    }
    start + (end - start) * step as f64 / horizon as f64
}

/// Runs the full hybrid training loop and returns the trained bundle plus
/// the per-step log. Deterministic for a given (environment, hyper, seed).
pub fn train_hybrid(
    env: &mut CellFreeEnv,
    hyper: &Hyperparams,
    seed: u64,
) -> Result<(AgentBundle, TrainingLog)> {
    hyper.validate()?;
    let state_dim = env.num_users();
    let action_dim = env.action_dim();
    let num_clusters = env.num_cluster_actions();
    let mut bundle = AgentBundle::new(state_dim, action_dim, num_clusters, hyper, seed)?;
    let mut buffer = ReplayBuffer::new(hyper.buffer_capacity)?;
    let mut noise_rng = crate::rng::stream(seed, 0xB1);
    let mut explore_rng = crate::rng::stream(seed, 0xB2);
    let mut sample_rng = crate::rng::stream(seed, 0xB3);

    let total_steps = (hyper.episodes * hyper.steps_per_episode) as u64;
    let decay_horizon = total_steps / 2;
    let mut log = TrainingLog {
        num_users: state_dim,
        static_mode: !bundle.dynamic(),
        rows: Vec::with_capacity(hyper.episodes * hyper.steps_per_episode),
    };

    let mut global_step = 0u64;
    for episode in 0..hyper.episodes {
        let mut state = env.reset(episode as u64)?;
        for step in 0..hyper.steps_per_episode {
            let sigma =
                linear_decay(hyper.noise_sigma_start, hyper.noise_sigma_end, global_step, decay_horizon);
            let epsilon =
                linear_decay(hyper.epsilon_start, hyper.epsilon_end, global_step, decay_horizon);

            let features = state_features(&state);
            let mut weights = bundle.actor.forward(&features)?;
            for w in weights.iter_mut() {
                *w = (*w + sigma * crate::channel::standard_normal(&mut noise_rng)).clamp(0.0, 1.0);
            }
            let cluster_index = if bundle.dynamic() {
                if explore_rng.gen::<f64>() < epsilon {
                    explore_rng.gen_range(0..num_clusters)
                } else {
                    AgentBundle::greedy_cluster(bundle.qc.as_ref().expect("dynamic"), &features)?
                }
            } else {
                0
            };
            let action = HybridAction { weights: weights.clone(), cluster_index };
            let (next_state, reward, info) = env.step(&action)?;

            buffer.push(Transition {
                state: state.clone(),
                action_weights: weights,
                action_cluster: cluster_index,
                reward,
                next_state: next_state.clone(),
            });

            let mut critic_loss = None;
            let mut ddqn_loss = None;
            if buffer.len() >= hyper.minibatch {
                let batch = buffer.sample(hyper.minibatch, &mut sample_rng)?;
                let diag = bundle.ddpg_update(&batch)?;
                critic_loss = Some(diag.critic_loss);
                if bundle.dynamic() {
                    ddqn_loss = Some(bundle.ddqn_update(&batch)?);
                }
            }
            global_step += 1;
            if global_step % hyper.target_period == 0 {
                bundle.update_targets()?;
            }

            log.rows.push(LogRow {
                episode,
                step,
                reward,
                per_user_rates: info.per_user_rates,
                noise_sigma: sigma,
                epsilon,
                critic_loss,
                ddqn_loss,
            });
            state = next_state;
        }
    }
    Ok((bundle, log))
}
