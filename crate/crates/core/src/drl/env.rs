//! Simulated cell-free uplink environment for the hybrid agent.
//!
//! State: the K per-user SINRs achieved on the previous interval. Action:
//! a flattened beamforming weight matrix in [0,1]^{K·M̃} plus a cluster
//! configuration index. Reward: the configured P1 objective on the current
//! interval minus a penalty on violated SIC feasibility slacks. Each step
//! applies the action to the current interval, then advances to a fresh
//! fading draw (unless fading is frozen for determinism checks).

use rand::Rng;

use crate::channel::Scenario;
use crate::clustering::{self, ClusterConfig};
use crate::combining::CombinerMethod;
use crate::error::{Error, Result};
use crate::optimize::{evaluate_solution, project_weights, Objective, ProblemP1};

/// Environment configuration.
#[derive(Debug, Clone)]
pub struct EnvConfig {
    pub scenario: Scenario,
    /// Number of clusters M̃; M̃ = M is the static network.
    pub num_clusters: usize,
    pub objective: Objective,
    pub das_method: CombinerMethod,
    /// Apply SIC detection (the dynamic network's detector).
    pub sic: bool,
    /// Penalty weight λ_c on the total C1 violation.
    pub c1_penalty: f64,
    /// SIC receiver sensitivity `P_s` in watts.
    pub sic_sensitivity: f64,
    /// Keep the fading fixed across steps (determinism/testing mode).
    pub frozen_fading: bool,
    /// Cap on the cluster action space.
    pub action_space_cap: u64,
}

/// Hybrid action: continuous beamforming weights plus a discrete cluster
/// configuration index.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridAction {
    /// Flattened `[user-major] K·M̃` weights, each in [0, 1].
    pub weights: Vec<f64>,
    pub cluster_index: usize,
}

/// Reward decomposition returned with every step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub objective_value: f64,
    pub penalty: f64,
    pub per_user_rates: Vec<f64>,
    pub feasible: bool,
}

/// The environment: frozen geometry, per-step fading draws.
pub struct CellFreeEnv {
    pub config: EnvConfig,
    cluster_space: Vec<ClusterConfig>,
    num_users: usize,
    num_aps: usize,
    draw_counter: u64,
    current: crate::channel::NetworkRealization,
    state: Vec<f64>,
}

impl CellFreeEnv {
    pub fn new(config: EnvConfig) -> Result<Self> {
        let m = config.scenario.config.topology.num_aps;
        let k = config.scenario.config.topology.num_users;
        if config.num_clusters == 0 || config.num_clusters > m {
            return Err(Error::InvalidConfig("cluster count must satisfy 1 <= M~ <= M".into()));
        }
        let cluster_space =
            clustering::enumerate_configs_capped(m, config.num_clusters, config.action_space_cap)?;
        let current = config.scenario.realize(0);
        Ok(CellFreeEnv {
            config,
            cluster_space,
            num_users: k,
            num_aps: m,
            draw_counter: 0,
            current,
            state: vec![0.0; k],
        })
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_aps(&self) -> usize {
        self.num_aps
    }

    pub fn action_dim(&self) -> usize {
        self.num_users * self.config.num_clusters
    }

    pub fn num_cluster_actions(&self) -> usize {
        self.cluster_space.len()
    }

    pub fn cluster_space(&self) -> &[ClusterConfig] {
        &self.cluster_space
    }

    /// Current raw SINR state.
    pub fn state(&self) -> &[f64] {
        &self.state
    }

    /// Resets to a fresh interval and seeds the state with the SINRs of a
    /// random action, giving the per-episode "random vector of SINR values".
    pub fn reset(&mut self, episode_seed: u64) -> Result<Vec<f64>> {
        if !self.config.frozen_fading {
            self.draw_counter += 1;
            self.current = self.config.scenario.realize(self.draw_counter);
        }
        let mut rng =
            crate::rng::stream(crate::rng::derive_seed(self.config.scenario.seed(), 0xE0), episode_seed);
        let action = HybridAction {
            weights: (0..self.action_dim()).map(|_| rng.gen_range(0.0..1.0)).collect(),
            cluster_index: rng.gen_range(0..self.cluster_space.len()),
        };
        let (sinrs, _info) = self.evaluate(&action)?;
        self.state = sinrs.clone();
        Ok(sinrs)
    }

    /// Applies `action` to the current interval; returns the next state
    /// (that interval's SINRs) and the penalized reward, then advances to a
    /// fresh fading draw.
    pub fn step(&mut self, action: &HybridAction) -> Result<(Vec<f64>, f64, StepInfo)> {
        let (sinrs, info) = self.evaluate(action)?;
        let reward = info.objective_value - info.penalty;
        self.state = sinrs.clone();
        if !self.config.frozen_fading {
            self.draw_counter += 1;
            self.current = self.config.scenario.realize(self.draw_counter);
        }
        Ok((sinrs, reward, info))
    }

    /// Objective, penalty and SINRs of an action on the current interval,
    /// with no state advance. The evaluation delegates to
    /// [`evaluate_solution`] so environment rewards and solver objectives
    /// cannot diverge.
    pub fn evaluate(&self, action: &HybridAction) -> Result<(Vec<f64>, StepInfo)> {
        if action.weights.len() != self.action_dim() {
            return Err(Error::ShapeMismatch(format!(
                "action has {} weights, expected {}",
                action.weights.len(),
                self.action_dim()
            )));
        }
        let cluster = self
            .cluster_space
            .get(action.cluster_index)
            .ok_or_else(|| {
                Error::Domain(format!("cluster index {} out of range", action.cluster_index))
            })?
            .clone();
        let mt = self.config.num_clusters;
        let mut weights: Vec<Vec<f64>> =
            action.weights.chunks(mt).map(|c| c.to_vec()).collect();
        project_weights(&mut weights);

        let problem = ProblemP1 {
            realization: self.current.clone(),
            objective: self.config.objective,
            sic_sensitivity: self.config.sic_sensitivity,
            candidate_clusters: vec![cluster.clone()],
            das_gain_method: self.config.das_method,
        };
        let sol = if self.config.sic {
            evaluate_solution(&problem, &cluster, &weights)?
        } else {
            // no-SIC variant used for ablation: plain dynamic detection
            let gains =
                crate::combining::compute_gains(&self.current, &cluster, self.config.das_method)?
                    .amplitudes();
            let mut rates = Vec::with_capacity(self.num_users);
            for k in 0..self.num_users {
                let b = crate::sinr::dynamic_sinr(&self.current, &cluster, &weights[k], &gains, k)?;
                rates.push((1.0 + b.value).log2());
            }
            let objective_value = match self.config.objective {
                Objective::SumRate => rates.iter().sum(),
                Objective::MaxMinRate => rates.iter().copied().fold(f64::INFINITY, f64::min),
            };
            crate::optimize::BeamformingSolution {
                cluster: cluster.clone(),
                weights: weights.clone(),
                per_user_rates: rates,
                objective_value,
                c1_slacks: Vec::new(),
                c1_scales: Vec::new(),
                feasible: true,
            }
        };
        // λ_c × the per-constraint-normalized C1 violation, so penalties sit
        // on the same scale as the rate objective.
        let penalty = self.config.c1_penalty * sol.c1_violation();
        let sinrs: Vec<f64> = sol.per_user_rates.iter().map(|r| r.exp2() - 1.0).collect();
        Ok((
            sinrs,
            StepInfo {
                objective_value: sol.objective_value,
                penalty,
                per_user_rates: sol.per_user_rates,
                feasible: sol.feasible,
            },
        ))
    }

    /// The realization currently on the air (held-out evaluation hooks).
    pub fn current_realization(&self) -> &crate::channel::NetworkRealization {
        &self.current
    }
}

/// Normalized state features: `ln(1 + γ) / 10` per user. Raw linear SINRs
/// span decades; the networks see this compressed form while logs keep the
/// raw values.
pub fn state_features(sinrs: &[f64]) -> Vec<f64> {
    sinrs.iter().map(|&g| g.ln_1p() / 10.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn env(m: usize, k: usize, mt: usize, seed: u64, frozen: bool) -> CellFreeEnv {
        let cfg = presets::idealized_config(m, k, presets::DENSE_RADIUS_M, 0.1);
        let scenario = Scenario::new(cfg, seed).unwrap();
        CellFreeEnv::new(EnvConfig {
            scenario,
            num_clusters: mt,
            objective: Objective::SumRate,
            das_method: CombinerMethod::Unit,
            sic: true,
            c1_penalty: 1.0,
            sic_sensitivity: presets::default_sic_sensitivity(),
            frozen_fading: frozen,
            action_space_cap: clustering::DEFAULT_ACTION_SPACE_CAP,
        })
        .unwrap()
    }

    #[test]
    fn zero_weights_give_zero_reward() {
        let mut e = env(3, 1, 2, 1, true);
        let action = HybridAction { weights: vec![0.0, 0.0], cluster_index: 0 };
        let (s, r, info) = e.step(&action).unwrap();
        assert_eq!(r, 0.0);
        assert_eq!(s, vec![0.0]);
        assert_eq!(info.per_user_rates, vec![0.0]);
    }

    #[test]
    fn frozen_fading_is_deterministic() {
        let mut e = env(4, 2, 2, 2, true);
        let action = HybridAction { weights: vec![0.4, 0.9, 0.7, 0.2], cluster_index: 3 };
        let (s1, r1, _) = e.step(&action).unwrap();
        let (s2, r2, _) = e.step(&action).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(r1, r2);
    }

    #[test]
    fn fresh_fading_changes_the_state() {
        let mut e = env(4, 2, 2, 3, false);
        let action = HybridAction { weights: vec![0.4, 0.9, 0.7, 0.2], cluster_index: 3 };
        let (s1, _, _) = e.step(&action).unwrap();
        let (s2, _, _) = e.step(&action).unwrap();
        assert_ne!(s1, s2);
    }

    #[test]
    fn reward_matches_solver_objective_minus_penalty() {
        use rand::Rng;
        let mut e = env(4, 2, 2, 4, true);
        let mut rng = crate::rng::stream(4, 99);
        for _ in 0..10 {
            let action = HybridAction {
                weights: (0..4).map(|_| rng.gen_range(0.0..1.0)).collect(),
                cluster_index: rng.gen_range(0..e.num_cluster_actions()),
            };
            let (_, reward, info) = e.step(&action).unwrap();
            // independent recompute through the optimizer
            let cluster = e.cluster_space()[action.cluster_index].clone();
            let mut w: Vec<Vec<f64>> = action.weights.chunks(2).map(|c| c.to_vec()).collect();
            project_weights(&mut w);
            let problem = ProblemP1 {
                realization: e.current_realization().clone(),
                objective: Objective::SumRate,
                sic_sensitivity: presets::default_sic_sensitivity(),
                candidate_clusters: vec![cluster.clone()],
                das_gain_method: CombinerMethod::Unit,
            };
            let sol = evaluate_solution(&problem, &cluster, &w).unwrap();
            let penalty = sol.c1_violation();
            assert!((reward - (sol.objective_value - penalty)).abs() < 1e-12);
            assert_eq!(info.objective_value, sol.objective_value);
        }
    }

    #[test]
    fn invalid_actions_are_rejected() {
        let e = env(3, 2, 2, 5, true);
        assert!(e.evaluate(&HybridAction { weights: vec![0.5; 3], cluster_index: 0 }).is_err());
        assert!(e
            .evaluate(&HybridAction { weights: vec![0.5; 4], cluster_index: 999 })
            .is_err());
    }

    #[test]
    fn reset_produces_nonnegative_state_of_width_k() {
        let mut e = env(4, 3, 2, 6, false);
        let s = e.reset(0).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|&g| g >= 0.0));
        let s2 = e.reset(1).unwrap();
        assert_ne!(s, s2);
    }

    #[test]
    fn state_features_compress_sinrs() {
        let feats = state_features(&[0.0, 1.0, 1e6]);
        assert_eq!(feats[0], 0.0);
        assert!((feats[1] - (2.0f64).ln() / 10.0).abs() < 1e-15);
        assert!(feats[2] < 1.4);
    }
}
