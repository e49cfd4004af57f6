//! Experiment configuration: a TOML file with scenario, analysis, solver,
//! DRL and output sections. Powers are given in dBm and PSDs in dBm/Hz at
//! this boundary and converted to linear watts exactly once, at parse time.

use anyhow::{bail, Context};
use serde::Deserialize;

use cellfree_core::channel::{
    ChannelConfig, EstimateMode, FadingConfig, PilotAssignment, PilotConfig, Placement,
    TopologyConfig,
};
use cellfree_core::combining::CombinerMethod;
use cellfree_core::drl::Hyperparams;
use cellfree_core::optimize::Objective;
use cellfree_core::presets;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; `--seed` overrides.
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub detection: DetectionSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub drl: DrlSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub num_aps: usize,
    pub num_users: usize,
    /// Disc radius in meters; defaults to the 1 km² disc. The dense 18 m
    /// deployment is selected by the `desk`/`paper` presets.
    #[serde(default = "default_radius")]
    pub coverage_radius_m: f64,
    #[serde(default = "default_kappa")]
    pub path_loss_exponent: f64,
    #[serde(default = "default_one")]
    pub nakagami_shape: f64,
    #[serde(default = "default_one")]
    pub nakagami_spread: f64,
    /// 0 means τ_p = K.
    #[serde(default)]
    pub pilot_length: usize,
    #[serde(default = "default_pilot_power")]
    pub pilot_power_dbm: f64,
    #[serde(default = "default_true")]
    pub pilot_noise: bool,
    #[serde(default)]
    pub pilot_assignment: PilotKind,
    #[serde(default = "default_noise_psd")]
    pub noise_psd_dbm_hz: f64,
    #[serde(default = "default_user_power")]
    pub user_power_dbm: f64,
    #[serde(default = "default_max_power")]
    pub max_user_power_dbm: f64,
    #[serde(default)]
    pub estimate_mode: EstimateKind,
    #[serde(default = "default_min_distance")]
    pub min_distance_m: f64,
    /// Optional fixed planar coordinates (meters). Both lists must be given
    /// together; lengths must match num_aps / num_users.
    #[serde(default)]
    pub ap_positions: Vec<[f64; 2]>,
    #[serde(default)]
    pub user_positions: Vec<[f64; 2]>,
}

fn default_radius() -> f64 {
    presets::SQKM_RADIUS_M
}
fn default_kappa() -> f64 {
    2.0
}
fn default_one() -> f64 {
    1.0
}
fn default_pilot_power() -> f64 {
    20.0 // 100 mW
}
fn default_true() -> bool {
    true
}
fn default_noise_psd() -> f64 {
    -169.0
}
fn default_user_power() -> f64 {
    20.0 // 100 mW
}
fn default_max_power() -> f64 {
    30.0
}
fn default_min_distance() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PilotKind {
    #[default]
    Orthonormal,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateKind {
    #[default]
    Mmse,
    TrueChannel,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// User index the outage analysis tracks.
    #[serde(default)]
    pub user: usize,
    /// Explicit SINR threshold grid in dB; empty means an automatic
    /// log-spaced grid around the empirical SINR distribution.
    #[serde(default)]
    pub threshold_grid_db: Vec<f64>,
    #[serde(default = "default_grid_points")]
    pub threshold_points: usize,
    /// Monte-Carlo run budget.
    #[serde(default = "default_runs")]
    pub runs: u64,
    /// Optional sweep over user counts for the outage-vs-K curve.
    #[serde(default)]
    pub k_sweep: Vec<usize>,
    /// Threshold used during the K sweep, in dB.
    #[serde(default)]
    pub k_sweep_threshold_db: f64,
    /// Held-out realization count for the compare command.
    #[serde(default = "default_held_out")]
    pub held_out: usize,
    /// Histogram settings for `mc --estimand histogram`.
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    #[serde(default = "default_hist_min")]
    pub histogram_min_db: f64,
    #[serde(default = "default_hist_max")]
    pub histogram_max_db: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            user: 0,
            threshold_grid_db: Vec::new(),
            threshold_points: default_grid_points(),
            runs: default_runs(),
            k_sweep: Vec::new(),
            k_sweep_threshold_db: 0.0,
            held_out: default_held_out(),
            histogram_bins: default_bins(),
            histogram_min_db: default_hist_min(),
            histogram_max_db: default_hist_max(),
        }
    }
}

fn default_grid_points() -> usize {
    10
}
fn default_runs() -> u64 {
    100_000
}
fn default_held_out() -> usize {
    100
}
fn default_bins() -> usize {
    60
}
fn default_hist_min() -> f64 {
    -30.0
}
fn default_hist_max() -> f64 {
    70.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSection {
    /// Number of clusters M̃; 0 means M̃ = M (static network).
    #[serde(default)]
    pub num_clusters: usize,
    /// Index into the canonical cluster enumeration; `None` = singletons
    /// when static, index 0 otherwise.
    #[serde(default)]
    pub cluster_index: Option<u64>,
    #[serde(default)]
    pub combiner: CombinerKind,
    #[serde(default)]
    pub sic: bool,
    /// Shared beamforming weight for non-optimized evaluations.
    #[serde(default = "default_one")]
    pub weight: f64,
    /// SIC receiver sensitivity in dBm.
    #[serde(default = "default_sic_sensitivity")]
    pub sic_sensitivity_dbm: f64,
}

impl Default for DetectionSection {
    fn default() -> Self {
        DetectionSection {
            num_clusters: 0,
            cluster_index: None,
            combiner: CombinerKind::Unit,
            sic: false,
            weight: 1.0,
            sic_sensitivity_dbm: default_sic_sensitivity(),
        }
    }
}

fn default_sic_sensitivity() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CombinerKind {
    #[default]
    Unit,
    Mrc,
    WienerHopf,
}

impl From<CombinerKind> for CombinerMethod {
    fn from(k: CombinerKind) -> Self {
        match k {
            CombinerKind::Unit => CombinerMethod::Unit,
            CombinerKind::Mrc => CombinerMethod::Mrc,
            CombinerKind::WienerHopf => CombinerMethod::WienerHopf,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default)]
    pub kind: SolverKind,
    #[serde(default = "default_grid")]
    pub grid_points: usize,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default = "default_iters")]
    pub max_iterations: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            kind: SolverKind::ProjectedGradient,
            grid_points: default_grid(),
            budget: default_budget(),
            max_iterations: default_iters(),
            restarts: default_restarts(),
        }
    }
}

fn default_grid() -> usize {
    21
}
fn default_budget() -> u64 {
    10_000_000
}
fn default_iters() -> usize {
    5000
}
fn default_restarts() -> usize {
    5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    #[default]
    ProjectedGradient,
    Exhaustive,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrlSection {
    #[serde(default)]
    pub preset: DrlPreset,
    #[serde(default)]
    pub objective: ObjectiveKind,
    /// Overrides on top of the preset; 0/absent keeps the preset value.
    #[serde(default)]
    pub episodes: usize,
    #[serde(default)]
    pub steps_per_episode: usize,
    #[serde(default)]
    pub minibatch: usize,
    #[serde(default)]
    pub learning_rate: f64,
    #[serde(default)]
    pub c1_penalty: Option<f64>,
    /// Evaluation rollout length on a frozen realization.
    #[serde(default = "default_rollout")]
    pub eval_rollout: usize,
    #[serde(default)]
    pub checkpoint: Option<String>,
}

impl Default for DrlSection {
    fn default() -> Self {
        DrlSection {
            preset: DrlPreset::Desk,
            objective: ObjectiveKind::SumRate,
            episodes: 0,
            steps_per_episode: 0,
            minibatch: 0,
            learning_rate: 0.0,
            c1_penalty: None,
            eval_rollout: default_rollout(),
            checkpoint: None,
        }
    }
}

fn default_rollout() -> usize {
    4
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DrlPreset {
    #[default]
    Desk,
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    #[default]
    SumRate,
    MaxMin,
    /// Train both variants back to back.
    Both,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub directory: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: default_out_dir() }
    }
}

fn default_out_dir() -> String {
    "out".to_string()
}

impl ExperimentConfig {
    /// Parses and schema-validates a TOML config; parse errors carry the
    /// offending line and column.
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).context("config parse error")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let s = &self.scenario;
        if s.num_aps == 0 || s.num_users == 0 {
            bail!("scenario: need at least one AP and one user");
        }
        if self.detection.num_clusters > s.num_aps {
            bail!("detection: num_clusters exceeds the AP count");
        }
        if s.pilot_assignment == PilotKind::Orthonormal
            && s.pilot_length != 0
            && s.pilot_length < s.num_users
        {
            bail!("scenario: orthonormal pilots need pilot_length >= num_users");
        }
        if self.analysis.threshold_grid_db.is_empty() && self.analysis.threshold_points == 0 {
            bail!("analysis: threshold grid is empty and threshold_points is 0");
        }
        if s.ap_positions.is_empty() != s.user_positions.is_empty() {
            bail!("scenario: ap_positions and user_positions must be given together");
        }
        if !s.ap_positions.is_empty()
            && (s.ap_positions.len() != s.num_aps || s.user_positions.len() != s.num_users)
        {
            bail!("scenario: fixed coordinate counts disagree with num_aps/num_users");
        }
        Ok(())
    }

    /// Applies a named preset (CLI `--preset`): deployment radius plus the
    /// run-count and DRL scales.
    pub fn apply_preset(&mut self, preset: &str) -> anyhow::Result<()> {
        match preset {
            "desk" => {
                self.scenario.coverage_radius_m = presets::DENSE_RADIUS_M;
                self.analysis.runs = 100_000;
                self.drl.preset = DrlPreset::Desk;
            }
            "paper" => {
                self.scenario.coverage_radius_m = presets::DENSE_RADIUS_M;
                self.analysis.runs = 2_000_000;
                self.drl.preset = DrlPreset::Paper;
            }
            other => bail!("unknown preset '{other}' (expected 'desk' or 'paper')"),
        }
        Ok(())
    }

    /// Number of clusters, resolving 0 to the static network M̃ = M.
    pub fn num_clusters(&self) -> usize {
        if self.detection.num_clusters == 0 {
            self.scenario.num_aps
        } else {
            self.detection.num_clusters
        }
    }

    pub fn channel_config(&self) -> ChannelConfig {
        self.channel_config_with_users(self.scenario.num_users)
    }

    /// Channel config with a substituted user count (K sweeps).
    pub fn channel_config_with_users(&self, num_users: usize) -> ChannelConfig {
        let s = &self.scenario;
        let noise = presets::dbm_to_watts(s.noise_psd_dbm_hz);
        let tau_p = if s.pilot_length == 0 { num_users } else { s.pilot_length };
        // Fixed coordinates only apply at the configured user count; sweeps
        // over K fall back to uniform placement.
        let placement = if !s.ap_positions.is_empty() && num_users == s.num_users {
            Placement::FixedCoordinates {
                aps: s.ap_positions.clone(),
                users: s.user_positions.clone(),
            }
        } else {
            Placement::UniformDisc
        };
        ChannelConfig {
            topology: TopologyConfig {
                num_aps: s.num_aps,
                num_users,
                coverage_radius: s.coverage_radius_m,
                path_loss_exponent: s.path_loss_exponent,
                placement,
                min_distance: s.min_distance_m,
            },
            fading: FadingConfig::iid(s.nakagami_shape, s.nakagami_spread),
            pilot: PilotConfig {
                length: tau_p,
                coherence_length: 10 * tau_p.max(20),
                power: presets::dbm_to_watts(s.pilot_power_dbm),
                assignment: match s.pilot_assignment {
                    PilotKind::Orthonormal => PilotAssignment::Orthonormal,
                    PilotKind::Random => PilotAssignment::RandomUnitNorm,
                },
                noise_half_variance: s.pilot_noise.then_some(noise),
            },
            noise_half_variance: noise,
            user_power: presets::dbm_to_watts(s.user_power_dbm),
            max_user_power: presets::dbm_to_watts(s.max_user_power_dbm),
            estimate_mode: match s.estimate_mode {
                EstimateKind::Mmse => EstimateMode::MmseFromPilots,
                EstimateKind::TrueChannel => EstimateMode::TrueChannel,
            },
        }
    }

    pub fn sic_sensitivity_watts(&self) -> f64 {
        presets::dbm_to_watts(self.detection.sic_sensitivity_dbm)
    }

    pub fn hyperparams(&self) -> Hyperparams {
        let mut h = match self.drl.preset {
            DrlPreset::Desk => Hyperparams::desk(),
            DrlPreset::Paper => Hyperparams::paper(),
        };
        if self.drl.episodes > 0 {
            h.episodes = self.drl.episodes;
        }
        if self.drl.steps_per_episode > 0 {
            h.steps_per_episode = self.drl.steps_per_episode;
        }
        if self.drl.minibatch > 0 {
            h.minibatch = self.drl.minibatch;
        }
        if self.drl.learning_rate > 0.0 {
            h.learning_rate = self.drl.learning_rate;
        }
        h
    }

    pub fn objectives(&self) -> Vec<(Objective, &'static str)> {
        match self.drl.objective {
            ObjectiveKind::SumRate => vec![(Objective::SumRate, "maxsum")],
            ObjectiveKind::MaxMin => vec![(Objective::MaxMinRate, "maxmin")],
            ObjectiveKind::Both => {
                vec![(Objective::SumRate, "maxsum"), (Objective::MaxMinRate, "maxmin")]
            }
        }
    }
}
