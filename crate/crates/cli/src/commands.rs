//! Subcommand implementations. Every command is a pure function of
//! (config file, seed) to output bytes; validation failures (cross-checks
//! outside tolerance) are distinguished from runtime errors by exit code.

use std::path::Path;

use anyhow::{anyhow, bail, Context};

use cellfree_core::analytics::{self, OutageQuery};
use cellfree_core::channel::Scenario;
use cellfree_core::clustering::{self, ClusterConfig};
use cellfree_core::drl::{train_hybrid, AgentBundle, CellFreeEnv, EnvConfig, HybridAction};
use cellfree_core::montecarlo::{self, DetectionPolicy, MCConfig, WeightSpec};
use cellfree_core::optimize::{
    self, evaluate_solution, project_weights, GradientConfig, Objective, ProblemP1, WeightSolver,
};
use cellfree_core::sinr;

use crate::config::{ExperimentConfig, ObjectiveKind, SolverKind};
use crate::report::{fmt, write_artifact, Csv};

/// Command outcome: exit code 2 signals a failed cross-check, not a crash.
pub struct Outcome {
    pub validation_failed: bool,
    pub summary: String,
}

impl Outcome {
    fn ok(summary: impl Into<String>) -> Self {
        Outcome { validation_failed: false, summary: summary.into() }
    }

    fn failed(summary: impl Into<String>) -> Self {
        Outcome { validation_failed: true, summary: summary.into() }
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Builds the detection policy the analysis sections describe.
fn detection_policy(cfg: &ExperimentConfig, scenario_aps: usize) -> anyhow::Result<DetectionPolicy> {
    let mt = cfg.num_clusters();
    let cluster = if mt == scenario_aps {
        None
    } else {
        let index = cfg.detection.cluster_index.unwrap_or(0);
        Some(clustering::config_by_index(scenario_aps, mt, index)?)
    };
    Ok(DetectionPolicy {
        cluster,
        weights: WeightSpec::Equal(cfg.detection.weight),
        combiner: cfg.detection.combiner.into(),
        sic: cfg.detection.sic,
    })
}

/// Automatic log-spaced threshold grid spanning the SINR distribution of
/// `user`, from a small pilot Monte-Carlo run.
fn auto_threshold_grid(
    scenario: &Scenario,
    policy: &DetectionPolicy,
    user: usize,
    points: usize,
) -> anyhow::Result<Vec<f64>> {
    let probes = 2000u64;
    let mut draws: Vec<f64> = (0..probes)
        .map(|r| montecarlo::sinr_vector(scenario, policy, r).map(|v| v[user]))
        .collect::<Result<_, _>>()?;
    draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lo = draws[(probes as usize) / 100].max(1e-12);
    let hi = draws[(probes as usize) * 99 / 100].max(lo * 10.0);
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|i| (ln_lo + (ln_hi - ln_lo) * i as f64 / (points - 1).max(1) as f64).exp())
        .collect())
}

fn threshold_grid(
    cfg: &ExperimentConfig,
    scenario: &Scenario,
    policy: &DetectionPolicy,
) -> anyhow::Result<Vec<f64>> {
    if cfg.analysis.threshold_grid_db.is_empty() {
        auto_threshold_grid(scenario, policy, cfg.analysis.user, cfg.analysis.threshold_points)
    } else {
        Ok(cfg.analysis.threshold_grid_db.iter().map(|&db| db_to_linear(db)).collect())
    }
}

/// Closed-form outage for one user of a realized scenario under equal
/// weights, from the deterministic Gamma term lists.
fn analytic_outage(
    scenario: &Scenario,
    policy: &DetectionPolicy,
    user: usize,
    threshold: f64,
) -> anyhow::Result<f64> {
    // Gamma parameters depend only on geometry and constants, not on the
    // fading draw, so any realization carries them.
    let real = scenario.realize(0);
    let cluster = match &policy.cluster {
        Some(c) => c.clone(),
        None => ClusterConfig::singletons(real.num_aps),
    };
    let weights = vec![cfg_weight(policy); cluster.num_clusters()];
    let gains = sinr::unit_gains(real.num_users, real.num_aps);
    let b = sinr::dynamic_sinr(&real, &cluster, &weights, &gains, user)?;
    if b.denominator_terms.is_empty() {
        let ws = analytics::welch_satterthwaite(&b.numerator_terms)?;
        return Ok(analytics::outage_no_interference(&ws, threshold)?);
    }
    Ok(analytics::outage_dynamic(&b, threshold)?)
}

fn cfg_weight(policy: &DetectionPolicy) -> f64 {
    match policy.weights {
        WeightSpec::Equal(w) => w,
        _ => 1.0,
    }
}

/// `outage`: closed form vs Monte Carlo on a threshold grid (or a K sweep);
/// exit code 2 when any point is off by more than 3 binomial standard
/// errors.
pub fn cmd_outage(
    cfg: &ExperimentConfig,
    config_hash: &str,
    out_dir: &Path,
) -> anyhow::Result<Outcome> {
    if cfg.detection.combiner != crate::config::CombinerKind::Unit || cfg.detection.sic {
        bail!("outage validates the closed form: detection must be unit-combiner, no SIC");
    }
    let mc = MCConfig { runs: cfg.analysis.runs, run_offset: 0, batch_size: 4096 };
    let user = cfg.analysis.user;

    let mut csv = if cfg.analysis.k_sweep.is_empty() {
        Csv::new(
            "outage",
            config_hash,
            cfg.seed,
            "gamma_th_db,gamma_th,analytic,mc,mc_stderr,within_3_sigma",
        )
    } else {
        Csv::new(
            "outage",
            config_hash,
            cfg.seed,
            "num_users,gamma_th_db,gamma_th,analytic,mc,mc_stderr,within_3_sigma",
        )
    };

    let mut all_ok = true;
    let mut worst: f64 = 0.0;
    if cfg.analysis.k_sweep.is_empty() {
        let scenario = Scenario::new(cfg.channel_config(), cfg.seed)?;
        let policy = detection_policy(cfg, cfg.scenario.num_aps)?;
        let grid = threshold_grid(cfg, &scenario, &policy)?;
        if grid.is_empty() {
            bail!("empty threshold grid");
        }
        let estimates = montecarlo::estimate_outage_grid(&scenario, &policy, user, &grid, &mc)?;
        for (&g, est) in grid.iter().zip(&estimates) {
            let analytic = analytic_outage(&scenario, &policy, user, g)?;
            let ok = (analytic - est.estimate).abs() <= est.half_width.max(1e-9);
            all_ok &= ok;
            worst = worst.max((analytic - est.estimate).abs() / est.std_error.max(1e-12));
            csv.row(&[
                fmt(linear_to_db(g)),
                fmt(g),
                fmt(analytic),
                fmt(est.estimate),
                fmt(est.std_error),
                ok.to_string(),
            ]);
        }
    } else {
        let g = db_to_linear(cfg.analysis.k_sweep_threshold_db);
        for &k in &cfg.analysis.k_sweep {
            let scenario = Scenario::new(cfg.channel_config_with_users(k), cfg.seed)?;
            let policy = detection_policy(cfg, cfg.scenario.num_aps)?;
            let analytic = analytic_outage(&scenario, &policy, user.min(k - 1), g)?;
            let est =
                montecarlo::estimate_outage(&scenario, &policy, user.min(k - 1), g, &mc)?;
            let ok = (analytic - est.estimate).abs() <= est.half_width.max(1e-9);
            all_ok &= ok;
            worst = worst.max((analytic - est.estimate).abs() / est.std_error.max(1e-12));
            csv.row(&[
                k.to_string(),
                fmt(cfg.analysis.k_sweep_threshold_db),
                fmt(g),
                fmt(analytic),
                fmt(est.estimate),
                fmt(est.std_error),
                ok.to_string(),
            ]);
        }
    }
    let path = write_artifact(out_dir, "outage.csv", &csv.into_string())?;
    let summary = format!(
        "outage: wrote {} (worst deviation {:.2} sigma)",
        path.display(),
        worst
    );
    Ok(if all_ok { Outcome::ok(summary) } else { Outcome::failed(summary) })
}

/// `pdf-check`: density normalization plus PDF-integral vs closed-form CDF
/// coherence on a grid.
pub fn cmd_pdf_check(
    cfg: &ExperimentConfig,
    config_hash: &str,
    out_dir: &Path,
) -> anyhow::Result<Outcome> {
    let scenario = Scenario::new(cfg.channel_config(), cfg.seed)?;
    let policy = detection_policy(cfg, cfg.scenario.num_aps)?;
    let user = cfg.analysis.user;
    let real = scenario.realize(0);
    let cluster = match &policy.cluster {
        Some(c) => c.clone(),
        None => ClusterConfig::singletons(real.num_aps),
    };
    let weights = vec![cfg.detection.weight; cluster.num_clusters()];
    let gains = sinr::unit_gains(real.num_users, real.num_aps);
    let b = sinr::dynamic_sinr(&real, &cluster, &weights, &gains, user)?;
    let query = OutageQuery::from_breakdown(&b, 1.0)
        .map_err(|e| anyhow!("pdf-check needs interference terms (K >= 2): {e}"))?;

    let grid = {
        let mut grid = threshold_grid(cfg, &scenario, &policy)?;
        grid.insert(0, 0.0);
        grid
    };
    let report = analytics::cdf_consistency_check(&query, &grid)?;
    let mut csv = Csv::new(
        "pdf-check",
        config_hash,
        cfg.seed,
        "gamma_th,cdf_from_pdf,cdf_closed_form,deviation",
    );
    for row in &report.rows {
        csv.row(&[
            fmt(row.threshold),
            fmt(row.cdf_from_pdf),
            fmt(row.cdf_closed_form),
            fmt((row.cdf_from_pdf - row.cdf_closed_form).abs()),
        ]);
    }
    let path = write_artifact(out_dir, "pdf_check.csv", &csv.into_string())?;
    let norm_ok = (report.normalization - 1.0).abs() <= 1e-3;
    let dev_ok = report.max_deviation <= 1e-6;
    let summary = format!(
        "pdf-check: wrote {} (mass {:.8}, max deviation {:.3e})",
        path.display(),
        report.normalization,
        report.max_deviation
    );
    Ok(if norm_ok && dev_ok { Outcome::ok(summary) } else { Outcome::failed(summary) })
}

/// `cluster-enum`: canonical enumeration of the partition action space.
pub fn cmd_cluster_enum(
    cfg: &ExperimentConfig,
    config_hash: &str,
    out_dir: &Path,
) -> anyhow::Result<Outcome> {
    let m = cfg.scenario.num_aps;
    let mt = cfg.num_clusters();
    let configs = clustering::enumerate_configs(m, mt)?;
    let mut csv = Csv::new("cluster-enum", config_hash, cfg.seed, "index,assignment,sizes");
    for (i, c) in configs.iter().enumerate() {
        let round_trip = clustering::config_by_index(m, mt, i as u64)?;
        if &round_trip != c {
            bail!("enumeration/indexing mismatch at {i}");
        }
        csv.row(&[
            i.to_string(),
            format!("\"{}\"", c.to_text()),
            format!(
                "\"{}\"",
                c.cluster_sizes().iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
            ),
        ]);
    }
    let path = write_artifact(out_dir, "clusters.csv", &csv.into_string())?;
    let stirling = clustering::stirling2(m, mt);
    let ok = stirling == configs.len() as u64;
    let summary = format!(
        "cluster-enum: wrote {} ({} configurations, Stirling count {})",
        path.display(),
        configs.len(),
        stirling
    );
    Ok(if ok { Outcome::ok(summary) } else { Outcome::failed(summary) })
}

fn weight_solver(cfg: &ExperimentConfig) -> WeightSolver {
    match cfg.solver.kind {
        SolverKind::Exhaustive => WeightSolver::ExhaustiveGrid {
            points: cfg.solver.grid_points,
            budget: cfg.solver.budget,
        },
        SolverKind::ProjectedGradient => WeightSolver::ProjectedGradient(GradientConfig {
            max_iterations: cfg.solver.max_iterations,
            restarts: cfg.solver.restarts,
            seed: cfg.seed,
            ..GradientConfig::default()
        }),
    }
}

fn problem_for_realization(
    cfg: &ExperimentConfig,
    realization: cellfree_core::channel::NetworkRealization,
    objective: Objective,
) -> anyhow::Result<ProblemP1> {
    let m = cfg.scenario.num_aps;
    let mt = cfg.num_clusters();
    Ok(ProblemP1 {
        realization,
        objective,
        sic_sensitivity: cfg.sic_sensitivity_watts(),
        candidate_clusters: clustering::enumerate_configs(m, mt)?,
        das_gain_method: cfg.detection.combiner.into(),
    })
}

/// `baseline`: joint cluster/beamforming solve on one realized interval.
pub fn cmd_baseline(
    cfg: &ExperimentConfig,
    config_hash: &str,
    out_dir: &Path,
) -> anyhow::Result<Outcome> {
    let scenario = Scenario::new(cfg.channel_config(), cfg.seed)?;
    let objective = match cfg.drl.objective {
        ObjectiveKind::MaxMin => Objective::MaxMinRate,
        _ => Objective::SumRate,
    };
    let problem = problem_for_realization(cfg, scenario.realize(0), objective)?;
    let solver = weight_solver(cfg);
    let sol = optimize::solve_joint(&problem, &solver)?;
    let record = optimize::solution_to_record(&sol);
    let path = write_artifact(out_dir, "baseline_solution.txt", &record)?;

    let mut csv = Csv::new(
        "baseline",
        config_hash,
        cfg.seed,
        "cluster,objective,feasible,min_rate,sum_rate",
    );
    let sum: f64 = sol.per_user_rates.iter().sum();
    let min = sol.per_user_rates.iter().copied().fold(f64::INFINITY, f64::min);
    csv.row(&[
        format!("\"{}\"", sol.cluster.to_text()),
        fmt(sol.objective_value),
        sol.feasible.to_string(),
        fmt(min),
        fmt(sum),
    ]);
    write_artifact(out_dir, "baseline.csv", &csv.into_string())?;
    Ok(Outcome::ok(format!(
        "baseline: objective {:.4} on cluster {} -> {}",
        sol.objective_value,
        sol.cluster.to_text(),
        path.display()
    )))
}

fn build_env(
    cfg: &ExperimentConfig,
    objective: Objective,
    seed: u64,
) -> anyhow::Result<CellFreeEnv> {
    let scenario = Scenario::new(cfg.channel_config(), seed)?;
    Ok(CellFreeEnv::new(EnvConfig {
        scenario,
        num_clusters: cfg.num_clusters(),
        objective,
        das_method: cfg.detection.combiner.into(),
        sic: true,
        c1_penalty: cfg.drl.c1_penalty.unwrap_or(1.0),
        sic_sensitivity: cfg.sic_sensitivity_watts(),
        frozen_fading: false,
        action_space_cap: clustering::DEFAULT_ACTION_SPACE_CAP,
    })?)
}

/// `train`: hybrid DDPG-DDQN training; one log + checkpoint per requested
/// objective variant.
pub fn cmd_train(
    cfg: &ExperimentConfig,
    config_hash: &str,
    out_dir: &Path,
) -> anyhow::Result<Outcome> {
    let hyper = cfg.hyperparams();
    // surface an oversized action space before any training work
    clustering::enumerate_configs(cfg.scenario.num_aps, cfg.num_clusters())
        .context("cluster action space")?;
    let mut summaries = Vec::new();
    for (objective, tag) in cfg.objectives() {
        let mut env = build_env(cfg, objective, cfg.seed)?;
        let (bundle, log) = train_hybrid(&mut env, &hyper, cfg.seed)?;
        let mut csv_text = format!(
            "# cellfree v{} command=train config={config_hash} seed={} variant={tag}\n",
            crate::report::TOOL_VERSION,
            cfg.seed
        );
        csv_text.push_str(&log.to_csv());
        write_artifact(out_dir, &format!("train_{tag}.csv"), &csv_text)?;
        write_artifact(out_dir, &format!("checkpoint_{tag}.json"), &bundle.to_checkpoint())?;
        let smoothed = log.smoothed_episode_rewards(50);
        summaries.push(format!(
            "{tag}: {} episodes, final smoothed reward {:.4}, final mean rate {:.4}",
            hyper.episodes,
            smoothed.last().copied().unwrap_or(0.0),
            log.final_mean_rate(50)
        ));
    }
    Ok(Outcome::ok(format!("train: {}", summaries.join("; "))))
}

/// Greedy rollout of a trained agent on one frozen realization: the state
/// is seeded by a deterministic probe action, then the agent's own actions
/// iterate the state a few times; the final action's solution is returned.
pub fn rollout_on_realization(
    bundle: &AgentBundle,
    cfg: &ExperimentConfig,
    realization: &cellfree_core::channel::NetworkRealization,
    objective: Objective,
    steps: usize,
) -> anyhow::Result<optimize::BeamformingSolution> {
    let mt = cfg.num_clusters();
    let clusters = clustering::enumerate_configs(cfg.scenario.num_aps, mt)?;
    let eval = |action: &HybridAction| -> anyhow::Result<optimize::BeamformingSolution> {
        let cluster = clusters
            .get(action.cluster_index)
            .ok_or_else(|| anyhow!("cluster index out of range"))?;
        let mut weights: Vec<Vec<f64>> =
            action.weights.chunks(mt).map(|c| c.to_vec()).collect();
        project_weights(&mut weights);
        let problem = ProblemP1 {
            realization: realization.clone(),
            objective,
            sic_sensitivity: cfg.sic_sensitivity_watts(),
            candidate_clusters: vec![cluster.clone()],
            das_gain_method: cfg.detection.combiner.into(),
        };
        Ok(evaluate_solution(&problem, cluster, &weights)?)
    };
    // deterministic probe action
    let probe = HybridAction {
        weights: vec![1.0 / (mt as f64).sqrt(); bundle.action_dim],
        cluster_index: 0,
    };
    let mut sol = eval(&probe)?;
    for _ in 0..steps.max(1) {
        let sinrs: Vec<f64> = sol.per_user_rates.iter().map(|r| r.exp2() - 1.0).collect();
        let action = bundle.greedy_action(&sinrs)?;
        sol = eval(&action)?;
    }
    Ok(sol)
}

/// Agent stand-ins for `compare`.
pub enum CompareAgent {
    Checkpoint(AgentBundle),
    /// The oracle itself: self-comparison, ratio exactly 1.
    Oracle,
    /// Uniform-random actions, seeded.
    Random,
}

/// `compare`: trained agent vs the joint solver on held-out realizations.
pub fn cmd_compare(
    cfg: &ExperimentConfig,
    config_hash: &str,
    out_dir: &Path,
    agent: &str,
) -> anyhow::Result<Outcome> {
    let objective = match cfg.drl.objective {
        ObjectiveKind::MaxMin => Objective::MaxMinRate,
        _ => Objective::SumRate,
    };
    let agent = match agent {
        "oracle" => CompareAgent::Oracle,
        "random" => CompareAgent::Random,
        "checkpoint" => {
            let path = cfg
                .drl
                .checkpoint
                .clone()
                .unwrap_or_else(|| out_dir.join("checkpoint_maxsum.json").display().to_string());
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("missing checkpoint {path}"))?;
            CompareAgent::Checkpoint(AgentBundle::from_checkpoint(&text)?)
        }
        other => bail!("unknown agent '{other}' (expected checkpoint|oracle|random)"),
    };
    let scenario = Scenario::new(cfg.channel_config(), cfg.seed)?;
    let solver = weight_solver(cfg);
    let mt = cfg.num_clusters();
    let clusters = clustering::enumerate_configs(cfg.scenario.num_aps, mt)?;
    let mut csv = Csv::new(
        "compare",
        config_hash,
        cfg.seed,
        "instance,agent_rate,baseline_rate,ratio",
    );
    // Held-out draws, far beyond any training counter.
    const HELD_OUT_BASE: u64 = 1 << 40;
    let mut agent_total = 0.0;
    let mut oracle_total = 0.0;
    let mut rng = cellfree_core::rng::stream(cfg.seed, 0xC0);
    for i in 0..cfg.analysis.held_out {
        let real = scenario.realize(HELD_OUT_BASE + i as u64);
        let problem = problem_for_realization(cfg, real.clone(), objective)?;
        let oracle = optimize::solve_joint(&problem, &solver)?;
        let agent_sol = match &agent {
            CompareAgent::Oracle => oracle.clone(),
            CompareAgent::Checkpoint(bundle) => {
                rollout_on_realization(bundle, cfg, &real, objective, cfg.drl.eval_rollout)?
            }
            CompareAgent::Random => {
                use rand::Rng;
                let action = HybridAction {
                    weights: (0..cfg.scenario.num_users * mt)
                        .map(|_| rng.gen_range(0.0..1.0))
                        .collect(),
                    cluster_index: rng.gen_range(0..clusters.len()),
                };
                let cluster = clusters[action.cluster_index].clone();
                let mut weights: Vec<Vec<f64>> =
                    action.weights.chunks(mt).map(|c| c.to_vec()).collect();
                project_weights(&mut weights);
                evaluate_solution(&problem, &cluster, &weights)?
            }
        };
        let agent_rate: f64 =
            agent_sol.per_user_rates.iter().sum::<f64>() / agent_sol.per_user_rates.len() as f64;
        let oracle_rate: f64 =
            oracle.per_user_rates.iter().sum::<f64>() / oracle.per_user_rates.len() as f64;
        agent_total += agent_rate;
        oracle_total += oracle_rate;
        csv.row(&[
            i.to_string(),
            fmt(agent_rate),
            fmt(oracle_rate),
            fmt(agent_rate / oracle_rate.max(1e-300)),
        ]);
    }
    let ratio = agent_total / oracle_total.max(1e-300);
    let path = write_artifact(out_dir, "compare.csv", &csv.into_string())?;
    Ok(Outcome::ok(format!(
        "compare: mean achieved-rate ratio {ratio:.4} over {} held-out realizations -> {}",
        cfg.analysis.held_out,
        path.display()
    )))
}

/// `mc`: one Monte-Carlo estimand as a CSV row.
pub fn cmd_mc(
    cfg: &ExperimentConfig,
    config_hash: &str,
    out_dir: &Path,
    estimand: &str,
) -> anyhow::Result<Outcome> {
    let scenario = Scenario::new(cfg.channel_config(), cfg.seed)?;
    let policy = detection_policy(cfg, cfg.scenario.num_aps)?;
    let mc = MCConfig { runs: cfg.analysis.runs, run_offset: 0, batch_size: 4096 };
    let user = cfg.analysis.user;
    let mut csv = Csv::new("mc", config_hash, cfg.seed, "estimand,params,estimate,stderr,runs,seed");
    let summary = match estimand {
        "outage" => {
            let g = if cfg.analysis.threshold_grid_db.is_empty() {
                bail!("mc outage needs analysis.threshold_grid_db")
            } else {
                db_to_linear(cfg.analysis.threshold_grid_db[0])
            };
            let est = montecarlo::estimate_outage(&scenario, &policy, user, g, &mc)?;
            csv.row(&[
                "outage".into(),
                format!("\"user={user} gamma_th={g:.6e}\""),
                fmt(est.estimate),
                fmt(est.std_error),
                est.runs.to_string(),
                cfg.seed.to_string(),
            ]);
            format!("outage estimate {:.6e} +- {:.2e}", est.estimate, est.std_error)
        }
        "rate" => {
            let est = montecarlo::estimate_rate(&scenario, &policy, &mc)?;
            csv.row(&[
                "mean_rate".into(),
                "\"per-user\"".into(),
                fmt(est.estimate),
                fmt(est.std_error),
                est.runs.to_string(),
                cfg.seed.to_string(),
            ]);
            format!("mean per-user rate {:.6} +- {:.2e}", est.estimate, est.std_error)
        }
        "histogram" => {
            let hist = montecarlo::sinr_histogram(
                &scenario,
                &policy,
                user,
                cfg.analysis.histogram_bins,
                cfg.analysis.histogram_min_db,
                cfg.analysis.histogram_max_db,
                &mc,
            )?;
            let edges = hist.bin_edges();
            for (i, &count) in hist.counts.iter().enumerate() {
                csv.row(&[
                    "sinr_histogram".into(),
                    format!("\"bin=[{:.3},{:.3}) dB\"", edges[i], edges[i + 1]),
                    fmt(count as f64 / hist.runs as f64),
                    String::new(),
                    hist.runs.to_string(),
                    cfg.seed.to_string(),
                ]);
            }
            format!(
                "histogram: {} in-range, {} below, {} above",
                hist.counts.iter().sum::<u64>(),
                hist.below,
                hist.above
            )
        }
        other => bail!("unknown estimand '{other}' (expected outage|rate|histogram)"),
    };
    let path = write_artifact(out_dir, "mc.csv", &csv.into_string())?;
    Ok(Outcome::ok(format!("mc: {summary} -> {}", path.display())))
}
