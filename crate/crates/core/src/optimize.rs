//! Joint AP-clustering and uplink-beamforming optimization: the sum-rate /
//! max-min-rate problem with SIC feasibility constraints, plus the
//! non-learning baseline solvers (exhaustive grid search at tiny scale,
//! projected gradient ascent at medium scale).
//!
//! Constraints: C1 — the K(K-1)/2 weighted power-gap conditions required for
//! successful SIC with receiver sensitivity `P_s`; C2 — every weight in [0, 1];
//! C3 — per-user weight vectors inside the unit ball. C2/C3 are enforced by
//! projection; C1 is reported through slacks and, during gradient ascent,
//! handled as an exact penalty with a ramped weight.

use crate::channel::NetworkRealization;
use crate::clustering::ClusterConfig;
use crate::combining::{compute_gains, CombinerMethod};
use crate::error::{Error, Result};
use crate::sinr::{self, DasGains};
use rand::Rng;

/// Optimization objective of problem P1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Maximize Σ_k log₂(1 + γ_k).
    SumRate,
    /// Maximize min_k log₂(1 + γ_k).
    MaxMinRate,
}

/// One joint clustering/beamforming problem instance.
#[derive(Debug, Clone)]
pub struct ProblemP1 {
    pub realization: NetworkRealization,
    pub objective: Objective,
    /// SIC receiver sensitivity `P_s` in watts.
    pub sic_sensitivity: f64,
    pub candidate_clusters: Vec<ClusterConfig>,
    pub das_gain_method: CombinerMethod,
}

impl ProblemP1 {
    pub fn validate(&self) -> Result<()> {
        if !(self.sic_sensitivity > 0.0) {
            return Err(Error::InvalidConfig("SIC sensitivity must be positive".into()));
        }
        if self.candidate_clusters.is_empty() {
            return Err(Error::InvalidConfig("candidate cluster list is empty".into()));
        }
        Ok(())
    }
}

/// A candidate (cluster, weight matrix) pair with its achieved rates,
/// objective and C1 slacks.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingSolution {
    pub cluster: ClusterConfig,
    /// `weights[user][cluster]` in [0, 1], per-user norm at most 1.
    pub weights: Vec<Vec<f64>>,
    /// log₂(1 + γ_k) per user.
    pub per_user_rates: Vec<f64>,
    pub objective_value: f64,
    /// K(K-1)/2 SIC feasibility slacks, in constraint order
    /// (l = 2..K ascending, δ = 1..l-1 ascending, decoding-order indices).
    pub c1_slacks: Vec<f64>,
    /// Natural magnitude of each C1 left-hand side (`Σ_m̃ Σ_n γ̄_{m̃nl}`);
    /// slacks divided by these give scale-free violation measures.
    pub c1_scales: Vec<f64>,
    pub feasible: bool,
}

impl BeamformingSolution {
    /// Total C1 violation normalized per constraint; zero iff feasible.
    pub fn c1_violation(&self) -> f64 {
        self.c1_slacks
            .iter()
            .zip(&self.c1_scales)
            .map(|(&s, &scale)| (-s).max(0.0) / scale.max(1e-300))
            .sum()
    }
}

/// Evaluates one (cluster, weights) candidate: computes the DAS gains and
/// SIC order, each user's post-SIC SINR and rate, the configured objective,
/// and every C1 slack
/// `Σ_m̃ (w²_{m̃δ} - Σ_{i=δ+1..l} w²_{m̃i}) Σ_n γ̄_{m̃nl} - P_s`
/// with `γ̄_{m̃nl} = 2 p_l |G_{m̃nl}| |ĝ_{m̃nl}|² / σ̃²`. Infeasibility is
/// reported through the flag, never thrown.
pub fn evaluate_solution(
    problem: &ProblemP1,
    cluster: &ClusterConfig,
    weights: &[Vec<f64>],
) -> Result<BeamformingSolution> {
    problem.validate()?;
    let real = &problem.realization;
    let k_count = real.num_users;
    if weights.len() != k_count {
        return Err(Error::ShapeMismatch("weight matrix must have K rows".into()));
    }
    let gains = compute_gains(real, cluster, problem.das_gain_method)?;
    let amps = gains.amplitudes();
    let order = sinr::sic_order_users(real, cluster, &amps)?;

    let mut per_user_rates = vec![0.0; k_count];
    for k in 0..k_count {
        let b = sinr::sic_sinr(real, cluster, &weights[k], &amps, &order, k)?;
        per_user_rates[k] = (1.0 + b.value).log2();
    }
    let objective_value = match problem.objective {
        Objective::SumRate => per_user_rates.iter().sum(),
        Objective::MaxMinRate => per_user_rates.iter().copied().fold(f64::INFINITY, f64::min),
    };

    let (c1_slacks, c1_scales) = c1_slacks(problem, cluster, weights, &amps, &order)?;
    let feasible = c1_slacks
        .iter()
        .zip(&c1_scales)
        .all(|(&s, &scale)| s >= -1e-9 * scale.max(1.0));
    Ok(BeamformingSolution {
        cluster: cluster.clone(),
        weights: weights.to_vec(),
        per_user_rates,
        objective_value,
        c1_slacks,
        c1_scales,
        feasible,
    })
}

/// C1 slack list in decoding-order indexing: users are relabeled ascending
/// in the SIC power metric, then for every l = 2..K and δ = 1..l-1 the
/// weighted power gap must reach the sensitivity.
fn c1_slacks(
    problem: &ProblemP1,
    cluster: &ClusterConfig,
    weights: &[Vec<f64>],
    amps: &DasGains,
    order: &[usize],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let real = &problem.realization;
    let k_count = real.num_users;
    let blocks = cluster.members();
    // Σ_n γ̄_{m̃nl} per (cluster, user), on estimated channels.
    let mut gbar = vec![vec![0.0; k_count]; blocks.len()];
    for (mt, block) in blocks.iter().enumerate() {
        for l in 0..k_count {
            let mut acc = 0.0;
            for &a in block {
                acc += 2.0 * real.user_powers[l] * amps[l][a] * real.estimated[a][l].norm_sqr()
                    / (2.0 * real.data_noise_half_var[a]);
            }
            gbar[mt][l] = acc;
        }
    }
    let mut slacks = Vec::with_capacity(k_count * (k_count.saturating_sub(1)) / 2);
    let mut scales = Vec::with_capacity(slacks.capacity());
    for l_pos in 1..k_count {
        for d_pos in 0..l_pos {
            let user_l = order[l_pos];
            let mut lhs = 0.0;
            let mut scale = problem.sic_sensitivity;
            for mt in 0..blocks.len() {
                let w_d = weights[order[d_pos]][mt];
                let mut gap = w_d * w_d;
                for i_pos in (d_pos + 1)..=l_pos {
                    let w_i = weights[order[i_pos]][mt];
                    gap -= w_i * w_i;
                }
                lhs += gap * gbar[mt][user_l];
                scale += gbar[mt][user_l];
            }
            slacks.push(lhs - problem.sic_sensitivity);
            scales.push(scale);
        }
    }
    Ok((slacks, scales))
}

/// Projects a weight matrix onto the feasible set of C2 and C3: clip every
/// entry to [0, 1], then scale each user row into the unit ball.
pub fn project_weights(weights: &mut [Vec<f64>]) {
    for row in weights.iter_mut() {
        for w in row.iter_mut() {
            *w = w.clamp(0.0, 1.0);
        }
        let norm_sq: f64 = row.iter().map(|w| w * w).sum();
        if norm_sq > 1.0 {
            let scale = norm_sq.sqrt().recip();
            for w in row.iter_mut() {
                *w *= scale;
            }
        }
    }
}

/// Exhaustive search over the Cartesian weight grid {0, 1/(g-1), ..., 1} per
/// entry, for every candidate cluster. Refuses when
/// `grid^(K·M̃) · |clusters|` exceeds the budget. Each grid point is
/// projected onto C3 before evaluation; the best feasible solution wins
/// (falling back to the best infeasible one when nothing is feasible).
pub fn solve_exhaustive(
    problem: &ProblemP1,
    grid_points_per_weight: usize,
    budget: u64,
) -> Result<BeamformingSolution> {
    problem.validate()?;
    if grid_points_per_weight < 2 {
        return Err(Error::InvalidConfig("need at least 2 grid points per weight".into()));
    }
    let k_count = problem.realization.num_users;
    let mut required: u64 = 0;
    for cluster in &problem.candidate_clusters {
        let dims = (k_count * cluster.num_clusters()) as u32;
        let evals = (grid_points_per_weight as u64)
            .checked_pow(dims)
            .ok_or(Error::BudgetExceeded { required: u64::MAX, allowed: budget })?;
        required = required.saturating_add(evals);
    }
    if required > budget {
        return Err(Error::BudgetExceeded { required, allowed: budget });
    }

    let mut best: Option<BeamformingSolution> = None;
    for cluster in &problem.candidate_clusters {
        let mt = cluster.num_clusters();
        let dims = k_count * mt;
        let g = grid_points_per_weight;
        let total = (g as u64).pow(dims as u32);
        for code in 0..total {
            let mut idx = code;
            let mut weights = vec![vec![0.0; mt]; k_count];
            for flat in 0..dims {
                let level = (idx % g as u64) as f64 / (g - 1) as f64;
                weights[flat / mt][flat % mt] = level;
                idx /= g as u64;
            }
            project_weights(&mut weights);
            let sol = evaluate_solution(problem, cluster, &weights)?;
            best = Some(pick_better(best.take(), sol));
        }
    }
    Ok(best.expect("candidate list is non-empty"))
}

fn pick_better(best: Option<BeamformingSolution>, cand: BeamformingSolution) -> BeamformingSolution {
    match best {
        None => cand,
        Some(b) => {
            let better = match (b.feasible, cand.feasible) {
                (true, false) => false,
                (false, true) => true,
                _ => cand.objective_value > b.objective_value,
            };
            if better {
                cand
            } else {
                b
            }
        }
    }
}

/// Projected-gradient-ascent configuration.
#[derive(Debug, Clone, Copy)]
pub struct GradientConfig {
    pub max_iterations: usize,
    /// Ascent stops once the projected-gradient norm falls below this.
    pub tolerance: f64,
    /// Initial step size for the backtracking line search.
    pub step: f64,
    /// Random restarts beyond the deterministic 1/√M̃ start.
    pub restarts: usize,
    pub seed: u64,
    /// Initial C1 penalty weight; multiplied by 10 every 500 iterations.
    pub penalty: f64,
    /// Softmin temperature for the smoothed max-min objective.
    pub softmin_temperature: f64,
}

impl Default for GradientConfig {
    fn default() -> Self {
        GradientConfig {
            max_iterations: 5000,
            tolerance: 1e-6,
            step: 0.25,
            restarts: 5,
            seed: 0,
            penalty: 1.0,
            softmin_temperature: 50.0,
        }
    }
}

/// Projected gradient ascent on the penalized objective for one cluster.
///
/// C1 enters as an exact penalty `-μ Σ max(0, -slack)` with μ ramped ×10
/// every 500 iterations; the max-min objective is smoothed by a softmin for
/// the ascent and re-evaluated exactly for reporting. Returns the best
/// feasible iterate encountered, or the best iterate overall flagged
/// infeasible when no feasible point was seen.
pub fn solve_projected_gradient(
    problem: &ProblemP1,
    cluster: &ClusterConfig,
    config: &GradientConfig,
) -> Result<BeamformingSolution> {
    problem.validate()?;
    let k_count = problem.realization.num_users;
    let mt = cluster.num_clusters();

    let mut starts: Vec<Vec<Vec<f64>>> = Vec::with_capacity(config.restarts + 1);
    starts.push(vec![vec![1.0 / (mt as f64).sqrt(); mt]; k_count]);
    let mut rng = crate::rng::stream(config.seed, 0x9d);
    for _ in 0..config.restarts {
        let mut w = vec![vec![0.0; mt]; k_count];
        for row in w.iter_mut() {
            for x in row.iter_mut() {
                *x = rng.gen_range(0.0..1.0);
            }
        }
        project_weights(&mut w);
        starts.push(w);
    }

    let mut best: Option<BeamformingSolution> = None;
    for start in starts {
        let (sol, _iters) = ascend(problem, cluster, start, config)?;
        best = Some(pick_better(best.take(), sol));
    }
    Ok(best.expect("at least one start"))
}

/// Penalized, smoothed objective used during the ascent.
fn penalized_objective(
    problem: &ProblemP1,
    cluster: &ClusterConfig,
    weights: &[Vec<f64>],
    penalty: f64,
    softmin_t: f64,
) -> Result<f64> {
    let sol = evaluate_solution(problem, cluster, weights)?;
    let base = match problem.objective {
        Objective::SumRate => sol.objective_value,
        Objective::MaxMinRate => {
            // softmin: -(1/t) ln Σ exp(-t r_k), kept in a stable form
            let t = softmin_t;
            let m = sol.per_user_rates.iter().copied().fold(f64::INFINITY, f64::min);
            let s: f64 = sol.per_user_rates.iter().map(|r| (-t * (r - m)).exp()).sum();
            m - s.ln() / t
        }
    };
    // Scale-free violation: raw slacks carry the channel SNR scale, which
    // would otherwise drown the rate term.
    Ok(base - penalty * sol.c1_violation())
}

fn ascend(
    problem: &ProblemP1,
    cluster: &ClusterConfig,
    mut weights: Vec<Vec<f64>>,
    config: &GradientConfig,
) -> Result<(BeamformingSolution, usize)> {
    let k_count = problem.realization.num_users;
    let mt = cluster.num_clusters();
    let mut best: Option<BeamformingSolution> = None;
    let mut penalty = config.penalty;
    let mut iters = 0;

    let record = |weights: &[Vec<f64>], best: &mut Option<BeamformingSolution>| -> Result<()> {
        let sol = evaluate_solution(problem, cluster, weights)?;
        *best = Some(pick_better(best.take(), sol));
        Ok(())
    };
    record(&weights, &mut best)?;

    for iter in 0..config.max_iterations {
        iters = iter + 1;
        if iter > 0 && iter % 500 == 0 {
            penalty *= 10.0;
        }
        let f0 = penalized_objective(problem, cluster, &weights, penalty, config.softmin_temperature)?;
        // central-difference gradient
        let h = 1e-6;
        let mut grad = vec![vec![0.0; mt]; k_count];
        for k in 0..k_count {
            for m in 0..mt {
                let orig = weights[k][m];
                weights[k][m] = (orig + h).min(1.0);
                let up = weights[k][m];
                let f_up =
                    penalized_objective(problem, cluster, &weights, penalty, config.softmin_temperature)?;
                weights[k][m] = (orig - h).max(0.0);
                let dn = weights[k][m];
                let f_dn =
                    penalized_objective(problem, cluster, &weights, penalty, config.softmin_temperature)?;
                weights[k][m] = orig;
                grad[k][m] = if up > dn { (f_up - f_dn) / (up - dn) } else { 0.0 };
            }
        }
        // backtracking line search on the projected step
        let mut step = config.step;
        let mut accepted = false;
        for _ in 0..30 {
            let mut trial = weights.clone();
            for k in 0..k_count {
                for m in 0..mt {
                    trial[k][m] += step * grad[k][m];
                }
            }
            project_weights(&mut trial);
            let f_trial =
                penalized_objective(problem, cluster, &trial, penalty, config.softmin_temperature)?;
            if f_trial > f0 + 1e-12 {
                weights = trial;
                record(&weights, &mut best)?;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        // projected-gradient norm: movement of a unit step after projection
        let mut moved = weights.clone();
        for k in 0..k_count {
            for m in 0..mt {
                moved[k][m] += grad[k][m];
            }
        }
        project_weights(&mut moved);
        let pg_norm: f64 = moved
            .iter()
            .zip(&weights)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)))
            .sum::<f64>()
            .sqrt();
        if pg_norm < config.tolerance || !accepted {
            break;
        }
    }
    Ok((best.expect("recorded at least once"), iters))
}

/// Weight solver selection for [`solve_joint`].
#[derive(Debug, Clone, Copy)]
pub enum WeightSolver {
    ExhaustiveGrid { points: usize, budget: u64 },
    ProjectedGradient(GradientConfig),
}

/// Solves P1 jointly: runs the weight solver for every candidate cluster
/// and keeps the best result; ties within 1e-12 go to the lowest canonical
/// cluster index. This is the ground-truth oracle at desk scale.
pub fn solve_joint(problem: &ProblemP1, solver: &WeightSolver) -> Result<BeamformingSolution> {
    problem.validate()?;
    let mut best: Option<BeamformingSolution> = None;
    for cluster in &problem.candidate_clusters {
        let sub = ProblemP1 { candidate_clusters: vec![cluster.clone()], ..problem.clone() };
        let sol = match solver {
            WeightSolver::ExhaustiveGrid { points, budget } => {
                solve_exhaustive(&sub, *points, *budget)?
            }
            WeightSolver::ProjectedGradient(cfg) => solve_projected_gradient(&sub, cluster, cfg)?,
        };
        best = Some(match best.take() {
            None => sol,
            Some(b) => {
                // strict improvement beyond the tie window keeps the earlier
                // (lower canonical index) cluster on ties
                let better = match (b.feasible, sol.feasible) {
                    (true, false) => false,
                    (false, true) => true,
                    _ => sol.objective_value > b.objective_value + 1e-12,
                };
                if better {
                    sol
                } else {
                    b
                }
            }
        });
    }
    Ok(best.expect("candidate list is non-empty"))
}

// ---------------------------------------------------------------------------
// Flat key-value record form
// ---------------------------------------------------------------------------

/// Serializes a solution as a flat key-value text record.
pub fn solution_to_record(sol: &BeamformingSolution) -> String {
    let join = |v: &[f64]| v.iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>().join(" ");
    let weights_flat: Vec<f64> = sol.weights.iter().flatten().copied().collect();
    format!(
        "cluster={}\nnum_users={}\nweights={}\nrates={}\nobjective={:.17e}\nslacks={}\nslack_scales={}\nfeasible={}\n",
        sol.cluster.to_text(),
        sol.weights.len(),
        join(&weights_flat),
        join(&sol.per_user_rates),
        sol.objective_value,
        join(&sol.c1_slacks),
        join(&sol.c1_scales),
        sol.feasible
    )
}

/// Parses the record form written by [`solution_to_record`].
pub fn solution_from_record(text: &str) -> Result<BeamformingSolution> {
    let mut fields = std::collections::HashMap::new();
    for line in text.lines() {
        if let Some((k, v)) = line.split_once('=') {
            fields.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let get = |k: &str| {
        fields.get(k).ok_or_else(|| Error::Parse(format!("missing field '{k}' in solution record")))
    };
    let parse_vec = |s: &str| -> Result<Vec<f64>> {
        if s.is_empty() {
            return Ok(Vec::new());
        }
        s.split_whitespace()
            .map(|x| x.parse::<f64>().map_err(|e| Error::Parse(e.to_string())))
            .collect()
    };
    let cluster = ClusterConfig::from_text(get("cluster")?)?;
    let num_users: usize =
        get("num_users")?.parse().map_err(|e| Error::Parse(format!("num_users: {e}")))?;
    let flat = parse_vec(get("weights")?)?;
    let mt = cluster.num_clusters();
    if flat.len() != num_users * mt {
        return Err(Error::Parse("weight count disagrees with cluster/user dims".into()));
    }
    let weights: Vec<Vec<f64>> = flat.chunks(mt).map(|c| c.to_vec()).collect();
    Ok(BeamformingSolution {
        cluster,
        weights,
        per_user_rates: parse_vec(get("rates")?)?,
        objective_value: get("objective")?.parse().map_err(|e| Error::Parse(format!("{e}")))?,
        c1_slacks: parse_vec(get("slacks")?)?,
        c1_scales: parse_vec(get("slack_scales")?)?,
        feasible: get("feasible")? == "true",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::enumerate_configs;
    use crate::presets;

    fn problem(m: usize, k: usize, mt: usize, seed: u64, objective: Objective) -> ProblemP1 {
        let cfg = presets::idealized_config(m, k, presets::DENSE_RADIUS_M, 0.1);
        let scenario = crate::channel::Scenario::new(cfg, seed).unwrap();
        ProblemP1 {
            realization: scenario.realize(0),
            objective,
            sic_sensitivity: presets::default_sic_sensitivity(),
            candidate_clusters: enumerate_configs(m, mt).unwrap(),
            das_gain_method: CombinerMethod::Unit,
        }
    }

    #[test]
    fn single_user_has_no_c1_constraints() {
        let p = problem(2, 1, 2, 1, Objective::SumRate);
        let sol = evaluate_solution(&p, &p.candidate_clusters[0], &[vec![1.0, 1.0]]).unwrap();
        assert!(sol.c1_slacks.is_empty());
        assert!(sol.feasible);
        // objective = log2(1 + SNR)
        assert_eq!(sol.objective_value, sol.per_user_rates[0]);
    }

    #[test]
    fn three_users_have_three_slacks() {
        let p = problem(4, 3, 2, 2, Objective::SumRate);
        let w = vec![vec![0.5, 0.5]; 3];
        let sol = evaluate_solution(&p, &p.candidate_clusters[0], &w).unwrap();
        assert_eq!(sol.c1_slacks.len(), 3);
    }

    /// End-to-end recompute oracle: rebuild the objective from raw channels
    /// through an independent path.
    #[test]
    fn objective_matches_independent_recompute() {
        use rand::Rng;
        let p = problem(4, 2, 2, 3, Objective::SumRate);
        let mut rng = crate::rng::stream(3, 77);
        for cluster in &p.candidate_clusters {
            let mut w: Vec<Vec<f64>> =
                (0..2).map(|_| (0..2).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
            project_weights(&mut w);
            let sol = evaluate_solution(&p, cluster, &w).unwrap();
            let amps = compute_gains(&p.realization, cluster, CombinerMethod::Unit)
                .unwrap()
                .amplitudes();
            let order = sinr::sic_order_users(&p.realization, cluster, &amps).unwrap();
            let mut want = 0.0;
            for k in 0..2 {
                let g = sinr::sic_sinr(&p.realization, cluster, &w[k], &amps, &order, k)
                    .unwrap()
                    .value;
                want += (1.0 + g).log2();
            }
            assert!((sol.objective_value - want).abs() < 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn exhaustive_matches_one_dimensional_scan() {
        // M = 2, M̃ = 2, K = 1, grid 11: the optimum over the grid equals a
        // direct scan of the two weights.
        let p = problem(2, 1, 2, 4, Objective::SumRate);
        let sol = solve_exhaustive(&p, 11, 10_000_000).unwrap();
        let mut best = f64::NEG_INFINITY;
        let mut best_w = (0.0, 0.0);
        for i in 0..11 {
            for j in 0..11 {
                let mut w = vec![vec![i as f64 / 10.0, j as f64 / 10.0]];
                project_weights(&mut w);
                let s = evaluate_solution(&p, &p.candidate_clusters[0], &w).unwrap();
                if s.objective_value > best {
                    best = s.objective_value;
                    best_w = (w[0][0], w[0][1]);
                }
            }
        }
        assert!((sol.objective_value - best).abs() < 1e-12);
        assert!((sol.weights[0][0] - best_w.0).abs() < 1e-12);
        assert!((sol.weights[0][1] - best_w.1).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_budget_is_enforced() {
        let p = problem(4, 2, 2, 5, Objective::SumRate);
        // 7 clusters × 5^4 = 4375 evaluations; a budget of 1000 must refuse.
        match solve_exhaustive(&p, 5, 1000) {
            Err(Error::BudgetExceeded { required, allowed }) => {
                assert_eq!(allowed, 1000);
                assert_eq!(required, 7 * 625);
            }
            other => panic!("expected budget refusal, got {other:?}"),
        }
    }

    #[test]
    fn corner_enumeration_count() {
        // single cluster candidate, grid = 2 → exactly 2^(K·M̃) corners, all
        // distinct in objective-bearing weight space; checked through the
        // optimum being on a corner.
        let mut p = problem(3, 2, 1, 6, Objective::SumRate);
        p.candidate_clusters.truncate(1);
        let sol = solve_exhaustive(&p, 2, 1_000_000).unwrap();
        for row in &sol.weights {
            for &w in row {
                assert!(w == 0.0 || w == 1.0, "corner weight {w}");
            }
        }
    }

    #[test]
    fn gradient_reaches_boundary_on_monotone_problem() {
        // K = 1, M̃ = 1: the objective is monotone in the single weight, so
        // the box bound w = 1 is optimal.
        let p = problem(3, 1, 1, 7, Objective::SumRate);
        let sol =
            solve_projected_gradient(&p, &p.candidate_clusters[0], &GradientConfig::default())
                .unwrap();
        assert!((sol.weights[0][0] - 1.0).abs() < 1e-6, "w = {}", sol.weights[0][0]);
    }

    #[test]
    fn gradient_comes_close_to_exhaustive_optimum() {
        for seed in 0..4 {
            for objective in [Objective::SumRate, Objective::MaxMinRate] {
                let mut p = problem(4, 2, 2, 100 + seed, objective);
                p.candidate_clusters.truncate(1);
                let cluster = p.candidate_clusters[0].clone();
                let grid = solve_exhaustive(&p, 21, 100_000_000).unwrap();
                let pg = solve_projected_gradient(&p, &cluster, &GradientConfig::default()).unwrap();
                assert!(
                    pg.objective_value >= grid.objective_value * 0.98,
                    "seed {seed} {objective:?}: pg {} vs grid {}",
                    pg.objective_value,
                    grid.objective_value
                );
            }
        }
    }

    #[test]
    fn doubling_sensitivity_never_helps() {
        // Larger P_s shrinks the feasible region, so the best feasible
        // objective cannot increase.
        let mut rng_seed = 0;
        let mut checked = 0;
        for seed in 0..50 {
            rng_seed += 1;
            let mut p = problem(3, 2, 2, 300 + seed, Objective::SumRate);
            p.candidate_clusters.truncate(1);
            let base = solve_exhaustive(&p, 7, 10_000_000).unwrap();
            let mut harder = p.clone();
            harder.sic_sensitivity *= 2.0;
            let tight = solve_exhaustive(&harder, 7, 10_000_000).unwrap();
            if base.feasible && tight.feasible {
                checked += 1;
                assert!(
                    tight.objective_value <= base.objective_value + 1e-9,
                    "seed {seed}: tightened {} > base {}",
                    tight.objective_value,
                    base.objective_value
                );
            }
        }
        let _ = rng_seed;
        assert!(checked > 10, "too few feasible instances ({checked}) to be meaningful");
    }

    #[test]
    fn joint_solver_scans_all_clusters() {
        let p = problem(4, 2, 2, 8, Objective::SumRate);
        assert_eq!(p.candidate_clusters.len(), 7);
        let solver = WeightSolver::ExhaustiveGrid { points: 5, budget: 10_000_000 };
        let joint = solve_joint(&p, &solver).unwrap();
        // brute-force cluster scan oracle
        let mut best: Option<BeamformingSolution> = None;
        for cluster in &p.candidate_clusters {
            let sub = ProblemP1 { candidate_clusters: vec![cluster.clone()], ..p.clone() };
            let sol = solve_exhaustive(&sub, 5, 10_000_000).unwrap();
            best = Some(match best.take() {
                None => sol,
                Some(b) => {
                    if sol.objective_value > b.objective_value + 1e-12 {
                        sol
                    } else {
                        b
                    }
                }
            });
        }
        let want = best.unwrap();
        assert_eq!(joint.cluster, want.cluster);
        assert_eq!(joint.objective_value, want.objective_value);
    }

    #[test]
    fn joint_solver_trivial_cases() {
        // one candidate cluster → equals the weight solver's result
        let mut p = problem(3, 2, 2, 9, Objective::SumRate);
        p.candidate_clusters.truncate(1);
        let solver = WeightSolver::ExhaustiveGrid { points: 5, budget: 10_000_000 };
        let joint = solve_joint(&p, &solver).unwrap();
        let direct = solve_exhaustive(&p, 5, 10_000_000).unwrap();
        assert_eq!(joint, direct);
        // M̃ = M: a single static configuration
        let p = problem(3, 2, 3, 10, Objective::SumRate);
        assert_eq!(p.candidate_clusters.len(), 1);
        assert_eq!(p.candidate_clusters[0], ClusterConfig::singletons(3));
    }

    #[test]
    fn solutions_satisfy_c2_c3_exactly() {
        let p = problem(4, 2, 2, 11, Objective::MaxMinRate);
        let solver = WeightSolver::ProjectedGradient(GradientConfig {
            max_iterations: 300,
            restarts: 2,
            ..GradientConfig::default()
        });
        let sol = solve_joint(&p, &solver).unwrap();
        for row in &sol.weights {
            let norm_sq: f64 = row.iter().map(|w| w * w).sum();
            assert!(norm_sq <= 1.0 + 1e-12);
            for &w in row {
                assert!((0.0..=1.0).contains(&w));
            }
        }
        if sol.feasible {
            assert!(sol.c1_slacks.iter().all(|&s| s >= -1e-9));
        }
        // max-min value is at most the per-user average of the sum-rate
        let sum: f64 = sol.per_user_rates.iter().sum();
        assert!(sol.objective_value <= sum / sol.per_user_rates.len() as f64 + 1e-12);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let p = problem(4, 2, 2, 12, Objective::SumRate);
        let w = vec![vec![0.4, 0.7]; 2];
        let a = evaluate_solution(&p, &p.candidate_clusters[2], &w).unwrap();
        let b = evaluate_solution(&p, &p.candidate_clusters[2], &w).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn record_round_trips() {
        let p = problem(3, 2, 2, 13, Objective::SumRate);
        let sol = evaluate_solution(&p, &p.candidate_clusters[0], &[vec![0.3, 0.9], vec![0.5, 0.1]])
            .unwrap();
        let text = solution_to_record(&sol);
        let back = solution_from_record(&text).unwrap();
        assert_eq!(back.cluster, sol.cluster);
        assert_eq!(back.weights, sol.weights);
        assert_eq!(back.per_user_rates, sol.per_user_rates);
        assert_eq!(back.objective_value, sol.objective_value);
        assert_eq!(back.c1_slacks, sol.c1_slacks);
        assert_eq!(back.feasible, sol.feasible);
        assert!(solution_from_record("cluster=0,0\n").is_err());
    }
}
