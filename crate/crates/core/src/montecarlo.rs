//! Seeded, parallel Monte-Carlo estimation of outage probabilities, per-user
//! rates, and empirical SINR distributions — the oracle layer for every
//! closed form in [`crate::analytics`].
//!
//! Each run realizes one coherence interval from its own derived RNG stream,
//! so estimates are bit-identical for a given (config, seed) regardless of
//! how batches are scheduled across workers. Per-batch partials are combined
//! by a fixed-order pairwise reduction.

use rayon::prelude::*;

use crate::channel::Scenario;
use crate::clustering::ClusterConfig;
use crate::combining::{compute_gains, CombinerMethod};
use crate::error::{Error, Result};
use crate::sinr;

/// Monte-Carlo run budget and batching.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCConfig {
    pub runs: u64,
    /// Offsets the per-run stream indices so independent experiments can
    /// share a scenario without sharing randomness.
    pub run_offset: u64,
    pub batch_size: u64,
}

impl MCConfig {
    pub fn new(runs: u64) -> Self {
        MCConfig { runs, run_offset: 0, batch_size: 4096 }
    }

    /// The reference experiments' run count.
    pub fn paper() -> Self {
        MCConfig::new(2_000_000)
    }

    /// Desk-scale default.
    pub fn desk() -> Self {
        MCConfig::new(100_000)
    }

    fn validate(&self) -> Result<()> {
        if self.runs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidConfig("runs and batch size must be positive".into()));
        }
        Ok(())
    }
}

/// Point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub runs: u64,
    /// 3σ confidence half-width.
    pub half_width: f64,
}

impl MCEstimate {
    fn from_proportion(successes: u64, runs: u64) -> Self {
        let n = runs as f64;
        let p = successes as f64 / n;
        let se = (p * (1.0 - p) / n).sqrt();
        MCEstimate { estimate: p, std_error: se, runs, half_width: 3.0 * se }
    }

    fn from_moments(sum: f64, sum_sq: f64, runs: u64) -> Self {
        let n = runs as f64;
        let mean = sum / n;
        let var = ((sum_sq / n) - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
        let se = (var / n).sqrt();
        MCEstimate { estimate: mean, std_error: se, runs, half_width: 3.0 * se }
    }
}

/// How detection is configured for each realized interval.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionPolicy {
    /// Cluster layout; `None` means the static network (singleton clusters).
    pub cluster: Option<ClusterConfig>,
    /// Per-user, per-cluster beamforming weights.
    pub weights: WeightSpec,
    pub combiner: CombinerMethod,
    /// Whether SIC detection (with the induced power ordering) is applied.
    pub sic: bool,
}

impl DetectionPolicy {
    /// Static network, equal weights everywhere, unit gains, no SIC.
    pub fn static_equal_weights(weight: f64) -> Self {
        DetectionPolicy {
            cluster: None,
            weights: WeightSpec::Equal(weight),
            combiner: CombinerMethod::Unit,
            sic: false,
        }
    }
}

/// Beamforming weight specification.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    /// Every user applies the same weight on every cluster.
    Equal(f64),
    /// Explicit `[user][cluster]` matrix.
    PerUser(Vec<Vec<f64>>),
}

impl WeightSpec {
    fn row(&self, user: usize, num_clusters: usize) -> Result<Vec<f64>> {
        match self {
            WeightSpec::Equal(w) => Ok(vec![*w; num_clusters]),
            WeightSpec::PerUser(rows) => {
                let row = rows
                    .get(user)
                    .ok_or_else(|| Error::ShapeMismatch("weight matrix missing user row".into()))?;
                if row.len() != num_clusters {
                    return Err(Error::ShapeMismatch("weight row length != cluster count".into()));
                }
                Ok(row.clone())
            }
        }
    }
}

/// Realizes interval `draw` of the scenario and returns every user's SINR
/// under the detection policy.
pub fn sinr_vector(scenario: &Scenario, policy: &DetectionPolicy, draw: u64) -> Result<Vec<f64>> {
    let real = scenario.realize(draw);
    let cluster = policy
        .cluster
        .clone()
        .unwrap_or_else(|| ClusterConfig::singletons(real.num_aps));
    let gains = compute_gains(&real, &cluster, policy.combiner)?.amplitudes();
    let num_users = real.num_users;
    let order = if policy.sic {
        Some(sinr::sic_order_users(&real, &cluster, &gains)?)
    } else {
        None
    };
    let mut out = Vec::with_capacity(num_users);
    for k in 0..num_users {
        let w = policy.weights.row(k, cluster.num_clusters())?;
        let b = match &order {
            Some(order) => sinr::sic_sinr(&real, &cluster, &w, &gains, order, k)?,
            None => sinr::dynamic_sinr(&real, &cluster, &w, &gains, k)?,
        };
        out.push(b.value);
    }
    Ok(out)
}

/// Pairwise (tree) reduction in fixed index order.
fn pairwise<T: Copy, F: Fn(T, T) -> T>(mut items: Vec<T>, combine: &F) -> Option<T> {
    while items.len() > 1 {
        items = items
            .chunks(2)
            .map(|c| if c.len() == 2 { combine(c[0], c[1]) } else { c[0] })
            .collect();
    }
    items.pop()
}

fn batch_ranges(mc: &MCConfig) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < mc.runs {
        let end = (start + mc.batch_size).min(mc.runs);
        out.push((mc.run_offset + start, mc.run_offset + end));
        start = end;
    }
    out
}

/// Outage estimator over an arbitrary per-run SINR sampler. Counting is
/// exact, so the estimate is independent of batch scheduling by
/// construction.
pub fn outage_from_sampler<F>(sample: F, threshold: f64, mc: &MCConfig) -> Result<MCEstimate>
where
    F: Fn(u64) -> f64 + Sync,
{
    mc.validate()?;
    let counts: Vec<u64> = batch_ranges(mc)
        .into_par_iter()
        .map(|(lo, hi)| (lo..hi).filter(|&r| sample(r) < threshold).count() as u64)
        .collect();
    let total = pairwise(counts, &|a, b| a + b).unwrap_or(0);
    Ok(MCEstimate::from_proportion(total, mc.runs))
}

/// Mean estimator over an arbitrary per-run statistic.
pub fn mean_from_sampler<F>(sample: F, mc: &MCConfig) -> Result<MCEstimate>
where
    F: Fn(u64) -> f64 + Sync,
{
    mc.validate()?;
    let partials: Vec<(f64, f64)> = batch_ranges(mc)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for r in lo..hi {
                let x = sample(r);
                sum += x;
                sum_sq += x * x;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = pairwise(partials, &|a, b| (a.0 + b.0, a.1 + b.1)).unwrap_or((0.0, 0.0));
    Ok(MCEstimate::from_moments(sum, sum_sq, mc.runs))
}

/// Empirical outage of one user: the fraction of realized intervals whose
/// SINR falls below the threshold. Thresholds of exactly 0 and +∞ are
/// degenerate (SINR is nonnegative and finite) and short-circuit.
pub fn estimate_outage(
    scenario: &Scenario,
    policy: &DetectionPolicy,
    user: usize,
    threshold: f64,
    mc: &MCConfig,
) -> Result<MCEstimate> {
    mc.validate()?;
    if threshold == 0.0 {
        return Ok(MCEstimate { estimate: 0.0, std_error: 0.0, runs: mc.runs, half_width: 0.0 });
    }
    if threshold == f64::INFINITY {
        return Ok(MCEstimate { estimate: 1.0, std_error: 0.0, runs: mc.runs, half_width: 0.0 });
    }
    probe(scenario, policy, user)?;
    outage_from_sampler(
        |r| sinr_vector(scenario, policy, r).expect("policy validated by probe run")[user],
        threshold,
        mc,
    )
}

/// Outage of one user across a whole threshold grid, sharing the realized
/// draws across grid points (each point remains an unbiased estimate).
pub fn estimate_outage_grid(
    scenario: &Scenario,
    policy: &DetectionPolicy,
    user: usize,
    thresholds: &[f64],
    mc: &MCConfig,
) -> Result<Vec<MCEstimate>> {
    mc.validate()?;
    probe(scenario, policy, user)?;
    let counts: Vec<Vec<u64>> = batch_ranges(mc)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut counts = vec![0u64; thresholds.len()];
            for r in lo..hi {
                let g = sinr_vector(scenario, policy, r).expect("policy validated by probe run");
                for (i, &th) in thresholds.iter().enumerate() {
                    if g[user] < th {
                        counts[i] += 1;
                    }
                }
            }
            counts
        })
        .collect();
    let mut totals = vec![0u64; thresholds.len()];
    for row in counts {
        for (tot, c) in totals.iter_mut().zip(row) {
            *tot += c;
        }
    }
    Ok(totals.into_iter().map(|c| MCEstimate::from_proportion(c, mc.runs)).collect())
}

/// Mean per-user rate `(1/K) Σ_k log₂(1 + γ_k)` across realized intervals.
pub fn estimate_rate(scenario: &Scenario, policy: &DetectionPolicy, mc: &MCConfig) -> Result<MCEstimate> {
    probe(scenario, policy, 0)?;
    let k = scenario.config.topology.num_users as f64;
    mean_from_sampler(
        |r| {
            let g = sinr_vector(scenario, policy, r).expect("policy validated by probe run");
            g.iter().map(|x| (1.0 + x).log2()).sum::<f64>() / k
        },
        mc,
    )
}

/// Histogram of one user's SINR in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrHistogram {
    pub min_db: f64,
    pub max_db: f64,
    pub counts: Vec<u64>,
    pub below: u64,
    pub above: u64,
    pub runs: u64,
}

impl SinrHistogram {
    pub fn bin_edges(&self) -> Vec<f64> {
        let n = self.counts.len();
        (0..=n)
            .map(|i| self.min_db + (self.max_db - self.min_db) * i as f64 / n as f64)
            .collect()
    }
}

/// Empirical SINR distribution of one user, binned in dB.
pub fn sinr_histogram(
    scenario: &Scenario,
    policy: &DetectionPolicy,
    user: usize,
    bins: usize,
    min_db: f64,
    max_db: f64,
    mc: &MCConfig,
) -> Result<SinrHistogram> {
    mc.validate()?;
    if bins == 0 || !(max_db > min_db) {
        return Err(Error::InvalidConfig("histogram needs bins >= 1 and max > min".into()));
    }
    probe(scenario, policy, user)?;
    let partials: Vec<(Vec<u64>, u64, u64)> = batch_ranges(mc)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut counts = vec![0u64; bins];
            let mut below = 0u64;
            let mut above = 0u64;
            for r in lo..hi {
                let g = sinr_vector(scenario, policy, r).expect("policy validated by probe run");
                let db = 10.0 * g[user].max(1e-300).log10();
                if db < min_db {
                    below += 1;
                } else if db >= max_db {
                    above += 1;
                } else {
                    let i = ((db - min_db) / (max_db - min_db) * bins as f64) as usize;
                    counts[i.min(bins - 1)] += 1;
                }
            }
            (counts, below, above)
        })
        .collect();
    let mut out =
        SinrHistogram { min_db, max_db, counts: vec![0; bins], below: 0, above: 0, runs: mc.runs };
    for (counts, below, above) in partials {
        for (tot, c) in out.counts.iter_mut().zip(counts) {
            *tot += c;
        }
        out.below += below;
        out.above += above;
    }
    Ok(out)
}

/// Runs one draw up front so policy/shape errors surface as `Err` instead of
/// panicking worker threads.
fn probe(scenario: &Scenario, policy: &DetectionPolicy, user: usize) -> Result<()> {
    let v = sinr_vector(scenario, policy, 0)?;
    if user >= v.len() {
        return Err(Error::Domain(format!("user index {user} out of range")));
    }
    Ok(())
}
