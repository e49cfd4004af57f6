//! Per-user SINR assembly for the static network, the clustered dynamic
//! network, and the dynamic network with SIC detection.
//!
//! Every SINR is a ratio of sums of independent Gamma-distributed power
//! terms over a normalized noise floor of one. A single term-enumeration
//! pass produces, for each term, both its realized value (sampled channels
//! plugged into the expression) and its Gamma parameters (for the
//! closed-form analytics), so the Monte-Carlo and analytic paths cannot
//! drift apart. Cross-products between distinct channel gains average to
//! zero and are excluded throughout.
//!
//! Groups per detector `k`: the desired signal; inter-user interference
//! from uncancelled users; pilot-contamination estimation error (both the
//! own-symbol leakage and the cross terms, kept over the full user set even
//! under SIC); and the AWGN-related estimation error, which is replaced by
//! its PSD and appears as the `+1` noise floor after normalization.

use crate::channel::NetworkRealization;
use crate::clustering::ClusterConfig;
use crate::error::{Error, Result};

/// Classification of a Gamma-distributed SINR term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Desired,
    Iui,
    PilotContamination,
    /// AWGN-related estimation error. Never emitted by the enumerator: these
    /// terms are replaced by their PSD and live in the noise floor.
    AwgnEstimation,
}

/// A `(shape, rate)` pair describing one normalized power term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaTerm {
    pub shape: f64,
    pub rate: f64,
    pub role: Role,
}

/// Realized SINR of one user together with the Gamma parameter lists of its
/// numerator and denominator sums.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrBreakdown {
    /// Realized SINR, linear scale.
    pub value: f64,
    pub numerator_terms: Vec<GammaTerm>,
    pub denominator_terms: Vec<GammaTerm>,
    /// Normalized AWGN power; 1 after dividing through by the noise PSD.
    pub noise_floor: f64,
    /// Realized value of each numerator term, aligned with `numerator_terms`.
    pub realized_numerator: Vec<f64>,
    /// Realized value of each denominator term.
    pub realized_denominator: Vec<f64>,
}

impl SinrBreakdown {
    fn empty() -> Self {
        SinrBreakdown {
            value: 0.0,
            numerator_terms: Vec::new(),
            denominator_terms: Vec::new(),
            noise_floor: 1.0,
            realized_numerator: Vec::new(),
            realized_denominator: Vec::new(),
        }
    }
}

/// Per-user, per-AP combining amplitudes `|G|`, indexed `[user][ap]`.
pub type DasGains = Vec<Vec<f64>>;

/// Unit gains for every user and AP.
pub fn unit_gains(num_users: usize, num_aps: usize) -> DasGains {
    vec![vec![1.0; num_aps]; num_users]
}

fn validate_weights(weights: &[f64], expected: usize) -> Result<()> {
    if weights.len() != expected {
        return Err(Error::ShapeMismatch(format!(
            "expected {expected} beamforming weights, got {}",
            weights.len()
        )));
    }
    for (i, &w) in weights.iter().enumerate() {
        if !(0.0..=1.0).contains(&w) || !w.is_finite() {
            return Err(Error::Domain(format!("weight w[{i}] = {w} outside [0, 1]")));
        }
    }
    Ok(())
}

/// Static-network SINR of user `k` under the per-AP weight vector `w_k`
/// (length M). Equivalent to the dynamic network with singleton clusters
/// and unit DAS gains.
pub fn static_sinr(real: &NetworkRealization, weights: &[f64], user: usize) -> Result<SinrBreakdown> {
    validate_weights(weights, real.num_aps)?;
    let cluster = ClusterConfig::singletons(real.num_aps);
    let gains = unit_gains(real.num_users, real.num_aps);
    enumerate_terms(real, &cluster, weights, &gains, user, None)
}

/// Dynamic-network SINR of user `k`: clusters act as virtual APs whose
/// antennas are combined with the amplitudes `gains[k][ap]`, and `weights`
/// holds one beamforming weight per cluster (length M̃).
pub fn dynamic_sinr(
    real: &NetworkRealization,
    cluster: &ClusterConfig,
    weights: &[f64],
    gains: &DasGains,
    user: usize,
) -> Result<SinrBreakdown> {
    validate_weights(weights, cluster.num_clusters())?;
    check_cluster(real, cluster, gains)?;
    enumerate_terms(real, cluster, weights, gains, user, None)
}

/// Dynamic-network SINR of user `k` under SIC detection: interference from
/// users already decoded and subtracted (those later in `sic_order`) leaves
/// the IUI sum, while both estimation-error groups keep the full user set.
///
/// `sic_order` must be ascending in the weighted power metric of
/// [`sic_order_users`]; orders violating it are rejected.
pub fn sic_sinr(
    real: &NetworkRealization,
    cluster: &ClusterConfig,
    weights: &[f64],
    gains: &DasGains,
    sic_order: &[usize],
    user: usize,
) -> Result<SinrBreakdown> {
    validate_weights(weights, cluster.num_clusters())?;
    check_cluster(real, cluster, gains)?;
    let k_count = real.num_users;
    if sic_order.len() != k_count {
        return Err(Error::ShapeMismatch("sic_order length != K".into()));
    }
    let mut seen = vec![false; k_count];
    for &u in sic_order {
        if u >= k_count || seen[u] {
            return Err(Error::OrderingViolation(format!("not a permutation: {sic_order:?}")));
        }
        seen[u] = true;
    }
    // The §IV.A power-ordering condition must hold along the supplied order.
    let metrics = ordering_metrics(real, cluster, gains);
    for pair in sic_order.windows(2) {
        let (lo, hi) = (metrics[pair[0]], metrics[pair[1]]);
        if lo > hi * (1.0 + 1e-9) + 1e-300 {
            return Err(Error::OrderingViolation(format!(
                "metric of user {} ({lo:.6e}) exceeds metric of user {} ({hi:.6e})",
                pair[0], pair[1]
            )));
        }
    }
    let mut position = vec![0usize; k_count];
    for (pos, &u) in sic_order.iter().enumerate() {
        position[u] = pos;
    }
    // Users strictly weaker than `user` are still on the air.
    let residual: Vec<bool> = (0..k_count).map(|l| position[l] < position[user]).collect();
    enumerate_terms(real, cluster, weights, gains, user, Some(&residual))
}

/// Users sorted ascending by `p_k Σ_m̃ Σ_n G²_{m̃nk} |ĝ_{m̃nk}|²`, ties broken
/// by user index; the decoding then proceeds from the back of this list.
pub fn sic_order_users(
    real: &NetworkRealization,
    cluster: &ClusterConfig,
    gains: &DasGains,
) -> Result<Vec<usize>> {
    check_cluster(real, cluster, gains)?;
    let metrics = ordering_metrics(real, cluster, gains);
    let mut order: Vec<usize> = (0..real.num_users).collect();
    order.sort_by(|&a, &b| {
        metrics[a]
            .partial_cmp(&metrics[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    Ok(order)
}

fn ordering_metrics(real: &NetworkRealization, cluster: &ClusterConfig, gains: &DasGains) -> Vec<f64> {
    let _ = cluster; // the double cluster sum equals a flat sum over APs
    (0..real.num_users)
        .map(|u| {
            let total: f64 = (0..real.num_aps)
                .map(|a| gains[u][a] * gains[u][a] * real.estimated[a][u].norm_sqr())
                .sum();
            real.user_powers[u] * total
        })
        .collect()
}

fn check_cluster(real: &NetworkRealization, cluster: &ClusterConfig, gains: &DasGains) -> Result<()> {
    if cluster.num_aps() != real.num_aps {
        return Err(Error::ShapeMismatch("cluster covers a different AP count".into()));
    }
    if gains.len() != real.num_users || gains.iter().any(|g| g.len() != real.num_aps) {
        return Err(Error::ShapeMismatch("DAS gain matrix must be K x M".into()));
    }
    Ok(())
}

/// Single source of truth for SINR terms: walks clusters and in-cluster
/// antennas, emitting each term's realized value and Gamma parameters.
fn enumerate_terms(
    real: &NetworkRealization,
    cluster: &ClusterConfig,
    weights: &[f64],
    gains: &DasGains,
    user: usize,
    residual_iui: Option<&[bool]>,
) -> Result<SinrBreakdown> {
    let k_count = real.num_users;
    if user >= k_count {
        return Err(Error::Domain(format!("user index {user} out of range")));
    }
    let tau_p = real.pilots.length as f64;
    let members = cluster.members();

    // Normalization: σ̇_k = Σ_m̃ w² Σ_a G² [ (σ²_a/2) Σ_l p_l + σ̃²_a/2 ].
    let mut sigma_dot = 0.0;
    for (mt, block) in members.iter().enumerate() {
        let w2 = weights[mt] * weights[mt];
        for &a in block {
            let g2 = gains[user][a] * gains[user][a];
            sigma_dot += w2 * g2 * real.noise_psd_with_pilot_error(a);
        }
    }
    if sigma_dot <= 0.0 {
        // All-zero weights (or gains): nothing received, SINR is zero.
        return Ok(SinrBreakdown::empty());
    }

    let mut out = SinrBreakdown::empty();
    let rho = &real.pilots.powers;
    let p = &real.user_powers;

    let push = |out: &mut SinrBreakdown, coeff: f64, ap: usize, src: usize, role: Role| {
        if coeff == 0.0 {
            return;
        }
        let term = GammaTerm {
            shape: real.gain_shape[ap][src],
            rate: real.gain_rate[ap][src] * sigma_dot / coeff,
            role,
        };
        let realized = coeff * real.true_channels[ap][src].norm_sqr() / sigma_dot;
        if role == Role::Desired {
            out.numerator_terms.push(term);
            out.realized_numerator.push(realized);
        } else {
            out.denominator_terms.push(term);
            out.realized_denominator.push(realized);
        }
    };

    for (mt, block) in members.iter().enumerate() {
        let w2 = weights[mt] * weights[mt];
        if w2 == 0.0 {
            continue;
        }
        for &a in block {
            let g2 = gains[user][a] * gains[user][a];
            let base = w2 * g2;
            if base == 0.0 {
                continue;
            }
            // Desired signal.
            let e_kk = real.est_constants[a][user];
            push(
                &mut out,
                base * tau_p * rho[user] * p[user] * e_kk * e_kk,
                a,
                user,
                Role::Desired,
            );
            for l in 0..k_count {
                if l == user {
                    continue;
                }
                // Inter-user interference, restricted to uncancelled users
                // under SIC.
                let keep = residual_iui.map_or(true, |r| r[l]);
                if keep {
                    let e_ll = real.est_constants[a][l];
                    push(&mut out, base * tau_p * rho[l] * p[l] * e_ll * e_ll, a, l, Role::Iui);
                }
                // Own-symbol pilot leakage: x_k rides on g_{al} through the
                // pilot cross-correlation.
                let cross_kl = real.pilots.cross_power(user, l);
                if cross_kl > 0.0 {
                    push(
                        &mut out,
                        base * tau_p * rho[user] * p[user] * e_kk * e_kk * cross_kl,
                        a,
                        l,
                        Role::PilotContamination,
                    );
                }
                // Cross pilot leakage: x_l rides on g_{a l̈} for every l̈ ≠ l.
                let e_ll = real.est_constants[a][l];
                for ld in 0..k_count {
                    if ld == l {
                        continue;
                    }
                    let cross = real.pilots.cross_power(l, ld);
                    if cross > 0.0 {
                        push(
                            &mut out,
                            base * tau_p * rho[l] * p[l] * e_ll * e_ll * cross,
                            a,
                            ld,
                            Role::PilotContamination,
                        );
                    }
                }
            }
        }
    }

    let num: f64 = out.realized_numerator.iter().sum();
    let den: f64 = out.realized_denominator.iter().sum();
    out.value = num / (den + out.noise_floor);
    Ok(out)
}
