//! Per-cluster DAS receive combining: IUI-aware Wiener-Hopf weights
//! `G_m̃k = R_m̃⁻¹ ĝ_m̃k` with the interference-plus-noise covariance
//! `R_m̃ = Σ_{l≠k} p_l ĝ_m̃l ĝ_m̃lᴴ + Σ̃_m̃`, and maximal-ratio combining
//! `G = 2 ĝ / σ̃²` as the single-user special case.
//!
//! Gains are computed from estimated channels; the covariance is solved per
//! cluster by a Hermitian Cholesky factorization (no explicit inverse), with
//! a trace-scaled diagonal regularization fallback on conditioning failure.

use num_complex::Complex64;

use crate::channel::NetworkRealization;
use crate::clustering::ClusterConfig;
use crate::error::{Error, Result};
use crate::sinr::DasGains;

/// Condition-estimate limit above which the plain solve is refused.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Combining method tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombinerMethod {
    WienerHopf,
    Mrc,
    Unit,
}

/// Complex combining gains per (cluster antenna, user), stored flat per AP.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinerGains {
    /// `gains[k][ap]`.
    pub gains: Vec<Vec<Complex64>>,
    pub method: CombinerMethod,
    /// Whether any cluster solve needed the regularized fallback.
    pub regularized: bool,
}

impl CombinerGains {
    /// Amplitudes `|G|`, the form the SINR expressions consume.
    pub fn amplitudes(&self) -> DasGains {
        self.gains
            .iter()
            .map(|row| row.iter().map(|g| g.norm()).collect())
            .collect()
    }

    /// Unit gains for every user and antenna.
    pub fn unit(num_users: usize, num_aps: usize) -> Self {
        CombinerGains {
            gains: vec![vec![Complex64::new(1.0, 0.0); num_aps]; num_users],
            method: CombinerMethod::Unit,
            regularized: false,
        }
    }
}

/// Wiener-Hopf gains for one user across all clusters.
pub fn wiener_hopf_gains(
    real: &NetworkRealization,
    cluster: &ClusterConfig,
    user: usize,
    powers: &[f64],
) -> Result<Vec<Complex64>> {
    wiener_hopf_user(real, cluster, user, powers).map(|(g, _)| g)
}

fn wiener_hopf_user(
    real: &NetworkRealization,
    cluster: &ClusterConfig,
    user: usize,
    powers: &[f64],
) -> Result<(Vec<Complex64>, bool)> {
    check_inputs(real, cluster, user, powers)?;
    let mut regularized = false;
    let mut flat = vec![Complex64::new(0.0, 0.0); real.num_aps];
    for block in cluster.members() {
        let n = block.len();
        // R = Σ_{l≠k} p_l ĝ_l ĝ_lᴴ + diag(σ̃²/2)
        let mut r = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for l in 0..real.num_users {
            if l == user {
                continue;
            }
            for (i, &ai) in block.iter().enumerate() {
                for (j, &aj) in block.iter().enumerate() {
                    r[i][j] += powers[l] * real.estimated[ai][l] * real.estimated[aj][l].conj();
                }
            }
        }
        for (i, &ai) in block.iter().enumerate() {
            let noise = real.data_noise_half_var[ai];
            if !(noise > 0.0) {
                return Err(Error::Domain(format!("AP {ai} has non-positive noise PSD")));
            }
            r[i][i] += noise;
        }
        let rhs: Vec<Complex64> = block.iter().map(|&a| real.estimated[a][user]).collect();
        let solution = match cholesky_solve(&r, &rhs) {
            Ok(sol) => sol,
            Err(Error::Conditioning { .. }) => {
                // Regularize: R + εI with ε = 1e-10 · trace/N, and retry.
                regularized = true;
                let trace: f64 = (0..n).map(|i| r[i][i].re).sum();
                let eps = 1e-10 * trace / n as f64;
                let mut r2 = r.clone();
                for (i, row) in r2.iter_mut().enumerate() {
                    row[i] += eps;
                }
                cholesky_solve(&r2, &rhs)?
            }
            Err(e) => return Err(e),
        };
        for (i, &a) in block.iter().enumerate() {
            flat[a] = solution[i];
        }
    }
    Ok((flat, regularized))
}

/// MRC gains for one user: `G = 2 ĝ / σ̃²` per antenna.
pub fn mrc_gains(real: &NetworkRealization, cluster: &ClusterConfig, user: usize) -> Result<Vec<Complex64>> {
    check_inputs(real, cluster, user, &real.user_powers)?;
    Ok((0..real.num_aps)
        .map(|a| real.estimated[a][user] / real.data_noise_half_var[a])
        .collect())
}

/// Builds the full gain table for all users under one method.
pub fn compute_gains(
    real: &NetworkRealization,
    cluster: &ClusterConfig,
    method: CombinerMethod,
) -> Result<CombinerGains> {
    match method {
        CombinerMethod::Unit => Ok(CombinerGains::unit(real.num_users, real.num_aps)),
        CombinerMethod::Mrc => {
            let gains = (0..real.num_users)
                .map(|k| mrc_gains(real, cluster, k))
                .collect::<Result<Vec<_>>>()?;
            Ok(CombinerGains { gains, method, regularized: false })
        }
        CombinerMethod::WienerHopf => {
            let mut regularized = false;
            let mut gains = Vec::with_capacity(real.num_users);
            for k in 0..real.num_users {
                let (g, reg) = wiener_hopf_user(real, cluster, k, &real.user_powers)?;
                regularized |= reg;
                gains.push(g);
            }
            Ok(CombinerGains { gains, method, regularized })
        }
    }
}

/// Coherent post-combining SINR of `user` inside one cluster:
/// `p_k |Gᴴĝ_k|² / (Σ_{l≠k} p_l |Gᴴĝ_l|² + Gᴴ Σ̃ G)`.
///
/// This is the quantity the Wiener-Hopf solution maximizes per cluster; the
/// power-domain expressions in [`crate::sinr`] use the same gains but model
/// interference term-by-term.
pub fn post_combining_sinr(
    real: &NetworkRealization,
    block: &[usize],
    gains: &[Complex64],
    user: usize,
) -> f64 {
    let dot = |l: usize| -> Complex64 {
        block
            .iter()
            .enumerate()
            .map(|(i, &a)| gains[i].conj() * real.estimated[a][l])
            .sum()
    };
    let desired = real.user_powers[user] * dot(user).norm_sqr();
    let mut denom = 0.0;
    for l in 0..real.num_users {
        if l != user {
            denom += real.user_powers[l] * dot(l).norm_sqr();
        }
    }
    for (i, &a) in block.iter().enumerate() {
        denom += gains[i].norm_sqr() * real.data_noise_half_var[a];
    }
    desired / denom
}

fn check_inputs(
    real: &NetworkRealization,
    cluster: &ClusterConfig,
    user: usize,
    powers: &[f64],
) -> Result<()> {
    if cluster.num_aps() != real.num_aps {
        return Err(Error::ShapeMismatch("cluster covers a different AP count".into()));
    }
    if user >= real.num_users {
        return Err(Error::Domain(format!("user {user} out of range")));
    }
    if powers.len() != real.num_users {
        return Err(Error::ShapeMismatch("power vector length != K".into()));
    }
    Ok(())
}

/// Solves the Hermitian positive-definite system `R x = b` by Cholesky
/// factorization. Verifies Hermitian symmetry, then refuses when the
/// diagonal-pivot condition estimate exceeds [`CONDITION_LIMIT`].
pub fn cholesky_solve(r: &[Vec<Complex64>], b: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = r.len();
    if r.iter().any(|row| row.len() != n) || b.len() != n {
        return Err(Error::ShapeMismatch("covariance must be square and match rhs".into()));
    }
    for i in 0..n {
        if r[i][i].im.abs() > 1e-9 * r[i][i].re.abs().max(1e-300) {
            return Err(Error::Domain("covariance diagonal is not real".into()));
        }
        for j in 0..i {
            let delta = (r[i][j] - r[j][i].conj()).norm();
            if delta > 1e-9 * (r[i][j].norm() + r[j][i].norm()).max(1e-300) {
                return Err(Error::Domain("covariance is not Hermitian".into()));
            }
        }
    }
    // L Lᴴ = R
    let mut l = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    let mut max_pivot = 0.0_f64;
    let mut min_pivot = f64::INFINITY;
    for i in 0..n {
        for j in 0..=i {
            let mut sum = r[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k].conj();
            }
            if i == j {
                let pivot = sum.re;
                if !(pivot > 0.0) {
                    return Err(Error::Conditioning {
                        what: "Cholesky pivot not positive".into(),
                        estimate: f64::INFINITY,
                    });
                }
                max_pivot = max_pivot.max(pivot);
                min_pivot = min_pivot.min(pivot);
                l[i][j] = Complex64::new(pivot.sqrt(), 0.0);
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    if max_pivot / min_pivot > CONDITION_LIMIT {
        return Err(Error::Conditioning {
            what: "covariance solve".into(),
            estimate: max_pivot / min_pivot,
        });
    }
    // forward substitution L y = b
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i][k] * y[k];
        }
        y[i] = sum / l[i][i];
    }
    // back substitution Lᴴ x = y
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[k][i].conj() * x[k];
        }
        x[i] = sum / l[i][i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{
        ChannelConfig, EstimateMode, FadingConfig, PilotAssignment, PilotConfig, Scenario,
        TopologyConfig,
    };
    use rand::Rng;

    fn scenario(m: usize, k: usize, seed: u64) -> Scenario {
        let cfg = ChannelConfig {
            topology: TopologyConfig::uniform(m, k, 15.0, 2.0),
            fading: FadingConfig::iid(1.0, 1.0),
            pilot: PilotConfig {
                length: k,
                coherence_length: 100,
                power: 0.1,
                assignment: PilotAssignment::Orthonormal,
                noise_half_variance: None,
            },
            noise_half_variance: 1e-6,
            user_power: 0.1,
            max_user_power: 1.0,
            estimate_mode: EstimateMode::MmseFromPilots,
        };
        Scenario::new(cfg, seed).unwrap()
    }

    #[test]
    fn single_user_wiener_hopf_is_mrc() {
        // K = 1: R = Σ̃ so G = 2ĝ/σ̃², identical to the MRC gains; the angle
        // between the two vectors is zero to machine precision.
        for seed in 0..100 {
            let sc = scenario(4, 1, seed);
            let real = sc.realize(0);
            let cluster = ClusterConfig::new(vec![0, 0, 1, 1], 2).unwrap();
            let wh = wiener_hopf_gains(&real, &cluster, 0, &real.user_powers).unwrap();
            let mrc = mrc_gains(&real, &cluster, 0).unwrap();
            for a in 0..4 {
                assert!((wh[a] - mrc[a]).norm() < 1e-10 * mrc[a].norm().max(1e-300));
                let want = real.estimated[a][0] * 2.0 / (2.0 * real.data_noise_half_var[a]);
                assert!((mrc[a] - want).norm() < 1e-12 * want.norm().max(1e-300));
            }
            // angle via the orthogonal residual sin θ = ‖wh − proj_mrc wh‖/‖wh‖,
            // which stays accurate for tiny angles
            let dot: Complex64 = mrc.iter().zip(&wh).map(|(a, b)| a.conj() * b).sum();
            let nm: f64 = mrc.iter().map(|z| z.norm_sqr()).sum();
            let coef = dot / nm;
            let residual: f64 = wh
                .iter()
                .zip(&mrc)
                .map(|(w, m)| (w - coef * m).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let nw: f64 = wh.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let angle = (residual / nw).asin();
            assert!(angle < 1e-10, "angle {angle} at seed {seed}");
        }
    }

    #[test]
    fn scalar_cluster_two_users_solves_by_arithmetic() {
        // 𝒩 = 1, K = 2: G = ĝ_k / (p_l |ĝ_l|² + σ̃²/2).
        let sc = scenario(2, 2, 7);
        let real = sc.realize(0);
        let cluster = ClusterConfig::singletons(2);
        let g = wiener_hopf_gains(&real, &cluster, 0, &real.user_powers).unwrap();
        for a in 0..2 {
            let denom = real.user_powers[1] * real.estimated[a][1].norm_sqr()
                + real.data_noise_half_var[a];
            let want = real.estimated[a][0] / denom;
            assert!((g[a] - want).norm() < 1e-12 * want.norm());
        }
    }

    #[test]
    fn wiener_hopf_solve_residual_is_tiny() {
        // R G = ĝ to 1e-10 on random 3-antenna, 3-user instances.
        let sc = scenario(3, 3, 11);
        let cluster = ClusterConfig::new(vec![0, 0, 0], 1).unwrap();
        for draw in 0..50 {
            let real = sc.realize(draw);
            for k in 0..3 {
                let g = wiener_hopf_gains(&real, &cluster, k, &real.user_powers).unwrap();
                // rebuild R and the residual
                let n = 3;
                let mut r = vec![vec![Complex64::new(0.0, 0.0); n]; n];
                for l in 0..3 {
                    if l == k {
                        continue;
                    }
                    for i in 0..n {
                        for j in 0..n {
                            r[i][j] += real.user_powers[l]
                                * real.estimated[i][l]
                                * real.estimated[j][l].conj();
                        }
                    }
                }
                for (i, row) in r.iter_mut().enumerate() {
                    row[i] += real.data_noise_half_var[i];
                }
                let mut worst = 0.0_f64;
                for i in 0..n {
                    let mut lhs = Complex64::new(0.0, 0.0);
                    for j in 0..n {
                        lhs += r[i][j] * g[j];
                    }
                    let res = (lhs - real.estimated[i][k]).norm();
                    worst = worst.max(res / real.estimated[i][k].norm().max(1e-300));
                }
                assert!(worst < 1e-10, "residual {worst} at draw {draw} user {k}");
            }
        }
    }

    #[test]
    fn mrc_zero_channel_gives_zero_gains() {
        let sc = scenario(2, 1, 13);
        let mut real = sc.realize(0);
        real.estimated[0][0] = Complex64::new(0.0, 0.0);
        let cluster = ClusterConfig::singletons(2);
        let g = mrc_gains(&real, &cluster, 0).unwrap();
        assert_eq!(g[0], Complex64::new(0.0, 0.0));
        assert!(g[1].norm() > 0.0);
    }

    #[test]
    fn mrc_output_snr_is_sum_of_branch_snrs() {
        // K = 1 coherent combining: SNR_out = Σ_n p |ĝ_n|² / (σ̃²/2).
        let sc = scenario(3, 1, 17);
        let real = sc.realize(2);
        let cluster = ClusterConfig::new(vec![0, 0, 0], 1).unwrap();
        let block = [0usize, 1, 2];
        let g = mrc_gains(&real, &cluster, 0).unwrap();
        let got = post_combining_sinr(&real, &block, &g, 0);
        let want: f64 = (0..3)
            .map(|a| {
                real.user_powers[0] * real.estimated[a][0].norm_sqr() / real.data_noise_half_var[a]
            })
            .sum();
        assert!((got - want).abs() < 1e-9 * want, "{got} vs {want}");
    }

    #[test]
    fn wiener_hopf_maximizes_per_cluster_sinr() {
        // W-H is the max-SINR combiner per cluster: it dominates both MRC
        // and unit gains on every multi-user instance. (MRC vs unit carries
        // no pointwise ordering under interference, so only the W-H legs
        // are exact.)
        let sc = scenario(4, 3, 19);
        let cluster = ClusterConfig::new(vec![0, 0, 1, 1], 2).unwrap();
        let blocks = cluster.members();
        for draw in 0..1000 {
            let real = sc.realize(draw);
            for k in 0..3 {
                let wh = wiener_hopf_gains(&real, &cluster, k, &real.user_powers).unwrap();
                let mrc = mrc_gains(&real, &cluster, k).unwrap();
                for block in &blocks {
                    let pick = |flat: &[Complex64]| -> Vec<Complex64> {
                        block.iter().map(|&a| flat[a]).collect()
                    };
                    let s_wh = post_combining_sinr(&real, block, &pick(&wh), k);
                    let s_mrc = post_combining_sinr(&real, block, &pick(&mrc), k);
                    let ones = vec![Complex64::new(1.0, 0.0); block.len()];
                    let s_unit = post_combining_sinr(&real, block, &ones, k);
                    assert!(s_wh >= s_mrc - 1e-9 * s_wh.abs(), "draw {draw} user {k}");
                    assert!(s_wh >= s_unit - 1e-9 * s_wh.abs(), "draw {draw} user {k}");
                }
            }
        }
    }

    #[test]
    fn single_user_dominance_chain_holds() {
        // Without IUI the full chain W-H = MRC ≥ unit is exact.
        let sc = scenario(3, 1, 23);
        let cluster = ClusterConfig::new(vec![0, 0, 0], 1).unwrap();
        for draw in 0..200 {
            let real = sc.realize(draw);
            let wh = wiener_hopf_gains(&real, &cluster, 0, &real.user_powers).unwrap();
            let mrc = mrc_gains(&real, &cluster, 0).unwrap();
            let block = [0usize, 1, 2];
            let s_wh = post_combining_sinr(&real, &block, &wh, 0);
            let s_mrc = post_combining_sinr(&real, &block, &mrc, 0);
            let ones = vec![Complex64::new(1.0, 0.0); 3];
            let s_unit = post_combining_sinr(&real, &block, &ones, 0);
            assert!((s_wh - s_mrc).abs() < 1e-9 * s_mrc);
            assert!(s_mrc >= s_unit - 1e-9 * s_mrc);
        }
    }

    #[test]
    fn cholesky_rejects_non_hermitian_and_indefinite() {
        let bad = vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.1)],
            vec![Complex64::new(0.5, 0.1), Complex64::new(1.0, 0.0)],
        ];
        let rhs = vec![Complex64::new(1.0, 0.0); 2];
        assert!(matches!(cholesky_solve(&bad, &rhs), Err(Error::Domain(_))));

        let indefinite = vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)],
            vec![Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)],
        ];
        assert!(matches!(cholesky_solve(&indefinite, &rhs), Err(Error::Conditioning { .. })));
    }

    #[test]
    fn random_hermitian_systems_solve_accurately() {
        let mut rng = crate::rng::stream(0xC0DE, 0);
        for _ in 0..100 {
            let n = rng.gen_range(1..6);
            // A Aᴴ + I is Hermitian positive definite.
            let a: Vec<Vec<Complex64>> = (0..n)
                .map(|_| {
                    (0..n)
                        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect()
                })
                .collect();
            let mut r = vec![vec![Complex64::new(0.0, 0.0); n]; n];
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        r[i][j] += a[i][k] * a[j][k].conj();
                    }
                }
                r[i][i] += 1.0;
            }
            let x_true: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let mut b = vec![Complex64::new(0.0, 0.0); n];
            for i in 0..n {
                for j in 0..n {
                    b[i] += r[i][j] * x_true[j];
                }
            }
            let x = cholesky_solve(&r, &b).unwrap();
            for i in 0..n {
                assert!((x[i] - x_true[i]).norm() < 1e-9);
            }
        }
    }
}
