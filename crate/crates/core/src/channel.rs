//! Network realizations: geometry, large/small-scale fading, pilot training
//! and MMSE channel estimation.
//!
//! The channel gain between user `k` and AP `m` is `g_mk = L_mk^{-κ} h_mk`
//! with Nakagami small-scale fading, so `|h_mk|²` is Gamma-distributed with
//! shape `ℳ` and rate `ℳ/Ω` and `|g_mk|²` is Gamma with rate scaled by
//! `L^{2κ}`. All randomness flows from explicit seeds; a `Scenario` freezes
//! geometry and pilot assignment while `realize` draws per-interval fading.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::rng;

/// Placement rule for APs and users.
#[derive(Debug, Clone, PartialEq)]
pub enum Placement {
    /// Both APs and users drawn uniformly over the coverage disc.
    UniformDisc,
    /// Caller-supplied planar coordinates, in meters.
    FixedCoordinates { aps: Vec<[f64; 2]>, users: Vec<[f64; 2]> },
}

/// Geometry configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyConfig {
    pub num_aps: usize,
    pub num_users: usize,
    /// Coverage disc radius in meters. 564 m corresponds to a 1 km² disc;
    /// 18 m reproduces the reference experiments' dense deployment.
    pub coverage_radius: f64,
    /// Path-loss exponent κ ≥ 2.
    pub path_loss_exponent: f64,
    pub placement: Placement,
    /// Minimum AP-user separation; uniform draws closer than this are
    /// resampled so path gains stay bounded.
    pub min_distance: f64,
}

impl TopologyConfig {
    pub fn uniform(num_aps: usize, num_users: usize, radius: f64, kappa: f64) -> Self {
        TopologyConfig {
            num_aps,
            num_users,
            coverage_radius: radius,
            path_loss_exponent: kappa,
            placement: Placement::UniformDisc,
            min_distance: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_aps == 0 || self.num_users == 0 {
            return Err(Error::InvalidConfig("need at least one AP and one user".into()));
        }
        if !(self.coverage_radius > 0.0) {
            return Err(Error::InvalidConfig("coverage radius must be positive".into()));
        }
        if self.path_loss_exponent < 2.0 {
            return Err(Error::InvalidConfig("path-loss exponent must be >= 2".into()));
        }
        if let Placement::FixedCoordinates { aps, users } = &self.placement {
            if aps.len() != self.num_aps || users.len() != self.num_users {
                return Err(Error::InvalidConfig("fixed coordinate counts disagree with M, K".into()));
            }
        }
        Ok(())
    }
}

/// Per-link or shared scalar parameter field.
#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Scalar(f64),
    /// Indexed `[ap][user]`.
    PerLink(Vec<Vec<f64>>),
}

impl Param {
    pub fn get(&self, m: usize, k: usize) -> f64 {
        match self {
            Param::Scalar(v) => *v,
            Param::PerLink(rows) => rows[m][k],
        }
    }
}

/// Nakagami fading configuration: shape `ℳ` and spread `Ω` per link.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingConfig {
    pub shape: Param,
    pub spread: Param,
}

impl FadingConfig {
    pub fn iid(shape: f64, spread: f64) -> Self {
        FadingConfig { shape: Param::Scalar(shape), spread: Param::Scalar(spread) }
    }

    pub fn validate(&self, m: usize, k: usize) -> Result<()> {
        for i in 0..m {
            for j in 0..k {
                if !(self.shape.get(i, j) > 0.0) || !(self.spread.get(i, j) > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "Nakagami parameters must be positive at link ({i},{j})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// How pilot vectors are constructed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PilotAssignment {
    /// Rows of the identity: requires `τ_p ≥ K`, zero cross-correlation.
    Orthonormal,
    /// Random unit-norm complex Gaussian vectors (contaminated regime).
    RandomUnitNorm,
}

/// Pilot training configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotConfig {
    /// Training sequence length in samples, `τ_p ≤ τ_c`.
    pub length: usize,
    /// Coherence interval length in samples.
    pub coherence_length: usize,
    /// Per-symbol pilot power `ρ_k` in watts (shared across users).
    pub power: f64,
    pub assignment: PilotAssignment,
    /// Pilot-phase AWGN PSD `σ²_m / 2` in watts; `None` disables pilot noise
    /// (the idealized-training regime).
    pub noise_half_variance: Option<f64>,
}

/// Channel estimation mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimateMode {
    /// MMSE estimate from the received pilot vector.
    MmseFromPilots,
    /// Idealized regime: `ĝ = g` exactly (orthonormal noiseless training).
    TrueChannel,
}

/// Full scenario configuration for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub topology: TopologyConfig,
    pub fading: FadingConfig,
    pub pilot: PilotConfig,
    /// Data-phase AWGN PSD `σ̃²_m / 2` in watts, shared across APs.
    pub noise_half_variance: f64,
    /// Uplink transmit power `p_k` in watts, shared across users.
    pub user_power: f64,
    /// Power budget `P_k`.
    pub max_user_power: f64,
    pub estimate_mode: EstimateMode,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        self.fading.validate(self.topology.num_aps, self.topology.num_users)?;
        if self.pilot.length == 0 || self.pilot.length > self.pilot.coherence_length {
            return Err(Error::InvalidConfig("pilot length must satisfy 1 <= tau_p <= tau_c".into()));
        }
        if self.pilot.assignment == PilotAssignment::Orthonormal
            && self.pilot.length < self.topology.num_users
        {
            return Err(Error::InvalidConfig("orthonormal pilots need tau_p >= K".into()));
        }
        if !(self.noise_half_variance > 0.0) {
            return Err(Error::InvalidConfig("noise PSD must be positive".into()));
        }
        if self.user_power < 0.0 || self.user_power > self.max_user_power {
            return Err(Error::InvalidConfig("user power must satisfy 0 <= p <= P".into()));
        }
        Ok(())
    }
}

/// Planar geometry with precomputed AP-user distances.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub ap_positions: Vec<[f64; 2]>,
    pub user_positions: Vec<[f64; 2]>,
    /// `distances[m][k]` in meters.
    pub distances: Vec<Vec<f64>>,
}

/// Unit-norm pilot vectors, one per user, with the cross-correlation table.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotBook {
    pub length: usize,
    pub coherence_length: usize,
    /// `vectors[k]` is user k's pilot, `‖φ_k‖ = 1`.
    pub vectors: Vec<Vec<Complex64>>,
    /// Per-user pilot power `ρ_k` in watts.
    pub powers: Vec<f64>,
    /// `inner[k][l] = φ_kᴴ φ_l`.
    pub inner: Vec<Vec<Complex64>>,
}

impl PilotBook {
    pub fn new(
        length: usize,
        coherence_length: usize,
        vectors: Vec<Vec<Complex64>>,
        powers: Vec<f64>,
    ) -> Result<Self> {
        if length > coherence_length {
            return Err(Error::InvalidConfig("tau_p must not exceed tau_c".into()));
        }
        for (k, v) in vectors.iter().enumerate() {
            if v.len() != length {
                return Err(Error::ShapeMismatch(format!("pilot {k} length != tau_p")));
            }
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidConfig(format!("pilot {k} is not unit norm")));
            }
        }
        let kx = vectors.len();
        let mut inner = vec![vec![Complex64::new(0.0, 0.0); kx]; kx];
        for a in 0..kx {
            for b in 0..kx {
                inner[a][b] = vectors[a]
                    .iter()
                    .zip(&vectors[b])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
            }
        }
        Ok(PilotBook { length, coherence_length, vectors, powers, inner })
    }

    pub fn orthonormal(length: usize, num_users: usize, coherence: usize, power: f64) -> Result<Self> {
        if length < num_users {
            return Err(Error::InvalidConfig("orthonormal pilots need tau_p >= K".into()));
        }
        let vectors = (0..num_users)
            .map(|k| {
                let mut v = vec![Complex64::new(0.0, 0.0); length];
                v[k] = Complex64::new(1.0, 0.0);
                v
            })
            .collect();
        PilotBook::new(length, coherence, vectors, vec![power; num_users])
    }

    pub fn random_unit_norm(
        length: usize,
        num_users: usize,
        coherence: usize,
        power: f64,
        rng: &mut ChaCha12Rng,
    ) -> Result<Self> {
        let vectors = (0..num_users)
            .map(|_| {
                let mut v: Vec<Complex64> =
                    (0..length).map(|_| sample_cn(rng, 1.0)).collect();
                let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                v.iter_mut().for_each(|z| *z /= norm);
                v
            })
            .collect();
        PilotBook::new(length, coherence, vectors, vec![power; num_users])
    }

    /// |φ_kᴴ φ_l|²
    pub fn cross_power(&self, k: usize, l: usize) -> f64 {
        self.inner[k][l].norm_sqr()
    }
}

/// One coherence interval: fading draws, true/estimated channels and every
/// constant the SINR expressions consume.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub num_aps: usize,
    pub num_users: usize,
    pub path_loss_exponent: f64,
    /// `L[m][k]` in meters.
    pub distances: Vec<Vec<f64>>,
    /// Small-scale gains `h[m][k]`.
    pub small_scale: Vec<Vec<Complex64>>,
    /// True channels `g = L^{-κ} h`.
    pub true_channels: Vec<Vec<Complex64>>,
    /// Estimated channels `ĝ`.
    pub estimated: Vec<Vec<Complex64>>,
    /// MMSE estimation constants `ℰ[m][k]`.
    pub est_constants: Vec<Vec<f64>>,
    /// Gamma shape of `|g[m][k]|²` (the Nakagami shape `ℳ`).
    pub gain_shape: Vec<Vec<f64>>,
    /// Gamma rate of `|g[m][k]|²`: `(ℳ/Ω) L^{2κ}`.
    pub gain_rate: Vec<Vec<f64>>,
    /// Data-phase AWGN PSD `σ̃²_m / 2` per AP, watts.
    pub data_noise_half_var: Vec<f64>,
    /// Pilot-phase AWGN PSD `σ²_m / 2` per AP, watts (zero when disabled).
    pub pilot_noise_half_var: Vec<f64>,
    /// Uplink powers `p_k`, watts.
    pub user_powers: Vec<f64>,
    /// Power budgets `P_k`, watts.
    pub max_powers: Vec<f64>,
    pub pilots: PilotBook,
}

impl NetworkRealization {
    /// Effective pilot-plus-data noise PSD entering the SINR noise term for
    /// AP `m`: `(σ²_m/2) Σ_l p_l + σ̃²_m/2`.
    pub fn noise_psd_with_pilot_error(&self, m: usize) -> f64 {
        let total_power: f64 = self.user_powers.iter().sum();
        self.pilot_noise_half_var[m] * total_power + self.data_noise_half_var[m]
    }
}

/// Frozen geometry + pilot assignment; fading is redrawn per realization.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ChannelConfig,
    pub topology: Topology,
    pub pilots: PilotBook,
    seed: u64,
}

impl Scenario {
    /// Builds geometry and pilot book from `seed`. Deterministic.
    pub fn new(config: ChannelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let topology = generate_topology(&config.topology, rng::derive_seed(seed, 0))?;
        let pilots = match config.pilot.assignment {
            PilotAssignment::Orthonormal => PilotBook::orthonormal(
                config.pilot.length,
                config.topology.num_users,
                config.pilot.coherence_length,
                config.pilot.power,
            )?,
            PilotAssignment::RandomUnitNorm => {
                let mut r = rng::stream(rng::derive_seed(seed, 2), 0);
                PilotBook::random_unit_norm(
                    config.pilot.length,
                    config.topology.num_users,
                    config.pilot.coherence_length,
                    config.pilot.power,
                    &mut r,
                )?
            }
        };
        Ok(Scenario { config, topology, pilots, seed })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Draws one coherence interval. `draw` indexes an independent stream,
    /// so batches can realize intervals in parallel.
    pub fn realize(&self, draw: u64) -> NetworkRealization {
        let mut r = rng::stream(rng::derive_seed(self.seed, 1), draw);
        let m = self.config.topology.num_aps;
        let k = self.config.topology.num_users;
        let kappa = self.config.topology.path_loss_exponent;

        let small_scale = sample_fading_with(&self.config.fading, m, k, &mut r);

        let mut true_channels = vec![vec![Complex64::new(0.0, 0.0); k]; m];
        let mut gain_shape = vec![vec![0.0; k]; m];
        let mut gain_rate = vec![vec![0.0; k]; m];
        for i in 0..m {
            for j in 0..k {
                let dist = self.topology.distances[i][j];
                let path = dist.powf(-kappa);
                true_channels[i][j] = small_scale[i][j] * path;
                let shape = self.config.fading.shape.get(i, j);
                let spread = self.config.fading.spread.get(i, j);
                gain_shape[i][j] = shape;
                gain_rate[i][j] = shape / spread * dist.powf(2.0 * kappa);
            }
        }

        let pilot_noise_half_var =
            vec![self.config.pilot.noise_half_variance.unwrap_or(0.0); m];
        let data_noise_half_var = vec![self.config.noise_half_variance; m];
        let user_powers = vec![self.config.user_power; k];
        let max_powers = vec![self.config.max_user_power; k];

        let mut real = NetworkRealization {
            num_aps: m,
            num_users: k,
            path_loss_exponent: kappa,
            distances: self.topology.distances.clone(),
            small_scale,
            true_channels,
            estimated: vec![vec![Complex64::new(0.0, 0.0); k]; m],
            est_constants: vec![vec![0.0; k]; m],
            gain_shape,
            gain_rate,
            data_noise_half_var,
            pilot_noise_half_var,
            user_powers,
            max_powers,
            pilots: self.pilots.clone(),
        };

        let (estimated, est_constants) = mmse_estimate(&real, &self.pilots, &mut r);
        real.est_constants = est_constants;
        real.estimated = match self.config.estimate_mode {
            EstimateMode::MmseFromPilots => estimated,
            EstimateMode::TrueChannel => real.true_channels.clone(),
        };
        real
    }
}

/// Places APs and users and returns the geometry. Deterministic given seed;
/// uniform draws violating the minimum separation are resampled.
pub fn generate_topology(cfg: &TopologyConfig, seed: u64) -> Result<Topology> {
    cfg.validate()?;
    let (ap_positions, user_positions) = match &cfg.placement {
        Placement::FixedCoordinates { aps, users } => (aps.clone(), users.clone()),
        Placement::UniformDisc => {
            let mut r = rng::stream(seed, 0);
            let aps: Vec<[f64; 2]> =
                (0..cfg.num_aps).map(|_| disc_point(&mut r, cfg.coverage_radius)).collect();
            let mut users = Vec::with_capacity(cfg.num_users);
            for _ in 0..cfg.num_users {
                let mut tries = 0;
                let pos = loop {
                    let p = disc_point(&mut r, cfg.coverage_radius);
                    let ok = aps
                        .iter()
                        .all(|a| euclid(*a, p) >= cfg.min_distance.max(f64::MIN_POSITIVE));
                    if ok {
                        break p;
                    }
                    tries += 1;
                    if tries > 100_000 {
                        return Err(Error::InvalidConfig(
                            "cannot satisfy min_distance within the coverage disc".into(),
                        ));
                    }
                };
                users.push(pos);
            }
            (aps, users)
        }
    };
    let mut distances = vec![vec![0.0; cfg.num_users]; cfg.num_aps];
    for (m, a) in ap_positions.iter().enumerate() {
        for (k, u) in user_positions.iter().enumerate() {
            let d = euclid(*a, *u);
            if d <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "AP {m} and user {k} are coincident; distances must be positive"
                )));
            }
            distances[m][k] = d;
        }
    }
    Ok(Topology { ap_positions, user_positions, distances })
}

fn euclid(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn disc_point(r: &mut ChaCha12Rng, radius: f64) -> [f64; 2] {
    let rad = radius * r.gen::<f64>().sqrt();
    let theta = 2.0 * std::f64::consts::PI * r.gen::<f64>();
    [rad * theta.cos(), rad * theta.sin()]
}

/// Samples the small-scale fading matrix `h[m][k]` from the given seed.
/// `|h|²` is Gamma(ℳ, ℳ/Ω) in the rate parameterization; phases uniform.
pub fn sample_fading(fading: &FadingConfig, num_aps: usize, num_users: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut r = rng::stream(seed, 0);
    sample_fading_with(fading, num_aps, num_users, &mut r)
}

fn sample_fading_with(
    fading: &FadingConfig,
    num_aps: usize,
    num_users: usize,
    r: &mut ChaCha12Rng,
) -> Vec<Vec<Complex64>> {
    let mut h = vec![vec![Complex64::new(0.0, 0.0); num_users]; num_aps];
    for (m, row) in h.iter_mut().enumerate() {
        for (k, entry) in row.iter_mut().enumerate() {
            let shape = fading.shape.get(m, k);
            let rate = shape / fading.spread.get(m, k);
            let power = sample_gamma(r, shape, rate);
            let phase = 2.0 * std::f64::consts::PI * r.gen::<f64>();
            *entry = Complex64::from_polar(power.sqrt(), phase);
        }
    }
    h
}

/// Marsaglia-Tsang squeeze sampler, rate parameterization. Shapes below one
/// use the `U^{1/α}` boost on a shape `α + 1` draw.
pub fn sample_gamma(r: &mut ChaCha12Rng, shape: f64, rate: f64) -> f64 {
    debug_assert!(shape > 0.0 && rate > 0.0);
    if shape < 1.0 {
        let boost: f64 = r.gen::<f64>().powf(1.0 / shape);
        return sample_gamma(r, shape + 1.0, rate) * boost;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = standard_normal(r);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v3 = v * v * v;
        let u: f64 = r.gen();
        if u < 1.0 - 0.0331 * x.powi(4)
            || u.ln() < 0.5 * x * x + d * (1.0 - v3 + v3.ln())
        {
            return d * v3 / rate;
        }
    }
}

/// Standard normal via the Marsaglia polar method.
pub fn standard_normal(r: &mut ChaCha12Rng) -> f64 {
    loop {
        let u = 2.0 * r.gen::<f64>() - 1.0;
        let v = 2.0 * r.gen::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

/// Circularly-symmetric complex Gaussian with `E|z|² = variance`.
pub fn sample_cn(r: &mut ChaCha12Rng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    Complex64::new(s * standard_normal(r), s * standard_normal(r))
}

/// MMSE channel estimation from one received pilot block per AP.
///
/// Per-AP observation `y_p,m = Σ_l √(τ_p ρ_l) g_ml φ_l + η_m`; the estimate
/// is `ĝ_mk = ℰ_mk φ_kᴴ y_p,m`, which splits into the scaled true gain, the
/// pilot-contamination cross terms weighted by `φ_kᴴ φ_l`, and the projected
/// noise. Returns both the estimates and the constants `ℰ_mk`.
pub fn mmse_estimate(
    real: &NetworkRealization,
    pilots: &PilotBook,
    noise_rng: &mut ChaCha12Rng,
) -> (Vec<Vec<Complex64>>, Vec<Vec<f64>>) {
    let m_count = real.num_aps;
    let k_count = real.num_users;
    let tau_p = pilots.length as f64;
    let kappa = real.path_loss_exponent;

    let mut estimates = vec![vec![Complex64::new(0.0, 0.0); k_count]; m_count];
    let mut constants = vec![vec![0.0; k_count]; m_count];

    for m in 0..m_count {
        // Received pilot vector at AP m.
        let mut y = vec![Complex64::new(0.0, 0.0); pilots.length];
        for l in 0..k_count {
            let amp = (tau_p * pilots.powers[l]).sqrt();
            let g = real.true_channels[m][l];
            for (t, yt) in y.iter_mut().enumerate() {
                *yt += amp * g * pilots.vectors[l][t];
            }
        }
        if real.pilot_noise_half_var[m] > 0.0 {
            for yt in y.iter_mut() {
                *yt += sample_cn(noise_rng, real.pilot_noise_half_var[m]);
            }
        }
        for k in 0..k_count {
            // ℰ_mk = √(τ_p ρ_k) L_mk^{-κ} / (Σ_{l≠k} ρ_k L_ml^{-κ} |φ_kᴴφ_l|² + 1)
            let mut denom = 1.0;
            for l in 0..k_count {
                if l != k {
                    denom += pilots.powers[k]
                        * real.distances[m][l].powf(-kappa)
                        * pilots.cross_power(k, l);
                }
            }
            let e_mk = (tau_p * pilots.powers[k]).sqrt() * real.distances[m][k].powf(-kappa) / denom;
            constants[m][k] = e_mk;
            let proj: Complex64 = pilots.vectors[k]
                .iter()
                .zip(&y)
                .map(|(p, yt)| p.conj() * yt)
                .sum();
            estimates[m][k] = e_mk * proj;
        }
    }
    (estimates, constants)
}

// ---------------------------------------------------------------------------
// Columnar text import/export
// ---------------------------------------------------------------------------

const EXPORT_HEADER: &str = "m,k,L,Re(g),Im(g),Re(ghat),Im(ghat)";

/// Serializes the channel matrices of a realization as columnar text.
pub fn export_channels(real: &NetworkRealization) -> String {
    let mut out = String::new();
    out.push_str(EXPORT_HEADER);
    out.push('\n');
    for m in 0..real.num_aps {
        for k in 0..real.num_users {
            let g = real.true_channels[m][k];
            let gh = real.estimated[m][k];
            out.push_str(&format!(
                "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                m, k, real.distances[m][k], g.re, g.im, gh.re, gh.im
            ));
        }
    }
    out
}

/// Channel matrices recovered from the columnar text format.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportedChannels {
    pub num_aps: usize,
    pub num_users: usize,
    pub distances: Vec<Vec<f64>>,
    pub true_channels: Vec<Vec<Complex64>>,
    pub estimated: Vec<Vec<Complex64>>,
}

pub fn import_channels(text: &str) -> Result<ImportedChannels> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == EXPORT_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "expected header '{EXPORT_HEADER}', got {other:?}"
            )))
        }
    }
    let mut rows: Vec<(usize, usize, f64, Complex64, Complex64)> = Vec::new();
    let mut max_m = 0usize;
    let mut max_k = 0usize;
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 7 {
            return Err(Error::Parse(format!("line {}: expected 7 fields", ln + 2)));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", ln + 2)))
        };
        let m: usize = parts[0]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 2)))?;
        let k: usize = parts[1]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 2)))?;
        let dist = parse_f(parts[2])?;
        let g = Complex64::new(parse_f(parts[3])?, parse_f(parts[4])?);
        let gh = Complex64::new(parse_f(parts[5])?, parse_f(parts[6])?);
        max_m = max_m.max(m + 1);
        max_k = max_k.max(k + 1);
        rows.push((m, k, dist, g, gh));
    }
    let mut out = ImportedChannels {
        num_aps: max_m,
        num_users: max_k,
        distances: vec![vec![0.0; max_k]; max_m],
        true_channels: vec![vec![Complex64::new(0.0, 0.0); max_k]; max_m],
        estimated: vec![vec![Complex64::new(0.0, 0.0); max_k]; max_m],
    };
    for (m, k, d, g, gh) in rows {
        out.distances[m][k] = d;
        out.true_channels[m][k] = g;
        out.estimated[m][k] = gh;
    }
    Ok(out)
}
