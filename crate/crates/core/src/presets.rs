//! Reference parameter sets and unit conversions.
//!
//! The default simulation parameters: AWGN PSD -169 dBm/Hz, path-loss
//! exponent 2, Nakagami (ℳ, Ω) = (1, 1), pilot length τ_p = K, pilot power
//! 100 mW, SIC sensitivity 1 dBm. Two deployment radii are provided: 564 m
//! corresponds to a 1 km² coverage disc, while 18 m reproduces the dense
//! deployment the reference experiments were run at (their text states both
//! "radius 18 m" and "1 km²", which are mutually inconsistent; both are kept
//! as presets).

use crate::channel::{
    ChannelConfig, EstimateMode, FadingConfig, PilotAssignment, PilotConfig, TopologyConfig,
};

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Watts to dBm.
pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// AWGN PSD of -169 dBm/Hz expressed as the per-sample noise half-variance
/// `σ²/2` in watts.
pub fn default_noise_half_variance() -> f64 {
    dbm_to_watts(-169.0)
}

/// Default SIC receiver sensitivity `P_s` = 1 dBm, in watts.
pub fn default_sic_sensitivity() -> f64 {
    dbm_to_watts(1.0)
}

/// Dense-deployment disc radius (meters) used by the reference experiments.
pub const DENSE_RADIUS_M: f64 = 18.0;
/// Radius of a 1 km² disc (meters).
pub const SQKM_RADIUS_M: f64 = 564.189_583_547_756_3;

/// Baseline channel configuration: uniform disc, i.i.d. Rayleigh-equivalent
/// Nakagami(1, 1) fading, orthonormal pilots of length K with pilot-phase
/// noise enabled, MMSE estimation.
pub fn default_config(num_aps: usize, num_users: usize, radius: f64, user_power_w: f64) -> ChannelConfig {
    let noise = default_noise_half_variance();
    ChannelConfig {
        topology: TopologyConfig::uniform(num_aps, num_users, radius, 2.0),
        fading: FadingConfig::iid(1.0, 1.0),
        pilot: PilotConfig {
            length: num_users,
            coherence_length: 10 * num_users.max(20),
            power: 0.1,
            assignment: PilotAssignment::Orthonormal,
            noise_half_variance: Some(noise),
        },
        noise_half_variance: noise,
        user_power: user_power_w,
        max_user_power: user_power_w.max(1.0),
        estimate_mode: EstimateMode::MmseFromPilots,
    }
}

/// Idealized-training variant: orthonormal noiseless pilots and `ĝ = g`,
/// the regime the reference dynamic-network experiments run in.
pub fn idealized_config(num_aps: usize, num_users: usize, radius: f64, user_power_w: f64) -> ChannelConfig {
    let mut cfg = default_config(num_aps, num_users, radius, user_power_w);
    cfg.pilot.noise_half_variance = None;
    cfg.estimate_mode = EstimateMode::TrueChannel;
    cfg
}
