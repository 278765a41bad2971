//! Infinite-blocklength references: outage probability and outage capacity
//! with weighted-CSI packet sizing, and the ergodic capacity of relaying.

use crate::error::Result;
use crate::fading::{outage_mrc, outage_rayleigh, FadingDraw};
use crate::fbl::{capacity_snr, shannon_c};
use crate::montecarlo::{mc_mean, McEstimate};
use crate::params::{LinkGains, SystemParams};
use crate::relay::compose_error;

/// Rate, outage probability and outage capacity at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutagePoint {
    /// Per-hop rate, bits per channel use.
    pub rate: f64,
    pub p_out: f64,
    /// Delivered bits per channel use, `(rate/2)·(1 − p_out)`.
    pub outage_capacity: f64,
}

/// Probability that a period fails when both hops transmit at rate `r` and
/// blocks are infinitely long.
pub fn outage_prob_relay(r: f64, gains: &LinkGains, params: &SystemParams) -> f64 {
    let p2 = outage_rayleigh(params.snr(gains.g2), r);
    let pmrc = outage_mrc(params.snr(gains.g1), params.snr(gains.g3), r);
    compose_error(p2, pmrc)
}

/// Outage probability of the direct link alone at rate `r`.
pub fn outage_prob_direct(r: f64, gains: &LinkGains, params: &SystemParams) -> f64 {
    outage_rayleigh(params.snr(gains.g1), r)
}

/// Relaying with the packet sized by the Shannon capacity of the weighted
/// average CSI, `r = C(η·min{g₂, g₁ + g₃})`.
pub fn outage_capacity_relay(eta: f64, gains: &LinkGains, params: &SystemParams) -> OutagePoint {
    let rate = shannon_c(eta * gains.bottleneck(), params);
    let p_out = outage_prob_relay(rate, gains, params);
    OutagePoint {
        rate,
        p_out,
        outage_capacity: 0.5 * rate * (1.0 - p_out),
    }
}

/// Direct transmission sized by the weighted direct-link CSI.
pub fn outage_capacity_direct(eta: f64, gains: &LinkGains, params: &SystemParams) -> OutagePoint {
    let rate = shannon_c(eta * gains.g1, params);
    let p_out = outage_prob_direct(rate, gains, params);
    OutagePoint {
        rate,
        p_out,
        outage_capacity: rate * (1.0 - p_out),
    }
}

/// Relaying capacity of one draw: half the capacity of the weaker hop.
pub fn relay_capacity_instant(draw: &FadingDraw, gains: &LinkGains, params: &SystemParams) -> f64 {
    let c2 = capacity_snr(params.snr(draw.z2 * gains.g2));
    let cmrc = capacity_snr(params.snr(draw.z1 * gains.g1 + draw.z3 * gains.g3));
    0.5 * c2.min(cmrc)
}

/// Ergodic capacity of relaying, `E[min{C(z₂g₂), C(z₁g₁ + z₃g₃)}]/2`.
pub fn ergodic_capacity_relay(
    gains: &LinkGains,
    params: &SystemParams,
    n_samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    mc_mean(n_samples, seed, |d, _| relay_capacity_instant(d, gains, params))
}

/// Ergodic capacity of the direct link, `E[C(z₁g₁)]`.
pub fn ergodic_capacity_direct(
    gains: &LinkGains,
    params: &SystemParams,
    n_samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    mc_mean(n_samples, seed, |d, _| capacity_snr(params.snr(d.z1 * gains.g1)))
}
