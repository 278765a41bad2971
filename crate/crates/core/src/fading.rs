//! Rayleigh fading: unit-mean exponential power gains and the
//! fading-averaged block error probabilities of a single link and of the
//! MRC-combined link.

use std::collections::HashMap;
use std::f64::consts::{LN_2, LOG2_E};
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::fbl::{block_error_snr, error_argument_snr};
use crate::params::{LinkGains, SystemParams};
use crate::quad::{integrate_adaptive, AdaptiveConfig, GaussLaguerre, GaussLegendre};

/// Median of the unit-mean exponential distribution, `ln 2`.
pub const MEDIAN: f64 = LN_2;

/// Upper truncation point of the fading domain; the tail mass `e^{-40}` is
/// below every tolerance used here.
pub const Z_MAX: f64 = 40.0;

/// One realization of the fading gains of the direct, backhaul and relaying
/// links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingDraw {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
}

impl FadingDraw {
    pub fn new(z1: f64, z2: f64, z3: f64) -> Result<Self> {
        for (name, z) in [("z1", z1), ("z2", z2), ("z3", z3)] {
            if !(z.is_finite() && z >= 0.0) {
                return Err(Error::domain(name, z, "[0, inf)"));
            }
        }
        Ok(FadingDraw { z1, z2, z3 })
    }

    /// All gains equal to their mean.
    pub fn unit() -> Self {
        FadingDraw {
            z1: 1.0,
            z2: 1.0,
            z3: 1.0,
        }
    }
}

/// Density of the unit-mean exponential, `e^{-z}`.
pub fn exp_pdf(z: f64) -> Result<f64> {
    if z >= 0.0 {
        Ok((-z).exp())
    } else {
        Err(Error::domain("z", z, "[0, inf)"))
    }
}

/// Numerical settings of the fading integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Nodes of the Gauss–Laguerre fast path.
    pub laguerre_nodes: usize,
    /// The fast path is taken only when the error transition is at least this
    /// wide in units of the fading gain.
    pub laguerre_min_width: f64,
    pub adaptive: AdaptiveConfig,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            laguerre_nodes: 64,
            laguerre_min_width: 0.5,
            adaptive: AdaptiveConfig::default(),
        }
    }
}

impl QuadratureConfig {
    /// Same configuration with every node count doubled.
    pub fn doubled(self) -> Self {
        QuadratureConfig {
            laguerre_nodes: 2 * self.laguerre_nodes,
            adaptive: AdaptiveConfig {
                nodes_per_tile: 2 * self.adaptive.nodes_per_tile,
                ..self.adaptive
            },
            ..self
        }
    }
}

fn laguerre_rule(n: usize) -> &'static GaussLaguerre {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static GaussLaguerre>>> = OnceLock::new();
    let mut map = CACHE.get_or_init(Default::default).lock().expect("rule cache poisoned");
    map.entry(n)
        .or_insert_with(|| Box::leak(Box::new(GaussLaguerre::new(n))))
}

fn legendre_rule(n: usize) -> &'static GaussLegendre {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static GaussLegendre>>> = OnceLock::new();
    let mut map = CACHE.get_or_init(Default::default).lock().expect("rule cache poisoned");
    map.entry(n)
        .or_insert_with(|| Box::leak(Box::new(GaussLegendre::new(n))))
}

/// Argument `w(z₂)` of the Q-function for the backhaul link, normalized so
/// that `Q(w(z₂))` is exactly the block error probability at gain
/// `z₂·g₂`.
pub fn integrand_arg_backhaul(z2: f64, r: f64, m: u64, gains: &LinkGains, params: &SystemParams) -> f64 {
    error_argument_snr(params.snr(z2 * gains.g2), r, m as f64)
}

/// Argument `w(z₁, z₃)` for the MRC-combined link.
pub fn integrand_arg_mrc(z1: f64, z3: f64, r: f64, m: u64, gains: &LinkGains, params: &SystemParams) -> f64 {
    error_argument_snr(params.snr(z1 * gains.g1 + z3 * gains.g3), r, m as f64)
}

/// Location and width of the error transition in SNR units: the SNR at which
/// capacity equals `r`, and the SNR change that moves the Q-argument by one.
fn transition(r: f64, m: f64) -> (f64, f64) {
    let threshold = r.exp2() - 1.0;
    let v = {
        let onep = 1.0 + threshold;
        threshold * (threshold + 2.0) / (onep * onep) * LOG2_E * LOG2_E
    };
    let sigma_c = (v / m).sqrt();
    // dC/dγ = 1/((1+γ) ln 2) at the threshold, so one unit of the argument
    // spans σ_C·2^r·ln 2 in SNR. Near r = 0 the dispersion term takes over.
    let width = (sigma_c * r.exp2() * LN_2).max(2.0 / m);
    (threshold, width)
}

fn breakpoints_around(center: f64, width: f64, out: &mut Vec<f64>) {
    out.push(center);
    for k in [1.0, 3.0, 10.0, 30.0] {
        out.push(center - k * width);
        out.push(center + k * width);
    }
}

/// Gauss–Laguerre evaluation of the Rayleigh-averaged block error; accurate
/// only when the error transition is wide compared with the node spacing.
pub fn laguerre_expectation(mean_snr: f64, r: f64, m: u64, nodes: usize) -> f64 {
    let mf = m as f64;
    laguerre_rule(nodes).integrate(|z| block_error_snr(z * mean_snr, r, mf))
}

/// `E_z[P(z·γ̄, r, m)]` for a Rayleigh link with mean SNR `mean_snr`.
pub fn expected_error_rayleigh(mean_snr: f64, r: f64, m: u64, cfg: &QuadratureConfig) -> Result<f64> {
    check_rate(r)?;
    let mf = m as f64;
    if mean_snr <= 0.0 {
        return Ok(block_error_snr(0.0, r, mf));
    }
    let (threshold, width) = transition(r, mf);
    let z_star = threshold / mean_snr;
    let z_width = width / mean_snr;
    let integrand = |z: f64| block_error_snr(z * mean_snr, r, mf);

    if z_width >= cfg.laguerre_min_width {
        let v = laguerre_expectation(mean_snr, r, m, cfg.laguerre_nodes);
        let check = laguerre_expectation(mean_snr, r, m, cfg.laguerre_nodes / 2);
        if (v - check).abs() <= 1e3 * cfg.adaptive.tolerance {
            return Ok(v.clamp(0.0, 1.0));
        }
    }

    let mut cuts = Vec::with_capacity(16);
    breakpoints_around(z_star, z_width, &mut cuts);
    cuts.extend([1.0, 5.0, 10.0, 20.0]);
    let rule = legendre_rule(cfg.adaptive.nodes_per_tile);
    let res = integrate_adaptive(rule, 0.0, Z_MAX, &cuts, &cfg.adaptive, |z| (-z).exp() * integrand(z))?;
    Ok(res.value.clamp(0.0, 1.0))
}

/// Density of `S = a·Z₁ + b·Z₃` with independent unit exponentials, i.e. the
/// hypoexponential law with means `a` and `b`.
///
/// Written as `e^{-s/hi}·s·h(c·s)/(a·b)` with `c = 1/lo − 1/hi` and
/// `h(x) = (1 − e^{-x})/x`, which is finite and accurate for every pair of
/// means, including the equal-means (Erlang-2) limit.
pub fn mrc_gain_pdf(s: f64, a: f64, b: f64) -> f64 {
    if s < 0.0 {
        return 0.0;
    }
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if lo <= 0.0 {
        return if hi > 0.0 { (-s / hi).exp() / hi } else { 0.0 };
    }
    let c = 1.0 / lo - 1.0 / hi;
    let x = c * s;
    let h = if x < 1e-8 { 1.0 - 0.5 * x } else { -(-x).exp_m1() / x };
    (-s / hi).exp() * s * h / (lo * hi)
}

/// Relative difference of the two means below which the Erlang-2 form is used
/// for the combined-gain CDF.
pub const ERLANG_GUARD: f64 = 1e-9;

/// `P(a·Z₁ + b·Z₃ ≤ t)`.
pub fn mrc_gain_cdf(t: f64, a: f64, b: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if hi <= 0.0 {
        return 1.0;
    }
    if lo <= 0.0 {
        return -(-t / hi).exp_m1();
    }
    if (hi - lo) <= ERLANG_GUARD * hi {
        let g = 0.5 * (lo + hi);
        return 1.0 - (1.0 + t / g) * (-t / g).exp();
    }
    1.0 - (hi * (-t / hi).exp() - lo * (-t / lo).exp()) / (hi - lo)
}

/// `E[P(S, r, m)]` for the MRC-combined SNR `S = γ̄₁Z₁ + γ̄₃Z₃`.
///
/// The double integral over `(z₁, z₃)` is reduced to a single integral
/// against the exact density of the combined SNR.
pub fn expected_error_mrc_snr(mean_snr_1: f64, mean_snr_3: f64, r: f64, m: u64, cfg: &QuadratureConfig) -> Result<f64> {
    check_rate(r)?;
    let (lo, hi) = if mean_snr_1 <= mean_snr_3 {
        (mean_snr_1.max(0.0), mean_snr_3.max(0.0))
    } else {
        (mean_snr_3.max(0.0), mean_snr_1.max(0.0))
    };
    if hi <= 0.0 {
        return Ok(block_error_snr(0.0, r, m as f64));
    }
    if lo <= 0.0 {
        return expected_error_rayleigh(hi, r, m, cfg);
    }
    let mf = m as f64;
    let (threshold, width) = transition(r, mf);
    let mut cuts = Vec::with_capacity(24);
    breakpoints_around(threshold, width, &mut cuts);
    for k in [0.1, 1.0, 5.0] {
        cuts.push(k * lo);
    }
    for k in [1.0, 5.0, 10.0, 20.0] {
        cuts.push(k * hi);
    }
    let rule = legendre_rule(cfg.adaptive.nodes_per_tile);
    let res = integrate_adaptive(rule, 0.0, Z_MAX * hi, &cuts, &cfg.adaptive, |s| {
        mrc_gain_pdf(s, lo, hi) * block_error_snr(s, r, mf)
    })?;
    Ok(res.value.clamp(0.0, 1.0))
}

fn check_rate(r: f64) -> Result<()> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain("r", r, "[0, inf)"))
    }
}

/// Fading-averaged block error probability of the backhaul link.
pub fn expected_error_backhaul(r: f64, m: u64, gains: &LinkGains, params: &SystemParams) -> Result<f64> {
    expected_error_rayleigh(params.snr(gains.g2), r, m, &QuadratureConfig::default())
}

/// Fading-averaged block error probability of the MRC-combined link.
pub fn expected_error_mrc(r: f64, m: u64, gains: &LinkGains, params: &SystemParams) -> Result<f64> {
    expected_error_mrc_snr(
        params.snr(gains.g1),
        params.snr(gains.g3),
        r,
        m,
        &QuadratureConfig::default(),
    )
}

/// Infinite-blocklength limit of [`expected_error_rayleigh`]: the outage
/// probability `1 − exp(−(2^r − 1)/γ̄)`.
pub fn outage_rayleigh(mean_snr: f64, r: f64) -> f64 {
    if mean_snr <= 0.0 {
        return if r > 0.0 { 1.0 } else { 0.0 };
    }
    -(-(r.exp2() - 1.0) / mean_snr).exp_m1()
}

/// Infinite-blocklength limit of [`expected_error_mrc_snr`].
pub fn outage_mrc(mean_snr_1: f64, mean_snr_3: f64, r: f64) -> f64 {
    mrc_gain_cdf(r.exp2() - 1.0, mean_snr_1, mean_snr_3)
}
