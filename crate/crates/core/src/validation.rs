//! Randomized battery comparing quadrature against Monte Carlo.
//!
//! Each point draws a blocklength, three average SNRs and a coding rate near
//! the weighted bottleneck capacity, so that error probabilities fall in a
//! range where both methods have something to say.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fading::{expected_error_backhaul, expected_error_mrc, MEDIAN};
use crate::fbl::capacity_snr;
use crate::link_layer::service_stats;
use crate::montecarlo::{
    mc_bl_throughput, mc_expected_error_backhaul, mc_expected_error_mrc, mc_expected_overall_error, mc_service_stats,
};
use crate::params::{LinkGains, SystemParams};
use crate::relay::expected_overall_error;

/// One randomized parameter point. Gains are SNRs (unit power-to-noise ratio).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationPoint {
    pub r: f64,
    pub m: u64,
    pub gains: LinkGains,
}

impl ValidationPoint {
    pub fn params(&self) -> SystemParams {
        SystemParams::unit_snr(self.m, 1e-3, MEDIAN).expect("valid constants")
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// `count` points with `m ∈ [100, 2000]`, backhaul and relaying SNRs in
/// `[1, 1000]`, direct SNR in `[0.01, 10]`, and `r` between 0.2 and 1.2
/// times the capacity at the median of the bottleneck gain.
pub fn random_points(seed: u64, count: usize) -> Vec<ValidationPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let m = rng.random_range(100..=2000u64);
            let g2 = log_uniform(&mut rng, 1.0, 1e3);
            let g3 = log_uniform(&mut rng, 1.0, 1e3);
            let g1 = log_uniform(&mut rng, 1e-2, 10.0);
            let gains = LinkGains::new(g1, g2, g3).expect("positive gains");
            let c = capacity_snr(MEDIAN * gains.bottleneck());
            let r = c * rng.random_range(0.2..1.2);
            ValidationPoint { r, m, gains }
        })
        .collect()
}

/// Quantities checked at every point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    BackhaulError,
    MrcError,
    OverallError,
    BlThroughput,
    ServiceMean,
    ServiceVariance,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::BackhaulError,
        Quantity::MrcError,
        Quantity::OverallError,
        Quantity::BlThroughput,
        Quantity::ServiceMean,
        Quantity::ServiceVariance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::BackhaulError => "backhaul_error",
            Quantity::MrcError => "mrc_error",
            Quantity::OverallError => "overall_error",
            Quantity::BlThroughput => "bl_throughput",
            Quantity::ServiceMean => "service_mean",
            Quantity::ServiceVariance => "service_variance",
        }
    }
}

/// Outcome of one quadrature-versus-sampling comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub quantity: Quantity,
    pub analytic: f64,
    pub mc_mean: f64,
    pub mc_std_err: f64,
}

impl Check {
    /// Deviation in standard errors; zero when both agree exactly.
    pub fn z_score(&self) -> f64 {
        let d = (self.analytic - self.mc_mean).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.mc_std_err
        }
    }

    pub fn passes(&self, k: f64) -> bool {
        self.z_score() <= k
    }
}

/// Runs every quantity at one point with `n` samples. The sampling streams
/// of different quantities are derived from `seed` and never overlap.
pub fn check_point(p: &ValidationPoint, n: u64, seed: u64) -> Result<Vec<Check>> {
    let params = p.params();
    let (r, m, g) = (p.r, p.m, &p.gains);
    let mut out = Vec::with_capacity(Quantity::ALL.len());
    let sub = |k: u64| seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k);

    let e2 = expected_error_backhaul(r, m, g, &params)?;
    let mc = mc_expected_error_backhaul(r, m, g, &params, n, sub(0))?;
    out.push(Check {
        quantity: Quantity::BackhaulError,
        analytic: e2,
        mc_mean: mc.mean,
        mc_std_err: mc.std_err,
    });

    let emrc = expected_error_mrc(r, m, g, &params)?;
    let mc = mc_expected_error_mrc(r, m, g, &params, n, sub(1))?;
    out.push(Check {
        quantity: Quantity::MrcError,
        analytic: emrc,
        mc_mean: mc.mean,
        mc_std_err: mc.std_err,
    });

    let eps = expected_overall_error(r, m, g, &params)?;
    let mc = mc_expected_overall_error(r, m, g, &params, n, sub(2))?;
    out.push(Check {
        quantity: Quantity::OverallError,
        analytic: eps,
        mc_mean: mc.mean,
        mc_std_err: mc.std_err,
    });

    let mc = mc_bl_throughput(r, m, g, &params, n, sub(3))?;
    out.push(Check {
        quantity: Quantity::BlThroughput,
        analytic: 0.5 * r * (1.0 - eps),
        mc_mean: mc.mean,
        mc_std_err: mc.std_err,
    });

    let stats = service_stats(r, m, eps)?;
    let mc = mc_service_stats(r, m, g, &params, n, sub(4))?;
    out.push(Check {
        quantity: Quantity::ServiceMean,
        analytic: stats.mean,
        mc_mean: mc.mean.mean,
        mc_std_err: mc.mean.std_err,
    });
    out.push(Check {
        quantity: Quantity::ServiceVariance,
        analytic: stats.variance,
        mc_mean: mc.variance,
        mc_std_err: mc.variance_std_err,
    });
    Ok(out)
}
