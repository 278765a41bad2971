//! Two-hop decode-and-forward relaying with rate selection from weighted
//! average CSI, and the schemes it is compared against.
//!
//! In every period the source broadcasts a block of `m` channel uses at rate
//! `r`; the relay decodes and re-encodes it over another `m` channel uses and
//! the destination combines both copies by MRC. One payload of `r·m` bits
//! therefore occupies `2m` channel uses.

use crate::error::Result;
use crate::fading::{expected_error_mrc_snr, expected_error_rayleigh, FadingDraw, QuadratureConfig};
use crate::fbl::{achievable_rate, block_error_snr, RatePoint};
use crate::montecarlo::{draw_fading, run_batched, McEstimate, Merge, Moments};
use crate::optimize::{maximize_rate_perfect_csi, OptFlag};
use crate::params::{LinkGains, SystemParams};

/// Transmission schemes evaluated by the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    RelayAvgCsi,
    RelayPerfectCsi,
    DirectAvgCsi,
    DirectMatched,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::RelayAvgCsi => "relay_avg_csi",
            Scheme::RelayPerfectCsi => "relay_perfect_csi",
            Scheme::DirectAvgCsi => "direct_avg_csi",
            Scheme::DirectMatched => "direct_matched",
        }
    }
}

/// Operating point of an analytic scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeResult {
    /// Coding rate of each transmitted block.
    pub coding_rate: f64,
    /// Blocklength of each transmitted block.
    pub blocklength: u64,
    pub expected_error: f64,
    /// Correctly delivered bits per channel use.
    pub bl_throughput: f64,
    pub scheme: Scheme,
    /// The rate rule fell outside the normal approximation and was clamped to 0.
    pub clamped: bool,
}

impl SchemeResult {
    /// Delivered bits per channel use if every block were decoded.
    pub fn equivalent_rate(&self) -> f64 {
        match self.scheme {
            Scheme::RelayAvgCsi | Scheme::RelayPerfectCsi => 0.5 * self.coding_rate,
            Scheme::DirectAvgCsi | Scheme::DirectMatched => self.coding_rate,
        }
    }
}

/// Coding rate chosen from the weighted average CSI,
/// `R(η·min{g₂, g₁ + g₃}, ε°, m)`.
pub fn select_rate_avg_csi(gains: &LinkGains, params: &SystemParams) -> Result<RatePoint> {
    achievable_rate(
        params.eta * gains.bottleneck(),
        params.eps_nominal,
        params.blocklength,
        params,
    )
}

/// Overall error of a period from its hop errors: the relay fails, or the
/// relay succeeds and the combined link fails.
#[inline]
pub fn compose_error(eps2: f64, eps_mrc: f64) -> f64 {
    eps2 + (1.0 - eps2) * eps_mrc
}

/// Overall error probability of a period with known fading.
pub fn overall_error_instant(draw: &FadingDraw, r: f64, m: u64, gains: &LinkGains, params: &SystemParams) -> f64 {
    let mf = m as f64;
    let e2 = block_error_snr(params.snr(draw.z2 * gains.g2), r, mf);
    let emrc = block_error_snr(params.snr(draw.z1 * gains.g1 + draw.z3 * gains.g3), r, mf);
    compose_error(e2, emrc)
}

/// Fading-averaged overall error, `E[ε₂] + (1 − E[ε₂])·E[ε_MRC]`.
pub fn expected_overall_error(r: f64, m: u64, gains: &LinkGains, params: &SystemParams) -> Result<f64> {
    expected_overall_error_with(r, m, gains, params, &QuadratureConfig::default())
}

pub fn expected_overall_error_with(
    r: f64,
    m: u64,
    gains: &LinkGains,
    params: &SystemParams,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let e2 = expected_error_rayleigh(params.snr(gains.g2), r, m, cfg)?;
    let emrc = expected_error_mrc_snr(params.snr(gains.g1), params.snr(gains.g3), r, m, cfg)?;
    Ok(compose_error(e2, emrc))
}

/// Average correctly delivered bits per channel use of relaying at rate `r`.
pub fn bl_throughput_relay(r: f64, m: u64, gains: &LinkGains, params: &SystemParams) -> Result<f64> {
    Ok(0.5 * r * (1.0 - expected_overall_error(r, m, gains, params)?))
}

/// Relaying with the rate chosen from weighted average CSI at `params.eta`.
pub fn relay_avg_csi(gains: &LinkGains, params: &SystemParams) -> Result<SchemeResult> {
    let rate = select_rate_avg_csi(gains, params)?;
    let m = params.blocklength;
    let err = expected_overall_error(rate.rate, m, gains, params)?;
    Ok(SchemeResult {
        coding_rate: rate.rate,
        blocklength: m,
        expected_error: err,
        bl_throughput: 0.5 * rate.rate * (1.0 - err),
        scheme: Scheme::RelayAvgCsi,
        clamped: rate.clamped,
    })
}

/// Rate rule of direct transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirectMode {
    /// Transmit at the relay's equivalent rate, half its per-hop rate.
    MatchedRate { relay_rate: f64 },
    /// Apply the weighted-CSI rule to the direct link itself.
    WeightedCsi,
}

/// Direct transmission over the source-destination link with blocklength
/// `m_direct` (twice the per-hop blocklength for a fair comparison).
pub fn bl_throughput_direct(
    m_direct: u64,
    gains: &LinkGains,
    params: &SystemParams,
    mode: DirectMode,
) -> Result<SchemeResult> {
    let (rate, clamped, scheme) = match mode {
        DirectMode::MatchedRate { relay_rate } => (0.5 * relay_rate, false, Scheme::DirectMatched),
        DirectMode::WeightedCsi => {
            let p = achievable_rate(params.eta * gains.g1, params.eps_nominal, m_direct, params)?;
            (p.rate, p.clamped, Scheme::DirectAvgCsi)
        }
    };
    let err = expected_error_rayleigh(params.snr(gains.g1), rate, m_direct, &QuadratureConfig::default())?;
    Ok(SchemeResult {
        coding_rate: rate,
        blocklength: m_direct,
        expected_error: err,
        bl_throughput: rate * (1.0 - err),
        scheme,
        clamped,
    })
}

/// Convergence tolerance of the per-draw rate search, bits per channel use.
pub const PERFECT_CSI_TOL: f64 = 1e-5;

/// Monte Carlo estimate of relaying throughput when the rate is optimized
/// for every fading draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerfectCsiEstimate {
    pub throughput: McEstimate,
    /// Draws whose inner search did not report convergence.
    pub optimizer_failures: u64,
}

/// Statistics of relaying with the per-draw throughput-optimal rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerfectCsiStats {
    /// Bits per channel use.
    pub throughput: McEstimate,
    /// Overall error probability at the chosen rate.
    pub error: McEstimate,
    /// Chosen per-hop rate.
    pub rate: McEstimate,
    /// Mean service increment per `2m` period, bits.
    pub service_mean: f64,
    /// Variance of the service increment, squared bits.
    pub service_variance: f64,
    pub optimizer_failures: u64,
}

#[derive(Default)]
struct PerfectAcc {
    throughput: Moments,
    error: Moments,
    rate: Moments,
    r2_success: Moments,
    failures: u64,
}

impl Merge for PerfectAcc {
    fn merge(&mut self, o: Self) {
        self.throughput.merge(o.throughput);
        self.error.merge(o.error);
        self.rate.merge(o.rate);
        self.r2_success.merge(o.r2_success);
        self.failures += o.failures;
    }
}

pub fn perfect_csi_stats(
    m: u64,
    gains: &LinkGains,
    params: &SystemParams,
    n_samples: u64,
    seed: u64,
) -> Result<PerfectCsiStats> {
    if n_samples == 0 {
        return Err(crate::Error::invalid("n_samples", "at least one sample is required"));
    }
    let acc: PerfectAcc = run_batched(n_samples, seed, |rng, acc: &mut PerfectAcc| {
        let draw = draw_fading(rng);
        let opt = maximize_rate_perfect_csi(&draw, m, gains, params, PERFECT_CSI_TOL);
        if opt.flag != OptFlag::Converged {
            acc.failures += 1;
        }
        let r = opt.argmax;
        let eps = if r > 0.0 {
            overall_error_instant(&draw, r, m, gains, params)
        } else {
            0.0
        };
        acc.throughput.push(opt.value);
        acc.error.push(eps);
        acc.rate.push(r);
        acc.r2_success.push(r * r * (1.0 - eps));
    });
    if acc.failures > 0 {
        log::warn!(
            "perfect-CSI rate search did not converge on {} of {n_samples} draws",
            acc.failures
        );
    }
    let mf = m as f64;
    // s = r·m·B with B ~ Bernoulli(1 − ε) given the draw, and r(1 − ε) = 2·throughput.
    let service_mean = 2.0 * mf * acc.throughput.mean();
    let service_variance = (mf * mf * acc.r2_success.mean() - service_mean * service_mean).max(0.0);
    Ok(PerfectCsiStats {
        throughput: acc.throughput.estimate(seed),
        error: acc.error.estimate(seed),
        rate: acc.rate.estimate(seed),
        service_mean,
        service_variance,
        optimizer_failures: acc.failures,
    })
}

pub fn bl_throughput_perfect_csi(
    m: u64,
    gains: &LinkGains,
    params: &SystemParams,
    n_samples: u64,
    seed: u64,
) -> Result<PerfectCsiEstimate> {
    let s = perfect_csi_stats(m, gains, params, n_samples, seed)?;
    Ok(PerfectCsiEstimate {
        throughput: s.throughput,
        optimizer_failures: s.optimizer_failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::MEDIAN;
    use crate::fbl::{block_error, shannon_c};

    fn unit(eta: f64) -> SystemParams {
        SystemParams::unit_snr(500, 1e-3, eta).unwrap()
    }

    #[test]
    fn composition_examples() {
        assert_eq!(compose_error(0.0, 0.0), 0.0);
        assert_eq!(compose_error(1.0, 0.3), 1.0);
        assert!((compose_error(0.1, 0.2) - 0.28).abs() < 1e-15);
    }

    #[test]
    fn composition_bounds() {
        for i in 0..=20 {
            for j in 0..=20 {
                let (a, b) = (i as f64 / 20.0, j as f64 / 20.0);
                let e = compose_error(a, b);
                assert!(e >= a.max(b) - 1e-15 && e <= (a + b).min(1.0) + 1e-15);
            }
        }
    }

    #[test]
    fn rate_increases_with_eta() {
        let gains = LinkGains::new(0.5, 100.0, 100.0).unwrap();
        let a = select_rate_avg_csi(&gains, &unit(0.1)).unwrap().rate;
        let b = select_rate_avg_csi(&gains, &unit(0.2)).unwrap().rate;
        assert!(b > a);
    }

    #[test]
    fn rate_uses_backhaul_when_it_is_the_bottleneck() {
        let gains = LinkGains::new(50.0, 10.0, 50.0).unwrap();
        let p = unit(0.2);
        let r = select_rate_avg_csi(&gains, &p).unwrap().rate;
        let single = achievable_rate(0.2 * 10.0, 1e-3, 500, &p).unwrap().rate;
        assert!((r - single).abs() < 1e-12);
    }

    #[test]
    fn rate_at_unit_bottleneck_snr() {
        let gains = LinkGains::new(1.0, 5.0, 4.0).unwrap();
        let r = select_rate_avg_csi(&gains, &unit(0.2)).unwrap().rate;
        assert!((r - 0.8273).abs() < 1e-3, "{r}");
    }

    #[test]
    fn instant_error_matches_hop_errors() {
        let gains = LinkGains::new(0.3, 8.0, 6.0).unwrap();
        let p = unit(0.2);
        let d = FadingDraw::new(0.4, 1.3, 0.7).unwrap();
        let e2 = block_error(1.3 * 8.0, 2.0, 500, &p);
        let em = block_error(0.4 * 0.3 + 0.7 * 6.0, 2.0, 500, &p);
        assert_eq!(overall_error_instant(&d, 2.0, 500, &gains, &p), compose_error(e2, em));
    }

    #[test]
    fn zero_rate_large_m_has_no_error() {
        let gains = LinkGains::new(0.3, 8.0, 6.0).unwrap();
        let e = expected_overall_error(0.0, 100_000, &gains, &unit(0.2)).unwrap();
        assert!(e < 1e-3, "{e}");
    }

    #[test]
    fn throughput_halves_the_rate() {
        let gains = LinkGains::new(1e9, 1e9, 1e9).unwrap();
        let p = unit(0.2);
        let t = bl_throughput_relay(1.0, 500, &gains, &p).unwrap();
        assert!((t - 0.5).abs() < 1e-7, "{t}");
    }

    #[test]
    fn relay_scheme_is_consistent() {
        let gains = LinkGains::new(0.9, 900.0, 900.0).unwrap();
        let p = unit(0.15);
        let s = relay_avg_csi(&gains, &p).unwrap();
        assert_eq!(s.bl_throughput, s.equivalent_rate() * (1.0 - s.expected_error));
        let direct = bl_throughput_direct(
            1000,
            &gains,
            &p,
            DirectMode::MatchedRate {
                relay_rate: s.coding_rate,
            },
        )
        .unwrap();
        assert_eq!(direct.coding_rate, s.coding_rate / 2.0);
        assert!(direct.bl_throughput < s.bl_throughput);
    }

    #[test]
    fn direct_weighted_rate_rule() {
        let gains = LinkGains::new(2.0, 900.0, 900.0).unwrap();
        let p = unit(MEDIAN);
        let s = bl_throughput_direct(1000, &gains, &p, DirectMode::WeightedCsi).unwrap();
        let expect = achievable_rate(MEDIAN * 2.0, 1e-3, 1000, &p).unwrap().rate;
        assert_eq!(s.coding_rate, expect);
        assert!(s.coding_rate < shannon_c(MEDIAN * 2.0, &p));
    }

    #[test]
    fn perfect_csi_is_deterministic() {
        let gains = LinkGains::new(0.9, 900.0, 900.0).unwrap();
        let p = unit(0.15);
        let a = bl_throughput_perfect_csi(500, &gains, &p, 20_000, 5).unwrap();
        let b = bl_throughput_perfect_csi(500, &gains, &p, 20_000, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.optimizer_failures, 0);
    }
}
