//! Normal approximation of the maximal coding rate over a complex AWGN
//! channel, and the Gaussian tail function it is built on.
//!
//! Rates are in bits per channel use, dispersions in squared bits per
//! channel use. The gain-based functions take a channel power gain and turn
//! it into an SNR through [`SystemParams::snr`]; the `*_snr` variants work on
//! the SNR directly.

use std::f64::consts::{FRAC_1_SQRT_2, LOG2_E};

use crate::error::{Error, Result};
use crate::params::SystemParams;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Linear signal-to-noise ratio.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Snr(f64);

impl Snr {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma.is_finite() && gamma >= 0.0 {
            Ok(Snr(gamma))
        } else {
            Err(Error::domain("snr", gamma, "[0, inf)"))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// A coding rate together with the blocklength and error probability it was
/// computed for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub rate: f64,
    pub blocklength: u64,
    pub error: f64,
    /// The normal approximation went negative and the rate was clamped to zero.
    pub clamped: bool,
}

/// Gaussian tail probability `Q(w) = P(N(0,1) > w)`.
pub fn q_func(w: f64) -> f64 {
    0.5 * libm::erfc(w * FRAC_1_SQRT_2)
}

/// Standard normal density.
#[inline]
fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Inverse of [`q_func`].
///
/// Starts from the rational approximation of Abramowitz & Stegun 26.2.23
/// (absolute error below 4.5e-4) and polishes it with Halley steps on the
/// erfc-based tail function until the step is below one part in 1e15.
pub fn q_inv(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain("eps", eps, "(0, 1)"));
    }
    if eps == 0.5 {
        return Ok(0.0);
    }
    // Work in the upper tail and mirror.
    let (p, sign) = if eps < 0.5 { (eps, 1.0) } else { (1.0 - eps, -1.0) };
    let t = (-2.0 * p.ln()).sqrt();
    let mut x = t
        - (2.515_517 + 0.802_853 * t + 0.010_328 * t * t)
            / (1.0 + 1.432_788 * t + 0.189_269 * t * t + 0.001_308 * t * t * t);
    for _ in 0..8 {
        let pdf = normal_pdf(x);
        if pdf == 0.0 {
            break;
        }
        // Newton correction for Q(x) = p, then Halley's curvature term (Q'' = x·φ).
        let u = (q_func(x) - p) / pdf;
        let step = u / (1.0 - 0.5 * x * u);
        x += step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    Ok(sign * x)
}

/// `log2(1 + snr)`.
#[inline]
pub fn capacity_snr(snr: f64) -> f64 {
    snr.ln_1p() * LOG2_E
}

/// Shannon capacity `C(gain) = log2(1 + gain·p_tx/σ²)`.
pub fn shannon_c(gain: f64, params: &SystemParams) -> f64 {
    capacity_snr(params.snr(gain))
}

/// Dispersion of the real AWGN channel, `(γ/2)(γ+2)/(1+γ)² · (log2 e)²`.
pub fn dispersion_real(gamma: Snr) -> f64 {
    let g = gamma.0;
    if g.is_infinite() {
        return 0.5 * LOG2_E * LOG2_E;
    }
    let onep = 1.0 + g;
    (g / 2.0) * (g + 2.0) / (onep * onep) * LOG2_E * LOG2_E
}

/// Dispersion of the complex AWGN channel, `(1 − (1+γ)⁻²)(log2 e)²`; twice
/// the real one.
pub fn dispersion_complex(gamma: Snr) -> f64 {
    2.0 * dispersion_real(gamma)
}

#[inline]
fn dispersion_complex_raw(snr: f64) -> f64 {
    let onep = 1.0 + snr;
    snr * (snr + 2.0) / (onep * onep) * LOG2_E * LOG2_E
}

/// Normal-approximation rate at a given SNR, before clamping.
#[inline]
pub fn raw_rate_snr(snr: f64, q_inv_eps: f64, m: f64) -> f64 {
    capacity_snr(snr) - (dispersion_complex_raw(snr) / m).sqrt() * q_inv_eps
}

/// Achievable rate `R(γ, ε, m) = C − √(V/m)·Q⁻¹(ε)` at a given SNR.
pub fn achievable_rate_snr(snr: f64, eps: f64, m: u64) -> Result<RatePoint> {
    if m == 0 {
        return Err(Error::domain("m", 0.0, "[1, inf)"));
    }
    let qi = q_inv(eps)?;
    let raw = raw_rate_snr(snr, qi, m as f64);
    Ok(RatePoint {
        rate: raw.max(0.0),
        blocklength: m,
        error: eps,
        clamped: raw < 0.0,
    })
}

/// Achievable rate for a channel power gain.
pub fn achievable_rate(gain: f64, eps: f64, m: u64, params: &SystemParams) -> Result<RatePoint> {
    achievable_rate_snr(params.snr(gain), eps, m)
}

/// Argument of the Q-function in the block error probability,
/// `(C(γ) − r)/√(V(γ)/m)`. Infinite when the dispersion vanishes.
#[inline]
pub fn error_argument_snr(snr: f64, r: f64, m: f64) -> f64 {
    let v = dispersion_complex_raw(snr);
    let num = capacity_snr(snr) - r;
    if v > 0.0 {
        num / (v / m).sqrt()
    } else if r > 0.0 {
        f64::NEG_INFINITY
    } else {
        0.0
    }
}

/// Block error probability at a given SNR.
///
/// At zero SNR the dispersion vanishes and the limit is used: 1 for `r > 0`,
/// 1/2 for `r = 0`.
#[inline]
pub fn block_error_snr(snr: f64, r: f64, m: f64) -> f64 {
    q_func(error_argument_snr(snr, r, m))
}

/// Block error probability `Q((C(gain) − r)/√(V/m))`.
pub fn block_error(gain: f64, r: f64, m: u64, params: &SystemParams) -> f64 {
    block_error_snr(params.snr(gain), r, m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit(m: u64) -> SystemParams {
        SystemParams::unit_snr(m, 1e-3, 0.2).unwrap()
    }

    // Reference tail values computed with 40-digit erfc.
    #[allow(clippy::excessive_precision)]
    const Q_TABLE: &[(f64, f64)] = &[
        (0.5, 0.308_537_538_725_986_9),
        (1.0, 0.158_655_253_931_457_05),
        (2.0, 0.022_750_131_948_179_207),
        (3.0, 0.001_349_898_031_630_094_5),
        (5.0, 2.866_515_718_791_939e-7),
        (6.0, 9.865_876_450_376_981e-10),
        (8.0, 6.220_960_574_271_784e-16),
        (20.0, 2.753_624_118_606_233_7e-89),
        (-3.0, 0.998_650_101_968_369_9),
    ];

    #[test]
    fn q_func_matches_reference() {
        assert_eq!(q_func(0.0), 0.5);
        for &(x, q) in Q_TABLE {
            assert_relative_eq!(q_func(x), q, max_relative = 1e-13);
        }
        assert!(q_func(8.0) < 1e-15);
        assert!((q_func(1.281_551_565_5) - 0.1).abs() < 1e-7);
    }

    #[test]
    fn q_inv_matches_reference() {
        assert_eq!(q_inv(0.5).unwrap(), 0.0);
        for (p, x) in [
            (0.1, 1.281_551_565_544_600_4),
            (1e-3, 3.090_232_306_167_813_5),
            (1e-7, 5.199_337_582_192_817),
            (1e-12, 7.034_483_825_301_132),
            (0.999, -3.090_232_306_167_813),
        ] {
            assert_relative_eq!(q_inv(p).unwrap(), x, max_relative = 1e-12);
        }
        assert!((q_inv(q_func(2.3)).unwrap() - 2.3).abs() < 1e-10);
    }

    #[test]
    fn q_inv_rejects_out_of_domain() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(q_inv(p), Err(Error::Domain { .. })), "{p}");
        }
    }

    #[test]
    fn capacity_values() {
        let p = unit(500);
        assert_eq!(shannon_c(0.0, &p), 0.0);
        assert_relative_eq!(shannon_c(1.0, &p), 1.0, max_relative = 1e-15);
        assert_relative_eq!(shannon_c(3.0, &p), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn dispersion_values() {
        let s = |g| Snr::new(g).unwrap();
        assert_eq!(dispersion_complex(s(0.0)), 0.0);
        assert_eq!(dispersion_real(s(0.0)), 0.0);
        assert!((dispersion_complex(s(1.0)) - 1.561_021).abs() < 1e-5);
        assert!((dispersion_complex(s(1e9)) - 2.081_368).abs() < 1e-5);
        assert_eq!(dispersion_real(s(1.0)), dispersion_complex(s(1.0)) / 2.0);
        let l2 = LOG2_E * LOG2_E;
        assert_relative_eq!(dispersion_real(s(10.0)), 0.9917 * l2 / 2.0, max_relative = 1e-4);
        assert!(Snr::new(-1.0).is_err());
    }

    #[test]
    fn achievable_rate_examples() {
        let p = unit(500);
        let g = 1.0;
        let half = achievable_rate(g, 0.5, 500, &p).unwrap();
        assert_eq!(half.rate, shannon_c(g, &p));
        let big_m = achievable_rate(g, 1e-3, 1_000_000_000_000, &p).unwrap();
        assert!((big_m.rate - 1.0).abs() < 1e-5);
        let r = achievable_rate(g, 1e-3, 500, &p).unwrap();
        assert!((r.rate - 0.8273).abs() < 1e-3, "{}", r.rate);
        assert!(!r.clamped);
        assert!(achievable_rate(g, 1.0, 500, &p).is_err());
    }

    #[test]
    fn achievable_rate_clamps_infeasible_corner() {
        let p = unit(100);
        let r = achievable_rate(1e-3, 1e-9, 100, &p).unwrap();
        assert_eq!(r.rate, 0.0);
        assert!(r.clamped);
    }

    #[test]
    fn block_error_examples() {
        let p = unit(500);
        let g = 2.5;
        assert_relative_eq!(block_error(g, shannon_c(g, &p), 500, &p), 0.5, max_relative = 1e-15);
        let e0 = block_error(g, 0.0, 500, &p);
        assert!(e0 < 0.5);
        assert!(block_error(g, 0.0, 5000, &p) < e0);
        let r = achievable_rate(g, 1e-2, 500, &p).unwrap().rate;
        assert!((block_error(g, r, 500, &p) - 1e-2).abs() < 1e-10);
    }

    #[test]
    fn block_error_zero_gain_limits() {
        let p = unit(500);
        assert_eq!(block_error(0.0, 0.3, 500, &p), 1.0);
        assert_eq!(block_error(0.0, 0.0, 500, &p), 0.5);
    }
}
