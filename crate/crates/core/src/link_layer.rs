//! Link-layer view of relaying: Bernoulli service increments, their
//! central-limit effective capacity, and the maximum sustainable data rate
//! (MSDR) under a delay / violation-probability requirement.
//!
//! A transmission period is `2m` channel uses long and serves either `r·m`
//! bits or nothing. The delay budget `d` is counted in channel uses.

use crate::error::{Error, Result};

/// Delay budget `d` (channel uses) and tolerated violation probability `P_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QosPair {
    pub d: f64,
    pub p_d: f64,
}

impl QosPair {
    pub fn new(d: f64, p_d: f64) -> Result<Self> {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::invalid("qos_d", format!("{d} is not a positive delay")));
        }
        if !(p_d > 0.0 && p_d < 1.0) {
            return Err(Error::invalid("qos_p_d", format!("{p_d} is not in (0, 1)")));
        }
        Ok(QosPair { d, p_d })
    }

    /// Exponent factor `φ = 4m·ln(P_d)/d` weighting the variance term.
    pub fn phi(&self, m: u64) -> f64 {
        4.0 * m as f64 * self.p_d.ln() / self.d
    }

    /// Whether one `2m`-long period fits into the delay budget.
    pub fn admits(&self, m: u64) -> bool {
        2.0 * m as f64 <= self.d
    }
}

/// Mean and variance of the per-period service increment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceStats {
    /// Bits per period.
    pub mean: f64,
    /// Squared bits per period.
    pub variance: f64,
    /// Error probability of a period.
    pub eps_bar: f64,
}

/// Statistics of `s = r·m·B` with `B ~ Bernoulli(1 − eps_bar)`.
pub fn service_stats(r: f64, m: u64, eps_bar: f64) -> Result<ServiceStats> {
    if !(0.0..=1.0).contains(&eps_bar) {
        return Err(Error::domain("eps_bar", eps_bar, "[0, 1]"));
    }
    let rm = r * m as f64;
    Ok(ServiceStats {
        mean: rm * (1.0 - eps_bar),
        variance: rm * rm * eps_bar * (1.0 - eps_bar),
        eps_bar,
    })
}

/// Effective capacity at QoS exponent `theta`, `E[s] − (θ/2)·Var[s]`
/// (bits per period).
pub fn effective_capacity_clt(stats: &ServiceStats, theta: f64) -> Result<f64> {
    if !(theta >= 0.0) {
        return Err(Error::domain("theta", theta, "[0, inf)"));
    }
    Ok(stats.mean - 0.5 * theta * stats.variance)
}

/// MSDR value with its feasibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Msdr {
    /// Bits per channel use; 0 when infeasible.
    pub value: f64,
    /// False when the requirement cannot be met: the period is longer than
    /// the delay budget or the variance term dominates the mean.
    pub feasible: bool,
}

impl Msdr {
    const INFEASIBLE: Msdr = Msdr {
        value: 0.0,
        feasible: false,
    };
}

/// MSDR from service statistics of a `2m`-long period.
pub fn msdr_from_stats(mean: f64, variance: f64, m: u64, qos: &QosPair) -> Msdr {
    if !qos.admits(m) {
        return Msdr::INFEASIBLE;
    }
    let disc = mean * mean + qos.phi(m) * variance;
    if disc < 0.0 {
        return Msdr::INFEASIBLE;
    }
    let four_m = 4.0 * m as f64;
    Msdr {
        value: (mean + disc.sqrt()) / four_m,
        feasible: true,
    }
}

/// MSDR of relaying at per-hop rate `r` with period error `eps_bar`:
/// `r(1−ε)/4 + (r/4)·√((1−ε)² + φ·ε(1−ε))`.
pub fn msdr(r: f64, m: u64, eps_bar: f64, qos: &QosPair) -> Msdr {
    if !qos.admits(m) {
        return Msdr::INFEASIBLE;
    }
    let ok = 1.0 - eps_bar;
    let disc = ok * ok + qos.phi(m) * eps_bar * ok;
    if disc < 0.0 {
        return Msdr::INFEASIBLE;
    }
    Msdr {
        value: 0.25 * r * ok + 0.25 * r * disc.sqrt(),
        feasible: true,
    }
}

/// MSDR of direct transmission at rate `r_direct` over `2m` channel uses:
/// the same period length and the same `φ`, with payload `2m·r_direct`.
pub fn msdr_direct(r_direct: f64, m: u64, eps_direct: f64, qos: &QosPair) -> Msdr {
    msdr(2.0 * r_direct, m, eps_direct, qos)
}

/// Second term of the split `R_MS = C_BL/2 + R*`:
/// `R* = (r/4)·√(1 + (φ−2)ε + (1−φ)ε²)`.
pub fn r_star(r: f64, eps_bar: f64, phi: f64) -> f64 {
    let q = 1.0 + (phi - 2.0) * eps_bar + (1.0 - phi) * eps_bar * eps_bar;
    0.25 * r * q.max(0.0).sqrt()
}

/// `|R_MS − (C_BL/2 + R*)|` for a feasible triple.
pub fn msdr_decomposition_check(r: f64, m: u64, eps_bar: f64, qos: &QosPair) -> f64 {
    let c_bl = 0.5 * r * (1.0 - eps_bar);
    let rs = r_star(r, eps_bar, qos.phi(m));
    (msdr(r, m, eps_bar, qos).value - (0.5 * c_bl + rs)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qos() -> QosPair {
        QosPair::new(1e4, 1e-2).unwrap()
    }

    #[test]
    fn service_stats_examples() {
        let s = service_stats(2.0, 50, 0.0).unwrap();
        assert_eq!((s.mean, s.variance), (100.0, 0.0));
        let s = service_stats(2.0, 50, 0.5).unwrap();
        assert_eq!((s.mean, s.variance), (50.0, 2500.0));
        let s = service_stats(2.0, 50, 1.0).unwrap();
        assert_eq!((s.mean, s.variance), (0.0, 0.0));
        assert!(service_stats(2.0, 50, 1.5).is_err());
    }

    #[test]
    fn effective_capacity_examples() {
        let s = ServiceStats {
            mean: 50.0,
            variance: 2500.0,
            eps_bar: 0.5,
        };
        assert_eq!(effective_capacity_clt(&s, 0.0).unwrap(), 50.0);
        assert!((effective_capacity_clt(&s, 0.01).unwrap() - 37.5).abs() < 1e-12);
        let s0 = ServiceStats { variance: 0.0, ..s };
        assert_eq!(effective_capacity_clt(&s0, 3.0).unwrap(), 50.0);
    }

    #[test]
    fn phi_at_default_qos() {
        assert!((qos().phi(500) - (-0.921_034_037_197_618_3)).abs() < 1e-12);
    }

    #[test]
    fn msdr_special_cases() {
        let q = qos();
        assert_eq!(msdr(3.0, 500, 0.0, &q).value, 1.5);
        let loose = QosPair { d: 1e4, p_d: 1.0 };
        let eps = 0.13;
        assert_eq!(msdr(3.0, 500, eps, &loose).value, 0.5 * 3.0 * (1.0 - eps));
        assert!(msdr(3.0, 500, 0.2, &q).value < 0.5 * 3.0 * 0.8);
    }

    #[test]
    fn msdr_zero_when_period_exceeds_budget() {
        let q = qos();
        let v = msdr(3.0, 5001, 0.01, &q);
        assert_eq!(
            v,
            Msdr {
                value: 0.0,
                feasible: false
            }
        );
        assert!(msdr(3.0, 5000, 0.01, &q).feasible);
    }

    #[test]
    fn msdr_infeasible_discriminant() {
        // φ = 4·1000·ln(1e-9)/1e4 ≈ −8.3; ε = 0.5 makes the discriminant negative.
        let q = QosPair::new(1e4, 1e-9).unwrap();
        let v = msdr(3.0, 1000, 0.5, &q);
        assert!(!v.feasible);
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn msdr_from_stats_matches_closed_form() {
        let q = qos();
        let (r, m, eps) = (4.2, 500, 0.07);
        let s = service_stats(r, m, eps).unwrap();
        let a = msdr_from_stats(s.mean, s.variance, m, &q).value;
        let b = msdr(r, m, eps, &q).value;
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn decomposition_special_cases() {
        let q = qos();
        assert_eq!(msdr_decomposition_check(3.0, 500, 0.0, &q), 0.0);
        let loose = QosPair { d: 1e4, p_d: 1.0 };
        assert!(msdr_decomposition_check(3.0, 500, 0.3, &loose) < 1e-15);
    }
}
