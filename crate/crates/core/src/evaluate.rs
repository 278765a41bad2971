//! Evaluation of every scheme and metric at one point of a parameter sweep.
//!
//! A sweep varies the per-hop coding rate, the weight factor or the per-hop
//! blocklength of a base scenario. Schemes that do not depend on the swept
//! variable (perfect CSI, ergodic capacity) are computed once per distinct
//! blocklength and cached.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::baselines::{ergodic_capacity_relay, outage_capacity_direct, outage_capacity_relay, outage_prob_relay};
use crate::error::{Error, Result};
use crate::fading::MEDIAN;
use crate::link_layer::{msdr, msdr_direct, msdr_from_stats, QosPair};
use crate::montecarlo::McEstimate;
use crate::params::{LinkGains, SystemParams, MIN_BLOCKLENGTH};
use crate::relay::{
    bl_throughput_direct, expected_overall_error, perfect_csi_stats, select_rate_avg_csi, DirectMode, PerfectCsiStats,
};
use crate::scenario::Scenario;

/// Lower end of the weight-factor domain used by sweeps and optimization.
pub const ETA_MIN: f64 = 0.01;
/// Upper end of the weight-factor domain, the median of the unit exponential.
pub const ETA_MAX: f64 = MEDIAN;

/// Swept quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variable {
    /// Per-hop coding rate, bits per channel use.
    CodingRate,
    /// Weight factor.
    Eta,
    /// Per-hop blocklength, channel uses.
    Blocklength,
}

impl Variable {
    pub const ALL: [Variable; 3] = [Variable::CodingRate, Variable::Eta, Variable::Blocklength];

    pub fn name(self) -> &'static str {
        match self {
            Variable::CodingRate => "coding_rate",
            Variable::Eta => "eta",
            Variable::Blocklength => "blocklength",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Variable::CodingRate => "bits/cu",
            Variable::Eta => "1",
            Variable::Blocklength => "cu",
        }
    }
}

/// Schemes a sweep can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Relaying, rate from weighted average CSI.
    RelayAvg,
    /// Relaying, rate optimized per fading draw (Monte Carlo).
    RelayPerfect,
    /// Direct link at blocklength `2m` and rate `r/2`.
    DirectMatched,
    /// Direct link at blocklength `2m` with its own weighted-CSI rate.
    DirectWeighted,
    /// Ergodic capacity of relaying (Monte Carlo).
    ShannonErgodic,
    /// Outage capacity of relaying with Shannon-sized packets.
    Outage,
    /// Outage capacity of the direct link with Shannon-sized packets.
    OutageDirect,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 7] = [
        SchemeKind::RelayAvg,
        SchemeKind::RelayPerfect,
        SchemeKind::DirectMatched,
        SchemeKind::DirectWeighted,
        SchemeKind::ShannonErgodic,
        SchemeKind::Outage,
        SchemeKind::OutageDirect,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::RelayAvg => "relay_avg",
            SchemeKind::RelayPerfect => "relay_perfect",
            SchemeKind::DirectMatched => "direct_matched",
            SchemeKind::DirectWeighted => "direct_weighted",
            SchemeKind::ShannonErgodic => "shannon_ergodic",
            SchemeKind::Outage => "outage",
            SchemeKind::OutageDirect => "outage_direct",
        }
    }

    /// Whether the scheme estimates by Monte Carlo and so reports a standard error.
    pub fn is_stochastic(self) -> bool {
        matches!(self, SchemeKind::RelayPerfect | SchemeKind::ShannonErgodic)
    }
}

/// Reported quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    BlThroughput,
    Msdr,
    ExpectedError,
    CodingRate,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::BlThroughput,
        Metric::Msdr,
        Metric::ExpectedError,
        Metric::CodingRate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::BlThroughput => "bl_throughput",
            Metric::Msdr => "msdr",
            Metric::ExpectedError => "expected_error",
            Metric::CodingRate => "coding_rate",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Metric::BlThroughput | Metric::Msdr | Metric::CodingRate => "bits/cu",
            Metric::ExpectedError => "prob",
        }
    }
}

macro_rules! from_name {
    ($t:ty, $what:literal) => {
        impl std::str::FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                <$t>::ALL
                    .iter()
                    .copied()
                    .find(|v| v.name() == s)
                    .ok_or_else(|| Error::invalid($what, format!("unknown value '{s}'")))
            }
        }
    };
}
from_name!(Variable, "variable");
from_name!(SchemeKind, "scheme");
from_name!(Metric, "metric");

/// Value of every metric for one scheme at one point. Metrics that do not
/// apply to the scheme are `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointValues {
    pub bl_throughput: Option<f64>,
    pub msdr: Option<f64>,
    pub expected_error: Option<f64>,
    pub coding_rate: Option<f64>,
    /// Standard error of `bl_throughput` for Monte Carlo schemes.
    pub std_err: Option<f64>,
    /// The MSDR requirement could not be met.
    pub msdr_infeasible: bool,
    /// The rate rule produced a negative rate that was clamped to zero.
    pub rate_clamped: bool,
}

impl PointValues {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::BlThroughput => self.bl_throughput,
            Metric::Msdr => self.msdr,
            Metric::ExpectedError => self.expected_error,
            Metric::CodingRate => self.coding_rate,
        }
    }
}

/// Sample budget and seed of the Monte Carlo schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            samples: 1_000_000,
            seed: 42,
        }
    }
}

/// Evaluates schemes on a fixed scenario.
pub struct Evaluator {
    scenario: Scenario,
    gains: LinkGains,
    params: SystemParams,
    mc: McConfig,
    perfect: Mutex<HashMap<u64, PerfectCsiStats>>,
    ergodic: OnceLock<McEstimate>,
}

impl Evaluator {
    pub fn new(scenario: &Scenario, mc: McConfig) -> Result<Self> {
        let (gains, params) = scenario.build()?;
        Ok(Evaluator {
            scenario: *scenario,
            gains,
            params,
            mc,
            perfect: Mutex::new(HashMap::new()),
            ergodic: OnceLock::new(),
        })
    }

    pub fn gains(&self) -> &LinkGains {
        &self.gains
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn qos(&self) -> &QosPair {
        &self.scenario.qos
    }

    /// Checks that `x` is a valid value of `var`.
    pub fn check(var: Variable, x: f64) -> Result<()> {
        let ok = match var {
            Variable::CodingRate => x.is_finite() && x >= 0.0,
            Variable::Eta => x > 0.0 && x <= ETA_MAX,
            Variable::Blocklength => x.fract() == 0.0 && x >= MIN_BLOCKLENGTH as f64 && x <= 1e12,
        };
        if ok {
            Ok(())
        } else {
            let domain = match var {
                Variable::CodingRate => "a non-negative rate",
                Variable::Eta => "in (0, ln 2]",
                Variable::Blocklength => "an integer of at least 100",
            };
            Err(Error::invalid(
                "grid",
                format!("{} value {x} is not {domain}", var.name()),
            ))
        }
    }

    /// Parameters at a sweep point; the coding rate is returned separately
    /// when it is the swept variable.
    fn at(&self, var: Variable, x: f64) -> Result<(SystemParams, Option<f64>)> {
        Self::check(var, x)?;
        Ok(match var {
            Variable::CodingRate => (self.params, Some(x)),
            Variable::Eta => (self.params.with_eta(x), None),
            Variable::Blocklength => (self.params.with_blocklength(x as u64), None),
        })
    }

    fn perfect(&self, m: u64) -> Result<PerfectCsiStats> {
        if let Some(s) = self.perfect.lock().expect("cache poisoned").get(&m) {
            return Ok(*s);
        }
        let s = perfect_csi_stats(m, &self.gains, &self.params, self.mc.samples, self.mc.seed)?;
        self.perfect.lock().expect("cache poisoned").insert(m, s);
        Ok(s)
    }

    fn ergodic(&self) -> Result<McEstimate> {
        if let Some(e) = self.ergodic.get() {
            return Ok(*e);
        }
        let e = ergodic_capacity_relay(&self.gains, &self.params, self.mc.samples, self.mc.seed)?;
        Ok(*self.ergodic.get_or_init(|| e))
    }

    /// Relay coding rate at a sweep point.
    fn relay_rate(&self, params: &SystemParams, fixed: Option<f64>) -> Result<(f64, bool)> {
        match fixed {
            Some(r) => Ok((r, false)),
            None => select_rate_avg_csi(&self.gains, params).map(|p| (p.rate, p.clamped)),
        }
    }

    pub fn eval(&self, var: Variable, x: f64, scheme: SchemeKind) -> Result<PointValues> {
        let (params, fixed_rate) = self.at(var, x)?;
        let m = params.blocklength;
        let qos = &self.scenario.qos;
        let g = &self.gains;
        Ok(match scheme {
            SchemeKind::RelayAvg => {
                let (r, clamped) = self.relay_rate(&params, fixed_rate)?;
                let eps = expected_overall_error(r, m, g, &params)?;
                let ms = msdr(r, m, eps, qos);
                PointValues {
                    bl_throughput: Some(0.5 * r * (1.0 - eps)),
                    msdr: Some(ms.value),
                    expected_error: Some(eps),
                    coding_rate: Some(r),
                    msdr_infeasible: !ms.feasible,
                    rate_clamped: clamped,
                    ..Default::default()
                }
            }
            SchemeKind::DirectMatched | SchemeKind::DirectWeighted => {
                let mode = if scheme == SchemeKind::DirectMatched {
                    let (r, _) = self.relay_rate(&params, fixed_rate)?;
                    DirectMode::MatchedRate { relay_rate: r }
                } else {
                    if var == Variable::CodingRate {
                        return Err(Error::invalid(
                            "schemes",
                            "direct_weighted chooses its own rate and cannot follow a coding_rate sweep",
                        ));
                    }
                    DirectMode::WeightedCsi
                };
                let res = bl_throughput_direct(2 * m, g, &params, mode)?;
                let ms = msdr_direct(res.coding_rate, m, res.expected_error, qos);
                PointValues {
                    bl_throughput: Some(res.bl_throughput),
                    msdr: Some(ms.value),
                    expected_error: Some(res.expected_error),
                    coding_rate: Some(res.coding_rate),
                    msdr_infeasible: !ms.feasible,
                    rate_clamped: res.clamped,
                    ..Default::default()
                }
            }
            SchemeKind::RelayPerfect => {
                let s = self.perfect(m)?;
                let ms = msdr_from_stats(s.service_mean, s.service_variance, m, qos);
                PointValues {
                    bl_throughput: Some(s.throughput.mean),
                    msdr: Some(ms.value),
                    expected_error: Some(s.error.mean),
                    coding_rate: Some(s.rate.mean),
                    std_err: Some(s.throughput.std_err),
                    msdr_infeasible: !ms.feasible,
                    ..Default::default()
                }
            }
            SchemeKind::ShannonErgodic => {
                let e = self.ergodic()?;
                PointValues {
                    bl_throughput: Some(e.mean),
                    std_err: Some(e.std_err),
                    ..Default::default()
                }
            }
            SchemeKind::Outage => {
                let p = match fixed_rate {
                    Some(r) => {
                        let p_out = outage_prob_relay(r, g, &params);
                        crate::baselines::OutagePoint {
                            rate: r,
                            p_out,
                            outage_capacity: 0.5 * r * (1.0 - p_out),
                        }
                    }
                    None => outage_capacity_relay(params.eta, g, &params),
                };
                PointValues {
                    bl_throughput: Some(p.outage_capacity),
                    expected_error: Some(p.p_out),
                    coding_rate: Some(p.rate),
                    ..Default::default()
                }
            }
            SchemeKind::OutageDirect => {
                if var == Variable::CodingRate {
                    return Err(Error::invalid(
                        "schemes",
                        "outage_direct chooses its own rate and cannot follow a coding_rate sweep",
                    ));
                }
                let p = outage_capacity_direct(params.eta, g, &params);
                PointValues {
                    bl_throughput: Some(p.outage_capacity),
                    expected_error: Some(p.p_out),
                    coding_rate: Some(p.rate),
                    ..Default::default()
                }
            }
        })
    }
}
