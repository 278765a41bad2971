//! System-wide parameters shared by every scheme.

use crate::error::{Error, Result};
use crate::fading::MEDIAN;

/// Smallest per-hop blocklength for which the normal approximation is used.
pub const MIN_BLOCKLENGTH: u64 = 100;

/// Physical-layer parameters of the relaying system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Per-hop blocklength `m` in channel uses.
    pub blocklength: u64,
    /// Transmit power of source and relay, linear (W).
    pub p_tx: f64,
    /// Noise power, linear (W).
    pub noise: f64,
    /// Nominal error target used by the rate rule.
    pub eps_nominal: f64,
    /// Weight factor applied to the average gains, in `(0, ln 2]`.
    pub eta: f64,
}

impl SystemParams {
    pub fn new(blocklength: u64, p_tx: f64, noise: f64, eps_nominal: f64, eta: f64) -> Result<Self> {
        let params = SystemParams {
            blocklength,
            p_tx,
            noise,
            eps_nominal,
            eta,
        };
        params.validate()?;
        Ok(params)
    }

    /// Unit transmit-power-to-noise ratio, so that channel gains are read directly as SNRs.
    pub fn unit_snr(blocklength: u64, eps_nominal: f64, eta: f64) -> Result<Self> {
        Self::new(blocklength, 1.0, 1.0, eps_nominal, eta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocklength < MIN_BLOCKLENGTH {
            return Err(Error::invalid(
                "m",
                format!("blocklength {} is below {MIN_BLOCKLENGTH}", self.blocklength),
            ));
        }
        if !(self.p_tx.is_finite() && self.p_tx > 0.0) {
            return Err(Error::invalid("p_tx", format!("{} is not a positive power", self.p_tx)));
        }
        if !(self.noise.is_finite() && self.noise > 0.0) {
            return Err(Error::invalid(
                "noise",
                format!("{} is not a positive power", self.noise),
            ));
        }
        if !(self.eps_nominal > 0.0 && self.eps_nominal < 1.0) {
            return Err(Error::invalid(
                "eps_nominal",
                format!("{} is not in (0, 1)", self.eps_nominal),
            ));
        }
        if !(self.eta > 0.0 && self.eta <= MEDIAN) {
            return Err(Error::invalid("eta", format!("{} is not in (0, ln 2]", self.eta)));
        }
        Ok(())
    }

    /// Received SNR for a channel power gain.
    #[inline]
    pub fn snr(&self, gain: f64) -> f64 {
        gain * self.p_tx / self.noise
    }

    pub fn with_eta(self, eta: f64) -> Self {
        SystemParams { eta, ..self }
    }

    pub fn with_blocklength(self, blocklength: u64) -> Self {
        SystemParams { blocklength, ..self }
    }
}

/// Average channel power gains of the direct (`g1`), backhaul (`g2`) and
/// relaying (`g3`) links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGains {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
}

impl LinkGains {
    pub fn new(g1: f64, g2: f64, g3: f64) -> Result<Self> {
        for (name, g) in [("g1", g1), ("g2", g2), ("g3", g3)] {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::invalid(name, format!("{g} is not a positive gain")));
            }
        }
        Ok(LinkGains { g1, g2, g3 })
    }

    /// Gain of the weaker of the backhaul link and the combined (MRC) link.
    pub fn bottleneck(&self) -> f64 {
        self.g2.min(self.g1 + self.g3)
    }
}
