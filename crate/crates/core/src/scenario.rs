//! Physical setup of the relaying system: distances, powers, carrier and
//! path-loss model, converted into average gains and system parameters.
//!
//! Scenario files hold one `key = value` pair per line; `#` starts a comment.
//! [`Scenario::to_text`] writes every field so that loading the text again
//! reproduces the scenario bit for bit.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fading::MEDIAN;
use crate::link_layer::QosPair;
use crate::params::{LinkGains, SystemParams, MIN_BLOCKLENGTH};

/// COST-231 Walfisch–Ikegami street geometry used for non-line-of-sight links.
pub mod wi {
    /// Base-station antenna height, m.
    pub const H_BASE: f64 = 30.0;
    /// Building height, m.
    pub const H_ROOF: f64 = 15.0;
    /// Mobile antenna height, m.
    pub const H_MOBILE: f64 = 1.5;
    /// Building separation, m.
    pub const BUILDING_SEPARATION: f64 = 20.0;
    /// Street width, m.
    pub const STREET_WIDTH: f64 = 10.0;
    /// Road orientation relative to the direct path, degrees.
    pub const ORIENTATION_DEG: f64 = 90.0;
}

/// COST-231 Hata antenna heights.
pub mod hata {
    pub const H_BASE: f64 = 30.0;
    pub const H_MOBILE: f64 = 1.5;
}

/// Path-loss model of a link, or fixed average gains for all links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathlossModel {
    /// COST-231 Hata, urban macro cell in a medium-sized city.
    Cost231HataUrban,
    /// COST-231 Walfisch–Ikegami, line of sight along a street canyon.
    Cost231WiLos,
    /// COST-231 Walfisch–Ikegami, over-rooftop propagation.
    Cost231WiNlos,
    /// Average gains supplied directly; distances and carrier are ignored.
    FixedGains { g1: f64, g2: f64, g3: f64 },
}

impl PathlossModel {
    pub fn name(&self) -> &'static str {
        match self {
            PathlossModel::Cost231HataUrban => "cost231_hata_urban",
            PathlossModel::Cost231WiLos => "cost231_wi_los",
            PathlossModel::Cost231WiNlos => "cost231_wi_nlos",
            PathlossModel::FixedGains { .. } => "fixed_gains",
        }
    }

    /// Distance range (m) and carrier range (MHz) over which the model was fitted.
    pub fn validity(&self) -> Option<((f64, f64), (f64, f64))> {
        match self {
            PathlossModel::Cost231HataUrban => Some(((1_000.0, 20_000.0), (1_500.0, 2_000.0))),
            PathlossModel::Cost231WiLos | PathlossModel::Cost231WiNlos => Some(((20.0, 5_000.0), (800.0, 2_000.0))),
            PathlossModel::FixedGains { .. } => None,
        }
    }
}

/// Path loss in dB at `distance_m` metres and carrier `f_c_ghz`.
///
/// Inputs outside the fitted range of the model are evaluated anyway and
/// logged as a warning. Fixed-gain models have no path loss and return 0.
pub fn pathloss_db(model: PathlossModel, distance_m: f64, f_c_ghz: f64) -> f64 {
    if let Some(((d_lo, d_hi), (f_lo, f_hi))) = model.validity() {
        let f_mhz = f_c_ghz * 1e3;
        if !(d_lo..=d_hi).contains(&distance_m) || !(f_lo..=f_hi).contains(&f_mhz) {
            log::warn!(
                "{}: {distance_m} m at {f_mhz} MHz is outside the fitted range {d_lo}-{d_hi} m, {f_lo}-{f_hi} MHz",
                model.name()
            );
        }
    }
    let d_km = distance_m / 1e3;
    let f = f_c_ghz * 1e3;
    match model {
        PathlossModel::Cost231HataUrban => {
            let (hb, hm) = (hata::H_BASE, hata::H_MOBILE);
            let a_hm = (1.1 * f.log10() - 0.7) * hm - (1.56 * f.log10() - 0.8);
            46.3 + 33.9 * f.log10() - 13.82 * hb.log10() - a_hm + (44.9 - 6.55 * hb.log10()) * d_km.log10()
        }
        PathlossModel::Cost231WiLos => 42.6 + 26.0 * d_km.log10() + 20.0 * f.log10(),
        PathlossModel::Cost231WiNlos => wi_nlos_db(d_km, f),
        PathlossModel::FixedGains { .. } => 0.0,
    }
}

fn wi_nlos_db(d_km: f64, f: f64) -> f64 {
    use wi::*;
    let free_space = 32.4 + 20.0 * d_km.log10() + 20.0 * f.log10();
    let phi = ORIENTATION_DEG;
    let l_ori = if phi < 35.0 {
        -10.0 + 0.354 * phi
    } else if phi < 55.0 {
        2.5 + 0.075 * (phi - 35.0)
    } else {
        4.0 - 0.114 * (phi - 55.0)
    };
    let rooftop = -16.9 - 10.0 * STREET_WIDTH.log10() + 10.0 * f.log10() + 20.0 * (H_ROOF - H_MOBILE).log10() + l_ori;
    let dh = H_BASE - H_ROOF;
    let (l_bsh, k_a, k_d) = if dh > 0.0 {
        (-18.0 * (1.0 + dh).log10(), 54.0, 18.0)
    } else {
        let k_a = if d_km >= 0.5 {
            54.0 - 0.8 * dh
        } else {
            54.0 - 0.8 * dh * d_km / 0.5
        };
        (0.0, k_a, 18.0 - 15.0 * dh / H_ROOF)
    };
    let k_f = -4.0 + 0.7 * (f / 925.0 - 1.0);
    let multiscreen = l_bsh + k_a + k_d * d_km.log10() + k_f * f.log10() - 9.0 * BUILDING_SEPARATION.log10();
    free_space + (rooftop + multiscreen).max(0.0)
}

/// Watts from dBm.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// dBm from watts.
pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Linear power gain from a loss in dB.
pub fn db_loss_to_gain(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

/// Complete description of one evaluation setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    /// Source to relay, m.
    pub d_backhaul: f64,
    /// Relay to destination, m.
    pub d_relaying: f64,
    /// Source to destination, m.
    pub d_direct: f64,
    pub p_tx_dbm: f64,
    pub noise_dbm: f64,
    /// Carrier frequency, GHz.
    pub f_c: f64,
    /// Per-hop blocklength.
    pub m: u64,
    pub eta: f64,
    pub eps_nominal: f64,
    pub qos: QosPair,
    /// Model of the two relay hops, or fixed gains for every link.
    pub pathloss_model: PathlossModel,
    /// Model of the direct link; ignored with fixed gains.
    pub pathloss_model_direct: PathlossModel,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            d_backhaul: 200.0,
            d_relaying: 200.0,
            d_direct: 360.0,
            p_tx_dbm: 30.0,
            noise_dbm: -90.0,
            f_c: 2.0,
            m: 500,
            eta: 0.2,
            eps_nominal: 1e-3,
            qos: QosPair { d: 1e4, p_d: 1e-2 },
            pathloss_model: PathlossModel::Cost231WiLos,
            pathloss_model_direct: PathlossModel::Cost231WiNlos,
        }
    }
}

/// Scenario keys in file order.
pub const KEYS: &[&str] = &[
    "d_backhaul",
    "d_relaying",
    "d_direct",
    "p_tx_dbm",
    "noise_dbm",
    "f_c",
    "m",
    "eta",
    "eps_nominal",
    "qos_d",
    "qos_p_d",
    "pathloss_model",
    "pathloss_model_direct",
    "g1",
    "g2",
    "g3",
];

impl Scenario {
    /// Every violated constraint as `(field, reason)`.
    pub fn problems(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut positive = |name: &'static str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                out.push((name, format!("{v} must be positive")));
            }
        };
        positive("d_backhaul", self.d_backhaul);
        positive("d_relaying", self.d_relaying);
        positive("d_direct", self.d_direct);
        positive("f_c", self.f_c);
        positive("qos_d", self.qos.d);
        if let PathlossModel::FixedGains { g1, g2, g3 } = self.pathloss_model {
            positive("g1", g1);
            positive("g2", g2);
            positive("g3", g3);
        }
        for (name, v) in [("p_tx_dbm", self.p_tx_dbm), ("noise_dbm", self.noise_dbm)] {
            if !v.is_finite() {
                out.push((name, format!("{v} is not finite")));
            }
        }
        if self.m < MIN_BLOCKLENGTH {
            out.push(("m", format!("{} is below {MIN_BLOCKLENGTH}", self.m)));
        }
        if !(self.eta > 0.0 && self.eta <= MEDIAN) {
            out.push(("eta", format!("{} is not in (0, ln 2]", self.eta)));
        }
        if !(self.eps_nominal > 0.0 && self.eps_nominal < 1.0) {
            out.push(("eps_nominal", format!("{} is not in (0, 1)", self.eps_nominal)));
        }
        if !(self.qos.p_d > 0.0 && self.qos.p_d < 1.0) {
            out.push(("qos_p_d", format!("{} is not in (0, 1)", self.qos.p_d)));
        }
        if matches!(self.pathloss_model_direct, PathlossModel::FixedGains { .. }) {
            out.push((
                "pathloss_model_direct",
                "fixed gains are selected through pathloss_model".to_string(),
            ));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            return Ok(());
        }
        let fields: Vec<&str> = problems.iter().map(|p| p.0).collect();
        let reason = match problems.as_slice() {
            [(_, r)] => r.clone(),
            _ => problems
                .iter()
                .map(|(f, r)| format!("{f}: {r}"))
                .collect::<Vec<_>>()
                .join("; "),
        };
        Err(Error::invalid(fields.join(", "), reason))
    }

    /// Average link gains `(g1, g2, g3)` of the direct, backhaul and relaying links.
    pub fn gains(&self) -> Result<LinkGains> {
        match self.pathloss_model {
            PathlossModel::FixedGains { g1, g2, g3 } => LinkGains::new(g1, g2, g3),
            hop => LinkGains::new(
                db_loss_to_gain(pathloss_db(self.pathloss_model_direct, self.d_direct, self.f_c)),
                db_loss_to_gain(pathloss_db(hop, self.d_backhaul, self.f_c)),
                db_loss_to_gain(pathloss_db(hop, self.d_relaying, self.f_c)),
            ),
        }
    }

    pub fn params(&self) -> Result<SystemParams> {
        SystemParams::new(
            self.m,
            dbm_to_watts(self.p_tx_dbm),
            dbm_to_watts(self.noise_dbm),
            self.eps_nominal,
            self.eta,
        )
    }

    /// Validated gains and parameters.
    pub fn build(&self) -> Result<(LinkGains, SystemParams)> {
        self.validate()?;
        Ok((self.gains()?, self.params()?))
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |v: &str| -> Result<f64> {
            v.trim()
                .parse::<f64>()
                .map_err(|e| Error::invalid(key, format!("cannot parse '{v}': {e}")))
        };
        let fixed = |s: &Scenario| match s.pathloss_model {
            PathlossModel::FixedGains { g1, g2, g3 } => (g1, g2, g3),
            _ => (f64::NAN, f64::NAN, f64::NAN),
        };
        match key {
            "d_backhaul" => self.d_backhaul = num(value)?,
            "d_relaying" => self.d_relaying = num(value)?,
            "d_direct" => self.d_direct = num(value)?,
            "p_tx_dbm" => self.p_tx_dbm = num(value)?,
            "noise_dbm" => self.noise_dbm = num(value)?,
            "f_c" => self.f_c = num(value)?,
            "m" => {
                self.m = value
                    .trim()
                    .parse()
                    .map_err(|e| Error::invalid("m", format!("cannot parse '{value}': {e}")))?
            }
            "eta" => self.eta = num(value)?,
            "eps_nominal" => self.eps_nominal = num(value)?,
            "qos_d" => self.qos.d = num(value)?,
            "qos_p_d" => self.qos.p_d = num(value)?,
            "pathloss_model" => {
                self.pathloss_model = match value.trim() {
                    "fixed_gains" => {
                        let (g1, g2, g3) = fixed(self);
                        PathlossModel::FixedGains { g1, g2, g3 }
                    }
                    other => parse_model(key, other)?,
                }
            }
            "pathloss_model_direct" => self.pathloss_model_direct = parse_model(key, value.trim())?,
            "g1" | "g2" | "g3" => {
                let (mut g1, mut g2, mut g3) = fixed(self);
                let v = num(value)?;
                match key {
                    "g1" => g1 = v,
                    "g2" => g2 = v,
                    _ => g3 = v,
                }
                self.pathloss_model = PathlossModel::FixedGains { g1, g2, g3 };
            }
            _ => return Err(Error::invalid(key, "unknown scenario key")),
        }
        Ok(())
    }

    /// Parses scenario text on top of the defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut s = Scenario::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::invalid(
                    format!("line {}", i + 1),
                    format!("expected 'key = value', got '{line}'"),
                )
            })?;
            s.set(k.trim(), v)?;
        }
        Ok(s)
    }

    /// Writes every field in [`KEYS`] order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv("d_backhaul", self.d_backhaul.to_string());
        kv("d_relaying", self.d_relaying.to_string());
        kv("d_direct", self.d_direct.to_string());
        kv("p_tx_dbm", self.p_tx_dbm.to_string());
        kv("noise_dbm", self.noise_dbm.to_string());
        kv("f_c", self.f_c.to_string());
        kv("m", self.m.to_string());
        kv("eta", self.eta.to_string());
        kv("eps_nominal", self.eps_nominal.to_string());
        kv("qos_d", self.qos.d.to_string());
        kv("qos_p_d", self.qos.p_d.to_string());
        kv("pathloss_model", self.pathloss_model.name().to_string());
        kv("pathloss_model_direct", self.pathloss_model_direct.name().to_string());
        if let PathlossModel::FixedGains { g1, g2, g3 } = self.pathloss_model {
            kv("g1", g1.to_string());
            kv("g2", g2.to_string());
            kv("g3", g3.to_string());
        }
        out
    }
}

fn parse_model(key: &str, name: &str) -> Result<PathlossModel> {
    match name {
        "cost231_hata_urban" => Ok(PathlossModel::Cost231HataUrban),
        "cost231_wi_los" => Ok(PathlossModel::Cost231WiLos),
        "cost231_wi_nlos" => Ok(PathlossModel::Cost231WiNlos),
        "fixed_gains" => Err(Error::invalid(key, "fixed gains are selected through pathloss_model")),
        other => Err(Error::invalid(key, format!("unknown path-loss model '{other}'"))),
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::from_text(s)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference losses computed independently from the COST-231 formulas.
    const HATA_200: f64 = 113.122_890_814_782_52;
    const WI_LOS_200: f64 = 90.447_379_800_543_13;
    const WI_NLOS_360: f64 = 120.384_953_147_524_17;

    #[test]
    fn cost231_formula_values() {
        assert!((pathloss_db(PathlossModel::Cost231HataUrban, 200.0, 2.0) - HATA_200).abs() < 1e-9);
        assert!((pathloss_db(PathlossModel::Cost231WiLos, 200.0, 2.0) - WI_LOS_200).abs() < 1e-9);
        assert!((pathloss_db(PathlossModel::Cost231WiNlos, 360.0, 2.0) - WI_NLOS_360).abs() < 1e-9);
    }

    #[test]
    fn loss_increases_with_distance() {
        for model in [
            PathlossModel::Cost231HataUrban,
            PathlossModel::Cost231WiLos,
            PathlossModel::Cost231WiNlos,
        ] {
            assert!(pathloss_db(model, 360.0, 2.0) > pathloss_db(model, 200.0, 2.0));
        }
    }

    #[test]
    fn default_backhaul_snr_is_plausible() {
        let s = Scenario::default();
        let budget = s.p_tx_dbm - s.noise_dbm;
        let snr_db = budget - pathloss_db(s.pathloss_model, s.d_backhaul, s.f_c);
        assert!((10.0..=40.0).contains(&snr_db), "{snr_db}");
    }

    #[test]
    fn default_gains_are_symmetric_and_direct_is_weaker() {
        let (g, _) = Scenario::default().build().unwrap();
        assert_eq!(g.g2, g.g3);
        assert!(g.g1 < g.g2 && g.g1 < g.g3);
    }

    #[test]
    fn fixed_gains_pass_through() {
        let s = Scenario {
            pathloss_model: PathlossModel::FixedGains {
                g1: 1.5,
                g2: 2.5,
                g3: 3.5,
            },
            ..Scenario::default()
        };
        let (g, _) = s.build().unwrap();
        assert_eq!((g.g1, g.g2, g.g3), (1.5, 2.5, 3.5));
    }

    #[test]
    fn dbm_round_trip() {
        for dbm in [-120.0, -90.0, -3.3, 0.0, 30.0, 46.0] {
            let back = watts_to_dbm(dbm_to_watts(dbm));
            assert!((back - dbm).abs() <= 1e-12 * dbm.abs().max(1.0));
        }
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn text_round_trip_is_bit_identical() {
        let mut s = Scenario {
            eta: 0.1 + 0.2,
            eps_nominal: 1.234_567_890_123e-7,
            ..Scenario::default()
        };
        s.qos.d = 12_345.678;
        let back = Scenario::from_text(&s.to_text()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.build().unwrap(), s.build().unwrap());

        s.pathloss_model = PathlossModel::FixedGains {
            g1: 1e-13,
            g2: 3.3e-9,
            g3: 2.2e-9,
        };
        let back = Scenario::from_text(&s.to_text()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn parses_comments_and_blank_lines() {
        let s: Scenario = "# setup\n\nm = 1000  # longer blocks\neta=0.3\n".parse().unwrap();
        assert_eq!(s.m, 1000);
        assert_eq!(s.eta, 0.3);
    }

    #[test]
    fn validation_names_fields() {
        let s = Scenario {
            m: 10,
            eta: 0.9,
            ..Scenario::default()
        };
        match s.build() {
            Err(Error::Invalid { field, .. }) => assert_eq!(field, "m, eta"),
            other => panic!("{other:?}"),
        }
        assert!(Scenario::from_text("nope = 1").is_err());
        assert!(Scenario::from_text("m = many").is_err());
        assert!(Scenario::from_text("m").is_err());
    }

    #[test]
    fn partial_fixed_gains_fail_validation() {
        let s = Scenario::from_text("g1 = 1.0\ng2 = 2.0").unwrap();
        assert!(s.build().is_err());
    }
}
