//! Scenario configuration and its key-value file format.
//!
//! The file format is flat TOML, one `key = value` pair per line:
//!
//! ```text
//! L = 20
//! N = 10
//! D = 200
//! lambda = 10.0        # or: K = 10
//! snr_db = 10.0
//! ebn0_db = 6.0
//! phase_compensation = false
//! trials = 100000
//! seed = 1
//! detector = "mmse-lr" # "mmse" | "mmse-lr"
//! mode = "abstract"    # "abstract" | "phy"
//! rounding = "round"   # "round" | "floor" | "continuous"
//! ```
//!
//! Optional keys: `collided_pairs` (force that many two-device collisions
//! per slot), `p_max` (enable Rayleigh fading with transmit-power
//! truncation).

use crate::error::{invalid, Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Detector {
    Mmse,
    #[default]
    MmseLr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Abstract,
    Phy,
}

/// How the non-integer index `N + Q̄` is turned into a Poisson cdf argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Rounding {
    #[default]
    Round,
    Floor,
    /// Regularized upper incomplete gamma at real order.
    Continuous,
}

/// Device activity per slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activity {
    Poisson(f64),
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigOverrides", into = "ConfigOverrides")]
pub struct SystemConfig {
    /// Preamble count.
    pub l: usize,
    /// Spreading factor.
    pub n: usize,
    /// Data symbols per TDMA block.
    pub d: usize,
    pub activity: Activity,
    pub snr_db: f64,
    pub ebn0_db: f64,
    pub phase_compensation: bool,
    pub trials: u64,
    pub seed: u64,
    pub detector: Detector,
    pub mode: Mode,
    pub rounding: Rounding,
    pub collided_pairs: Option<usize>,
    pub p_max: Option<f64>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            l: 20,
            n: 10,
            d: 200,
            activity: Activity::Poisson(10.0),
            snr_db: 10.0,
            ebn0_db: 6.0,
            phase_compensation: false,
            trials: 100_000,
            seed: 1,
            detector: Detector::MmseLr,
            mode: Mode::Abstract,
            rounding: Rounding::Round,
            collided_pairs: None,
            p_max: None,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l == 0 {
            return Err(invalid("L", "must be at least 1"));
        }
        if self.n == 0 {
            return Err(invalid("N", "must be at least 1"));
        }
        if self.n > self.l {
            return Err(Error::SpreadingExceedsPreambles { n: self.n, l: self.l });
        }
        if self.d == 0 {
            return Err(invalid("D", "must be at least 1"));
        }
        if let Activity::Poisson(lambda) = self.activity {
            if !(lambda >= 0.0 && lambda.is_finite()) {
                return Err(invalid("lambda", format!("must be finite and nonnegative, got {lambda}")));
            }
        }
        if self.trials == 0 {
            return Err(invalid("trials", "must be positive"));
        }
        if let Some(p) = self.p_max {
            if !(p > 0.0) {
                return Err(invalid("p_max", "must be positive"));
            }
        }
        if let (Some(pairs), Activity::Fixed(k)) = (self.collided_pairs, self.activity) {
            if 2 * pairs > k {
                return Err(invalid("collided_pairs", format!("{pairs} pairs need at least {} devices", 2 * pairs)));
            }
            if k - pairs > self.l {
                return Err(invalid("collided_pairs", "more distinct preambles required than L"));
            }
        }
        if self.collided_pairs.is_some() && !matches!(self.activity, Activity::Fixed(_)) {
            return Err(invalid("collided_pairs", "requires a fixed device count K"));
        }
        Ok(())
    }

    /// `D̄ = L·D/N`, data symbols per slot with spreading factor `N`.
    pub fn d_bar(&self) -> f64 {
        (self.l * self.d) as f64 / self.n as f64
    }

    /// `T_slot = L + L·D`.
    pub fn slot_length(&self) -> f64 {
        (self.l + self.l * self.d) as f64
    }

    /// `N₀` for a receive power normalized to one.
    pub fn noise_from_snr(&self) -> f64 {
        db_to_linear(-self.snr_db)
    }

    /// `N₀` from `E_b/N₀` with `E_b = P_rx / 2` and `P_rx = 1`.
    pub fn noise_from_ebn0(&self) -> f64 {
        0.5 * db_to_linear(-self.ebn0_db)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to flat toml")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// A partial configuration: the on-disk format, and the layer that CLI flags
/// and config files apply over a preset's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ebn0_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_compensation: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detector: Option<Detector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounding: Option<Rounding>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collided_pairs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
}

impl ConfigOverrides {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Layers `self` over `lower`; fields set in `self` win. Activity (`lambda`
    /// or `K`) is taken as a unit.
    pub fn over(&self, lower: &ConfigOverrides) -> ConfigOverrides {
        let activity_set = self.lambda.is_some() || self.k.is_some();
        let (lambda, k) = if activity_set { (self.lambda, self.k) } else { (lower.lambda, lower.k) };
        ConfigOverrides {
            l: self.l.or(lower.l),
            n: self.n.or(lower.n),
            d: self.d.or(lower.d),
            lambda,
            k,
            snr_db: self.snr_db.or(lower.snr_db),
            ebn0_db: self.ebn0_db.or(lower.ebn0_db),
            phase_compensation: self.phase_compensation.or(lower.phase_compensation),
            trials: self.trials.or(lower.trials),
            seed: self.seed.or(lower.seed),
            detector: self.detector.or(lower.detector),
            mode: self.mode.or(lower.mode),
            rounding: self.rounding.or(lower.rounding),
            collided_pairs: self.collided_pairs.or(lower.collided_pairs),
            p_max: self.p_max.or(lower.p_max),
        }
    }

    /// Applies the set fields to `base`.
    pub fn apply(&self, base: &SystemConfig) -> Result<SystemConfig> {
        let activity = match (self.lambda, self.k) {
            (Some(_), Some(_)) => return Err(Error::Config("set exactly one of `lambda` and `K`".into())),
            (Some(lambda), None) => Activity::Poisson(lambda),
            (None, Some(k)) => Activity::Fixed(k),
            (None, None) => base.activity,
        };
        let collided_pairs = match activity {
            Activity::Poisson(_) => None,
            Activity::Fixed(_) => self.collided_pairs.or(base.collided_pairs),
        };
        Ok(SystemConfig {
            l: self.l.unwrap_or(base.l),
            n: self.n.unwrap_or(base.n),
            d: self.d.unwrap_or(base.d),
            activity,
            snr_db: self.snr_db.unwrap_or(base.snr_db),
            ebn0_db: self.ebn0_db.unwrap_or(base.ebn0_db),
            phase_compensation: self.phase_compensation.unwrap_or(base.phase_compensation),
            trials: self.trials.unwrap_or(base.trials),
            seed: self.seed.unwrap_or(base.seed),
            detector: self.detector.unwrap_or(base.detector),
            mode: self.mode.unwrap_or(base.mode),
            rounding: self.rounding.unwrap_or(base.rounding),
            collided_pairs,
            p_max: self.p_max.or(base.p_max),
        })
    }
}

impl TryFrom<ConfigOverrides> for SystemConfig {
    type Error = Error;

    fn try_from(raw: ConfigOverrides) -> Result<Self> {
        raw.apply(&SystemConfig::default())
    }
}

impl From<SystemConfig> for ConfigOverrides {
    fn from(c: SystemConfig) -> Self {
        let (lambda, k) = match c.activity {
            Activity::Poisson(lambda) => (Some(lambda), None),
            Activity::Fixed(k) => (None, Some(k)),
        };
        ConfigOverrides {
            l: Some(c.l),
            n: Some(c.n),
            d: Some(c.d),
            lambda,
            k,
            snr_db: Some(c.snr_db),
            ebn0_db: Some(c.ebn0_db),
            phase_compensation: Some(c.phase_compensation),
            trials: Some(c.trials),
            seed: Some(c.seed),
            detector: Some(c.detector),
            mode: Some(c.mode),
            rounding: Some(c.rounding),
            collided_pairs: c.collided_pairs,
            p_max: c.p_max,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_above_l_is_rejected() {
        let cfg = SystemConfig { l: 10, n: 11, ..Default::default() };
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("N <= L"));
    }

    #[test]
    fn lambda_and_k_are_exclusive() {
        let err = SystemConfig::from_toml("lambda = 3.0\nK = 4\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn partial_file_falls_back_to_defaults() {
        let cfg = SystemConfig::from_toml("L = 100\nlambda = 50.0\nmode = \"phy\"\n").unwrap();
        assert_eq!(cfg.l, 100);
        assert_eq!(cfg.activity, Activity::Poisson(50.0));
        assert_eq!(cfg.mode, Mode::Phy);
        assert_eq!(cfg.d, SystemConfig::default().d);
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let file = ConfigOverrides::from_toml("L = 40\nN = 20\nlambda = 12.0\n").unwrap();
        let flags = ConfigOverrides { n: Some(15), k: Some(7), ..Default::default() };
        let cfg = flags.over(&file).apply(&SystemConfig::default()).unwrap();
        assert_eq!((cfg.l, cfg.n), (40, 15));
        assert_eq!(cfg.activity, Activity::Fixed(7));
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(SystemConfig::from_toml("M = 3\n").is_err());
    }

    #[test]
    fn slot_accounting() {
        let cfg = SystemConfig { l: 20, n: 10, d: 200, ..Default::default() };
        assert_eq!(cfg.slot_length(), 4020.0);
        assert_eq!(cfg.d_bar() * cfg.n as f64, (cfg.d * cfg.l) as f64);
    }
}
