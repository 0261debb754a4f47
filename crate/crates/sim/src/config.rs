use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rstc_core::stc::{Alamouti, RandomizedCode, SpaceTimeCode};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SimError};

/// Transmission scheme under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Scheme {
    /// Spatial multiplexing over the direct link, no relays.
    Sm,
    /// Distributed Alamouti with `R = I` at every relay.
    StcAf,
    /// Distributed Alamouti with a fresh random unit-modulus `R`.
    RstcFixed,
    /// Adaptive receiver with randomized-code optimization and feedback.
    Alrrmo,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Sm, Scheme::StcAf, Scheme::RstcFixed, Scheme::Alrrmo];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Sm => "SM",
            Scheme::StcAf => "STC_AF",
            Scheme::RstcFixed => "RSTC_FIXED",
            Scheme::Alrrmo => "ALRRMO",
        }
    }

    /// Stable small integer mixed into per-trial seeds.
    pub fn tag(self) -> u64 {
        match self {
            Scheme::Sm => 1,
            Scheme::StcAf => 2,
            Scheme::RstcFixed => 3,
            Scheme::Alrrmo => 4,
        }
    }

    pub fn uses_relays(self) -> bool {
        self != Scheme::Sm
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = SimError;

    /// Accepts both the CLI spellings (`stc-af`, `rstc`) and the CSV names.
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "sm" => Ok(Scheme::Sm),
            "stc-af" => Ok(Scheme::StcAf),
            "rstc" | "rstc-fixed" => Ok(Scheme::RstcFixed),
            "alrrmo" => Ok(Scheme::Alrrmo),
            other => Err(SimError::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Receiver used by the two fixed-code relay schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BaselineReceiver {
    /// The same pilot-trained stochastic-gradient filters as ALRRMO, with
    /// the code step disabled.
    #[default]
    Adaptive,
    /// Wiener filters from the known block channel.
    Wiener,
}

impl FromStr for BaselineReceiver {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adaptive" => Ok(BaselineReceiver::Adaptive),
            "wiener" => Ok(BaselineReceiver::Wiener),
            other => Err(SimError::Config(format!(
                "unknown baseline receiver `{other}`"
            ))),
        }
    }
}

/// Everything that defines one BER sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub scheme: Scheme,
    /// Antennas at every node (`N`).
    pub antennas: usize,
    /// Relay count (`n_r`).
    pub relays: usize,
    pub direct_link: bool,
    pub snr_db_list: Vec<f64>,
    /// Minimum trials (coherence blocks) per SNR point.
    pub min_trials: u64,
    pub min_bit_errors: u64,
    /// Hard stop per SNR point, whatever the error count.
    pub max_trials: u64,
    /// Pilot vectors per block.
    pub pilots: usize,
    /// Payload vectors per block.
    pub payload: usize,
    pub beta: f64,
    pub mu: f64,
    pub feedback_bits: u32,
    pub feedback_error_prob: f64,
    pub perfect_feedback: bool,
    /// Gray instead of natural-binary quantizer labels.
    pub gray_labels: bool,
    pub master_seed: u64,
    /// Total relay power budget `P_R`; `None` picks the budget unit-modulus
    /// matrices meet exactly.
    pub power_budget: Option<f64>,
    pub baseline_receiver: BaselineReceiver,
    /// Keep adapting the filters on payload decisions.
    pub decision_directed: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            scheme: Scheme::Alrrmo,
            antennas: 2,
            relays: 1,
            direct_link: true,
            snr_db_list: (0..=8).map(|i| 2.0 * i as f64).collect(),
            min_trials: 2000,
            min_bit_errors: 200,
            max_trials: 200_000,
            pilots: 200,
            payload: 200,
            beta: 0.01,
            mu: 0.01,
            feedback_bits: 4,
            feedback_error_prob: 0.0,
            perfect_feedback: false,
            gray_labels: false,
            master_seed: 1,
            power_budget: None,
            baseline_receiver: BaselineReceiver::default(),
            decision_directed: false,
        }
    }
}

impl SimConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| SimError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// `P_R`, explicit or defaulted.
    pub fn budget(&self) -> f64 {
        self.power_budget
            .unwrap_or_else(|| RandomizedCode::unit_modulus_budget(self.relays, &Alamouti))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(SimError::Config(msg.to_string()));
        if self.snr_db_list.is_empty() {
            return bad("SNR list is empty");
        }
        if self.snr_db_list.iter().any(|s| !s.is_finite()) {
            return bad("SNR values must be finite");
        }
        if self.antennas == 0 {
            return bad("antenna count must be positive");
        }
        if self.payload == 0 {
            return bad("payload length must be positive");
        }
        if self.min_trials == 0 || self.min_bit_errors == 0 {
            return bad("stopping thresholds must be positive");
        }
        if self.max_trials < self.min_trials {
            return bad("max_trials must be at least min_trials");
        }
        if !self.scheme.uses_relays() {
            return Ok(());
        }
        if self.antennas != Alamouti.antennas() {
            return bad("relay schemes use the 2-antenna Alamouti code; set antennas = 2");
        }
        if self.relays == 0 {
            return bad("relay schemes need at least one relay");
        }
        if self.needs_pilots() && self.pilots == 0 {
            return bad("adaptive receivers need at least one pilot");
        }
        if !(self.beta >= 0.0 && self.beta.is_finite() && self.mu >= 0.0 && self.mu.is_finite()) {
            return bad("step sizes must be finite and non-negative");
        }
        if !(0.0..=1.0).contains(&self.feedback_error_prob) {
            return bad("feedback error probability must lie in [0, 1]");
        }
        if !(1..=24).contains(&self.feedback_bits) {
            return bad("feedback bits must lie in 1..=24");
        }
        if let Some(p) = self.power_budget {
            if !(p > 0.0 && p.is_finite()) {
                return bad("relay power budget must be positive");
            }
        }
        Ok(())
    }

    /// Whether this configuration trains filters on pilots.
    pub fn needs_pilots(&self) -> bool {
        match self.scheme {
            Scheme::Sm => false,
            Scheme::StcAf | Scheme::RstcFixed => {
                self.baseline_receiver == BaselineReceiver::Adaptive
            }
            Scheme::Alrrmo => true,
        }
    }

    /// Fields set away from their defaults that the scheme never reads.
    pub fn ignored_fields(&self) -> Vec<&'static str> {
        let d = SimConfig::default();
        let mut out = Vec::new();
        let mut check = |name: &'static str, differs: bool, ignored: bool| {
            if differs && ignored {
                out.push(name);
            }
        };
        let sm = self.scheme == Scheme::Sm;
        let alrrmo = self.scheme == Scheme::Alrrmo;
        let pilots = self.needs_pilots();
        check("relays", self.relays != d.relays, sm);
        check("direct_link", self.direct_link != d.direct_link, sm);
        check("power_budget", self.power_budget != d.power_budget, sm);
        check("pilots", self.pilots != d.pilots, !pilots);
        check("beta", self.beta != d.beta, !pilots);
        check(
            "decision_directed",
            self.decision_directed != d.decision_directed,
            !pilots,
        );
        check("mu", self.mu != d.mu, !alrrmo);
        check(
            "perfect_feedback",
            self.perfect_feedback != d.perfect_feedback,
            !alrrmo,
        );
        let quantized = alrrmo && !self.perfect_feedback;
        check(
            "feedback_bits",
            self.feedback_bits != d.feedback_bits,
            !quantized,
        );
        check(
            "feedback_error_prob",
            self.feedback_error_prob != d.feedback_error_prob,
            !quantized,
        );
        check("gray_labels", self.gray_labels != d.gray_labels, !quantized);
        check(
            "baseline_receiver",
            self.baseline_receiver != d.baseline_receiver,
            sm || alrrmo,
        );
        out
    }

    /// Logs one notice per ignored field.
    pub fn log_ignored(&self) {
        for field in self.ignored_fields() {
            log::info!(
                "{}: `{field}` does not apply to this scheme and is ignored",
                self.scheme
            );
        }
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Parses `start:step:stop` (inclusive), a comma-separated list, or a single
/// value.
pub fn parse_snr_list(text: &str) -> Result<Vec<f64>> {
    let number = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| SimError::Config(format!("`{s}` is not a number")))
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, step, stop] = parts.as_slice() else {
            return Err(SimError::Config("SNR range must be start:step:stop".into()));
        };
        let (start, step, stop) = (number(start)?, number(step)?, number(stop)?);
        if !(step > 0.0) || stop < start {
            return Err(SimError::Config(
                "SNR range needs step > 0 and stop >= start".into(),
            ));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| start + step * i as f64).collect());
    }
    text.split(',').map(number).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        for scheme in Scheme::ALL {
            let cfg = SimConfig {
                scheme,
                ..SimConfig::default()
            };
            cfg.validate().unwrap();
            assert!(cfg.ignored_fields().is_empty());
        }
    }

    #[test]
    fn rejects_empty_payload_and_snr_list() {
        let cfg = SimConfig {
            payload: 0,
            ..SimConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = SimConfig {
            snr_db_list: vec![],
            ..SimConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_bad_ranges() {
        let base = SimConfig::default();
        for cfg in [
            SimConfig {
                feedback_error_prob: 1.5,
                ..base.clone()
            },
            SimConfig {
                feedback_bits: 0,
                ..base.clone()
            },
            SimConfig {
                beta: -1.0,
                ..base.clone()
            },
            SimConfig {
                relays: 0,
                ..base.clone()
            },
            SimConfig {
                antennas: 3,
                ..base.clone()
            },
            SimConfig {
                max_trials: 10,
                ..base.clone()
            },
            SimConfig {
                power_budget: Some(0.0),
                ..base.clone()
            },
        ] {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn spatial_multiplexing_allows_other_antenna_counts() {
        let cfg = SimConfig {
            scheme: Scheme::Sm,
            antennas: 4,
            ..SimConfig::default()
        };
        cfg.validate().unwrap();
    }

    #[test]
    fn flags_fields_the_scheme_ignores() {
        let cfg = SimConfig {
            scheme: Scheme::Sm,
            feedback_bits: 3,
            mu: 0.5,
            ..SimConfig::default()
        };
        assert_eq!(cfg.ignored_fields(), vec!["mu", "feedback_bits"]);
        let cfg = SimConfig {
            perfect_feedback: true,
            feedback_error_prob: 0.1,
            ..SimConfig::default()
        };
        assert_eq!(cfg.ignored_fields(), vec!["feedback_error_prob"]);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = SimConfig::default();
        assert_eq!(a.hash(), a.clone().hash());
        assert_eq!(a.hash().len(), 16);
        let b = SimConfig {
            master_seed: 2,
            ..a.clone()
        };
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn json_roundtrip_with_partial_input() {
        let cfg: SimConfig =
            serde_json::from_str(r#"{"scheme": "RSTC_FIXED", "beta": 0.01}"#).unwrap();
        assert_eq!(cfg.scheme, Scheme::RstcFixed);
        assert_eq!(cfg.beta, 0.01);
        assert_eq!(cfg.pilots, 200);
        let back: SimConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(serde_json::from_str::<SimConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn default_budget_matches_unit_modulus_code() {
        assert_eq!(SimConfig::default().budget(), 16.0);
        let cfg = SimConfig {
            relays: 2,
            ..SimConfig::default()
        };
        assert_eq!(cfg.budget(), 32.0);
    }

    #[test]
    fn parses_snr_forms() {
        assert_eq!(parse_snr_list("0:2:6").unwrap(), vec![0.0, 2.0, 4.0, 6.0]);
        assert_eq!(parse_snr_list("0:0.1:0.3").unwrap().len(), 4);
        assert_eq!(parse_snr_list("1, 5,9").unwrap(), vec![1.0, 5.0, 9.0]);
        assert_eq!(parse_snr_list("12").unwrap(), vec![12.0]);
        assert!(parse_snr_list("0:0:4").is_err());
        assert!(parse_snr_list("a").is_err());
        assert!(parse_snr_list("0:1").is_err());
    }

    #[test]
    fn scheme_names_parse() {
        assert_eq!("stc-af".parse::<Scheme>().unwrap(), Scheme::StcAf);
        assert_eq!("rstc".parse::<Scheme>().unwrap(), Scheme::RstcFixed);
        assert_eq!("RSTC_FIXED".parse::<Scheme>().unwrap(), Scheme::RstcFixed);
        assert_eq!("ALRRMO".parse::<Scheme>().unwrap(), Scheme::Alrrmo);
        assert!("qam".parse::<Scheme>().is_err());
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
    }
}
