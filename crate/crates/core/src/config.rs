//! Engine configuration, validation and the flat key-value config file.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genpipe::Tier;

/// Per-tier inference latency in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierLatencies {
    pub label: f64,
    pub general: f64,
    pub detailed: f64,
}

impl TierLatencies {
    pub fn get(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Label => self.label,
            Tier::General => self.general,
            Tier::Detailed => self.detailed,
        }
    }
}

impl Default for TierLatencies {
    fn default() -> Self {
        Self {
            label: 0.1,
            general: 2.87,
            detailed: 8.78,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    /// Frames a composition must hold before it counts as stable.
    pub n: usize,
    /// Consecutive same-composition keyframes that fire the detail trigger.
    pub m: usize,
    /// Frame-similarity threshold for empty-scene and freshness checks.
    pub thres: f64,
    pub orientation_unit_deg: f64,
    /// Split point between intent-relevant and proximity-ordered sentences.
    pub sim_split_threshold: f64,
    pub redundancy_threshold: f64,
    pub spoken_history_window: usize,
    pub speaking_rate_wps: f64,
    pub volume_normal: f64,
    pub volume_high: f64,
    pub tier_latencies: TierLatencies,
    pub fps: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            n: 5,
            m: 3,
            thres: 0.6,
            orientation_unit_deg: 30.0,
            sim_split_threshold: 0.2,
            redundancy_threshold: 0.85,
            spoken_history_window: 5,
            speaking_rate_wps: 3.0,
            volume_normal: 1.0,
            volume_high: 1.5,
            tier_latencies: TierLatencies::default(),
            fps: 5.0,
        }
    }
}

/// A single violated constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub constraint: &'static str,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: violates \"{}\"", self.field, self.constraint)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationResult {
    Ok,
    Invalid(Vec<Violation>),
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        matches!(self, ValidationResult::Ok)
    }

    pub fn violations(&self) -> &[Violation] {
        match self {
            ValidationResult::Ok => &[],
            ValidationResult::Invalid(v) => v,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("config parse error: {0}")]
    Parse(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// Checks every field constraint and reports all violations at once.
pub fn validate_config(cfg: &EngineConfig) -> ValidationResult {
    let mut out = Vec::new();
    let mut check = |ok: bool, field: &'static str, constraint: &'static str| {
        if !ok {
            out.push(Violation { field, constraint });
        }
    };
    let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;

    check(cfg.n >= 1, "n", "n ≥ 1");
    check(cfg.m >= 1, "m", "m ≥ 1");
    check((0.0..=1.0).contains(&cfg.thres), "thres", "thres ∈ [0,1]");
    check(
        cfg.orientation_unit_deg > 0.0 && cfg.orientation_unit_deg <= 180.0,
        "orientation_unit_deg",
        "orientation_unit_deg ∈ (0,180]",
    );
    check(
        (-1.0..=1.0).contains(&cfg.sim_split_threshold),
        "sim_split_threshold",
        "sim_split_threshold ∈ [-1,1]",
    );
    check(
        (-1.0..=1.0).contains(&cfg.redundancy_threshold),
        "redundancy_threshold",
        "redundancy_threshold ∈ [-1,1]",
    );
    check(
        cfg.spoken_history_window >= 1,
        "spoken_history_window",
        "spoken_history_window ≥ 1",
    );
    check(
        cfg.speaking_rate_wps.is_finite() && cfg.speaking_rate_wps > 0.0,
        "speaking_rate_wps",
        "speaking_rate_wps > 0",
    );
    check(
        cfg.volume_normal.is_finite() && cfg.volume_normal > 0.0,
        "volume_normal",
        "volume_normal > 0",
    );
    check(
        cfg.volume_high.is_finite() && cfg.volume_high > 0.0,
        "volume_high",
        "volume_high > 0",
    );
    check(
        finite_nonneg(cfg.tier_latencies.label)
            && finite_nonneg(cfg.tier_latencies.general)
            && finite_nonneg(cfg.tier_latencies.detailed),
        "tier_latencies",
        "tier_latencies ≥ 0",
    );
    check(cfg.fps.is_finite() && cfg.fps > 0.0, "fps", "fps > 0");

    if out.is_empty() {
        ValidationResult::Ok
    } else {
        ValidationResult::Invalid(out)
    }
}

impl EngineConfig {
    pub fn validate(&self) -> ValidationResult {
        validate_config(self)
    }

    /// Parses a full or partial config document and applies it over the
    /// defaults.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let overrides = ConfigOverrides::from_toml_str(text)?;
        let cfg = overrides.apply(EngineConfig::default());
        match cfg.validate() {
            ValidationResult::Ok => Ok(cfg),
            ValidationResult::Invalid(v) => Err(ConfigError::Invalid(v)),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierLatencyOverrides {
    pub label: Option<f64>,
    pub general: Option<f64>,
    pub detailed: Option<f64>,
}

/// Partial config: every key optional, unknown keys rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thres: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orientation_unit_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sim_split_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub redundancy_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spoken_history_window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speaking_rate_wps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volume_normal: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volume_high: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tier_latencies: Option<TierLatencyOverrides>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fps: Option<f64>,
}

impl ConfigOverrides {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))
    }

    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    pub fn apply(&self, mut cfg: EngineConfig) -> EngineConfig {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        take!(
            n,
            m,
            thres,
            orientation_unit_deg,
            sim_split_threshold,
            redundancy_threshold,
            spoken_history_window,
            speaking_rate_wps,
            volume_normal,
            volume_high,
            fps
        );
        if let Some(lat) = &self.tier_latencies {
            if let Some(v) = lat.label {
                cfg.tier_latencies.label = v;
            }
            if let Some(v) = lat.general {
                cfg.tier_latencies.general = v;
            }
            if let Some(v) = lat.detailed {
                cfg.tier_latencies.detailed = v;
            }
        }
        cfg
    }

    /// Layers `other` on top of `self`; keys set in `other` win.
    pub fn merged(&self, other: &ConfigOverrides) -> ConfigOverrides {
        let mut out = self.clone();
        macro_rules! over {
            ($($field:ident),*) => {
                $(if other.$field.is_some() { out.$field = other.$field; })*
            };
        }
        over!(
            n,
            m,
            thres,
            orientation_unit_deg,
            sim_split_threshold,
            redundancy_threshold,
            spoken_history_window,
            speaking_rate_wps,
            volume_normal,
            volume_high,
            fps
        );
        if let Some(theirs) = &other.tier_latencies {
            let mine = out.tier_latencies.get_or_insert_with(Default::default);
            if theirs.label.is_some() {
                mine.label = theirs.label;
            }
            if theirs.general.is_some() {
                mine.general = theirs.general;
            }
            if theirs.detailed.is_some() {
                mine.detailed = theirs.detailed;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reported_values_and_validate() {
        let cfg = EngineConfig::default();
        assert_eq!((cfg.n, cfg.m), (5, 3));
        assert_eq!(cfg.thres, 0.6);
        assert_eq!(cfg.orientation_unit_deg, 30.0);
        assert_eq!(cfg.tier_latencies, TierLatencies { label: 0.1, general: 2.87, detailed: 8.78 });
        assert_eq!(cfg.fps, 5.0);
        assert_eq!(cfg.sim_split_threshold, 0.2);
        assert!(validate_config(&cfg).is_ok());
    }

    #[test]
    fn zero_window_is_rejected() {
        let cfg = EngineConfig { n: 0, ..Default::default() };
        let res = validate_config(&cfg);
        assert_eq!(res.violations().len(), 1);
        assert_eq!(res.violations()[0].field, "n");
        assert_eq!(res.violations()[0].constraint, "n ≥ 1");
    }

    #[test]
    fn out_of_range_threshold_is_rejected() {
        let cfg = EngineConfig { thres: 1.5, ..Default::default() };
        let res = validate_config(&cfg);
        assert_eq!(res.violations()[0].constraint, "thres ∈ [0,1]");
    }

    #[test]
    fn all_violations_reported() {
        let cfg = EngineConfig { n: 0, m: 0, orientation_unit_deg: 200.0, ..Default::default() };
        let fields: Vec<_> = validate_config(&cfg).violations().iter().map(|v| v.field).collect();
        assert_eq!(fields, vec!["n", "m", "orientation_unit_deg"]);
    }

    #[test]
    fn config_file_overrides_defaults() {
        let cfg = EngineConfig::from_toml_str(
            "n = 4\nthres = 0.5\ntier_latencies = { detailed = 6.0 }\n",
        )
        .unwrap();
        assert_eq!(cfg.n, 4);
        assert_eq!(cfg.thres, 0.5);
        assert_eq!(cfg.tier_latencies.detailed, 6.0);
        assert_eq!(cfg.tier_latencies.label, 0.1);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = EngineConfig::from_toml_str("n = 5\nbogus_key = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus_key"), "{err}");
    }

    #[test]
    fn invalid_values_in_file_are_rejected() {
        let err = EngineConfig::from_toml_str("m = 0\n").unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)));
    }

    #[test]
    fn full_config_roundtrips_through_file_format() {
        let cfg = EngineConfig { n: 7, volume_high: 2.0, ..Default::default() };
        let parsed = EngineConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn merged_prefers_later_layer() {
        let a = ConfigOverrides { n: Some(3), m: Some(2), ..Default::default() };
        let b = ConfigOverrides { n: Some(9), ..Default::default() };
        let m = a.merged(&b);
        assert_eq!((m.n, m.m), (Some(9), Some(2)));
    }
}
