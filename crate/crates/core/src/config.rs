//! Run configuration files.
//!
//! Only `params` is required; every other section falls back to defaults,
//! and [`RunConfig::to_json_value`] echoes the fully resolved values.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::experiments::{SuiteSettings, ThresholdConfig};
use crate::homotopy::GSpec;
use crate::params::KineticParams;
use crate::pulses::PulseConfig;
use crate::waves::WaveConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HomotopyConfig {
    pub tau1: f64,
    /// Replaces the constructed bump.
    pub g: Option<GSpec>,
}

impl Default for HomotopyConfig {
    fn default() -> Self {
        Self { tau1: 0.5, g: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub label: String,
    pub params: KineticParams,
    pub homotopy: HomotopyConfig,
    /// `tau` values for stability, speed and construction checks.
    pub tau_grid: Vec<f64>,
    pub wave: WaveConfig,
    pub pulse: PulseConfig,
    pub threshold: ThresholdConfig,
    /// Seed for sampled checks.
    pub seed: u64,
    /// Number of sampled states per `tau` in the monotonicity check.
    pub samples: usize,
}

const TOP_KEYS: [&str; 9] = [
    "label",
    "params",
    "homotopy",
    "tau_grid",
    "wave",
    "pulse",
    "threshold",
    "seed",
    "samples",
];

fn section<T: for<'de> Deserialize<'de> + Default>(
    obj: &Map<String, Value>,
    key: &str,
) -> Result<T> {
    match obj.get(key) {
        None => Ok(T::default()),
        Some(v) => {
            serde_json::from_value(v.clone()).map_err(|e| Error::Schema(format!("{key}: {e}")))
        }
    }
}

/// `0, 0.25, tau1, 0.75, 1`, sorted and deduplicated.
pub fn default_tau_grid(tau1: f64) -> Vec<f64> {
    normalize_tau_grid(vec![0.0, 0.25, tau1, 0.75, 1.0])
}

fn normalize_tau_grid(mut grid: Vec<f64>) -> Vec<f64> {
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

impl RunConfig {
    pub fn new(params: KineticParams) -> Self {
        let homotopy = HomotopyConfig::default();
        Self {
            label: "run".into(),
            params,
            tau_grid: default_tau_grid(homotopy.tau1),
            homotopy,
            wave: WaveConfig::default(),
            pulse: PulseConfig::default(),
            threshold: ThresholdConfig::default(),
            seed: 0,
            samples: 1000,
        }
    }

    pub fn from_json_value(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Schema("config must be a JSON object".into()))?;
        if let Some(key) = obj.keys().find(|k| !TOP_KEYS.contains(&k.as_str())) {
            return Err(Error::Schema(format!("unknown key \"{key}\"")));
        }
        let params = KineticParams::from_json_value(
            obj.get("params")
                .ok_or_else(|| Error::Schema("missing key \"params\"".into()))?,
        )?;
        let homotopy: HomotopyConfig = section(obj, "homotopy")?;
        let tau_grid = match obj.get("tau_grid") {
            None => default_tau_grid(homotopy.tau1),
            Some(v) => normalize_tau_grid(
                serde_json::from_value(v.clone())
                    .map_err(|e| Error::Schema(format!("tau_grid: {e}")))?,
            ),
        };
        let label = match obj.get("label") {
            None => "run".to_string(),
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(Error::Schema("label must be a string".into())),
        };
        let seed = match obj.get("seed") {
            None => 0,
            Some(v) => v
                .as_u64()
                .ok_or_else(|| Error::Schema("seed must be a nonnegative integer".into()))?,
        };
        let samples = match obj.get("samples") {
            None => 1000,
            Some(v) => v
                .as_u64()
                .ok_or_else(|| Error::Schema("samples must be a nonnegative integer".into()))?
                as usize,
        };
        let cfg = Self {
            label,
            params,
            homotopy,
            tau_grid,
            wave: section(obj, "wave")?,
            pulse: section(obj, "pulse")?,
            threshold: section(obj, "threshold")?,
            seed,
            samples,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::Schema(format!("invalid JSON: {e}")))?;
        Self::from_json_value(&value)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let tau1 = self.homotopy.tau1;
        if !(tau1 > 0.0 && tau1 < 1.0) {
            return Err(Error::Schema("homotopy.tau1 must lie in (0, 1)".into()));
        }
        if self.tau_grid.is_empty() || self.tau_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::Schema(
                "tau_grid must be a nonempty list in [0, 1]".into(),
            ));
        }
        if self.samples == 0 {
            return Err(Error::Schema("samples must be > 0".into()));
        }
        self.wave.validate()?;
        self.pulse.validate()?;
        self.threshold.validate()
    }

    /// Resolved configuration, defaults included.
    pub fn to_json_value(&self) -> Value {
        let mut map = Map::new();
        map.insert("label".into(), Value::from(self.label.clone()));
        map.insert("params".into(), self.params.to_json_value());
        map.insert(
            "homotopy".into(),
            serde_json::to_value(self.homotopy).expect("plain data"),
        );
        map.insert("tau_grid".into(), Value::from(self.tau_grid.clone()));
        map.insert(
            "wave".into(),
            serde_json::to_value(self.wave).expect("plain data"),
        );
        map.insert(
            "pulse".into(),
            serde_json::to_value(self.pulse).expect("plain data"),
        );
        map.insert(
            "threshold".into(),
            serde_json::to_value(&self.threshold).expect("plain data"),
        );
        map.insert("seed".into(), Value::from(self.seed));
        map.insert("samples".into(), Value::from(self.samples));
        Value::Object(map)
    }

    /// Doubles spatial resolution everywhere.
    pub fn refined(&self) -> Self {
        Self {
            wave: self.wave.refined(),
            pulse: self.pulse.refined(),
            threshold: self.threshold.refined(),
            ..self.clone()
        }
    }

    pub fn suite_settings(&self) -> SuiteSettings {
        SuiteSettings {
            label: self.label.clone(),
            tau1: self.homotopy.tau1,
            g: self.homotopy.g,
            tau_grid: self.tau_grid.clone(),
            wave: self.wave,
            pulse: self.pulse,
            threshold: self.threshold.clone(),
        }
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    RunConfig::from_json_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params_json() -> Value {
        KineticParams::unit().to_json_value()
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg =
            RunConfig::from_json_value(&serde_json::json!({ "params": params_json() })).unwrap();
        assert_eq!(cfg, RunConfig::new(KineticParams::unit()));
        assert_eq!(cfg.tau_grid, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn echo_round_trips() {
        let cfg = RunConfig::new(KineticParams::unit());
        let back = RunConfig::from_json_value(&cfg.to_json_value()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err =
            RunConfig::from_json_value(&serde_json::json!({ "params": params_json(), "grid": {} }))
                .unwrap_err();
        assert!(err.to_string().contains("grid"));
        let err = RunConfig::from_json_value(
            &serde_json::json!({ "params": params_json(), "wave": { "cels": 10 } }),
        )
        .unwrap_err();
        assert!(err.to_string().contains("cels"));
    }

    #[test]
    fn bad_tau1() {
        let v = serde_json::json!({ "params": params_json(), "homotopy": { "tau1": 1.0 } });
        assert!(RunConfig::from_json_value(&v).is_err());
    }
}
