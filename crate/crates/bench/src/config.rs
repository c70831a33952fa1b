//! JSON run configuration.
//!
//! ```json
//! {
//!   "study": "resonances_C2",
//!   "provider": { "kind": "analytic", "cable": "C2", "environment": "sea" },
//!   "grid": { "f_min": 0.5, "f_max": 2000, "points": 400, "spacing": "log", "refine_levels": 3 },
//!   "length_m": 99650,
//!   "band_pct": 10
//! }
//! ```
//!
//! Every field except `study` is optional and falls back to the study's
//! default. Relative paths resolve against the config file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use tcac_core::geometry::{Environment, Medium};
use tcac_core::pul::EngineOptions;
use tcac_core::tline::FrequencyGrid;
use tcac_core::Sequence;

use crate::error::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnvironmentChoice {
    Preset(Medium),
    Custom(Environment),
}

impl EnvironmentChoice {
    pub fn resolve(self) -> Environment {
        match self {
            EnvironmentChoice::Preset(Medium::Sea) => Environment::sea(),
            EnvironmentChoice::Preset(Medium::Air) => Environment::air(),
            EnvironmentChoice::Custom(env) => env,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProviderConfig {
    /// Filament model of a cable from the cable fixture.
    Analytic {
        cable: String,
        #[serde(default)]
        environment: Option<EnvironmentChoice>,
        /// μ_r(H) curve fixture replacing the cable's armor permeability.
        #[serde(default)]
        mu_curve: Option<String>,
    },
    /// Per-unit-length table in CSV form.
    Table {
        path: PathBuf,
        #[serde(default)]
        id: Option<String>,
    },
    /// A table shipped with the tool, by fixture name.
    Bundled { name: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergizeConfig {
    #[serde(default)]
    pub lengths_m: Option<Vec<f64>>,
    #[serde(default)]
    pub horizon_s: Option<f64>,
    #[serde(default)]
    pub samples: Option<usize>,
    /// RMS phase-to-ground source voltage (V).
    #[serde(default)]
    pub source_rms_v: Option<f64>,
    /// Damping σ (1/s) of the frequency sampling.
    #[serde(default)]
    pub damping_per_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MfieldConfig {
    #[serde(default)]
    pub ml1_m: Option<Vec<f64>>,
    #[serde(default)]
    pub ml2_m: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub study: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Directory holding fixture files with the bundled names.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixtures_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provider: Option<ProviderConfig>,
    #[serde(default)]
    pub engine: EngineOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<FrequencyGrid>,
    /// Explicit analysis frequencies (Hz) for the per-frequency studies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_current_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequences: Option<Vec<Sequence>>,
    /// Measurement series by key, overriding or adding to the study's
    /// bundled ones.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub measurements: BTreeMap<String, PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_pct: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energize: Option<EnergizeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mfield: Option<MfieldConfig>,
}

impl StudyConfig {
    pub fn new(study: impl Into<String>) -> Self {
        Self {
            study: study.into(),
            label: None,
            fixtures_dir: None,
            provider: None,
            engine: EngineOptions::default(),
            grid: None,
            frequencies: None,
            phase_current_a: None,
            length_m: None,
            sequences: None,
            measurements: BTreeMap::new(),
            band_pct: None,
            energize: None,
            mfield: None,
        }
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, BenchError> {
        serde_json::from_str(text).map_err(|e| BenchError::Config {
            path: origin.to_string(),
            reason: e.to_string(),
        })
    }

    /// Reads a config file and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Config {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let mut cfg = Self::parse(&text, &path.display().to_string())?;
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(d) = self.fixtures_dir.as_mut() {
            fix(d);
        }
        if let Some(ProviderConfig::Table { path, .. }) = self.provider.as_mut() {
            fix(path);
        }
        self.measurements.values_mut().for_each(fix);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_and_full_configs_parse() {
        let c = StudyConfig::parse(r#"{"study": "sheath_C3"}"#, "mem").unwrap();
        assert_eq!(c.study, "sheath_C3");
        assert_eq!(c.engine, EngineOptions::default());

        let c = StudyConfig::parse(
            r#"{
                "study": "resonances_C2",
                "provider": {"kind": "analytic", "cable": "C2", "environment": "sea"},
                "grid": {"f_min": 1, "f_max": 100, "points": 10},
                "engine": {"mesh": {"density": 1.5}},
                "measurements": {"sc": "m/sc.csv"}
            }"#,
            "mem",
        )
        .unwrap();
        assert_eq!(c.grid.unwrap().points, 10);
        assert_eq!(c.engine.mesh.density, 1.5);
        match c.provider.unwrap() {
            ProviderConfig::Analytic { environment, .. } => {
                assert_eq!(environment.unwrap().resolve(), Environment::sea())
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_violations_are_rejected_with_the_path() {
        let err = StudyConfig::parse(r#"{"study": "x", "colour": 1}"#, "cfg.json").unwrap_err().to_string();
        assert!(err.contains("cfg.json") && err.contains("colour"), "{err}");
        assert!(StudyConfig::parse(r#"{"provider": {"kind": "bundled", "name": "a"}}"#, "m").is_err());
    }

    #[test]
    fn relative_paths_resolve_against_the_config() {
        let mut c = StudyConfig::parse(
            r#"{"study": "x", "provider": {"kind": "table", "path": "t.csv"}, "measurements": {"a": "/abs.csv"}}"#,
            "m",
        )
        .unwrap();
        c.resolve_paths(Path::new("/base"));
        assert_eq!(c.provider, Some(ProviderConfig::Table { path: "/base/t.csv".into(), id: None }));
        assert_eq!(c.measurements["a"], PathBuf::from("/abs.csv"));
    }
}
