//! Bundled fixtures, embedded in the binary, with optional on-disk overrides.

use std::path::{Path, PathBuf};

use tcac_core::geometry::{parse_cables, ArmorPermeability, MuCurve, MuCurveFile};
use tcac_core::pul::{PulError, PulTable};
use tcac_core::CableSpec;

use crate::error::BenchError;
use crate::measurement::MeasurementSeries;

pub const CABLES: &str = "cables.json";
pub const SHEATH_CURRENT_C3: &str = "sheath_current_c3.csv";
pub const SHEATH_CURRENT_C3_REFERENCE: &str = "sheath_current_c3_reference.csv";
pub const RESONANCES_C2_SC: &str = "resonances_c2_sc.csv";
pub const RESONANCES_C2_OC: &str = "resonances_c2_oc.csv";
pub const RESONANCES_C2_SC_REFERENCE: &str = "resonances_c2_sc_reference.csv";
pub const RESONANCES_C2_OC_REFERENCE: &str = "resonances_c2_oc_reference.csv";
pub const OPEN_END_RESONANCES_C2_10KM: &str = "open_end_resonances_c2_10km.csv";
pub const OPEN_END_RESONANCES_C2_99KM: &str = "open_end_resonances_c2_99km.csv";
pub const C2_CONSTANT_TABLE: &str = "c2_constant.csv";
pub const MU_CURVE_PLACEHOLDER: &str = "mu_curve_placeholder.json";

const BUNDLED: &[(&str, &str)] = &[
    (CABLES, include_str!("../fixtures/cables.json")),
    (SHEATH_CURRENT_C3, include_str!("../fixtures/sheath_current_c3.csv")),
    (SHEATH_CURRENT_C3_REFERENCE, include_str!("../fixtures/sheath_current_c3_reference.csv")),
    (RESONANCES_C2_SC, include_str!("../fixtures/resonances_c2_sc.csv")),
    (RESONANCES_C2_OC, include_str!("../fixtures/resonances_c2_oc.csv")),
    (RESONANCES_C2_SC_REFERENCE, include_str!("../fixtures/resonances_c2_sc_reference.csv")),
    (RESONANCES_C2_OC_REFERENCE, include_str!("../fixtures/resonances_c2_oc_reference.csv")),
    (OPEN_END_RESONANCES_C2_10KM, include_str!("../fixtures/open_end_resonances_c2_10km.csv")),
    (OPEN_END_RESONANCES_C2_99KM, include_str!("../fixtures/open_end_resonances_c2_99km.csv")),
    (C2_CONSTANT_TABLE, include_str!("../fixtures/c2_constant.csv")),
    (MU_CURVE_PLACEHOLDER, include_str!("../fixtures/mu_curve_placeholder.json")),
];

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

/// Where fixtures are read from. Names resolve against `dir` when set and
/// against the embedded copies otherwise; explicit paths always hit the disk.
#[derive(Debug, Clone, Default)]
pub struct FixtureSet {
    pub dir: Option<PathBuf>,
}

/// Contents of a fixture and the origin used in messages and reports.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub origin: String,
    pub text: String,
}

pub fn read_path(path: &Path) -> Result<Loaded, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::Fixture {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    Ok(Loaded {
        origin: path.display().to_string(),
        text,
    })
}

impl FixtureSet {
    pub fn bundled() -> Self {
        Self { dir: None }
    }

    pub fn from_dir(dir: impl Into<PathBuf>) -> Self {
        Self { dir: Some(dir.into()) }
    }

    pub fn read(&self, name: &str) -> Result<Loaded, BenchError> {
        match &self.dir {
            Some(dir) => read_path(&dir.join(name)),
            None => BUNDLED
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(n, text)| Loaded {
                    origin: format!("bundled:{n}"),
                    text: (*text).to_string(),
                })
                .ok_or_else(|| BenchError::Fixture {
                    path: format!("bundled:{name}"),
                    reason: format!("no such bundled fixture (have: {})", bundled_names().join(", ")),
                }),
        }
    }

    pub fn cables(&self) -> Result<Vec<CableSpec>, BenchError> {
        let f = self.read(CABLES)?;
        Ok(parse_cables(&f.text, &f.origin)?)
    }

    pub fn cable(&self, name: &str) -> Result<CableSpec, BenchError> {
        find_cable(self.cables()?, name, &self.read(CABLES)?.origin)
    }

    pub fn measurement(&self, name: &str) -> Result<MeasurementSeries, BenchError> {
        let f = self.read(name)?;
        MeasurementSeries::parse(&f.text, &f.origin)
    }

    pub fn table(&self, name: &str) -> Result<PulTable, BenchError> {
        let f = self.read(name)?;
        parse_table(&f)
    }

    pub fn mu_curve(&self, name: &str) -> Result<ArmorPermeability, BenchError> {
        parse_mu_curve(&self.read(name)?)
    }
}

pub fn find_cable(cables: Vec<CableSpec>, name: &str, origin: &str) -> Result<CableSpec, BenchError> {
    let names: Vec<String> = cables.iter().map(|c| c.name.clone()).collect();
    cables
        .into_iter()
        .find(|c| c.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| BenchError::Fixture {
            path: origin.to_string(),
            reason: format!("no cable named `{name}` (have: {})", names.join(", ")),
        })
}

pub fn parse_table(f: &Loaded) -> Result<PulTable, BenchError> {
    PulTable::read_csv(f.text.as_bytes()).map_err(|e| match e {
        PulError::InvalidTable(reason) => BenchError::Fixture {
            path: f.origin.clone(),
            reason,
        },
        other => BenchError::Fixture {
            path: f.origin.clone(),
            reason: other.to_string(),
        },
    })
}

pub fn parse_mu_curve(f: &Loaded) -> Result<ArmorPermeability, BenchError> {
    let file: MuCurveFile = serde_json::from_str(&f.text).map_err(|e| BenchError::Fixture {
        path: f.origin.clone(),
        reason: e.to_string(),
    })?;
    let curve = MuCurve::new(file.curve).map_err(|e| BenchError::Fixture {
        path: f.origin.clone(),
        reason: e.to_string(),
    })?;
    Ok(ArmorPermeability::Curve {
        curve,
        operating_h: file.operating_h_a_per_m,
    })
}
