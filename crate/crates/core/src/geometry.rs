//! Cable description and the closed-form length scales of a TCAC.
//!
//! All quantities are SI internally. The JSON exchange format (see
//! [`CableSpecFile`]) uses the customary engineering units with explicit
//! suffixes in the field names (`d_c_mm`, `sigma_c_ms_per_m`, ...).

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::MU0;

/// Effective armor permeability used when a curve is given without an
/// operating point.
pub const FALLBACK_ARMOR_MU_R: f64 = 300.0;

/// Default sea resistivity (Ω·m).
pub const SEA_RESISTIVITY: f64 = 0.2;

/// Resistivity assumed for the ground beneath a laboratory setup (Ω·m).
pub const LAB_GROUND_RESISTIVITY: f64 = 100.0;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid cable spec `{cable}`: {field} {reason}")]
    InvalidSpec {
        cable: String,
        field: &'static str,
        reason: String,
    },
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("cable file {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("cable file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConductorMaterial {
    #[serde(alias = "cu")]
    Copper,
    #[serde(alias = "al", alias = "aluminium")]
    Aluminum,
}

/// Relative twist direction of armor wires and power cores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Twist {
    #[serde(alias = "cont.", alias = "cont")]
    Contralay,
    Unilay,
}

/// Piecewise-linear table of `(x, y)` samples with strictly increasing `x`.
/// Evaluation clamps to the end samples outside the tabulated range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SampleTable {
    samples: Vec<(f64, f64)>,
}

impl SampleTable {
    fn new(samples: Vec<(f64, f64)>, what: &str) -> Result<Self, GeometryError> {
        if samples.is_empty() {
            return Err(GeometryError::InvalidCurve(format!("{what}: no samples")));
        }
        if samples.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(GeometryError::InvalidCurve(format!("{what}: non-finite sample")));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(GeometryError::InvalidCurve(format!(
                "{what}: abscissa must be strictly increasing"
            )));
        }
        Ok(Self { samples })
    }

    fn eval_with(&self, x: f64, warp: impl Fn(f64) -> f64) -> f64 {
        let s = &self.samples;
        if x <= s[0].0 {
            return s[0].1;
        }
        let last = s[s.len() - 1];
        if x >= last.0 {
            return last.1;
        }
        let i = s.partition_point(|(xi, _)| *xi <= x) - 1;
        let (x0, y0) = s[i];
        let (x1, y1) = s[i + 1];
        let t = (warp(x) - warp(x0)) / (warp(x1) - warp(x0));
        y0 + t * (y1 - y0)
    }
}

/// Relative permeability of armor steel as a function of field strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuCurve {
    table: SampleTable,
}

impl MuCurve {
    /// `samples` are `(H [A/m], μ_r)` pairs.
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self, GeometryError> {
        if samples.iter().any(|&(_, mu)| mu < 1.0) {
            return Err(GeometryError::InvalidCurve("mu_r must be >= 1".into()));
        }
        Ok(Self {
            table: SampleTable::new(samples, "mu curve")?,
        })
    }

    pub fn eval(&self, h: f64) -> f64 {
        self.table.eval_with(h, |x| x)
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.table.samples
    }
}

/// Dielectric loss factor as a function of frequency. Interpolated linearly in
/// log-frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossTangentCurve {
    table: SampleTable,
}

impl LossTangentCurve {
    /// `samples` are `(f [Hz], tan δ)` pairs.
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self, GeometryError> {
        if samples.iter().any(|&(f, t)| f <= 0.0 || t < 0.0) {
            return Err(GeometryError::InvalidCurve(
                "loss tangent needs f > 0 and tan δ >= 0".into(),
            ));
        }
        Ok(Self {
            table: SampleTable::new(samples, "loss tangent curve")?,
        })
    }

    pub fn eval(&self, f: f64) -> f64 {
        self.table.eval_with(f.max(f64::MIN_POSITIVE), f64::ln)
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.table.samples
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArmorPermeability {
    Scalar(f64),
    Curve {
        curve: MuCurve,
        /// Field strength (A/m) at which the curve is read.
        operating_h: Option<f64>,
    },
}

impl ArmorPermeability {
    /// Scalar μ_r used by the analytic engine.
    pub fn effective(&self) -> f64 {
        match self {
            ArmorPermeability::Scalar(mu) => *mu,
            ArmorPermeability::Curve {
                curve,
                operating_h: Some(h),
            } => curve.eval(*h),
            ArmorPermeability::Curve { .. } => FALLBACK_ARMOR_MU_R,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LossTangent {
    Scalar(f64),
    Curve(LossTangentCurve),
}

impl LossTangent {
    pub fn at(&self, f: f64) -> f64 {
        match self {
            LossTangent::Scalar(t) => *t,
            LossTangent::Curve(c) => c.eval(f),
        }
    }
}

/// Geometric and material description of one three-core armored cable.
#[derive(Debug, Clone, PartialEq)]
pub struct CableSpec {
    pub name: String,
    /// V
    pub rated_voltage: f64,
    /// A
    pub rated_current: f64,
    /// Nominal conductor cross-section (m²).
    pub conductor_section: f64,
    pub conductor_material: ConductorMaterial,
    pub conductor_diameter: f64,
    pub sheath_outer_diameter: f64,
    pub sheath_thickness: f64,
    pub core_diameter: f64,
    pub armor_diameter: f64,
    pub armor_wire_diameter: f64,
    pub armor_wires: u32,
    /// Magnitude of the armor lay length (m); the sign comes from `twist`.
    pub armor_lay: f64,
    pub core_lay: f64,
    pub twist: Twist,
    /// °C
    pub ambient_temp: f64,
    /// S/m, at test temperature.
    pub sigma_conductor: f64,
    pub sigma_sheath: f64,
    pub sigma_armor: f64,
    pub armor_mu: ArmorPermeability,
    pub eps_r: Option<f64>,
    pub tan_delta: Option<LossTangent>,
    /// Tested link length (m).
    pub cable_length: Option<f64>,
    /// F/m
    pub capacitance_override: Option<f64>,
    /// Some inputs were estimated rather than taken from the cable's data.
    pub estimated: bool,
    pub notes: Option<String>,
}

impl CableSpec {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |field: &'static str, reason: &str| GeometryError::InvalidSpec {
            cable: self.name.clone(),
            field,
            reason: reason.to_string(),
        };
        let positive = [
            ("conductor_section", self.conductor_section),
            ("d_c", self.conductor_diameter),
            ("D_s", self.sheath_outer_diameter),
            ("e_s", self.sheath_thickness),
            ("D_core", self.core_diameter),
            ("D_a", self.armor_diameter),
            ("d_a", self.armor_wire_diameter),
            ("L_a", self.armor_lay),
            ("L_c", self.core_lay),
            ("sigma_c", self.sigma_conductor),
            ("sigma_s", self.sigma_sheath),
            ("sigma_a", self.sigma_armor),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(bad(field, "must be finite and strictly positive"));
            }
        }
        if self.armor_wires < 1 {
            return Err(bad("N", "must be at least 1"));
        }
        if self.sheath_thickness >= self.sheath_outer_diameter / 2.0 {
            return Err(bad("e_s", "must be smaller than D_s/2"));
        }
        if self.conductor_diameter >= self.sheath_outer_diameter - 2.0 * self.sheath_thickness {
            return Err(bad("d_c", "must fit inside the sheath bore"));
        }
        if self.sheath_outer_diameter > self.core_diameter {
            return Err(bad("D_s", "must not exceed D_core"));
        }
        if self.core_diameter >= self.armor_diameter {
            return Err(bad("D_core", "must be smaller than D_a"));
        }
        if self.armor_wire_diameter >= self.armor_diameter / 2.0 {
            return Err(bad("d_a", "must be smaller than D_a/2"));
        }
        let mu = self.armor_mu.effective();
        if !(mu.is_finite() && mu >= 1.0) {
            return Err(bad("mu_r", "must be >= 1"));
        }
        if let Some(eps) = self.eps_r {
            if !(eps.is_finite() && eps >= 1.0) {
                return Err(bad("eps_r", "must be >= 1"));
            }
        }
        if let Some(LossTangent::Scalar(t)) = self.tan_delta {
            if !(t.is_finite() && t >= 0.0) {
                return Err(bad("tan_delta", "must be >= 0"));
            }
        }
        if let Some(c) = self.capacitance_override {
            if !(c.is_finite() && c > 0.0) {
                return Err(bad("capacitance", "must be strictly positive"));
            }
        }
        if let Some(l) = self.cable_length {
            if !(l.is_finite() && l > 0.0) {
                return Err(bad("L_cable", "must be strictly positive"));
            }
        }
        Ok(())
    }

    /// Armor lay length with the twist sign applied: negative for contralay.
    pub fn signed_armor_lay(&self) -> f64 {
        match self.twist {
            Twist::Contralay => -self.armor_lay,
            Twist::Unilay => self.armor_lay,
        }
    }

    /// Radius of the (solid-equivalent) phase conductor.
    pub fn conductor_radius(&self) -> f64 {
        self.conductor_diameter / 2.0
    }

    /// Inner and outer radius of the metallic sheath.
    pub fn sheath_radii(&self) -> (f64, f64) {
        let outer = self.sheath_outer_diameter / 2.0;
        (outer - self.sheath_thickness, outer)
    }

    /// Distance from the cable axis to each power-core axis. The three cores
    /// touch each other, so the core centres form an equilateral triangle of
    /// side `D_core`.
    pub fn core_center_radius(&self) -> f64 {
        self.core_diameter / 3f64.sqrt()
    }

    /// Radius at which the armor wire centres sit.
    pub fn armor_center_radius(&self) -> f64 {
        self.armor_diameter / 2.0 - self.armor_wire_diameter / 2.0
    }

    /// DC resistance of one phase conductor (Ω/m).
    pub fn conductor_dc_resistance(&self) -> f64 {
        1.0 / (self.sigma_conductor * self.conductor_section)
    }

    pub fn loss_tangent(&self, f: f64) -> f64 {
        self.tan_delta.as_ref().map_or(0.0, |t| t.at(f))
    }
}

/// Length of the shortest axial slice over which the cable cross-section
/// repeats up to a rotation.
pub fn slice_length(spec: &CableSpec) -> Result<f64, GeometryError> {
    slice_length_raw(spec.armor_wires, spec.core_lay, spec.signed_armor_lay())
}

/// Slice length from the armor wire count and *signed* lay lengths.
pub fn slice_length_raw(n_wires: u32, core_lay: f64, signed_armor_lay: f64) -> Result<f64, GeometryError> {
    if core_lay == 0.0 || signed_armor_lay == 0.0 {
        return Err(GeometryError::Degenerate("lay lengths must be non-zero".into()));
    }
    if n_wires == 0 {
        return Err(GeometryError::Degenerate("no armor wires".into()));
    }
    let beat = (1.0 / core_lay - 1.0 / signed_armor_lay).abs();
    if beat == 0.0 {
        return Err(GeometryError::Degenerate(
            "armor and core lays coincide: the slice is infinitely long".into(),
        ));
    }
    Ok(1.0 / (f64::from(n_wires) * beat))
}

/// Rotation between the two periodic faces of the slice (rad).
pub fn rotation_angle(spec: &CableSpec) -> Result<f64, GeometryError> {
    Ok(2.0 * PI * slice_length(spec)? / spec.core_lay)
}

/// Equivalent return depth of current in a conductive medium (m).
pub fn carson_depth(rho: f64, f: f64) -> Result<f64, GeometryError> {
    if !(f > 0.0 && f.is_finite()) {
        return Err(GeometryError::Domain(format!("carson depth needs f > 0, got {f}")));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(GeometryError::Domain(format!("carson depth needs rho > 0, got {rho}")));
    }
    Ok(503.0 * (rho / f).sqrt())
}

/// Penetration depth of AC current in a conductor (m).
pub fn skin_depth(sigma: f64, mu_r: f64, f: f64) -> Result<f64, GeometryError> {
    if !(sigma > 0.0 && mu_r > 0.0 && f > 0.0) || !(sigma * mu_r * f).is_finite() {
        return Err(GeometryError::Domain(format!(
            "skin depth needs positive inputs, got sigma={sigma}, mu_r={mu_r}, f={f}"
        )));
    }
    Ok(1.0 / (PI * f * MU0 * mu_r * sigma).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Medium {
    Air,
    Sea,
}

/// How far away the return path through the surrounding medium is placed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnDistance {
    CarsonAuto,
    Fixed(f64),
}

/// Medium surrounding the cable, used for the zero-sequence return path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub medium: Medium,
    /// Ω·m
    pub rho_medium: f64,
    pub return_distance: ReturnDistance,
}

impl Environment {
    pub fn sea() -> Self {
        Self {
            medium: Medium::Sea,
            rho_medium: SEA_RESISTIVITY,
            return_distance: ReturnDistance::CarsonAuto,
        }
    }

    /// Cable in air above laboratory ground.
    pub fn air() -> Self {
        Self {
            medium: Medium::Air,
            rho_medium: LAB_GROUND_RESISTIVITY,
            return_distance: ReturnDistance::CarsonAuto,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.rho_medium > 0.0 && self.rho_medium.is_finite()) {
            return Err(GeometryError::Domain(format!(
                "rho_medium must be > 0, got {}",
                self.rho_medium
            )));
        }
        if let ReturnDistance::Fixed(d) = self.return_distance {
            if !(d > 0.0 && d.is_finite()) {
                return Err(GeometryError::Domain(format!("return distance must be > 0, got {d}")));
            }
        }
        Ok(())
    }

    /// Distance to the equivalent return path at frequency `f` (m).
    pub fn return_distance_at(&self, f: f64) -> Result<f64, GeometryError> {
        match self.return_distance {
            ReturnDistance::CarsonAuto => carson_depth(self.rho_medium, f),
            ReturnDistance::Fixed(d) => Ok(d),
        }
    }
}

// ---------------------------------------------------------------------------
// JSON exchange format
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrCurve<C> {
    Scalar(f64),
    Curve(C),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuCurveFile {
    /// `[H_a_per_m, mu_r]` pairs.
    pub curve: Vec<(f64, f64)>,
    #[serde(default)]
    pub operating_h_a_per_m: Option<f64>,
    #[serde(default = "default_true")]
    pub authoritative: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossTangentFile {
    /// `[f_hz, tan_delta]` pairs.
    pub curve: Vec<(f64, f64)>,
    #[serde(default = "default_true")]
    pub authoritative: bool,
}

fn default_true() -> bool {
    true
}

/// On-disk form of a [`CableSpec`]; field names follow the usual datasheet
/// symbols with unit suffixes.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CableSpecFile {
    pub name: String,
    pub V_r_kv: f64,
    pub I_max_a: f64,
    pub S_n_mm2: f64,
    pub material: ConductorMaterial,
    pub d_c_mm: f64,
    pub D_s_mm: f64,
    pub e_s_mm: f64,
    pub D_core_mm: f64,
    pub D_a_mm: f64,
    pub d_a_mm: f64,
    pub N: u32,
    pub L_a_m: f64,
    pub L_c_m: f64,
    pub twist: Twist,
    pub T_amb_c: f64,
    pub sigma_c_ms_per_m: f64,
    pub sigma_s_ms_per_m: f64,
    pub sigma_a_ms_per_m: f64,
    pub mu_r: ScalarOrCurve<MuCurveFile>,
    #[serde(default)]
    pub eps_r: Option<f64>,
    #[serde(default)]
    pub tan_delta: Option<ScalarOrCurve<LossTangentFile>>,
    #[serde(default)]
    pub L_cable_m: Option<f64>,
    #[serde(default)]
    pub capacitance_nf_per_km: Option<f64>,
    #[serde(default)]
    pub estimated: bool,
    #[serde(default)]
    pub notes: Option<String>,
}

impl CableSpecFile {
    pub fn into_spec(self) -> Result<CableSpec, GeometryError> {
        let mm = 1e-3;
        let armor_mu = match self.mu_r {
            ScalarOrCurve::Scalar(mu) => ArmorPermeability::Scalar(mu),
            ScalarOrCurve::Curve(c) => ArmorPermeability::Curve {
                curve: MuCurve::new(c.curve)?,
                operating_h: c.operating_h_a_per_m,
            },
        };
        let tan_delta = match self.tan_delta {
            None => None,
            Some(ScalarOrCurve::Scalar(t)) => Some(LossTangent::Scalar(t)),
            Some(ScalarOrCurve::Curve(c)) => Some(LossTangent::Curve(LossTangentCurve::new(c.curve)?)),
        };
        let spec = CableSpec {
            name: self.name,
            rated_voltage: self.V_r_kv * 1e3,
            rated_current: self.I_max_a,
            conductor_section: self.S_n_mm2 * 1e-6,
            conductor_material: self.material,
            conductor_diameter: self.d_c_mm * mm,
            sheath_outer_diameter: self.D_s_mm * mm,
            sheath_thickness: self.e_s_mm * mm,
            core_diameter: self.D_core_mm * mm,
            armor_diameter: self.D_a_mm * mm,
            armor_wire_diameter: self.d_a_mm * mm,
            armor_wires: self.N,
            armor_lay: self.L_a_m,
            core_lay: self.L_c_m,
            twist: self.twist,
            ambient_temp: self.T_amb_c,
            sigma_conductor: self.sigma_c_ms_per_m * 1e6,
            sigma_sheath: self.sigma_s_ms_per_m * 1e6,
            sigma_armor: self.sigma_a_ms_per_m * 1e6,
            armor_mu,
            eps_r: self.eps_r,
            tan_delta,
            cable_length: self.L_cable_m,
            capacitance_override: self.capacitance_nf_per_km.map(|c| c * 1e-12),
            estimated: self.estimated,
            notes: self.notes,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    Many(Vec<CableSpecFile>),
    One(Box<CableSpecFile>),
}

/// Parses a JSON document holding one cable object or an array of them.
pub fn parse_cables(json: &str, origin: &str) -> Result<Vec<CableSpec>, GeometryError> {
    let parsed: OneOrMany = serde_json::from_str(json).map_err(|source| GeometryError::Json {
        path: origin.to_string(),
        source,
    })?;
    let files = match parsed {
        OneOrMany::Many(v) => v,
        OneOrMany::One(c) => vec![*c],
    };
    files.into_iter().map(CableSpecFile::into_spec).collect()
}

pub fn load_cables(path: &Path) -> Result<Vec<CableSpec>, GeometryError> {
    let text = std::fs::read_to_string(path).map_err(|source| GeometryError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_cables(&text, &path.display().to_string())
}


#[cfg(test)]
mod tests {
    use super::test_cables::*;
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn fixtures_validate() {
        for c in [c1(), c2(), c3()] {
            c.validate().unwrap();
        }
    }

    #[test]
    fn slice_length_matches_table_values() {
        let got: Vec<f64> = [c1(), c2(), c3()]
            .iter()
            .map(|c| slice_length(c).unwrap() * 1e3)
            .collect();
        assert!((got[0] - 7.905).abs() < 5e-4, "{got:?}");
        assert!((got[1] - 11.842).abs() < 5e-4, "{got:?}");
        assert!((got[2] - 13.645).abs() < 5e-4, "{got:?}");
        for (g, table) in got.iter().zip([8.0, 12.0, 14.0]) {
            assert!((g - table).abs() <= 0.5);
        }
    }

    #[test]
    fn single_wire_unilay() {
        assert!((slice_length_raw(1, 1.0, 2.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn equal_unilay_lays_are_degenerate() {
        let mut c = c2();
        c.twist = Twist::Unilay;
        c.armor_lay = c.core_lay;
        assert!(matches!(slice_length(&c), Err(GeometryError::Degenerate(_))));
        assert!(rotation_angle(&c).is_err());
    }

    #[test]
    fn rotation_angles() {
        assert!((rotation_angle(&c2()).unwrap() - 0.027558).abs() < 1e-6);
        assert!((rotation_angle(&c1()).unwrap() - 0.049669).abs() < 1e-6);
    }

    #[test]
    fn carson_depth_values() {
        assert!((carson_depth(0.2, 50.0).unwrap() - 31.81).abs() < 0.01);
        assert!((carson_depth(0.2, 1.0).unwrap() - 224.9).abs() < 0.05);
        let half = carson_depth(0.2, 200.0).unwrap();
        assert!(rel(half, carson_depth(0.2, 50.0).unwrap() / 2.0) < 1e-14);
        assert!(carson_depth(0.2, 0.0).is_err());
        assert!(carson_depth(0.2, -1.0).is_err());
        assert!(carson_depth(0.0, 50.0).is_err());
    }

    #[test]
    fn skin_depth_values() {
        let steel = skin_depth(5.16e6, 300.0, 50.0).unwrap();
        assert!((steel - 1.809e-3).abs() < 1e-6);
        assert!(steel < c2().armor_wire_diameter / 2.0);
        assert!((skin_depth(53.1e6, 1.0, 50.0).unwrap() - 9.77e-3).abs() < 1e-5);
        let d = skin_depth(53.1e6, 1.0, 200.0).unwrap();
        assert!(rel(d, skin_depth(53.1e6, 1.0, 50.0).unwrap() / 2.0) < 1e-14);
        assert!(skin_depth(0.0, 1.0, 50.0).is_err());
        assert!(skin_depth(1.0, -1.0, 50.0).is_err());
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut c = c2();
        c.sheath_thickness = c.sheath_outer_diameter;
        assert!(c.validate().is_err());
        let mut c = c2();
        c.armor_wires = 0;
        assert!(c.validate().is_err());
        let mut c = c2();
        c.core_diameter = c.armor_diameter;
        assert!(c.validate().is_err());
        let mut c = c2();
        c.sigma_armor = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn mu_curve_fallback_and_interpolation() {
        let curve = MuCurve::new(vec![(100.0, 200.0), (1000.0, 600.0), (5000.0, 300.0)]).unwrap();
        assert_eq!(curve.eval(1000.0), 600.0);
        assert!((curve.eval(550.0) - 400.0).abs() < 1e-12);
        assert_eq!(curve.eval(1.0), 200.0);
        let p = ArmorPermeability::Curve {
            curve: curve.clone(),
            operating_h: None,
        };
        assert_eq!(p.effective(), FALLBACK_ARMOR_MU_R);
        let p = ArmorPermeability::Curve {
            curve,
            operating_h: Some(1000.0),
        };
        assert_eq!(p.effective(), 600.0);
        assert!(MuCurve::new(vec![(1.0, 0.5)]).is_err());
        assert!(MuCurve::new(vec![(2.0, 10.0), (1.0, 10.0)]).is_err());
    }

    #[test]
    fn loss_tangent_log_interpolation() {
        let c = LossTangentCurve::new(vec![(10.0, 1e-3), (1000.0, 3e-3)]).unwrap();
        assert!((c.eval(100.0) - 2e-3).abs() < 1e-15);
        assert!(LossTangentCurve::new(vec![(0.0, 1e-3)]).is_err());
    }

    #[test]
    fn json_roundtrip_units() {
        let json = r#"{
            "name": "C2", "V_r_kv": 220, "I_max_a": 675, "S_n_mm2": 630, "material": "cu",
            "d_c_mm": 30.5, "D_s_mm": 92.1, "e_s_mm": 3, "D_core_mm": 97.3, "D_a_mm": 238.6,
            "d_a_mm": 5.6, "N": 120, "L_a_m": 3, "L_c_m": 2.7, "twist": "contralay",
            "T_amb_c": 5, "sigma_c_ms_per_m": 53.1, "sigma_s_ms_per_m": 4.97,
            "sigma_a_ms_per_m": 5.16, "mu_r": {"curve": [[10, 100], [1000, 500]], "authoritative": false},
            "eps_r": 2.5, "tan_delta": 0.0004, "L_cable_m": 99650, "capacitance_nf_per_km": 156.25
        }"#;
        let cables = parse_cables(json, "inline").unwrap();
        assert_eq!(cables.len(), 1);
        let c = &cables[0];
        assert!(rel(c.conductor_diameter, 30.5e-3) < 1e-15);
        assert!(rel(c.capacitance_override.unwrap(), 156.25e-12) < 1e-15);
        assert_eq!(c.armor_mu.effective(), FALLBACK_ARMOR_MU_R);
        assert!(rel(slice_length(c).unwrap(), slice_length(&c2()).unwrap()) < 1e-12);
        let bad = json.replace("\"N\": 120", "\"N\": 0");
        assert!(parse_cables(&bad, "inline").is_err());
        let unknown = json.replace("\"eps_r\"", "\"epsilon\"");
        assert!(parse_cables(&unknown, "inline").is_err());
    }

    proptest! {
        #[test]
        fn slice_length_identity(n in 1u32..400, lc in 0.1f64..10.0, la in 0.1f64..10.0, contra in any::<bool>()) {
            let signed = if contra { -la } else { la };
            prop_assume!((1.0 / lc - 1.0 / signed).abs() > 1e-9);
            let l = slice_length_raw(n, lc, signed).unwrap();
            let check = l * f64::from(n) * (1.0 / lc - 1.0 / signed).abs();
            prop_assert!((check - 1.0).abs() < 1e-12);
            prop_assert!(l > 0.0);
        }

        #[test]
        fn contralay_shorter_than_unilay(n in 1u32..400, lc in 0.1f64..10.0, la in 0.1f64..10.0) {
            prop_assume!((lc - la).abs() > 1e-6);
            let contra = slice_length_raw(n, lc, -la).unwrap();
            let uni = slice_length_raw(n, lc, la).unwrap();
            prop_assert!(contra < uni);
        }

        #[test]
        fn carson_depth_sqrt_scaling(rho in 1e-3f64..1e3, f1 in 1e-2f64..1e6, f2 in 1e-2f64..1e6) {
            let a = carson_depth(rho, f1).unwrap() * f1.sqrt();
            let b = carson_depth(rho, f2).unwrap() * f2.sqrt();
            prop_assert!(((a - b) / a).abs() < 1e-12);
        }

        #[test]
        fn mu_curve_bounded_by_neighbours(h in 0.0f64..6000.0) {
            let pts = vec![(100.0, 200.0), (1000.0, 600.0), (5000.0, 300.0)];
            let curve = MuCurve::new(pts.clone()).unwrap();
            let v = curve.eval(h);
            let i = pts.iter().position(|p| p.0 >= h).unwrap_or(pts.len() - 1);
            let lo_i = i.saturating_sub(1);
            let (a, b) = (pts[lo_i].1, pts[i].1);
            prop_assert!(v >= a.min(b) - 1e-12 && v <= a.max(b) + 1e-12);
        }
    }
}
