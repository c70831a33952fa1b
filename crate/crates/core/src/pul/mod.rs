//! Per-unit-length sequence parameters of a TCAC.
//!
//! Series impedance comes from a filament model of the cross-section
//! ([`solve_cross_section`]) or from an ingested [`PulTable`]; the shunt
//! admittance comes from [`shunt_admittance`]. [`PulProvider`] hides the
//! source behind one interface.

mod layout;
mod provider;
mod solver;
mod table;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{CableSpec, GeometryError};
use crate::{Complex, EPS0};

pub use layout::{CrossSection, Filament, Group, MeshOptions, SelfModel};
pub use provider::{make_provider, PulProvider, PulSource};
pub use solver::{
    assemble_impedance_matrix, loss_breakdown, ArmorCoupling, sequence_impedance, solve_cross_section, Bonding,
    ConductorSolution, EngineOptions, Excitation, LossBreakdown, SolverWarning, ZeroSequenceReturn,
};
pub use table::{PulRow, PulTable};

#[derive(Debug, Error)]
pub enum PulError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("cable `{0}` has neither a permittivity nor a capacitance override")]
    MissingPermittivity(String),
    #[error("frequency must be positive and finite, got {0}")]
    BadFrequency(f64),
    #[error("singular cross-section system at {f} Hz (condition estimate {condition:.3e})")]
    Singular { f: f64, condition: f64 },
    #[error("solution residual {residual:.3e} exceeds tolerance at {f} Hz")]
    Residual { f: f64, residual: f64 },
    #[error("{f} Hz is outside the table range [{lo}, {hi}] Hz for the {sequence} sequence")]
    OutOfRange {
        f: f64,
        lo: f64,
        hi: f64,
        sequence: Sequence,
    },
    #[error("table has no rows for the {0} sequence")]
    MissingSequence(Sequence),
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("table csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("table io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sequence {
    #[serde(rename = "pos", alias = "positive")]
    Positive,
    #[serde(rename = "zero")]
    Zero,
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sequence::Positive => "pos",
            Sequence::Zero => "zero",
        })
    }
}

impl std::str::FromStr for Sequence {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pos" | "positive" | "+" => Ok(Sequence::Positive),
            "zero" | "0" => Ok(Sequence::Zero),
            other => Err(format!("unknown sequence `{other}` (expected pos or zero)")),
        }
    }
}

/// Per-unit-length parameters of one sequence at one frequency (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulParams {
    pub f: f64,
    pub sequence: Sequence,
    /// Ω/m
    pub r: f64,
    /// H/m
    pub l: f64,
    /// S/m
    pub g: f64,
    /// F/m
    pub c: f64,
}

impl PulParams {
    pub fn omega(&self) -> f64 {
        2.0 * PI * self.f
    }

    /// Series reactance (Ω/m).
    pub fn x(&self) -> f64 {
        self.omega() * self.l
    }

    pub fn z(&self) -> Complex {
        Complex::new(self.r, self.x())
    }

    pub fn y(&self) -> Complex {
        Complex::new(self.g, self.omega() * self.c)
    }
}

/// Shunt capacitance per metre: the override when present, otherwise the
/// coaxial formula over the insulation between conductor and sheath bore.
pub fn capacitance(spec: &CableSpec) -> Result<f64, PulError> {
    if let Some(c) = spec.capacitance_override {
        return Ok(c);
    }
    let eps_r = spec
        .eps_r
        .ok_or_else(|| PulError::MissingPermittivity(spec.name.clone()))?;
    let r_in = spec.conductor_radius();
    let r_out = spec.sheath_radii().0;
    Ok(2.0 * PI * EPS0 * eps_r / (r_out / r_in).ln())
}

/// Shunt admittance per metre, `y = 2πfC (tan δ + j)`; identical for both
/// sequences.
pub fn shunt_admittance(spec: &CableSpec, f: f64) -> Result<Complex, PulError> {
    if !(f >= 0.0 && f.is_finite()) {
        return Err(PulError::BadFrequency(f));
    }
    let c = capacitance(spec)?;
    let b = 2.0 * PI * f * c;
    Ok(Complex::new(b * spec.loss_tangent(f), b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::test_cables::{c1, c2};
    use crate::geometry::LossTangent;

    #[test]
    fn c2_admittance_at_50hz() {
        let y = shunt_admittance(&c2(), 50.0).unwrap();
        assert_eq!(y.re, 0.0);
        assert!((y.im - 4.909e-8).abs() < 1e-11, "{y}");
    }

    #[test]
    fn admittance_vanishes_at_dc() {
        let y = shunt_admittance(&c2(), 0.0).unwrap();
        assert_eq!(y, Complex::new(0.0, 0.0));
        let y = shunt_admittance(&c2(), 1e-9).unwrap();
        assert!(y.norm() < 1e-18);
    }

    #[test]
    fn loss_tangent_ratio() {
        let mut c = c2();
        c.tan_delta = Some(LossTangent::Scalar(0.001));
        let y = shunt_admittance(&c, 1000.0).unwrap();
        assert!((y.re / y.im - 0.001).abs() < 1e-15);
    }

    #[test]
    fn coaxial_capacitance_without_override() {
        let mut c = c2();
        c.capacitance_override = None;
        let cap = capacitance(&c).unwrap();
        let expected = 2.0 * PI * EPS0 * 2.5 / (43.05f64 / 15.25).ln();
        assert!((cap - expected).abs() < 1e-20);
        assert!(matches!(capacitance(&c1()), Err(PulError::MissingPermittivity(_))));
    }

    #[test]
    fn sequence_parsing() {
        assert_eq!("pos".parse::<Sequence>().unwrap(), Sequence::Positive);
        assert_eq!("zero".parse::<Sequence>().unwrap(), Sequence::Zero);
        assert!("neg".parse::<Sequence>().is_err());
    }
}
