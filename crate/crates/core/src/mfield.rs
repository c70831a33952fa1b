//! RMS magnetic flux density around a solved cross-section.
//!
//! Every filament is an infinite straight line current, so a phasor `I` at
//! distance `r` contributes `μ0 I / (2π r)` perpendicular to the radius. The
//! two in-plane phasor components are summed over filaments and combined as
//! `B = sqrt(|Bx|² + |Bz|²)`.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pul::{ConductorSolution, Group, SelfModel};
use crate::{Complex, MU0};

/// Resolution of the field meter used for the reference measurements (µT).
pub const METER_FLOOR_UT: f64 = 0.01;

/// Height of the cable axis above ground in the reference setup (m).
pub const AXIS_HEIGHT: f64 = 1.24;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("point ({x}, {z}) m lies inside a conductor")]
    InsideConductor { x: f64, z: f64 },
    #[error("invalid measurement line: {0}")]
    BadLine(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSource {
    pub x: f64,
    pub z: f64,
    pub current: Complex,
    pub group: Group,
}

pub fn sources(sol: &ConductorSolution) -> Vec<LineSource> {
    sol.cross_section
        .filaments
        .iter()
        .zip(&sol.currents)
        .map(|(fl, &current)| LineSource {
            x: fl.x,
            z: fl.y,
            current,
            group: fl.group,
        })
        .collect()
}

/// RMS flux density of each metallic group acting alone (T).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupBreakdown {
    pub conductors: f64,
    pub sheaths: f64,
    pub armor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub x: f64,
    pub z: f64,
    pub bx: Complex,
    pub bz: Complex,
    /// T
    pub b_rms: f64,
    pub groups: GroupBreakdown,
}

fn rms(bx: Complex, bz: Complex) -> f64 {
    (bx.norm_sqr() + bz.norm_sqr()).sqrt()
}

fn sample_at(src: &[LineSource], x: f64, z: f64) -> FieldSample {
    let mut parts = [(Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)); 3];
    for s in src {
        let (dx, dz) = (x - s.x, z - s.z);
        let k = MU0 / (2.0 * PI * (dx * dx + dz * dz));
        let slot = match s.group {
            Group::Conductor(_) => 0,
            Group::Sheath(_) => 1,
            Group::Armor => 2,
        };
        parts[slot].0 += -k * dz * s.current;
        parts[slot].1 += k * dx * s.current;
    }
    let bx = parts[0].0 + parts[1].0 + parts[2].0;
    let bz = parts[0].1 + parts[1].1 + parts[2].1;
    FieldSample {
        x,
        z,
        bx,
        bz,
        b_rms: rms(bx, bz),
        groups: GroupBreakdown {
            conductors: rms(parts[0].0, parts[0].1),
            sheaths: rms(parts[1].0, parts[1].1),
            armor: rms(parts[2].0, parts[2].1),
        },
    }
}

/// Field of bare line sources; only exact coincidence with a source fails.
pub fn field_of_sources(src: &[LineSource], points: &[(f64, f64)]) -> Result<Vec<FieldSample>, FieldError> {
    points
        .par_iter()
        .map(|&(x, z)| {
            if src.iter().any(|s| s.x == x && s.z == z) {
                return Err(FieldError::InsideConductor { x, z });
            }
            Ok(sample_at(src, x, z))
        })
        .collect()
}

fn inside(sol: &ConductorSolution, x: f64, z: f64) -> bool {
    let xs = &sol.cross_section;
    xs.contains_point(x, z)
        || xs.filaments.iter().any(|fl| match fl.model {
            SelfModel::Rod { radius, .. } => (x - fl.x).hypot(z - fl.y) < radius,
            SelfModel::Filament { .. } => false,
        })
}

/// Flux density at `points` (x, z) in metres from the cable axis.
pub fn field_at(sol: &ConductorSolution, points: &[(f64, f64)]) -> Result<Vec<FieldSample>, FieldError> {
    if let Some(&(x, z)) = points.iter().find(|&&(x, z)| inside(sol, x, z)) {
        return Err(FieldError::InsideConductor { x, z });
    }
    field_of_sources(&sources(sol), points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineName {
    /// Horizontal, at the height of the cable axis.
    ML1,
    /// Vertical, from the cable axis down towards the ground.
    ML2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementLine {
    pub name: LineName,
    pub axis_height: f64,
    /// Distances from the cable axis (m), increasing.
    pub distances: Vec<f64>,
}

impl MeasurementLine {
    pub fn new(name: LineName, distances: Vec<f64>) -> Self {
        Self {
            name,
            axis_height: AXIS_HEIGHT,
            distances,
        }
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        if self.distances.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(FieldError::BadLine("distances must be positive".into()));
        }
        if self.distances.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FieldError::BadLine("distances must be strictly increasing".into()));
        }
        if self.name == LineName::ML2 && self.distances.last().is_some_and(|&d| d > self.axis_height) {
            return Err(FieldError::BadLine(format!(
                "ML2 cannot extend below ground ({} m under the axis)",
                self.axis_height
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.distances
            .iter()
            .map(|&d| match self.name {
                LineName::ML1 => (d, 0.0),
                LineName::ML2 => (0.0, -d),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub line: MeasurementLine,
    pub samples: Vec<FieldSample>,
    pub meter_floor_ut: f64,
}

impl Profile {
    /// Computed flux density along the line (µT).
    pub fn b_ut(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.b_rms * 1e6).collect()
    }

    /// `dist_m,b_ut_computed,b_ut_measured`; the last column is left empty
    /// where no measurement exists.
    pub fn write_csv<W: Write>(&self, writer: W, measured: Option<&[Option<f64>]>) -> Result<(), FieldError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["dist_m", "b_ut_computed", "b_ut_measured"])?;
        for (i, (d, b)) in self.line.distances.iter().zip(self.b_ut()).enumerate() {
            let m = measured
                .and_then(|m| m.get(i).copied().flatten())
                .map(|v| v.to_string())
                .unwrap_or_default();
            w.write_record([d.to_string(), b.to_string(), m])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn line_profile(sol: &ConductorSolution, line: &MeasurementLine) -> Result<Profile, FieldError> {
    line.validate()?;
    Ok(Profile {
        line: line.clone(),
        samples: field_at(sol, &line.points())?,
        meter_floor_ut: METER_FLOOR_UT,
    })
}

/// Least-squares slope of ln B against ln r.
pub fn log_log_slope(r: &[f64], b: &[f64]) -> f64 {
    let n = r.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = r.iter().zip(b).map(|(r, b)| (r.ln(), b.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::test_cables::c3;
    use crate::geometry::Environment;
    use crate::pul::{solve_cross_section, EngineOptions, Excitation, Sequence};
    use proptest::prelude::*;

    fn src(x: f64, z: f64, current: Complex) -> LineSource {
        LineSource {
            x,
            z,
            current,
            group: Group::Conductor(0),
        }
    }

    fn triad(imbalance: f64) -> Vec<LineSource> {
        (0..3)
            .map(|p| {
                let ang = PI / 2.0 + p as f64 * 2.0 * PI / 3.0;
                let i = Complex::from_polar(745.0 + if p == 0 { imbalance } else { 0.0 }, -(p as f64) * 2.0 * PI / 3.0);
                src(0.05 * ang.cos(), 0.05 * ang.sin(), i)
            })
            .collect()
    }

    fn radial(s: &[LineSource], radii: &[f64]) -> Vec<f64> {
        let pts: Vec<_> = radii.iter().map(|&r| (r * 0.3f64.cos(), r * 0.3f64.sin())).collect();
        field_of_sources(s, &pts).unwrap().iter().map(|f| f.b_rms).collect()
    }

    fn radii(lo: f64, hi: f64) -> Vec<f64> {
        (0..21).map(|k| lo * (hi / lo).powf(k as f64 / 20.0)).collect()
    }

    #[test]
    fn single_filament() {
        let f = field_of_sources(&[src(0.0, 0.0, Complex::new(100.0, 0.0))], &[(0.5, 0.0)]).unwrap();
        assert!((f[0].b_rms * 1e6 - 40.0).abs() < 40.0 * 1e-4);
        assert!(f[0].bx.norm() < 1e-20);
    }

    #[test]
    fn balanced_triad_decays_as_dipole() {
        let r = radii(1.0, 3.0);
        let slope = log_log_slope(&r, &radial(&triad(0.0), &r));
        assert!((slope + 2.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn net_current_decays_as_monopole() {
        let r = radii(2e3, 2e4);
        let slope = log_log_slope(&r, &radial(&triad(3.0), &r));
        assert!((slope + 1.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn solved_cable_field() {
        let sol = solve_cross_section(
            &c3(),
            &Environment::air(),
            50.0,
            &Excitation::new(Sequence::Positive, 745.0),
            &EngineOptions::default(),
        )
        .unwrap();
        let core = sol.cross_section.filaments[0];
        assert!(matches!(field_at(&sol, &[(core.x, core.y)]), Err(FieldError::InsideConductor { .. })));
        assert!(field_at(&sol, &[(0.0, 0.0)]).is_ok());
        // on an armor wire centre
        let wire = sol.cross_section.filaments.iter().find(|f| f.group == Group::Armor).unwrap();
        assert!(field_at(&sol, &[(wire.x, wire.y)]).is_err());
        let line = MeasurementLine::new(LineName::ML1, vec![0.3, 0.5, 1.0, 2.0]);
        let p = line_profile(&sol, &line).unwrap();
        let b = p.b_ut();
        assert!(b.windows(2).all(|w| w[1] < w[0]));
        // the sheath currents oppose the conductors
        let s = &p.samples[1];
        assert!(s.b_rms < s.groups.conductors);
        let empty = line_profile(&sol, &MeasurementLine::new(LineName::ML2, vec![])).unwrap();
        assert!(empty.samples.is_empty());
        assert!(line_profile(&sol, &MeasurementLine::new(LineName::ML2, vec![0.5, 2.0])).is_err());
        assert!(line_profile(&sol, &MeasurementLine::new(LineName::ML1, vec![0.5, 0.4])).is_err());
    }

    #[test]
    fn kernel_has_no_frequency() {
        let env = Environment::air();
        let exc = Excitation::new(Sequence::Positive, 745.0);
        let a = solve_cross_section(&c3(), &env, 50.0, &exc, &EngineOptions::default()).unwrap();
        let mut b = a.clone();
        b.f = 120.0;
        let pts = [(0.4, 0.1), (1.0, -0.7)];
        assert_eq!(field_at(&a, &pts).unwrap(), field_at(&b, &pts).unwrap());
    }

    #[test]
    fn profile_csv() {
        let line = MeasurementLine::new(LineName::ML1, vec![0.5, 1.0]);
        let samples = field_of_sources(&triad(0.0), &line.points()).unwrap();
        let p = Profile {
            line,
            samples,
            meter_floor_ut: METER_FLOOR_UT,
        };
        let mut buf = Vec::new();
        p.write_csv(&mut buf, Some(&[Some(12.5), None])).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "dist_m,b_ut_computed,b_ut_measured");
        assert!(lines[1].ends_with(",12.5"));
        assert!(lines[2].ends_with(','));
    }

    fn arb_sources() -> impl Strategy<Value = Vec<LineSource>> {
        proptest::collection::vec((-0.2f64..0.2, -0.2f64..0.2, -500.0f64..500.0, -500.0f64..500.0), 1..12)
            .prop_map(|v| v.into_iter().map(|(x, z, re, im)| src(x, z, Complex::new(re, im))).collect())
    }

    proptest! {
        #[test]
        fn superposition(a in arb_sources(), b in arb_sources(), px in 0.5f64..3.0, pz in -3.0f64..3.0) {
            let pts = [(px, pz)];
            let fa = field_of_sources(&a, &pts).unwrap()[0];
            let fb = field_of_sources(&b, &pts).unwrap()[0];
            let merged: Vec<_> = a.iter().chain(&b).copied().collect();
            let fm = field_of_sources(&merged, &pts).unwrap()[0];
            let scale = fa.b_rms + fb.b_rms + 1e-30;
            prop_assert!((fm.bx - fa.bx - fb.bx).norm() <= 1e-12 * scale);
            prop_assert!((fm.bz - fa.bz - fb.bz).norm() <= 1e-12 * scale);
        }

        #[test]
        fn rotation_invariance(s in arb_sources(), angle in 0.0f64..(2.0 * PI), px in 0.5f64..3.0, pz in -3.0f64..3.0) {
            let rot = |x: f64, z: f64| (x * angle.cos() - z * angle.sin(), x * angle.sin() + z * angle.cos());
            let turned: Vec<_> = s.iter().map(|l| { let (x, z) = rot(l.x, l.z); LineSource { x, z, ..*l } }).collect();
            let a = field_of_sources(&s, &[(px, pz)]).unwrap()[0].b_rms;
            let b = field_of_sources(&turned, &[rot(px, pz)]).unwrap()[0].b_rms;
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-30));
        }
    }
}
