//! Filament model of the cable cross-section.
//!
//! Every filament `k` obeys `V_k = Σ_j Z_kj I_j` with
//!
//! ```text
//! Z_kk = z_int,k + R_e + jω μ0/2π · ln(D_ret / GMR_k)
//! Z_kj =           R_e + jω μ0/2π · ln(D_ret / d_kj)
//! ```
//!
//! where `D_ret` is the distance to the return path and `R_e = μ0 ω / 8` the
//! resistance of a return through the surrounding medium (zero when the
//! return is purely metallic). All filaments of one metallic group share a
//! voltage gradient; the sheaths and armor form one group when solidly bonded.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::layout::{CrossSection, Group, MeshOptions, SelfModel};
use super::{capacitance, PulError, PulParams, Sequence};
use crate::bessel::{rod_internal_impedance, rod_surface_impedance};
use crate::geometry::{skin_depth, CableSpec, Environment};
use crate::{Complex, MU0};

/// Relative tolerance on the group voltage equality after the solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bonding {
    /// Sheaths and armor bonded and grounded at both ends.
    Solid,
    /// Screens open at one end: they carry no longitudinal current.
    Open,
}

/// How armor wires couple to the filaments inside the armor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmorCoupling {
    /// Straight wires at fixed angles relative to the cores.
    Straight,
    /// Mutual terms to inner filaments averaged over a full relative turn of
    /// armor and cores, i.e. taken to the cable axis.
    TwistAveraged,
}

/// Where zero-sequence current returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroSequenceReturn {
    /// Screens grounded at both ends in a conductive medium.
    ScreensAndMedium,
    /// The whole return current is forced through sheaths and armor.
    ScreensOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineOptions {
    pub mesh: MeshOptions,
    pub bonding: Bonding,
    pub zero_return: ZeroSequenceReturn,
    /// Armor wires use the solid-rod Bessel impedance while the skin depth is
    /// at least this fraction of the wire diameter, the surface form below.
    pub armor_regime_ratio: f64,
    pub armor_coupling: ArmorCoupling,
    /// Return distance used when the return is purely metallic (m). Only the
    /// absolute voltage reference depends on it.
    pub metallic_return_distance: f64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            mesh: MeshOptions::default(),
            bonding: Bonding::Solid,
            zero_return: ZeroSequenceReturn::ScreensAndMedium,
            armor_regime_ratio: 0.25,
            armor_coupling: ArmorCoupling::TwistAveraged,
            metallic_return_distance: 1_000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Excitation {
    pub sequence: Sequence,
    /// RMS phase current (A).
    pub phase_current: f64,
    /// Explicit phase current phasors, e.g. to reproduce a measured imbalance.
    pub phase_override: Option<[Complex; 3]>,
}

impl Excitation {
    pub fn new(sequence: Sequence, phase_current: f64) -> Self {
        Self {
            sequence,
            phase_current,
            phase_override: None,
        }
    }

    pub fn phase_currents(&self) -> [Complex; 3] {
        if let Some(over) = self.phase_override {
            return over;
        }
        let i = self.phase_current;
        match self.sequence {
            Sequence::Positive => {
                let shift = |k: f64| Complex::from_polar(i, -k * 2.0 * PI / 3.0);
                [shift(0.0), shift(1.0), shift(2.0)]
            }
            Sequence::Zero => [Complex::new(i, 0.0); 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SolverWarning {
    DiscretizationBudgetExceeded { filaments: usize, max: usize },
}

/// Solved filament currents at one frequency.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConductorSolution {
    pub f: f64,
    pub excitation: Excitation,
    pub cross_section: CrossSection,
    /// One phasor per filament of `cross_section` (A).
    pub currents: Vec<Complex>,
    /// Real part of each element's self impedance, excluding the medium (Ω/m).
    pub element_resistance: Vec<f64>,
    pub phase_currents: [Complex; 3],
    /// Voltage gradient along each phase conductor (V/m).
    pub phase_voltages: [Complex; 3],
    /// Common voltage gradient of sheaths and armor (V/m).
    pub screen_voltage: Complex,
    /// Current returning through the surrounding medium (A).
    pub return_current: Complex,
    /// Resistance of the medium return path (Ω/m).
    pub return_resistance: f64,
    pub capacitance: Option<f64>,
    pub conductance: f64,
    pub warnings: Vec<SolverWarning>,
}

impl ConductorSolution {
    pub fn group_current(&self, group: Group) -> Complex {
        self.cross_section
            .filaments
            .iter()
            .zip(&self.currents)
            .filter(|(fl, _)| fl.group == group)
            .map(|(_, i)| *i)
            .sum()
    }

    pub fn sheath_currents(&self) -> [Complex; 3] {
        [0, 1, 2].map(|p| self.group_current(Group::Sheath(p)))
    }

    /// Mean magnitude of the three induced sheath currents (A).
    pub fn sheath_current(&self) -> f64 {
        self.sheath_currents().iter().map(|i| i.norm()).sum::<f64>() / 3.0
    }

    pub fn armor_current(&self) -> Complex {
        self.group_current(Group::Armor)
    }

    /// Sum of every filament current plus the medium return.
    pub fn net_current(&self) -> Complex {
        self.currents.iter().sum::<Complex>() + self.return_current
    }
}

/// Per-metre Joule losses by group (W/m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub conductors: f64,
    pub sheaths: f64,
    pub armor: f64,
    /// Losses in the surrounding medium for a zero-sequence return.
    pub medium: f64,
    pub total: f64,
}

fn element_self_internal(model: &SelfModel, f: f64, armor_ratio: f64) -> Result<Complex, PulError> {
    Ok(match *model {
        SelfModel::Filament { resistance, .. } => Complex::new(resistance, 0.0),
        SelfModel::Rod { radius, sigma, mu_r } => {
            let delta = skin_depth(sigma, mu_r, f)?;
            if delta >= armor_ratio * 2.0 * radius {
                rod_internal_impedance(radius, sigma, mu_r, f)
            } else {
                rod_surface_impedance(radius, sigma, mu_r, f)
            }
        }
    })
}

/// Assembles the filament impedance matrix (Ω/m) for return distance
/// `d_ret` and medium resistance `r_medium`; also returns each element's
/// internal resistance.
pub fn assemble_impedance_matrix(
    xs: &CrossSection,
    f: f64,
    d_ret: f64,
    r_medium: f64,
    opts: &EngineOptions,
) -> Result<(DMatrix<Complex>, Vec<f64>), PulError> {
    let averaged = opts.armor_coupling == ArmorCoupling::TwistAveraged;
    let n = xs.len();
    let omega = 2.0 * PI * f;
    let k = omega * MU0 / (2.0 * PI);
    let ln_d = d_ret.ln();
    let mut z = DMatrix::<Complex>::zeros(n, n);
    let mut resistance = Vec::with_capacity(n);
    for (i, fi) in xs.filaments.iter().enumerate() {
        let zint = element_self_internal(&fi.model, f, opts.armor_regime_ratio)?;
        resistance.push(zint.re);
        let radius = match fi.model {
            SelfModel::Filament { gmr, .. } => gmr,
            SelfModel::Rod { radius, .. } => radius,
        };
        z[(i, i)] = zint + Complex::new(r_medium, k * (ln_d - radius.ln()));
        for j in (i + 1)..n {
            let fj = &xs.filaments[j];
            let d = if averaged && ((fi.group == Group::Armor) != (fj.group == Group::Armor)) {
                // mean of ln(1/d) over a turn is ln(1/R) for the outer radius R
                fi.x.hypot(fi.y).max(fj.x.hypot(fj.y))
            } else {
                (fi.x - fj.x).hypot(fi.y - fj.y)
            };
            let m = Complex::new(r_medium, k * (ln_d - d.ln()));
            z[(i, j)] = m;
            z[(j, i)] = m;
        }
    }
    Ok((z, resistance))
}

enum ReturnModel {
    /// Currents sum to zero; screens carry whatever the phases do not.
    Metallic,
    /// Screens grounded at both ends; the medium closes the loop.
    Medium,
}

/// Solves the cross-section at frequency `f` for the given excitation.
pub fn solve_cross_section(
    spec: &CableSpec,
    env: &Environment,
    f: f64,
    excitation: &Excitation,
    opts: &EngineOptions,
) -> Result<ConductorSolution, PulError> {
    if !(f > 0.0 && f.is_finite()) {
        return Err(PulError::BadFrequency(f));
    }
    env.validate()?;
    let xs = CrossSection::build(spec, f, &opts.mesh)?;
    let mut warnings = Vec::new();
    if xs.budget_limited {
        warnings.push(SolverWarning::DiscretizationBudgetExceeded {
            filaments: xs.len(),
            max: opts.mesh.max_filaments,
        });
    }

    let model = match (excitation.sequence, opts.zero_return) {
        (Sequence::Positive, _) | (Sequence::Zero, ZeroSequenceReturn::ScreensOnly) => ReturnModel::Metallic,
        (Sequence::Zero, ZeroSequenceReturn::ScreensAndMedium) => ReturnModel::Medium,
    };
    let (d_ret, r_medium) = match model {
        ReturnModel::Metallic => (opts.metallic_return_distance, 0.0),
        ReturnModel::Medium => (env.return_distance_at(f)?, MU0 * 2.0 * PI * f / 8.0),
    };
    let (z, element_resistance) = assemble_impedance_matrix(&xs, f, d_ret, r_medium, opts)?;

    let screens_active = opts.bonding == Bonding::Solid;
    let active: Vec<usize> = (0..xs.len())
        .filter(|&i| screens_active || !xs.filaments[i].group.is_screen())
        .collect();
    let phase_currents = excitation.phase_currents();
    let phase_sum: Complex = phase_currents.iter().sum();

    // Groups with an unknown voltage gradient and a prescribed total current.
    // Index 0..3 are the phases, 3 the bonded screens.
    let screen_floating = screens_active && matches!(model, ReturnModel::Metallic);
    let n_v = if screen_floating { 4 } else { 3 };
    let i_max = phase_currents.iter().map(|i| i.norm()).fold(0.0, f64::max);
    if matches!(model, ReturnModel::Metallic) && !screens_active && phase_sum.norm() > 1e-9 * i_max {
        return Err(PulError::Singular { f, condition: f64::INFINITY });
    }
    let v_index = |g: Group| match g {
        Group::Conductor(p) => Some(p),
        _ if screen_floating => Some(3),
        _ => None,
    };

    let m = active.len();
    let size = m + n_v;
    let mut a = DMatrix::<Complex>::zeros(size, size);
    let mut b = DVector::<Complex>::zeros(size);
    for (row, &i) in active.iter().enumerate() {
        for (col, &j) in active.iter().enumerate() {
            a[(row, col)] = z[(i, j)];
        }
        if let Some(v) = v_index(xs.filaments[i].group) {
            a[(row, m + v)] = Complex::new(-1.0, 0.0);
        }
    }
    for (col, &j) in active.iter().enumerate() {
        if let Some(v) = v_index(xs.filaments[j].group) {
            a[(m + v, col)] = Complex::new(1.0, 0.0);
        }
    }
    for p in 0..3 {
        b[m + p] = phase_currents[p];
    }
    if screen_floating {
        b[m + 3] = -phase_sum;
    }

    let lu = a.lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..size).map(|i| u[(i, i)].norm()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if dmin > 0.0 { dmax / dmin } else { f64::INFINITY };
    if !condition.is_finite() || condition > 1e15 {
        return Err(PulError::Singular { f, condition });
    }
    let x = lu.solve(&b).ok_or(PulError::Singular { f, condition })?;
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(PulError::Singular { f, condition });
    }

    let mut currents = vec![Complex::new(0.0, 0.0); xs.len()];
    for (row, &i) in active.iter().enumerate() {
        currents[i] = x[row];
    }
    let phase_voltages = [x[m], x[m + 1], x[m + 2]];
    let screen_voltage = if screen_floating { x[m + 3] } else { Complex::new(0.0, 0.0) };

    // Group voltage equality check on the assembled equations.
    let vmax = phase_voltages.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for &i in &active {
        let mut acc = Complex::new(0.0, 0.0);
        for &j in &active {
            acc += z[(i, j)] * currents[j];
        }
        let target = match v_index(xs.filaments[i].group) {
            Some(p) if p < 3 => phase_voltages[p],
            Some(_) => screen_voltage,
            None => Complex::new(0.0, 0.0),
        };
        worst = worst.max((acc - target).norm());
    }
    let residual = if vmax > 0.0 { worst / vmax } else { worst };
    if residual > RESIDUAL_TOLERANCE {
        return Err(PulError::Residual { f, residual });
    }

    let return_current = match model {
        ReturnModel::Metallic => Complex::new(0.0, 0.0),
        ReturnModel::Medium => -currents.iter().sum::<Complex>(),
    };
    let cap = capacitance(spec).ok();
    let conductance = cap.map_or(0.0, |c| 2.0 * PI * f * c * spec.loss_tangent(f));

    Ok(ConductorSolution {
        f,
        excitation: *excitation,
        cross_section: xs,
        currents,
        element_resistance,
        phase_currents,
        phase_voltages,
        screen_voltage,
        return_current,
        return_resistance: r_medium,
        capacitance: cap,
        conductance,
        warnings,
    })
}

/// Sequence series impedance `z = V_phase / I_phase`, averaged over the
/// three phases. `g` and `c` are carried over from the cable's shunt data
/// (zero when the cable has none).
pub fn sequence_impedance(sol: &ConductorSolution) -> PulParams {
    let z: Complex = (0..3)
        .map(|p| sol.phase_voltages[p] / sol.phase_currents[p])
        .sum::<Complex>()
        / 3.0;
    PulParams {
        f: sol.f,
        sequence: sol.excitation.sequence,
        r: z.re,
        l: z.im / (2.0 * PI * sol.f),
        g: sol.conductance,
        c: sol.capacitance.unwrap_or(0.0),
    }
}

pub fn loss_breakdown(sol: &ConductorSolution) -> LossBreakdown {
    let (mut pc, mut ps, mut pa) = (0.0, 0.0, 0.0);
    for ((fl, i), r) in sol
        .cross_section
        .filaments
        .iter()
        .zip(&sol.currents)
        .zip(&sol.element_resistance)
    {
        let p = r * i.norm_sqr();
        match fl.group {
            Group::Conductor(_) => pc += p,
            Group::Sheath(_) => ps += p,
            Group::Armor => pa += p,
        }
    }
    let medium = sol.return_resistance * sol.return_current.norm_sqr();
    LossBreakdown {
        conductors: pc,
        sheaths: ps,
        armor: pa,
        medium,
        total: pc + ps + pa + medium,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::test_cables::{c1, c2, c3};
    use crate::pul::layout::{core_angle, Filament};

    fn solve(spec: &CableSpec, f: f64, seq: Sequence) -> ConductorSolution {
        let env = Environment::sea();
        solve_cross_section(spec, &env, f, &Excitation::new(seq, 100.0), &EngineOptions::default()).unwrap()
    }

    #[test]
    fn dc_limit_resistance_and_sheath_current() {
        let sol = solve(&c2(), 1e-3, Sequence::Positive);
        let z = sequence_impedance(&sol);
        let r_dc = 1.0 / (53.1e6 * 630e-6);
        assert!((z.r - r_dc).abs() / r_dc < 1e-4, "{} vs {}", z.r, r_dc);
        assert!(sol.sheath_current() < 1e-3 * 100.0);
        let losses = loss_breakdown(&sol);
        assert!((losses.conductors - 3.0 * 100.0f64.powi(2) * r_dc).abs() / losses.conductors < 1e-4);
        assert!(losses.sheaths < 1e-6 * losses.conductors);
        assert!(losses.armor < 1e-6 * losses.conductors);
    }

    #[test]
    fn positive_sequence_currents_balance() {
        let sol = solve(&c3(), 50.0, Sequence::Positive);
        assert!(sol.net_current().norm() < 1e-9 * 100.0);
        for p in 0..3 {
            let ic = sol.group_current(Group::Conductor(p));
            assert!((ic - sol.phase_currents[p]).norm() < 1e-9 * 100.0);
        }
    }

    #[test]
    fn zero_sequence_return_closes() {
        let sol = solve(&c2(), 50.0, Sequence::Zero);
        assert!(sol.net_current().norm() < 1e-9 * 300.0);
        assert!(sol.return_current.norm() > 0.0);
        let screens = sol.sheath_currents().iter().sum::<Complex>() + sol.armor_current();
        assert!((screens + sol.return_current + Complex::new(300.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn screens_only_return() {
        let opts = EngineOptions {
            zero_return: ZeroSequenceReturn::ScreensOnly,
            ..EngineOptions::default()
        };
        let sol = solve_cross_section(&c2(), &Environment::sea(), 50.0, &Excitation::new(Sequence::Zero, 10.0), &opts)
            .unwrap();
        let screens = sol.sheath_currents().iter().sum::<Complex>() + sol.armor_current();
        assert!((screens + Complex::new(30.0, 0.0)).norm() < 1e-9);
        assert_eq!(sol.return_current, Complex::new(0.0, 0.0));
    }

    #[test]
    fn open_bonding_removes_screen_currents() {
        let opts = EngineOptions {
            bonding: Bonding::Open,
            ..EngineOptions::default()
        };
        let sol = solve_cross_section(&c3(), &Environment::air(), 50.0, &Excitation::new(Sequence::Positive, 745.0), &opts)
            .unwrap();
        assert_eq!(sol.sheath_current(), 0.0);
        let bonded = solve(&c3(), 50.0, Sequence::Positive);
        // circulating sheath currents add losses and reduce inductance
        let (zo, zb) = (sequence_impedance(&sol), sequence_impedance(&bonded));
        assert!(zb.r > zo.r);
        assert!(zb.l < zo.l);
    }

    #[test]
    fn reciprocity() {
        let xs = CrossSection::build(&c1(), 200.0, &MeshOptions::default()).unwrap();
        let (z, _) = assemble_impedance_matrix(&xs, 200.0, 50.0, 1e-4, &EngineOptions::default()).unwrap();
        for i in 0..z.nrows() {
            for j in 0..i {
                assert_eq!(z[(i, j)], z[(j, i)]);
            }
        }
    }

    #[test]
    fn positive_sequence_independent_of_nominal_return() {
        let exc = Excitation::new(Sequence::Positive, 1.0);
        let near = EngineOptions {
            metallic_return_distance: 1_000.0,
            ..EngineOptions::default()
        };
        let far = EngineOptions {
            metallic_return_distance: 100_000.0,
            ..EngineOptions::default()
        };
        let env = Environment::sea();
        let a = sequence_impedance(&solve_cross_section(&c2(), &env, 50.0, &exc, &near).unwrap()).z();
        let b = sequence_impedance(&solve_cross_section(&c2(), &env, 50.0, &exc, &far).unwrap()).z();
        assert!((a - b).norm() / a.norm() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn energy_bookkeeping() {
        for spec in [c1(), c2(), c3()] {
            for f in [5.0, 50.0, 300.0, 1500.0] {
                for seq in [Sequence::Positive, Sequence::Zero] {
                    let sol = solve(&spec, f, seq);
                    let z = sequence_impedance(&sol);
                    let losses = loss_breakdown(&sol);
                    let expected = 3.0 * z.r * 100.0f64.powi(2);
                    assert!(
                        (losses.total - expected).abs() / expected < 1e-3,
                        "{} {f} {seq}: {} vs {expected}",
                        spec.name,
                        losses.total
                    );
                }
            }
        }
    }

    #[test]
    fn refinement_convergence() {
        let env = Environment::sea();
        let exc = Excitation::new(Sequence::Positive, 1.0);
        let at = |density: f64| {
            let opts = EngineOptions {
                mesh: MeshOptions {
                    density,
                    max_filaments: 100_000,
                    ..MeshOptions::default()
                },
                ..EngineOptions::default()
            };
            solve_cross_section(&c2(), &env, 50.0, &exc, &opts).unwrap()
        };
        let base = at(MeshOptions::default().density);
        let n_base = base.cross_section.len() - 120;
        let mut density = MeshOptions::default().density;
        let fine = loop {
            density *= 1.25;
            let s = at(density);
            if s.cross_section.len() - 120 >= 2 * n_base {
                break s;
            }
        };
        let (a, b) = (sequence_impedance(&base), sequence_impedance(&fine));
        assert!(((a.r - b.r) / b.r).abs() < 5e-3, "r {} vs {}", a.r, b.r);
        assert!(((a.l - b.l) / b.l).abs() < 5e-3, "l {} vs {}", a.l, b.l);
    }

    #[test]
    fn positive_sequence_sweep_shape() {
        for (spec, env) in [(c1(), Environment::air()), (c2(), Environment::sea())] {
            let dc = spec.conductor_dc_resistance();
            let mut prev = (0.0, f64::INFINITY);
            for k in 0..40 {
                let f = 5.0 * 60f64.powf(k as f64 / 39.0);
                let exc = Excitation::new(Sequence::Positive, 1.0);
                let sol = solve_cross_section(&spec, &env, f, &exc, &EngineOptions::default()).unwrap();
                let z = sequence_impedance(&sol);
                assert!(z.r >= dc * (1.0 - 1e-9), "{} {f}: r {} below dc {dc}", spec.name, z.r);
                assert!(z.r >= prev.0 * (1.0 - 1e-12), "{} {f}: r decreased", spec.name);
                assert!(z.l <= prev.1 * (1.0 + 1e-12), "{} {f}: l increased", spec.name);
                prev = (z.r, z.l);
            }
        }
    }

    #[test]
    fn passivity_both_sequences() {
        for spec in [c1(), c2(), c3()] {
            for f in [0.5, 7.0, 60.0, 900.0, 2e4, 1e6] {
                for seq in [Sequence::Positive, Sequence::Zero] {
                    assert!(sequence_impedance(&solve(&spec, f, seq)).r > 0.0);
                }
            }
        }
    }

    /// A more resistive medium pushes the return path deeper and makes it more
    /// reactive, so more of the return current moves to the screens.
    #[test]
    fn zero_sequence_monotone_in_resistivity() {
        for f in [5.0, 50.0] {
            let run = |rho: f64| {
                let env = Environment {
                    rho_medium: rho,
                    ..Environment::sea()
                };
                let sol = solve_cross_section(&c2(), &env, f, &Excitation::new(Sequence::Zero, 1.0), &EngineOptions::default())
                    .unwrap();
                (sequence_impedance(&sol), sol.return_current.norm())
            };
            let pts: Vec<_> = [0.1, 0.2, 0.4, 0.7, 1.0].iter().map(|&rho| run(rho)).collect();
            let monotone = |v: Vec<f64>| v.windows(2).all(|w| w[1] > w[0]) || v.windows(2).all(|w| w[1] < w[0]);
            assert!(monotone(pts.iter().map(|p| p.0.r).collect()), "r at {f} Hz");
            assert!(monotone(pts.iter().map(|p| p.0.l).collect()), "l at {f} Hz");
            assert!(pts.windows(2).all(|w| w[1].1 < w[0].1), "medium share at {f} Hz");
        }
    }

    #[test]
    fn twist_averaging_decouples_armor_from_balanced_currents() {
        let sol = solve(&c3(), 50.0, Sequence::Positive);
        assert!(sol.armor_current().norm() < 1e-6 * 100.0);
        let straight = EngineOptions {
            armor_coupling: ArmorCoupling::Straight,
            ..EngineOptions::default()
        };
        let s = solve_cross_section(&c3(), &Environment::sea(), 50.0, &Excitation::new(Sequence::Positive, 100.0), &straight)
            .unwrap();
        // straight wires carry eddy currents that partly shield the sheaths
        assert!(s.sheath_current() < sol.sheath_current());
    }

    #[test]
    fn rejects_non_positive_frequency() {
        let exc = Excitation::new(Sequence::Positive, 1.0);
        let r = solve_cross_section(&c2(), &Environment::sea(), 0.0, &exc, &EngineOptions::default());
        assert!(matches!(r, Err(PulError::BadFrequency(_))));
    }

    /// Three identical filaments on an equilateral triangle with balanced
    /// currents: the positive-sequence impedance is z_self − z_mutual, i.e.
    /// r + jω μ0/2π ln(d / gmr).
    #[test]
    fn symmetric_triad_toy_system() {
        let f = 50.0;
        let (r, gmr, d): (f64, f64, f64) = (1e-4, 5e-3, 0.1);
        let filaments: Vec<_> = (0..3)
            .map(|p| {
                let ang = core_angle(p);
                let rc = d / 3f64.sqrt();
                Filament {
                    x: rc * ang.cos(),
                    y: rc * ang.sin(),
                    group: Group::Conductor(p),
                    model: SelfModel::Filament { resistance: r, gmr },
                }
            })
            .collect();
        let xs = CrossSection::from_filaments(filaments);
        let (z, resistance) = assemble_impedance_matrix(&xs, f, 1000.0, 0.0, &EngineOptions::default()).unwrap();
        let excitation = Excitation::new(Sequence::Positive, 2.0);
        let currents = excitation.phase_currents().to_vec();
        let v = &z * DVector::from_column_slice(&currents);
        let sol = ConductorSolution {
            f,
            excitation,
            cross_section: xs,
            currents: currents.clone(),
            element_resistance: resistance,
            phase_currents: excitation.phase_currents(),
            phase_voltages: [v[0], v[1], v[2]],
            screen_voltage: Complex::new(0.0, 0.0),
            return_current: Complex::new(0.0, 0.0),
            return_resistance: 0.0,
            capacitance: None,
            conductance: 0.0,
            warnings: vec![],
        };
        let p = sequence_impedance(&sol);
        let omega = 2.0 * PI * f;
        let expected_l = MU0 / (2.0 * PI) * (d / gmr).ln();
        assert!((p.r - r).abs() < 1e-15);
        assert!((p.l - expected_l).abs() < 1e-12 * expected_l);
        assert!((p.x() - omega * expected_l).abs() < 1e-12 * omega * expected_l);
        let losses = loss_breakdown(&sol);
        assert!((losses.total - 3.0 * r * 4.0).abs() < 1e-15);
    }
}
