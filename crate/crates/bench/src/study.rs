//! Named end-to-end studies.
//!
//! A study is prepared first (config, fixtures and provider resolved and
//! checked) and then executed into an in-memory [`ReportBundle`]. A dry run
//! stops after preparation.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use tcac_core::geometry::Environment;
use tcac_core::mfield::{line_profile, log_log_slope, LineName, MeasurementLine, METER_FLOOR_UT};
use tcac_core::pul::{
    loss_breakdown, make_provider, sequence_impedance, solve_cross_section, ConductorSolution, Excitation,
    PulProvider, PulSource,
};
use tcac_core::timedomain::{energize, resonant_frequencies_for_length, EnergizeOptions, Rider, SourceSpec, Waveform};
use tcac_core::tline::{
    find_resonances, input_impedance, resonance_frequencies, sweep, FrequencyGrid, FrequencyResponse, LineModel,
    LineOperand, ResonanceKind, ResonanceOptions, ResonancePoint, Terminal, Termination,
};
use tcac_core::{CableSpec, Sequence};

use crate::compare::{compare, CompareOptions, ComparisonReport, ComputedSeries};
use crate::config::{EnvironmentChoice, ProviderConfig, StudyConfig};
use crate::error::BenchError;
use crate::fixtures::{self, FixtureSet};
use crate::measurement::MeasurementSeries;
use crate::report::{num, opt_num, text, DataTable, ReportBundle, StudyReport};

/// Relative distance within which resonance features count as one resonance.
pub const CLUSTER_TOL: f64 = tcac_core::timedomain::RESONANCE_CLUSTER_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Study {
    LossesC1,
    RxC1,
    SheathC1,
    SheathC3,
    HarmonicC2Sc,
    HarmonicC2Oc,
    ResonancesC2,
    MfC3,
    EnergizeC2,
}

impl Study {
    pub const ALL: [Study; 9] = [
        Study::LossesC1,
        Study::RxC1,
        Study::SheathC1,
        Study::SheathC3,
        Study::HarmonicC2Sc,
        Study::HarmonicC2Oc,
        Study::ResonancesC2,
        Study::MfC3,
        Study::EnergizeC2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Study::LossesC1 => "losses_C1",
            Study::RxC1 => "rx_C1",
            Study::SheathC1 => "sheath_C1",
            Study::SheathC3 => "sheath_C3",
            Study::HarmonicC2Sc => "harmonic_C2_sc",
            Study::HarmonicC2Oc => "harmonic_C2_oc",
            Study::ResonancesC2 => "resonances_C2",
            Study::MfC3 => "mf_C3",
            Study::EnergizeC2 => "energize_C2",
        }
    }

    pub fn names() -> Vec<&'static str> {
        Self::ALL.iter().map(|s| s.name()).collect()
    }

    pub fn description(self) -> &'static str {
        match self {
            Study::LossesC1 => "C1 in air: conductor, sheath and armor losses over frequency at 12 A",
            Study::RxC1 => "C1 in air: positive-sequence series resistance and reactance at 12 A",
            Study::SheathC1 => "C1 in air: induced sheath current over frequency at 10 A",
            Study::SheathC3 => "C3 in air: induced sheath current at the measured operating points",
            Study::HarmonicC2Sc => "C2 link, receiving end shorted: sequence harmonic impedances",
            Study::HarmonicC2Oc => "C2 link, receiving end open: sequence harmonic impedances",
            Study::ResonancesC2 => "C2 link: first four SC and OC resonances against measurements",
            Study::MfC3 => "C3 in air: flux density along the horizontal and vertical measurement lines",
            Study::EnergizeC2 => "C2 open-ended line energized by a step and an AC source at 10 km and 99.65 km",
        }
    }

    /// Measurement keys the study reads from its bundled fixtures.
    fn bundled_measurements(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Study::SheathC3 => &[
                ("I_s", fixtures::SHEATH_CURRENT_C3),
                ("I_s_reference", fixtures::SHEATH_CURRENT_C3_REFERENCE),
            ],
            Study::ResonancesC2 => &[
                ("sc", fixtures::RESONANCES_C2_SC),
                ("oc", fixtures::RESONANCES_C2_OC),
                ("sc_reference", fixtures::RESONANCES_C2_SC_REFERENCE),
                ("oc_reference", fixtures::RESONANCES_C2_OC_REFERENCE),
            ],
            Study::EnergizeC2 => &[
                ("resonances_10km", fixtures::OPEN_END_RESONANCES_C2_10KM),
                ("resonances_99.65km", fixtures::OPEN_END_RESONANCES_C2_99KM),
            ],
            _ => &[],
        }
    }

    /// Whether a user-supplied measurement key is meaningful for the study.
    fn accepts_key(self, key: &str) -> bool {
        let bundled = self.bundled_measurements().iter().any(|(k, _)| *k == key);
        bundled
            || match self {
                Study::LossesC1 => key == "P_total",
                Study::RxC1 => key == "R_pos" || key == "X_pos",
                Study::SheathC1 => key == "I_s",
                Study::HarmonicC2Sc => key == "Z_SC_pos" || key == "Z_SC_zero",
                Study::HarmonicC2Oc => key == "Z_OC_pos" || key == "Z_OC_zero",
                Study::MfC3 => parse_field_key(key).is_some(),
                Study::EnergizeC2 => key.starts_with("resonances_") && key.ends_with("km"),
                _ => false,
            }
    }

    fn default_provider(self) -> ProviderConfig {
        let analytic = |cable: &str, env| ProviderConfig::Analytic {
            cable: cable.into(),
            environment: Some(EnvironmentChoice::Preset(env)),
            mu_curve: None,
        };
        use tcac_core::geometry::Medium::{Air, Sea};
        match self {
            Study::LossesC1 | Study::RxC1 | Study::SheathC1 => analytic("C1", Air),
            Study::SheathC3 | Study::MfC3 => analytic("C3", Air),
            Study::HarmonicC2Sc | Study::HarmonicC2Oc | Study::EnergizeC2 => analytic("C2", Sea),
            Study::ResonancesC2 => ProviderConfig::Bundled {
                name: fixtures::C2_CONSTANT_TABLE.into(),
            },
        }
    }

    fn needs_solver(self) -> bool {
        matches!(
            self,
            Study::LossesC1 | Study::RxC1 | Study::SheathC1 | Study::SheathC3 | Study::MfC3
        )
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Study {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Study::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| BenchError::UnknownStudy {
                name: s.to_string(),
                options: Study::names(),
            })
    }
}

/// `B_ML1_50hz` → (ML1, 50 Hz).
fn parse_field_key(key: &str) -> Option<(LineName, f64)> {
    let rest = key.strip_prefix("B_")?;
    let (line, f) = rest.split_once('_')?;
    let line = match line {
        "ML1" => LineName::ML1,
        "ML2" => LineName::ML2,
        _ => return None,
    };
    let f: f64 = f.strip_suffix("hz")?.parse().ok()?;
    (f > 0.0).then_some((line, f))
}

fn field_key(line: LineName, f: f64) -> String {
    format!("B_{line:?}_{f}hz")
}

/// Cable model behind an analytic provider.
#[derive(Debug, Clone)]
pub struct CableModel {
    pub spec: CableSpec,
    pub env: Environment,
}

/// Everything a study needs, resolved and validated.
#[derive(Debug)]
pub struct Prepared {
    pub study: Study,
    pub config: StudyConfig,
    pub provider: PulProvider,
    pub model: Option<CableModel>,
    /// Cable data of C2 for defaults such as the link length.
    pub c2: Option<CableSpec>,
    pub measurements: BTreeMap<String, MeasurementSeries>,
    pub fixtures: Vec<String>,
}

impl Prepared {
    pub fn provider_id(&self) -> &str {
        self.provider.id()
    }

    fn grid(&self) -> FrequencyGrid {
        self.config.grid.unwrap_or_default()
    }

    fn compare_opts(&self) -> CompareOptions {
        CompareOptions {
            band_pct: self.config.band_pct,
        }
    }

    fn model(&self) -> &CableModel {
        self.model.as_ref().expect("solver studies are prepared with a cable model")
    }

    fn link_length(&self) -> f64 {
        self.config
            .length_m
            .or_else(|| self.c2.as_ref().and_then(|c| c.cable_length))
            .unwrap_or(99_650.0)
    }
}

/// Summary of a dry run.
#[derive(Debug, Clone, Serialize)]
pub struct Plan {
    pub study: String,
    pub description: String,
    pub provider_id: String,
    pub fixtures: Vec<String>,
    pub measurements: Vec<String>,
}

impl From<&Prepared> for Plan {
    fn from(p: &Prepared) -> Self {
        Plan {
            study: p.study.name().into(),
            description: p.study.description().into(),
            provider_id: p.provider_id().into(),
            fixtures: p.fixtures.clone(),
            measurements: p.measurements.keys().cloned().collect(),
        }
    }
}

fn invalid(study: Study, msg: impl fmt::Display) -> BenchError {
    BenchError::Invalid(format!("{study}: {msg}"))
}

/// Resolves config, fixtures and provider without computing anything.
pub fn prepare(config: &StudyConfig) -> Result<Prepared, BenchError> {
    let study: Study = config.study.parse()?;
    let fx = FixtureSet {
        dir: config.fixtures_dir.clone(),
    };
    let mut origins = Vec::new();

    let cables_file = fx.read(fixtures::CABLES)?;
    origins.push(cables_file.origin.clone());
    let cables = tcac_core::geometry::parse_cables(&cables_file.text, &cables_file.origin)?;
    let c2 = cables.iter().find(|c| c.name == "C2").cloned();

    let provider_cfg = config.provider.clone().unwrap_or_else(|| study.default_provider());
    let (provider, model) = match provider_cfg {
        ProviderConfig::Analytic {
            cable,
            environment,
            mu_curve,
        } => {
            let mut spec = fixtures::find_cable(cables, &cable, &cables_file.origin)?;
            if let Some(name) = mu_curve {
                let loaded = if std::path::Path::new(&name).is_absolute() {
                    fixtures::read_path(std::path::Path::new(&name))?
                } else {
                    fx.read(&name)?
                };
                origins.push(loaded.origin.clone());
                spec.armor_mu = fixtures::parse_mu_curve(&loaded)?;
            }
            let env = environment.map(EnvironmentChoice::resolve).unwrap_or_else(|| match study {
                Study::HarmonicC2Sc | Study::HarmonicC2Oc | Study::ResonancesC2 | Study::EnergizeC2 => {
                    Environment::sea()
                }
                _ => Environment::air(),
            });
            let provider = make_provider(PulSource::Analytic {
                spec: spec.clone(),
                env,
                options: config.engine,
            })?;
            (provider, Some(CableModel { spec, env }))
        }
        ProviderConfig::Table { path, id } => {
            let loaded = fixtures::read_path(&path)?;
            origins.push(loaded.origin.clone());
            let table = fixtures::parse_table(&loaded)?;
            let id = id.unwrap_or_else(|| {
                path.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "table".into())
            });
            (make_provider(PulSource::Table { id, table })?, None)
        }
        ProviderConfig::Bundled { name } => {
            let loaded = fx.read(&name)?;
            origins.push(loaded.origin.clone());
            let table = fixtures::parse_table(&loaded)?;
            let id = name.trim_end_matches(".csv").to_string();
            (make_provider(PulSource::Table { id, table })?, None)
        }
    };
    if study.needs_solver() && model.is_none() {
        return Err(invalid(
            study,
            "needs an analytic provider (the cross-section is solved directly)",
        ));
    }

    let mut measurements = BTreeMap::new();
    for (key, name) in study.bundled_measurements() {
        if config.measurements.contains_key(*key) {
            continue;
        }
        let loaded = fx.read(name)?;
        origins.push(loaded.origin.clone());
        measurements.insert(key.to_string(), MeasurementSeries::parse(&loaded.text, &loaded.origin)?);
    }
    for (key, path) in &config.measurements {
        if !study.accepts_key(key) {
            return Err(BenchError::Config {
                path: path.display().to_string(),
                reason: format!("measurement key `{key}` is not used by {study}"),
            });
        }
        let loaded = fixtures::read_path(path)?;
        origins.push(loaded.origin.clone());
        measurements.insert(key.clone(), MeasurementSeries::parse(&loaded.text, &loaded.origin)?);
    }

    let prepared = Prepared {
        study,
        config: config.clone(),
        provider,
        model,
        c2,
        measurements,
        fixtures: origins,
    };
    check_coverage(&prepared)?;
    Ok(prepared)
}

fn check_coverage(p: &Prepared) -> Result<(), BenchError> {
    let sequences: Vec<Sequence> = match p.study {
        Study::HarmonicC2Sc | Study::HarmonicC2Oc => match &p.config.sequences {
            Some(s) => s.clone(),
            None => return Ok(()),
        },
        Study::ResonancesC2 => vec![Sequence::Positive],
        _ => return Ok(()),
    };
    let grid = p.grid();
    grid.validate()?;
    for seq in sequences {
        if !p.provider.covers(seq, grid.f_min, grid.f_max) {
            return Err(BenchError::Coverage {
                path: p.fixtures.last().cloned().unwrap_or_default(),
                provider: p.provider_id().into(),
                what: format!("{seq} sequence over [{}, {}] Hz", grid.f_min, grid.f_max),
            });
        }
    }
    Ok(())
}

/// Prepares and executes the study.
pub fn run_study(config: &StudyConfig) -> Result<ReportBundle, BenchError> {
    execute(&prepare(config)?)
}

/// Validates config and fixtures without running anything.
pub fn dry_run(config: &StudyConfig) -> Result<Plan, BenchError> {
    Ok(Plan::from(&prepare(config)?))
}

struct Output {
    tables: Vec<DataTable>,
    comparisons: Vec<ComparisonReport>,
    results: Value,
    notes: Vec<String>,
}

pub fn execute(p: &Prepared) -> Result<ReportBundle, BenchError> {
    let out = match p.study {
        Study::LossesC1 | Study::RxC1 | Study::SheathC1 => c1_sweep(p)?,
        Study::SheathC3 => sheath_c3(p)?,
        Study::HarmonicC2Sc => harmonic(p, Termination::ShortCircuit)?,
        Study::HarmonicC2Oc => harmonic(p, Termination::OpenCircuit)?,
        Study::ResonancesC2 => resonances_c2(p)?,
        Study::MfC3 => mf_c3(p)?,
        Study::EnergizeC2 => energize_c2(p)?,
    };
    let report = StudyReport {
        study: p.study.name().into(),
        label: p.config.label.clone(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        provider_id: p.provider_id().into(),
        fixtures: p.fixtures.clone(),
        config: serde_json::to_value(&p.config)?,
        comparisons: out.comparisons,
        results: out.results,
        notes: out.notes,
    };
    Ok(ReportBundle {
        report,
        tables: out.tables,
    })
}

fn solve(m: &CableModel, p: &Prepared, f: f64, seq: Sequence, current: f64) -> Result<ConductorSolution, BenchError> {
    Ok(solve_cross_section(
        &m.spec,
        &m.env,
        f,
        &Excitation::new(seq, current),
        &p.config.engine,
    )?)
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn compare_keyed(
    p: &Prepared,
    key: &str,
    computed: Vec<(f64, f64)>,
) -> Result<Option<ComparisonReport>, BenchError> {
    let Some(meas) = p.measurements.get(key) else {
        return Ok(None);
    };
    let mut r = compare(meas, &ComputedSeries::new(p.provider_id(), computed), &p.compare_opts())?;
    r.meta.insert("key".into(), key.into());
    Ok(Some(r))
}

// ---------------------------------------------------------------------------
// C1 frequency studies
// ---------------------------------------------------------------------------

const C1_FREQUENCIES: [f64; 10] = [5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 300.0, 500.0, 700.0, 1000.0];

fn c1_sweep(p: &Prepared) -> Result<Output, BenchError> {
    let m = p.model();
    let keys: &[&str] = match p.study {
        Study::LossesC1 => &["P_total"],
        Study::RxC1 => &["R_pos", "X_pos"],
        _ => &["I_s"],
    };
    let current = p
        .config
        .phase_current_a
        .unwrap_or(if p.study == Study::SheathC1 { 10.0 } else { 12.0 });
    let mut freqs = match (&p.config.frequencies, &p.config.grid) {
        (Some(f), _) => f.clone(),
        (None, Some(g)) => g.frequencies(),
        (None, None) => C1_FREQUENCIES.to_vec(),
    };
    for k in keys {
        if let Some(meas) = p.measurements.get(*k) {
            freqs.extend(meas.rows.iter().map(|r| r.x));
        }
    }
    let freqs = sorted_unique(freqs);

    let solved: Vec<ConductorSolution> = freqs
        .par_iter()
        .map(|&f| solve(m, p, f, Sequence::Positive, current))
        .collect::<Result<_, _>>()?;

    let mut notes = vec![format!("{} in {:?} at {current} A phase current", m.spec.name, m.env.medium)];
    if m.spec.estimated {
        notes.push(format!("{} carries estimated inputs; larger deviations are expected", m.spec.name));
    }
    let mut columns: Vec<(&str, Vec<f64>)> = Vec::new();
    let fcol: Vec<f64> = solved.iter().map(|s| s.f).collect();
    let (table_name, series): (&str, Vec<(&str, Vec<f64>)>) = match p.study {
        Study::LossesC1 => {
            let losses: Vec<_> = solved.iter().map(loss_breakdown).collect();
            let r3i2: Vec<f64> = solved
                .iter()
                .map(|s| 3.0 * sequence_impedance(s).r * current * current)
                .collect();
            let total: Vec<f64> = losses.iter().map(|l| l.total).collect();
            let balance = total.iter().zip(&r3i2).map(|(t, r)| (t - r).abs() / r).collect();
            columns.push(("p_conductors_w_per_m", losses.iter().map(|l| l.conductors).collect()));
            columns.push(("p_sheaths_w_per_m", losses.iter().map(|l| l.sheaths).collect()));
            columns.push(("p_armor_w_per_m", losses.iter().map(|l| l.armor).collect()));
            columns.push(("p_total_w_per_m", total.clone()));
            columns.push(("p_3ri2_w_per_m", r3i2));
            columns.push(("balance_rel_err", balance));
            ("losses", vec![("P_total", total)])
        }
        Study::RxC1 => {
            let z: Vec<_> = solved.iter().map(sequence_impedance).collect();
            let r: Vec<f64> = z.iter().map(|z| z.r * 1e3).collect();
            let x: Vec<f64> = z.iter().map(|z| z.x() * 1e3).collect();
            columns.push(("r_ohm_per_km", r.clone()));
            columns.push(("x_ohm_per_km", x.clone()));
            ("rx", vec![("R_pos", r), ("X_pos", x)])
        }
        _ => {
            let is: Vec<f64> = solved.iter().map(|s| s.sheath_current()).collect();
            columns.push(("i_sheath_a", is.clone()));
            columns.push(("i_sheath_over_i_phase", is.iter().map(|i| i / current).collect()));
            columns.push(("i_armor_a", solved.iter().map(|s| s.armor_current().norm()).collect()));
            ("sheath_current", vec![("I_s", is)])
        }
    };

    let mut names = vec!["f_hz"];
    names.extend(columns.iter().map(|(n, _)| *n));
    let mut table = DataTable::new(table_name, &names);
    for (i, f) in fcol.iter().enumerate() {
        let mut row = vec![num(*f)];
        row.extend(columns.iter().map(|(_, v)| num(v[i])));
        table.push(row);
    }

    let mut comparisons = Vec::new();
    for (key, values) in &series {
        let pts = fcol.iter().copied().zip(values.iter().copied()).collect();
        comparisons.extend(compare_keyed(p, key, pts)?);
    }
    if comparisons.is_empty() {
        notes.push("no digitized measurements bundled for this study; supply them under `measurements` to compare".into());
    }
    let results = json!({
        "phase_current_a": current,
        "cable": m.spec.name,
        "series": series.iter().map(|(k, v)| ((*k).to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
        "f_hz": fcol,
    });
    Ok(Output {
        tables: vec![table],
        comparisons,
        results,
        notes,
    })
}

// ---------------------------------------------------------------------------
// C3 sheath current
// ---------------------------------------------------------------------------

fn sheath_c3(p: &Prepared) -> Result<Output, BenchError> {
    let m = p.model();
    let meas = &p.measurements["I_s"];
    let points: Vec<(f64, f64)> = match &p.config.frequencies {
        Some(fs) => {
            let i = p
                .config
                .phase_current_a
                .ok_or_else(|| invalid(p.study, "`frequencies` needs `phase_current_a`"))?;
            fs.iter().map(|&f| (f, i)).collect()
        }
        None => meas
            .rows
            .iter()
            .map(|r| {
                r.excitation_a
                    .or(p.config.phase_current_a)
                    .map(|i| (r.x, i))
                    .ok_or_else(|| BenchError::Fixture {
                        path: meas.fixture_id.clone(),
                        reason: format!("row at {} Hz has no excitation_a", r.x),
                    })
            })
            .collect::<Result<_, _>>()?,
    };
    let solved: Vec<ConductorSolution> = points
        .par_iter()
        .map(|&(f, i)| solve(m, p, f, Sequence::Positive, i))
        .collect::<Result<_, _>>()?;

    let mut table = DataTable::new(
        "sheath_current",
        &["f_hz", "phase_current_a", "i_sheath_a", "i_sheath_over_i_phase", "i_armor_a", "provider_id"],
    );
    let mut computed = Vec::new();
    for (s, &(f, i)) in solved.iter().zip(&points) {
        let is = s.sheath_current();
        computed.push((f, is));
        table.push(vec![
            num(f),
            num(i),
            num(is),
            num(is / i),
            num(s.armor_current().norm()),
            text(p.provider_id()),
        ]);
    }
    let mut comparisons = Vec::new();
    comparisons.extend(compare_keyed(p, "I_s", computed.clone())?);
    if let Some(mut r) = compare_keyed(p, "I_s_reference", computed.clone())? {
        r.meta.insert("role".into(), "published finite-element values, not measurements".into());
        comparisons.push(r);
    }
    Ok(Output {
        tables: vec![table],
        comparisons,
        results: json!({ "i_sheath_a": computed.iter().map(|(f, i)| json!({"f_hz": f, "i_sheath_a": i})).collect::<Vec<_>>() }),
        notes: vec!["solid bonding; armor coupling and mesh per engine options".into()],
    })
}

// ---------------------------------------------------------------------------
// C2 harmonic impedances and resonances
// ---------------------------------------------------------------------------

fn response_table(name: String, resp: &FrequencyResponse) -> DataTable {
    let mut t = DataTable::new(name, &["f_hz", "re_ohm", "im_ohm", "abs_ohm"]);
    for pt in &resp.points {
        t.push(vec![num(pt.f), num(pt.z.re), num(pt.z.im), num(pt.z.norm())]);
    }
    t
}

fn kind_name(k: ResonanceKind) -> &'static str {
    match k {
        ResonanceKind::ReactanceZeroCrossing => "reactance_zero_crossing",
        ResonanceKind::MagnitudeMinimum => "magnitude_minimum",
        ResonanceKind::MagnitudeMaximum => "magnitude_maximum",
    }
}

struct Swept {
    response: FrequencyResponse,
    features: Vec<ResonancePoint>,
    resonances: Vec<f64>,
}

fn sweep_with_resonances(p: &Prepared, seq: Sequence, term: Termination, length: f64) -> Result<Swept, BenchError> {
    let response = sweep(&p.provider, seq, term, &p.grid(), length)?;
    let model = LineModel {
        provider: &p.provider,
        sequence: seq,
        termination: term,
        length,
    };
    let features = find_resonances(&response, Some(&model), &ResonanceOptions::default());
    let resonances = resonance_frequencies(&features, CLUSTER_TOL);
    Ok(Swept {
        response,
        features,
        resonances,
    })
}

fn features_json(s: &Swept) -> Value {
    json!({
        "resonances_hz": s.resonances,
        "features": s.features.iter().map(|r| json!({"f_hz": r.f, "kind": kind_name(r.kind), "refined": r.refined})).collect::<Vec<_>>(),
        "poles_hz": s.response.poles,
        "flagged": s.response.flagged.len(),
        "points": s.response.points.len(),
    })
}

fn harmonic(p: &Prepared, term: Termination) -> Result<Output, BenchError> {
    let length = p.link_length();
    let sequences = match &p.config.sequences {
        Some(s) => s.clone(),
        None => [Sequence::Positive, Sequence::Zero]
            .into_iter()
            .filter(|&s| p.provider.range(s).is_ok())
            .collect(),
    };
    if sequences.is_empty() {
        return Err(invalid(p.study, "provider serves neither sequence"));
    }
    let mut tables = Vec::new();
    let mut comparisons = Vec::new();
    let mut results = serde_json::Map::new();
    let mut notes = vec![format!("{length} m link, receiving end {term}")];
    for seq in sequences {
        let swept = sweep_with_resonances(p, seq, term, length)?;
        tables.push(response_table(format!("z_{seq}_{term}"), &swept.response));
        results.insert(seq.to_string(), features_json(&swept));
        let key = format!("Z_{}_{seq}", term.to_string().to_uppercase());
        if let Some(meas) = p.measurements.get(&key) {
            let computed: Vec<(f64, f64)> = meas
                .rows
                .iter()
                .map(|r| -> Result<(f64, f64), BenchError> {
                    let op = LineOperand::from_provider(&p.provider, r.x, seq, length)?;
                    let z = match input_impedance(&op, term)? {
                        Terminal::Value(z) => z.norm(),
                        Terminal::Pole => f64::INFINITY,
                    };
                    Ok((r.x, z))
                })
                .collect::<Result<_, _>>()?;
            comparisons.extend(compare_keyed(p, &key, computed)?);
        }
        if !swept.response.flagged.is_empty() {
            notes.push(format!(
                "{seq}: {} grid points outside the provider range were skipped",
                swept.response.flagged.len()
            ));
        }
    }
    if comparisons.is_empty() {
        notes.push("no digitized impedance measurements bundled; curves are report-only".into());
    }
    Ok(Output {
        tables,
        comparisons,
        results: Value::Object(results),
        notes,
    })
}

fn resonance_comparison(
    p: &Prepared,
    key: &str,
    found: &[f64],
    notes: &mut Vec<String>,
) -> Result<Option<ComparisonReport>, BenchError> {
    let Some(meas) = p.measurements.get(key) else {
        return Ok(None);
    };
    let n = meas.rows.len().min(found.len());
    if n < meas.rows.len() {
        notes.push(format!(
            "{key}: only {n} of {} resonances found on the grid",
            meas.rows.len()
        ));
    }
    let meas = meas.truncated(n);
    let computed = meas.rows.iter().zip(found).map(|(r, &f)| (r.x, f)).collect();
    let mut r = compare(&meas, &ComputedSeries::new(p.provider_id(), computed), &p.compare_opts())?;
    r.meta.insert("key".into(), key.into());
    if key.ends_with("_reference") {
        r.meta.insert("role".into(), "published finite-element values, not measurements".into());
    }
    Ok(Some(r))
}

fn resonances_c2(p: &Prepared) -> Result<Output, BenchError> {
    let length = p.link_length();
    let mut tables = Vec::new();
    let mut comparisons = Vec::new();
    let mut notes = vec![format!("{length} m link, positive sequence")];
    let mut results = serde_json::Map::new();
    let mut listing = DataTable::new("resonances", &["termination", "order", "f_hz", "provider_id"]);
    let mut features = DataTable::new("resonance_features", &["termination", "f_hz", "kind", "refined"]);
    for term in [Termination::ShortCircuit, Termination::OpenCircuit] {
        let swept = sweep_with_resonances(p, Sequence::Positive, term, length)?;
        tables.push(response_table(format!("z_pos_{term}"), &swept.response));
        let first: Vec<f64> = swept.resonances.iter().take(4).copied().collect();
        for (k, f) in first.iter().enumerate() {
            listing.push(vec![text(term.to_string()), json!(k + 1), num(*f), text(p.provider_id())]);
        }
        for r in &swept.features {
            features.push(vec![
                text(term.to_string()),
                num(r.f),
                text(kind_name(r.kind)),
                Value::Bool(r.refined),
            ]);
        }
        let first_zero = swept
            .features
            .iter()
            .find(|r| r.kind == ResonanceKind::ReactanceZeroCrossing)
            .map(|r| r.f);
        let mut entry = features_json(&swept);
        entry["first_zero_crossing_hz"] = opt_num(first_zero);
        results.insert(term.to_string(), entry);
        let key = term.to_string();
        comparisons.extend(resonance_comparison(p, &key, &first, &mut notes)?);
        comparisons.extend(resonance_comparison(p, &format!("{key}_reference"), &first, &mut notes)?);
    }
    tables.push(listing);
    tables.push(features);
    notes.push(format!(
        "one frequency per resonance: features within {}% are merged, the reactance zero crossing represents them",
        CLUSTER_TOL * 100.0
    ));
    Ok(Output {
        tables,
        comparisons,
        results: Value::Object(results),
        notes,
    })
}

// ---------------------------------------------------------------------------
// C3 magnetic field
// ---------------------------------------------------------------------------

const ML1_DEFAULT: [f64; 10] = [0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0];
const ML2_DEFAULT: [f64; 6] = [0.2, 0.3, 0.5, 0.75, 1.0, 1.24];

fn mf_c3(p: &Prepared) -> Result<Output, BenchError> {
    let m = p.model();
    let cases: Vec<(f64, f64)> = match &p.config.frequencies {
        Some(fs) => {
            let i = p
                .config
                .phase_current_a
                .ok_or_else(|| invalid(p.study, "`frequencies` needs `phase_current_a`"))?;
            fs.iter().map(|&f| (f, i)).collect()
        }
        None => vec![(50.0, 745.0), (120.0, 304.0)],
    };
    let mf = p.config.mfield.clone();
    let ml1 = mf.as_ref().and_then(|c| c.ml1_m.clone()).unwrap_or(ML1_DEFAULT.to_vec());
    let ml2 = mf.as_ref().and_then(|c| c.ml2_m.clone()).unwrap_or(ML2_DEFAULT.to_vec());

    let mut tables = Vec::new();
    let mut comparisons = Vec::new();
    let mut results = Vec::new();
    for &(f, current) in &cases {
        let sol = solve(m, p, f, Sequence::Positive, current)?;
        for (name, base) in [(LineName::ML1, &ml1), (LineName::ML2, &ml2)] {
            let key = field_key(name, f);
            let meas = p.measurements.get(&key);
            let mut distances = base.clone();
            if let Some(meas) = meas {
                distances.extend(meas.rows.iter().map(|r| r.x));
            }
            let line = MeasurementLine::new(name, sorted_unique(distances));
            let profile = line_profile(&sol, &line)?;
            let b = profile.b_ut();
            let mut t = DataTable::new(
                format!("mf_{}_{f}hz", format!("{name:?}").to_lowercase()),
                &[
                    "dist_m",
                    "b_ut_computed",
                    "b_ut_measured",
                    "b_conductors_ut",
                    "b_sheaths_ut",
                    "b_armor_ut",
                    "below_meter_floor",
                ],
            );
            for (i, s) in profile.samples.iter().enumerate() {
                let d = line.distances[i];
                let measured = meas.and_then(|m| m.rows.iter().find(|r| r.x == d)).map(|r| r.value);
                t.push(vec![
                    num(d),
                    num(b[i]),
                    opt_num(measured),
                    num(s.groups.conductors * 1e6),
                    num(s.groups.sheaths * 1e6),
                    num(s.groups.armor * 1e6),
                    Value::Bool(b[i] < METER_FLOOR_UT),
                ]);
            }
            tables.push(t);
            let computed: Vec<(f64, f64)> = line.distances.iter().copied().zip(b.iter().copied()).collect();
            if let Some(mut r) = compare_keyed(p, &key, computed)? {
                r.meta.insert("report_only".into(), "true".into());
                comparisons.push(r);
            }
            let far: Vec<usize> = (0..b.len()).filter(|&i| line.distances[i] >= 1.0).collect();
            let slope = (far.len() >= 2).then(|| {
                let r: Vec<f64> = far.iter().map(|&i| line.distances[i]).collect();
                let bb: Vec<f64> = far.iter().map(|&i| b[i]).collect();
                log_log_slope(&r, &bb)
            });
            results.push(json!({
                "f_hz": f,
                "phase_current_a": current,
                "line": format!("{name:?}"),
                "b_max_ut": b.iter().copied().fold(0.0, f64::max),
                "far_field_log_log_slope": opt_num(slope.filter(|s| s.is_finite())),
                "i_sheath_a": sol.sheath_current(),
            }));
        }
    }
    let mut notes = vec![format!(
        "cable axis {} m above ground; ML1 horizontal at axis height, ML2 vertical below the axis; ground not modelled",
        tcac_core::mfield::AXIS_HEIGHT
    )];
    if comparisons.is_empty() {
        notes.push(
            "no digitized field measurements bundled; b_ut_measured and eps stay empty unless supplied as B_ML1_<f>hz / B_ML2_<f>hz"
                .into(),
        );
    }
    Ok(Output {
        tables,
        comparisons,
        results: Value::Array(results),
        notes,
    })
}

// ---------------------------------------------------------------------------
// C2 energization
// ---------------------------------------------------------------------------

fn waveform_table(name: String, w: &Waveform) -> DataTable {
    let mut t = DataTable::new(name, &["t_s", "u_v"]);
    for (time, u) in w.times().zip(&w.samples) {
        t.push(vec![num(time), num(*u)]);
    }
    t
}

fn km_label(length: f64) -> String {
    format!("{}km", length / 1e3)
}

fn energize_c2(p: &Prepared) -> Result<Output, BenchError> {
    let cfg = p.config.energize.clone();
    let lengths = cfg
        .as_ref()
        .and_then(|c| c.lengths_m.clone())
        .unwrap_or(vec![10_000.0, p.link_length()]);
    let horizon = cfg.as_ref().and_then(|c| c.horizon_s).unwrap_or(0.02);
    let n = cfg.as_ref().and_then(|c| c.samples).unwrap_or(1 << 15);
    let rms = cfg.as_ref().and_then(|c| c.source_rms_v).unwrap_or(127e3);
    let peak = rms * SQRT_2;
    let opts = EnergizeOptions {
        damping: cfg.as_ref().and_then(|c| c.damping_per_s),
        ..EnergizeOptions::default()
    };

    let mut tables = Vec::new();
    let mut comparisons = Vec::new();
    let mut notes = vec![format!(
        "open receiving end; step of {peak:.1} V and {rms} V rms AC switched at its peak; riders at the first two resonances (0.1 and 0.05 pu)"
    )];
    let mut results = Vec::new();
    let mut res_table = DataTable::new("open_end_resonances", &["length_m", "order", "f_hz", "provider_id"]);
    for &length in &lengths {
        let res = resonant_frequencies_for_length(&p.provider, length, Sequence::Positive, Termination::OpenCircuit, 4, 200)?;
        for (k, f) in res.iter().enumerate() {
            res_table.push(vec![num(length), json!(k + 1), num(*f), text(p.provider_id())]);
        }
        let key = format!("resonances_{}", km_label(length));
        comparisons.extend(resonance_comparison(p, &key, &res, &mut notes)?);

        let step = energize(&p.provider, length, &SourceSpec::step(peak), horizon, n, &opts)?;
        let riders: Vec<Rider> = res
            .iter()
            .zip([0.1, 0.05])
            .map(|(&f, amplitude)| Rider { f, amplitude })
            .collect();
        let ac = energize(&p.provider, length, &SourceSpec::ac(rms, 50.0, riders.clone()), horizon, n, &opts)?;
        let peak_pu = |w: &Waveform| w.samples.iter().fold(0.0f64, |a, u| a.max(u.abs())) / peak;
        results.push(json!({
            "length_m": length,
            "resonances_hz": res,
            "step_peak_pu": peak_pu(&step),
            "ac_peak_pu": peak_pu(&ac),
            "riders": riders.iter().map(|r| json!({"f_hz": r.f, "pu": r.amplitude})).collect::<Vec<_>>(),
            "damping_per_s": step.meta.damping,
            "warnings": serde_json::to_value(&step.meta.warnings)?,
        }));
        tables.push(waveform_table(format!("u_step_{}", km_label(length)), &step));
        tables.push(waveform_table(format!("u_ac_{}", km_label(length)), &ac));
    }
    tables.push(res_table);
    notes.push("published resonances for this case are computed values; ε is a model-to-model difference".into());
    Ok(Output {
        tables,
        comparisons,
        results: Value::Array(results),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn study_names_round_trip() {
        for s in Study::ALL {
            assert_eq!(s.name().parse::<Study>().unwrap(), s);
        }
        let err = "nope".parse::<Study>().unwrap_err().to_string();
        for name in Study::names() {
            assert!(err.contains(name), "{err}");
        }
    }

    #[test]
    fn field_keys() {
        assert_eq!(parse_field_key("B_ML1_50hz"), Some((LineName::ML1, 50.0)));
        assert_eq!(parse_field_key(&field_key(LineName::ML2, 120.0)), Some((LineName::ML2, 120.0)));
        assert_eq!(parse_field_key("B_ML3_50hz"), None);
        assert_eq!(parse_field_key("B_ML1_50"), None);
    }

    #[test]
    fn dry_run_resolves_without_solving() {
        for s in Study::ALL {
            let plan = dry_run(&StudyConfig::new(s.name())).unwrap();
            assert_eq!(plan.study, s.name());
            assert!(plan.fixtures.iter().any(|f| f.ends_with("cables.json")));
        }
        let plan = dry_run(&StudyConfig::new("resonances_C2")).unwrap();
        assert_eq!(plan.provider_id, "table:c2_constant");
        assert_eq!(plan.measurements, ["oc", "oc_reference", "sc", "sc_reference"]);
    }

    #[test]
    fn solver_studies_reject_tables() {
        let mut cfg = StudyConfig::new("sheath_C3");
        cfg.provider = Some(ProviderConfig::Bundled {
            name: fixtures::C2_CONSTANT_TABLE.into(),
        });
        assert!(matches!(dry_run(&cfg), Err(BenchError::Invalid(_))));
    }

    #[test]
    fn table_coverage_is_checked() {
        let mut cfg = StudyConfig::new("harmonic_C2_sc");
        cfg.provider = Some(ProviderConfig::Bundled {
            name: fixtures::C2_CONSTANT_TABLE.into(),
        });
        cfg.sequences = Some(vec![Sequence::Zero]);
        let err = dry_run(&cfg).unwrap_err();
        assert!(matches!(err, BenchError::Coverage { .. }), "{err}");
        assert!(err.to_string().contains("c2_constant.csv"), "{err}");
    }

    #[test]
    fn unknown_measurement_key_is_rejected() {
        let mut cfg = StudyConfig::new("rx_C1");
        cfg.measurements.insert("I_s".into(), "/tmp/x.csv".into());
        assert!(matches!(dry_run(&cfg), Err(BenchError::Config { .. })));
    }
}
