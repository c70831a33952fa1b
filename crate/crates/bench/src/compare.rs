//! Relative differences between measured and computed series.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::BenchError;
use crate::measurement::MeasurementSeries;

/// Largest relative spacing of computed abscissas across which a measured
/// abscissa may be interpolated.
pub const MAX_INTERPOLATION_SPACING: f64 = 0.01;

/// Computed values with the provider that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputedSeries {
    pub provider_id: String,
    /// `(abscissa, value)`, strictly increasing in abscissa.
    pub points: Vec<(f64, f64)>,
}

impl ComputedSeries {
    pub fn new(provider_id: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            provider_id: provider_id.into(),
            points,
        }
    }

    fn at(&self, x: f64) -> Option<f64> {
        let p = &self.points;
        let close = |a: f64| (a - x).abs() <= 1e-9 * x.abs().max(1e-300);
        if let Some(&(_, v)) = p.iter().find(|(a, _)| close(*a)) {
            return Some(v);
        }
        let i = p.windows(2).position(|w| w[0].0 < x && x < w[1].0)?;
        let ((x0, y0), (x1, y1)) = (p[i], p[i + 1]);
        if (x1 - x0) > MAX_INTERPOLATION_SPACING * x.abs() {
            return None;
        }
        Some(y0 + (x - x0) / (x1 - x0) * (y1 - y0))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    /// Relative band (%) applied to rows without their own tolerance.
    pub band_pct: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowFlag {
    OutsideTolerance,
    /// ε undefined; the row is excluded from the summary.
    MeasuredZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub x: f64,
    pub measured: f64,
    pub computed: f64,
    pub tolerance: Option<f64>,
    /// 100·(computed − measured)/measured.
    pub eps_pct: Option<f64>,
    pub within_tolerance: Option<bool>,
    pub flags: Vec<RowFlag>,
    pub fixture_id: String,
    pub provider_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub rows: usize,
    /// Rows with a defined ε.
    pub compared: usize,
    pub excluded: usize,
    pub max_abs_eps_pct: Option<f64>,
    pub mean_abs_eps_pct: Option<f64>,
    /// Share of rows with a tolerance decision that fall inside it.
    pub within_tolerance_share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub quantity: String,
    pub unit: String,
    pub abscissa: String,
    pub fixture_id: String,
    pub provider_id: String,
    pub provenance: String,
    pub digitized: bool,
    pub rows: Vec<ComparisonRow>,
    pub summary: ComparisonSummary,
    pub meta: BTreeMap<String, String>,
}

/// `100·(computed − measured)/measured`, undefined for a zero measurement.
pub fn relative_difference(measured: f64, computed: f64) -> Option<f64> {
    (measured != 0.0).then(|| 100.0 * (computed - measured) / measured)
}

pub fn compare(
    meas: &MeasurementSeries,
    calc: &ComputedSeries,
    opts: &CompareOptions,
) -> Result<ComparisonReport, BenchError> {
    meas.validate()?;
    let mut rows = Vec::with_capacity(meas.rows.len());
    for m in &meas.rows {
        let computed = calc.at(m.x).ok_or_else(|| {
            BenchError::Invalid(format!(
                "{}: no computed value from `{}` at {} = {} (needs a match or spacing within {}%)",
                meas.fixture_id,
                calc.provider_id,
                meas.abscissa,
                m.x,
                MAX_INTERPOLATION_SPACING * 100.0
            ))
        })?;
        let eps = relative_difference(m.value, computed);
        let mut flags = Vec::new();
        let within = match (eps, m.tolerance, opts.band_pct) {
            (None, _, _) => {
                flags.push(RowFlag::MeasuredZero);
                None
            }
            (Some(_), Some(tol), _) => Some((computed - m.value).abs() <= tol),
            (Some(e), None, Some(band)) => Some(e.abs() <= band),
            (Some(_), None, None) => None,
        };
        if within == Some(false) {
            flags.push(RowFlag::OutsideTolerance);
        }
        rows.push(ComparisonRow {
            x: m.x,
            measured: m.value,
            computed,
            tolerance: m.tolerance,
            eps_pct: eps,
            within_tolerance: within,
            flags,
            fixture_id: meas.fixture_id.clone(),
            provider_id: calc.provider_id.clone(),
        });
    }

    let eps: Vec<f64> = rows.iter().filter_map(|r| r.eps_pct).map(f64::abs).collect();
    let decided: Vec<bool> = rows.iter().filter_map(|r| r.within_tolerance).collect();
    let summary = ComparisonSummary {
        rows: rows.len(),
        compared: eps.len(),
        excluded: rows.len() - eps.len(),
        max_abs_eps_pct: eps.iter().copied().reduce(f64::max),
        mean_abs_eps_pct: (!eps.is_empty()).then(|| eps.iter().sum::<f64>() / eps.len() as f64),
        within_tolerance_share: (!decided.is_empty())
            .then(|| decided.iter().filter(|&&w| w).count() as f64 / decided.len() as f64),
    };
    Ok(ComparisonReport {
        quantity: meas.quantity.clone(),
        unit: meas.unit.clone(),
        abscissa: meas.abscissa.clone(),
        fixture_id: meas.fixture_id.clone(),
        provider_id: calc.provider_id.clone(),
        provenance: meas.provenance.clone(),
        digitized: meas.digitized,
        rows,
        summary,
        meta: BTreeMap::new(),
    })
}

impl ComparisonReport {
    pub fn eps(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.eps_pct).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), BenchError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "x",
            "measured",
            "computed",
            "tolerance",
            "eps_pct",
            "within_tolerance",
            "flags",
            "fixture_id",
            "provider_id",
        ])?;
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            let flags: Vec<String> = r
                .flags
                .iter()
                .map(|f| serde_json::to_value(f).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default())
                .collect();
            w.write_record([
                r.x.to_string(),
                r.measured.to_string(),
                r.computed.to_string(),
                opt(r.tolerance),
                opt(r.eps_pct),
                r.within_tolerance.map(|b| b.to_string()).unwrap_or_default(),
                flags.join("|"),
                r.fixture_id.clone(),
                r.provider_id.clone(),
            ])?;
        }
        w.flush().map_err(|e| BenchError::io("comparison csv", e))?;
        Ok(())
    }
}
