//! Measurement series and their CSV exchange format.
//!
//! A measurement file starts with a one-line schema header followed by a
//! regular CSV table:
//!
//! ```text
//! # tcac-measurement v1; fixture=sheath_current_c3; quantity=I_s; unit=A; abscissa=f_hz; digitized=false; provenance=...
//! x,value,tolerance,excitation_a
//! 50,187,,745
//! ```
//!
//! `tolerance` is an absolute ± band in the unit of `value`; `excitation_a`
//! is the phase current the row was taken at. Both may be left empty.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::BenchError;

pub const SCHEMA_TAG: &str = "tcac-measurement v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRow {
    pub x: f64,
    pub value: f64,
    pub tolerance: Option<f64>,
    pub excitation_a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSeries {
    pub fixture_id: String,
    /// e.g. `I_s`, `Z_SC_pos`, `P_total`, `B_rms`, `resonance_f`.
    pub quantity: String,
    pub unit: String,
    /// Name of the abscissa, e.g. `f_hz`, `order`, `dist_m`.
    pub abscissa: String,
    pub provenance: String,
    /// Read off a plot rather than a printed table; report-only.
    pub digitized: bool,
    pub rows: Vec<MeasurementRow>,
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    x: f64,
    value: f64,
    #[serde(default)]
    tolerance: Option<f64>,
    #[serde(default)]
    excitation_a: Option<f64>,
}

impl MeasurementSeries {
    /// Checks that abscissas strictly increase and tolerances are >= 0.
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |reason: String| BenchError::Fixture {
            path: self.fixture_id.clone(),
            reason,
        };
        if self.rows.iter().any(|r| !r.x.is_finite() || !r.value.is_finite()) {
            return Err(bad("non-finite abscissa or value".into()));
        }
        if let Some(w) = self.rows.windows(2).find(|w| w[1].x <= w[0].x) {
            return Err(bad(format!(
                "abscissa must be strictly increasing ({} then {})",
                w[0].x, w[1].x
            )));
        }
        if let Some(r) = self.rows.iter().find(|r| r.tolerance.is_some_and(|t| t.is_nan() || t < 0.0)) {
            return Err(bad(format!("negative tolerance at x = {}", r.x)));
        }
        Ok(())
    }

    /// Parses the schema header plus CSV body; `origin` names the source in
    /// error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self, BenchError> {
        let bad = |reason: String| BenchError::Fixture {
            path: origin.to_string(),
            reason,
        };
        let (header, body) = text.split_once('\n').ok_or_else(|| bad("empty file".into()))?;
        let header = header.trim_end_matches('\r');
        let fields = header
            .strip_prefix('#')
            .map(str::trim)
            .and_then(|h| h.strip_prefix(SCHEMA_TAG))
            .ok_or_else(|| bad(format!("first line must start with `# {SCHEMA_TAG}`")))?;
        let mut kv = BTreeMap::new();
        for part in fields.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("schema field `{part}` is not key=value")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut take = |key: &str| kv.remove(key).ok_or_else(|| bad(format!("schema header lacks `{key}`")));
        let fixture_id = take("fixture")?;
        let quantity = take("quantity")?;
        let unit = take("unit")?;
        let abscissa = take("abscissa")?;
        let provenance = kv.remove("provenance").unwrap_or_default();
        let digitized = match kv.remove("digitized").as_deref() {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => return Err(bad(format!("digitized must be true or false, got `{other}`"))),
        };
        if let Some(key) = kv.keys().next() {
            return Err(bad(format!("unknown schema field `{key}`")));
        }

        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
        let mut rows = Vec::new();
        for (i, rec) in reader.deserialize::<CsvRow>().enumerate() {
            let r = rec.map_err(|e| bad(format!("row {}: {e}", i + 1)))?;
            rows.push(MeasurementRow {
                x: r.x,
                value: r.value,
                tolerance: r.tolerance,
                excitation_a: r.excitation_a,
            });
        }
        let series = Self {
            fixture_id,
            quantity,
            unit,
            abscissa,
            provenance,
            digitized,
            rows,
        };
        series.validate().map_err(|e| match e {
            BenchError::Fixture { reason, .. } => bad(reason),
            other => other,
        })?;
        Ok(series)
    }

    pub fn to_csv_string(&self) -> Result<String, BenchError> {
        let mut out = format!(
            "# {SCHEMA_TAG}; fixture={}; quantity={}; unit={}; abscissa={}; digitized={}; provenance={}\n",
            self.fixture_id, self.quantity, self.unit, self.abscissa, self.digitized, self.provenance
        );
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["x", "value", "tolerance", "excitation_a"])?;
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            w.write_record([r.x.to_string(), r.value.to_string(), opt(r.tolerance), opt(r.excitation_a)])?;
        }
        let bytes = w.into_inner().map_err(|e| BenchError::Invalid(e.to_string()))?;
        out.push_str(&String::from_utf8_lossy(&bytes));
        Ok(out)
    }

    /// First `n` rows only.
    pub fn truncated(&self, n: usize) -> Self {
        let mut s = self.clone();
        s.rows.truncate(n);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# tcac-measurement v1; fixture=t; quantity=I_s; unit=A; abscissa=f_hz; provenance=test\n\
                          x,value,tolerance,excitation_a\n\
                          50,187,,745\n\
                          120,136,2.5,304\n";

    #[test]
    fn parse_and_round_trip() {
        let s = MeasurementSeries::parse(SAMPLE, "mem").unwrap();
        assert_eq!(s.quantity, "I_s");
        assert_eq!(s.rows.len(), 2);
        assert_eq!(s.rows[0].tolerance, None);
        assert_eq!(s.rows[1].tolerance, Some(2.5));
        assert_eq!(s.rows[1].excitation_a, Some(304.0));
        let again = MeasurementSeries::parse(&s.to_csv_string().unwrap(), "mem").unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn rejects_bad_input() {
        let missing = SAMPLE.replace("quantity=I_s; ", "");
        assert!(MeasurementSeries::parse(&missing, "m").is_err());
        let unordered = SAMPLE.replace("120,136", "40,136");
        let err = MeasurementSeries::parse(&unordered, "file.csv").unwrap_err().to_string();
        assert!(err.contains("file.csv") && err.contains("strictly increasing"), "{err}");
        let negative = SAMPLE.replace("2.5", "-1");
        assert!(MeasurementSeries::parse(&negative, "m").is_err());
        assert!(MeasurementSeries::parse("x,value\n1,2\n", "m").is_err());
        let extra = SAMPLE.replace("provenance=test", "provenance=test; colour=red");
        assert!(MeasurementSeries::parse(&extra, "m").is_err());
    }
}
