use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PulError, PulParams, Sequence};

/// One CSV row, stored in the exchange units so that a read/write cycle is
/// bit-exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulRow {
    pub f_hz: f64,
    pub seq: Sequence,
    pub r_ohm_per_km: f64,
    pub l_mh_per_km: f64,
    pub g_s_per_km: f64,
    pub c_nf_per_km: f64,
}

impl PulRow {
    pub fn from_params(p: &PulParams) -> Self {
        Self {
            f_hz: p.f,
            seq: p.sequence,
            r_ohm_per_km: p.r * 1e3,
            l_mh_per_km: p.l * 1e6,
            g_s_per_km: p.g * 1e3,
            c_nf_per_km: p.c * 1e12,
        }
    }

    pub fn to_params(&self) -> PulParams {
        PulParams {
            f: self.f_hz,
            sequence: self.seq,
            r: self.r_ohm_per_km * 1e-3,
            l: self.l_mh_per_km * 1e-6,
            g: self.g_s_per_km * 1e-3,
            c: self.c_nf_per_km * 1e-12,
        }
    }
}

pub const TABLE_HEADER: &str = "f_hz,seq,r_ohm_per_km,l_mh_per_km,g_s_per_km,c_nf_per_km";

/// Tabulated per-unit-length parameters, one frequency-sorted list per
/// sequence. Interpolation is linear in log-frequency for `r`, `l` and `c`,
/// and linear in frequency for `g`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulTable {
    rows: BTreeMap<Sequence, Vec<PulRow>>,
}

impl PulTable {
    pub fn new(rows: Vec<PulRow>) -> Result<Self, PulError> {
        let mut by_seq: BTreeMap<Sequence, Vec<PulRow>> = BTreeMap::new();
        for row in rows {
            let vals = [row.f_hz, row.r_ohm_per_km, row.l_mh_per_km, row.g_s_per_km, row.c_nf_per_km];
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(PulError::InvalidTable(format!("non-finite value at {} Hz", row.f_hz)));
            }
            if row.f_hz <= 0.0 {
                return Err(PulError::InvalidTable(format!("frequency must be > 0, got {}", row.f_hz)));
            }
            if row.r_ohm_per_km < 0.0 || row.g_s_per_km < 0.0 || row.c_nf_per_km <= 0.0 {
                return Err(PulError::InvalidTable(format!(
                    "need r >= 0, g >= 0, c > 0 at {} Hz ({})",
                    row.f_hz, row.seq
                )));
            }
            by_seq.entry(row.seq).or_default().push(row);
        }
        for (seq, rows) in &by_seq {
            if rows.windows(2).any(|w| w[1].f_hz <= w[0].f_hz) {
                return Err(PulError::InvalidTable(format!(
                    "{seq} rows must have strictly increasing frequency"
                )));
            }
        }
        Ok(Self { rows: by_seq })
    }

    /// Same parameters at two frequencies bracketing `[f_lo, f_hi]`.
    pub fn constant(sequence: Sequence, f_lo: f64, f_hi: f64, r: f64, l: f64, g: f64, c: f64) -> Result<Self, PulError> {
        let row = |f| {
            PulRow::from_params(&PulParams {
                f,
                sequence,
                r,
                l,
                g,
                c,
            })
        };
        Self::new(vec![row(f_lo), row(f_hi)])
    }

    pub fn rows(&self) -> impl Iterator<Item = &PulRow> {
        self.rows.values().flatten()
    }

    pub fn sequences(&self) -> impl Iterator<Item = Sequence> + '_ {
        self.rows.keys().copied()
    }

    /// Tabulated frequency range of one sequence.
    pub fn range(&self, seq: Sequence) -> Result<(f64, f64), PulError> {
        let rows = self.rows.get(&seq).ok_or(PulError::MissingSequence(seq))?;
        Ok((rows[0].f_hz, rows[rows.len() - 1].f_hz))
    }

    pub fn covers(&self, seq: Sequence, lo: f64, hi: f64) -> bool {
        self.range(seq).is_ok_and(|(a, b)| a <= lo && hi <= b)
    }

    pub fn interpolate(&self, f: f64, seq: Sequence) -> Result<PulParams, PulError> {
        let rows = self.rows.get(&seq).ok_or(PulError::MissingSequence(seq))?;
        let (lo, hi) = (rows[0].f_hz, rows[rows.len() - 1].f_hz);
        if !(f >= lo && f <= hi) {
            return Err(PulError::OutOfRange { f, lo, hi, sequence: seq });
        }
        let i = rows.partition_point(|r| r.f_hz < f);
        if rows[i].f_hz == f {
            return Ok(rows[i].to_params());
        }
        let (a, b) = (rows[i - 1].to_params(), rows[i].to_params());
        let t = (f / a.f).ln() / (b.f / a.f).ln();
        let lerp = |x: f64, y: f64, t: f64| x + t * (y - x);
        let tg = (f - a.f) / (b.f - a.f);
        Ok(PulParams {
            f,
            sequence: seq,
            r: lerp(a.r, b.r, t),
            l: lerp(a.l, b.l, t),
            g: lerp(a.g, b.g, tg),
            c: lerp(a.c, b.c, t),
        })
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, PulError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.join(",") != TABLE_HEADER {
            return Err(PulError::InvalidTable(format!(
                "expected header `{TABLE_HEADER}`, found `{}`",
                header.join(",")
            )));
        }
        let rows = rdr.deserialize().collect::<Result<Vec<PulRow>, _>>()?;
        Self::new(rows)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), PulError> {
        let mut wtr = csv::Writer::from_writer(writer);
        for row in self.rows() {
            wtr.serialize(row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, PulError> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn to_csv_string(&self) -> Result<String, PulError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const CSV: &str = "f_hz,seq,r_ohm_per_km,l_mh_per_km,g_s_per_km,c_nf_per_km\n\
        10,pos,0.03,0.4,0,156.25\n\
        1000,pos,0.09,0.3,0.002,156.25\n\
        10,zero,0.2,1.5,0,156.25\n";

    #[test]
    fn tabulated_points_are_exact() {
        let t = PulTable::read_csv(CSV.as_bytes()).unwrap();
        let p = t.interpolate(1000.0, Sequence::Positive).unwrap();
        assert_eq!(p.r, 0.09 * 1e-3);
        assert_eq!(p.l, 0.3 * 1e-6);
    }

    #[test]
    fn geometric_midpoint_is_log_linear() {
        let t = PulTable::read_csv(CSV.as_bytes()).unwrap();
        let p = t.interpolate(100.0, Sequence::Positive).unwrap();
        assert!((p.r - 0.06e-3).abs() < 1e-15);
        assert!((p.l - 0.35e-6).abs() < 1e-18);
        // g is linear in frequency
        assert!((p.g - 0.002e-3 * 90.0 / 990.0).abs() < 1e-15);
        assert!((p.c - 156.25e-12).abs() < 1e-24);
    }

    #[test]
    fn out_of_range_and_missing_sequence() {
        let t = PulTable::read_csv(CSV.as_bytes()).unwrap();
        assert!(matches!(
            t.interpolate(5.0, Sequence::Positive),
            Err(PulError::OutOfRange { .. })
        ));
        assert!(t.interpolate(10.0, Sequence::Zero).is_ok());
        assert!(t.interpolate(11.0, Sequence::Zero).is_err());
        let only_pos = PulTable::constant(Sequence::Positive, 1.0, 10.0, 1e-5, 1e-7, 0.0, 1e-10).unwrap();
        assert!(matches!(
            only_pos.interpolate(5.0, Sequence::Zero),
            Err(PulError::MissingSequence(_))
        ));
    }

    #[test]
    fn rejects_bad_tables() {
        let bad_header = CSV.replace("c_nf_per_km", "c");
        assert!(PulTable::read_csv(bad_header.as_bytes()).is_err());
        let unsorted = "f_hz,seq,r_ohm_per_km,l_mh_per_km,g_s_per_km,c_nf_per_km\n\
            10,pos,0.03,0.4,0,156\n5,pos,0.03,0.4,0,156\n";
        assert!(PulTable::read_csv(unsorted.as_bytes()).is_err());
        let negative = "f_hz,seq,r_ohm_per_km,l_mh_per_km,g_s_per_km,c_nf_per_km\n10,pos,-1,0.4,0,156\n";
        assert!(PulTable::read_csv(negative.as_bytes()).is_err());
    }

    #[test]
    fn csv_text_roundtrip() {
        let t = PulTable::read_csv(CSV.as_bytes()).unwrap();
        let text = t.to_csv_string().unwrap();
        let again = PulTable::read_csv(text.as_bytes()).unwrap();
        assert_eq!(t, again);
        assert_eq!(text, again.to_csv_string().unwrap());
    }

    proptest! {
        #[test]
        fn csv_roundtrip_is_bit_exact(
            vals in proptest::collection::vec((1e-3f64..1e7, 0.0f64..1e3, 1e-6f64..1e3, 0.0f64..1.0, 1e-3f64..1e4), 1..20)
        ) {
            let mut f = 0.0;
            let rows: Vec<PulRow> = vals.iter().map(|&(df, r, l, g, c)| {
                f += df;
                PulRow { f_hz: f, seq: Sequence::Zero, r_ohm_per_km: r, l_mh_per_km: l, g_s_per_km: g, c_nf_per_km: c }
            }).collect();
            let t = PulTable::new(rows).unwrap();
            let back = PulTable::read_csv(t.to_csv_string().unwrap().as_bytes()).unwrap();
            for (a, b) in t.rows().zip(back.rows()) {
                prop_assert_eq!(a.f_hz.to_bits(), b.f_hz.to_bits());
                prop_assert_eq!(a.r_ohm_per_km.to_bits(), b.r_ohm_per_km.to_bits());
                prop_assert_eq!(a.l_mh_per_km.to_bits(), b.l_mh_per_km.to_bits());
                prop_assert_eq!(a.g_s_per_km.to_bits(), b.g_s_per_km.to_bits());
                prop_assert_eq!(a.c_nf_per_km.to_bits(), b.c_nf_per_km.to_bits());
            }
        }
    }
}
