//! Report bundles and the run-directory writer.
//!
//! Every file is written to a temporary name in the run directory and renamed
//! into place, so a reader (or an interrupted re-run) only ever sees complete
//! files. `manifest.json` is written last and is the only output carrying a
//! timestamp.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::compare::ComparisonReport;
use crate::error::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Column-oriented plot data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl DataTable {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Value>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].clone()).collect())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, BenchError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(cell_text))?;
        }
        w.into_inner().map_err(|e| BenchError::Invalid(e.to_string()))
    }

    /// Array of objects keyed by column name.
    pub fn to_json(&self) -> Result<Vec<u8>, BenchError> {
        let objects: Vec<serde_json::Map<String, Value>> = self
            .rows
            .iter()
            .map(|r| self.columns.iter().cloned().zip(r.iter().cloned()).collect())
            .collect();
        Ok(serde_json::to_vec_pretty(&objects)?)
    }

    pub fn encode(&self, format: OutputFormat) -> Result<Vec<u8>, BenchError> {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

/// Finite floats as JSON numbers, anything else as null.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

pub fn opt_num(v: Option<f64>) -> Value {
    v.map(num).unwrap_or(Value::Null)
}

pub fn text(s: impl Into<String>) -> Value {
    Value::String(s.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub study: String,
    pub label: Option<String>,
    pub tool_version: String,
    pub provider_id: String,
    /// Origins of all fixtures the study read.
    pub fixtures: Vec<String>,
    /// The resolved configuration.
    pub config: Value,
    pub comparisons: Vec<ComparisonReport>,
    /// Study-specific scalar results.
    pub results: Value,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub report: StudyReport,
    pub tables: Vec<DataTable>,
}

impl ReportBundle {
    pub fn table(&self, name: &str) -> Option<&DataTable> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn comparison(&self, fixture_id: &str) -> Option<&ComparisonReport> {
        self.report.comparisons.iter().find(|c| c.fixture_id == fixture_id)
    }

    /// `report.json` contents; deterministic for a given config and fixtures.
    pub fn report_json(&self) -> Result<Vec<u8>, BenchError> {
        let mut bytes = serde_json::to_vec_pretty(&self.report)?;
        bytes.push(b'\n');
        Ok(bytes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub study: String,
    pub tool_version: String,
    pub created_unix_s: u64,
    pub files: Vec<ManifestEntry>,
}

/// Writes `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), BenchError> {
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, &target)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(BenchError::io(target.display(), e));
    }
    Ok(())
}

/// Exclusive writer lock on a run directory, released on drop.
struct RunLock {
    path: PathBuf,
}

impl RunLock {
    fn acquire(dir: &Path) -> Result<Self, BenchError> {
        let path = dir.join(".lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(BenchError::Locked {
                path: dir.display().to_string(),
            }),
            Err(e) => Err(BenchError::io(path.display(), e)),
        }
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Writes the bundle into `dir` (created if needed): one file per table in
/// `format`, `report.json`, then `manifest.json`.
pub fn write_bundle(bundle: &ReportBundle, dir: &Path, format: OutputFormat) -> Result<Manifest, BenchError> {
    fs::create_dir_all(dir).map_err(|e| BenchError::io(dir.display(), e))?;
    let _lock = RunLock::acquire(dir)?;
    let mut files = Vec::new();
    let mut put = |name: String, bytes: Vec<u8>| -> Result<(), BenchError> {
        write_atomic(dir, &name, &bytes)?;
        files.push(ManifestEntry {
            name,
            bytes: bytes.len() as u64,
            sha256: format!("{:x}", Sha256::digest(&bytes)),
        });
        Ok(())
    };
    for t in &bundle.tables {
        put(format!("{}.{}", t.name, format.extension()), t.encode(format)?)?;
    }
    for c in &bundle.report.comparisons {
        let mut out = Vec::new();
        c.write_csv(&mut out)?;
        put(format!("compare_{}.csv", c.fixture_id), out)?;
    }
    put("report.json".into(), bundle.report_json()?)?;
    let manifest = Manifest {
        study: bundle.report.study.clone(),
        tool_version: bundle.report.tool_version.clone(),
        created_unix_s: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        files,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    write_atomic(dir, "manifest.json", &bytes)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn table() -> DataTable {
        let mut t = DataTable::new("t", &["f_hz", "note"]);
        t.push(vec![num(50.0), text("a")]);
        t.push(vec![num(f64::NAN), Value::Null]);
        t
    }

    #[test]
    fn table_encodings() {
        let t = table();
        assert_eq!(String::from_utf8(t.to_csv().unwrap()).unwrap(), "f_hz,note\n50.0,a\n,\n");
        let v: Value = serde_json::from_slice(&t.to_json().unwrap()).unwrap();
        assert_eq!(v, json!([{"f_hz": 50.0, "note": "a"}, {"f_hz": null, "note": null}]));
        assert_eq!(t.column("note").unwrap(), vec![text("a"), Value::Null]);
    }

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "a.txt", b"first version").unwrap();
        write_atomic(dir.path(), "a.txt", b"2nd").unwrap();
        assert_eq!(fs::read(dir.path().join("a.txt")).unwrap(), b"2nd");
        let leftovers: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
            .collect();
        assert!(leftovers.is_empty());
    }

    #[test]
    fn second_writer_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let _held = RunLock::acquire(dir.path()).unwrap();
        let bundle = ReportBundle {
            report: StudyReport {
                study: "s".into(),
                label: None,
                tool_version: "0".into(),
                provider_id: "p".into(),
                fixtures: vec![],
                config: Value::Null,
                comparisons: vec![],
                results: Value::Null,
                notes: vec![],
            },
            tables: vec![table()],
        };
        assert!(matches!(
            write_bundle(&bundle, dir.path(), OutputFormat::Csv),
            Err(BenchError::Locked { .. })
        ));
        drop(_held);
        let m = write_bundle(&bundle, dir.path(), OutputFormat::Json).unwrap();
        let names: Vec<_> = m.files.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["t.json", "report.json"]);
        assert!(dir.path().join("manifest.json").exists());
        assert!(!dir.path().join(".lock").exists());
    }
}
