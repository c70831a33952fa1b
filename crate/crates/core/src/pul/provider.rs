use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use super::solver::{sequence_impedance, solve_cross_section, EngineOptions, Excitation};
use super::{capacitance, PulError, PulParams, PulTable, Sequence};
use crate::geometry::{CableSpec, Environment};
use crate::Complex;

/// Where per-unit-length parameters come from.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum PulSource {
    Analytic {
        spec: CableSpec,
        env: Environment,
        options: EngineOptions,
    },
    Table { id: String, table: PulTable },
}

#[derive(Debug)]
struct Analytic {
    spec: CableSpec,
    env: Environment,
    options: EngineOptions,
    /// Series `(r, l)` keyed by the frequency's bit pattern.
    cache: RwLock<HashMap<(u64, Sequence), (f64, f64)>>,
}

#[derive(Debug)]
enum Backend {
    Analytic(Box<Analytic>),
    Table(PulTable),
}

/// Uniform access to `z(f)` and `y(f)` per sequence.
///
/// The analytic backend solves the cross-section on demand and memoizes each
/// frequency; the table backend interpolates.
#[derive(Debug)]
pub struct PulProvider {
    id: String,
    backend: Backend,
}

pub fn make_provider(source: PulSource) -> Result<PulProvider, PulError> {
    match source {
        PulSource::Analytic { spec, env, options } => {
            spec.validate()?;
            env.validate()?;
            Ok(PulProvider {
                id: format!("analytic:{}", spec.name),
                backend: Backend::Analytic(Box::new(Analytic {
                    spec,
                    env,
                    options,
                    cache: RwLock::new(HashMap::new()),
                })),
            })
        }
        PulSource::Table { id, table } => Ok(PulProvider {
            id: format!("table:{id}"),
            backend: Backend::Table(table),
        }),
    }
}

impl PulProvider {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self.backend, Backend::Analytic(_))
    }

    /// Frequency range served for `seq`.
    pub fn range(&self, seq: Sequence) -> Result<(f64, f64), PulError> {
        match &self.backend {
            Backend::Analytic(_) => Ok((f64::MIN_POSITIVE, f64::INFINITY)),
            Backend::Table(t) => t.range(seq),
        }
    }

    pub fn covers(&self, seq: Sequence, lo: f64, hi: f64) -> bool {
        self.range(seq).is_ok_and(|(a, b)| a <= lo && hi <= b)
    }

    /// Series resistance (Ω/m) and inductance (H/m).
    pub fn series(&self, f: f64, seq: Sequence) -> Result<(f64, f64), PulError> {
        match &self.backend {
            Backend::Table(t) => {
                let p = t.interpolate(f, seq)?;
                Ok((p.r, p.l))
            }
            Backend::Analytic(a) => {
                let key = (f.to_bits(), seq);
                if let Some(v) = a.cache.read().expect("cache lock").get(&key) {
                    return Ok(*v);
                }
                let sol = solve_cross_section(&a.spec, &a.env, f, &Excitation::new(seq, 1.0), &a.options)?;
                let p = sequence_impedance(&sol);
                let v = (p.r, p.l);
                a.cache.write().expect("cache lock").entry(key).or_insert(v);
                Ok(v)
            }
        }
    }

    pub fn params(&self, f: f64, seq: Sequence) -> Result<PulParams, PulError> {
        match &self.backend {
            Backend::Table(t) => t.interpolate(f, seq),
            Backend::Analytic(a) => {
                let (r, l) = self.series(f, seq)?;
                let c = capacitance(&a.spec)?;
                Ok(PulParams {
                    f,
                    sequence: seq,
                    r,
                    l,
                    g: 2.0 * PI * f * c * a.spec.loss_tangent(f),
                    c,
                })
            }
        }
    }

    pub fn series_impedance(&self, f: f64, seq: Sequence) -> Result<Complex, PulError> {
        let (r, l) = self.series(f, seq)?;
        Ok(Complex::new(r, 2.0 * PI * f * l))
    }

    pub fn shunt_admittance(&self, f: f64, seq: Sequence) -> Result<Complex, PulError> {
        Ok(self.params(f, seq)?.y())
    }

    /// Samples this provider into a table at the given frequencies.
    pub fn tabulate(&self, freqs: &[f64], seqs: &[Sequence]) -> Result<PulTable, PulError> {
        use rayon::prelude::*;
        let mut rows = Vec::new();
        for &seq in seqs {
            let params = freqs
                .par_iter()
                .map(|&f| self.params(f, seq))
                .collect::<Result<Vec<_>, _>>()?;
            rows.extend(params.iter().map(super::PulRow::from_params));
        }
        PulTable::new(rows)
    }
}
