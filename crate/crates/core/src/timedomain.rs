//! Receiving-end waveforms of an open-ended line by damped frequency
//! sampling.
//!
//! The Laplace-domain response `U2(s) = U1(s) / cosh θ(s)` is sampled on the
//! line `s = σ + j2πk·Δf`, tapered by a raised-cosine window over the top of
//! the band and inverted with one FFT over a period of twice the horizon; the
//! factor `e^{σt}` then undoes the damping and the first half is kept. Per-unit-length parameters are evaluated at `|Im s| / 2π` and
//! continued off the axis as `z(s) = r + s·l`, `y(s) = g + s·c`.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pul::{make_provider, PulError, PulParams, PulProvider, PulSource, Sequence};
use crate::tline::{
    find_resonances, quarter_wave_frequency, resonance_frequencies, sweep, FrequencyGrid, LineModel, ResonanceOptions,
    Spacing, Termination, TlineError,
};
use crate::Complex;

#[derive(Debug, Error)]
pub enum TimeDomainError {
    #[error("provider covers [{lo}, {hi}] Hz but the synthesis needs [{need_lo}, {need_hi}] Hz")]
    Coverage { lo: f64, hi: f64, need_lo: f64, need_hi: f64 },
    #[error("sample count must be a power of two >= 4, got {0}")]
    BadSampleCount(usize),
    #[error("{0}")]
    BadInput(String),
    #[error(transparent)]
    Pul(#[from] PulError),
    #[error(transparent)]
    Tline(#[from] TlineError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Step,
    AcWithHarmonics,
}

/// Harmonic rider on an AC source, amplitude in per unit of the fundamental.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rider {
    pub f: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub kind: SourceKind,
    /// Step height, or RMS value of the AC fundamental (V).
    pub amplitude: f64,
    /// Hz; unused for a step.
    #[serde(default)]
    pub fundamental: f64,
    #[serde(default)]
    pub riders: Vec<Rider>,
    /// Phase of `sin(ωt + φ)` at switching; π/2 switches at the peak.
    #[serde(default)]
    pub switching_phase: f64,
}

impl SourceSpec {
    pub fn step(amplitude: f64) -> Self {
        Self {
            kind: SourceKind::Step,
            amplitude,
            fundamental: 0.0,
            riders: Vec::new(),
            switching_phase: 0.0,
        }
    }

    /// AC source switched on at its peak.
    pub fn ac(rms: f64, fundamental: f64, riders: Vec<Rider>) -> Self {
        Self {
            kind: SourceKind::AcWithHarmonics,
            amplitude: rms,
            fundamental,
            riders,
            switching_phase: PI / 2.0,
        }
    }

    pub fn validate(&self) -> Result<(), TimeDomainError> {
        let bad = |m: String| Err(TimeDomainError::BadInput(m));
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return bad(format!("source amplitude must be >= 0, got {}", self.amplitude));
        }
        if self.kind == SourceKind::AcWithHarmonics && !(self.fundamental > 0.0 && self.fundamental.is_finite()) {
            return bad(format!("fundamental must be > 0, got {}", self.fundamental));
        }
        for r in &self.riders {
            if !(r.amplitude >= 0.0 && r.f > 0.0 && r.f.is_finite()) {
                return bad(format!("invalid rider {} Hz / {} pu", r.f, r.amplitude));
            }
        }
        Ok(())
    }

    /// Laplace transform of the source at `s`.
    pub fn laplace(&self, s: Complex) -> Complex {
        match self.kind {
            SourceKind::Step => self.amplitude / s,
            SourceKind::AcWithHarmonics => {
                let peak = self.amplitude * 2f64.sqrt();
                let phi = self.switching_phase;
                let tone = |f: f64, a: f64| {
                    let w = 2.0 * PI * f;
                    a * peak * (s * phi.sin() + w * phi.cos()) / (s * s + w * w)
                };
                self.riders
                    .iter()
                    .fold(tone(self.fundamental, 1.0), |acc, r| acc + tone(r.f, r.amplitude))
            }
        }
    }

    /// Source waveform at `t ≥ 0`.
    pub fn value_at(&self, t: f64) -> f64 {
        match self.kind {
            SourceKind::Step => self.amplitude,
            SourceKind::AcWithHarmonics => {
                let peak = self.amplitude * 2f64.sqrt();
                let tone = |f: f64| (2.0 * PI * f * t + self.switching_phase).sin();
                peak * self.riders.iter().fold(tone(self.fundamental), |acc, r| acc + r.amplitude * tone(r.f))
            }
        }
    }

    fn highest_frequency(&self) -> f64 {
        self.riders.iter().map(|r| r.f).fold(self.fundamental, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnergizeOptions {
    pub sequence: Sequence,
    /// Damping σ (1/s); `None` uses [`default_damping`].
    pub damping: Option<f64>,
    /// Share of the band tapered by the raised cosine.
    pub window_fraction: f64,
    /// Analytic providers are first tabulated on this many log-spaced
    /// frequencies; `None` queries them at every bin.
    pub tabulate_points: Option<usize>,
}

impl Default for EnergizeOptions {
    fn default() -> Self {
        Self {
            sequence: Sequence::Positive,
            damping: None,
            window_fraction: 0.1,
            tabulate_points: Some(96),
        }
    }
}

/// `ln(50)/horizon`: wrap-around suppressed by 2500, errors at the end of the
/// window amplified by at most 50.
pub fn default_damping(horizon: f64) -> f64 {
    50f64.ln() / horizon
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TimeDomainWarning {
    /// Spectrum magnitude inside the taper relative to its peak.
    Aliasing { tail_ratio: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformMeta {
    pub provider_id: String,
    pub sequence: Sequence,
    pub length: f64,
    pub termination: Termination,
    pub horizon: f64,
    pub n: usize,
    pub damping: f64,
    pub window_fraction: f64,
    pub source: SourceSpec,
    /// Largest imaginary part left by the inverse transform, relative to the
    /// largest real sample.
    pub imag_residual: f64,
    pub warnings: Vec<TimeDomainWarning>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    pub dt: f64,
    pub samples: Vec<f64>,
    pub meta: WaveformMeta,
}

impl Waveform {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(|m| m as f64 * self.dt)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), TimeDomainError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t_s", "u_v"])?;
        for (t, u) in self.times().zip(&self.samples) {
            w.write_record([t.to_string(), u.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Open-end voltage ratio on the complex-frequency line, `1 / cosh θ(s)`.
pub fn transfer_at(params: &PulParams, length: f64, s: Complex) -> Complex {
    let z = params.r + s * params.l;
    let y = params.g + s * params.c;
    let theta = (z * y).sqrt() * length;
    let e = (-theta).exp();
    2.0 * e / (1.0 + e * e)
}

/// `U2 / U1` of an open-ended line at real frequency `f`.
pub fn transfer_function(provider: &PulProvider, length: f64, seq: Sequence, f: f64) -> Result<Complex, TimeDomainError> {
    if !(length >= 0.0 && length.is_finite()) {
        return Err(TlineError::BadLength(length).into());
    }
    if f == 0.0 {
        return Ok(Complex::new(1.0, 0.0));
    }
    let p = provider.params(f, seq)?;
    Ok(transfer_at(&p, length, Complex::new(0.0, 2.0 * PI * f)))
}

fn window(f: f64, f_nyq: f64, fraction: f64) -> f64 {
    let start = (1.0 - fraction) * f_nyq;
    if f <= start || fraction <= 0.0 {
        1.0
    } else {
        0.5 * (1.0 + (PI * (f - start) / (f_nyq - start)).cos())
    }
}

/// Band that `energize` samples: `[1/(2·horizon), n/(2·horizon)]`.
pub fn required_band(horizon: f64, n: usize) -> (f64, f64) {
    (1.0 / (2.0 * horizon), n as f64 / (2.0 * horizon))
}

/// Damped signal `u(t)·e^{-σt}` over one period from its one-sided spectrum
/// (`half + 1` bins spaced `df`), windowed and inverted; also returns the
/// imaginary residual of the inverse transform.
fn synthesize_damped(spectrum: &[Complex], df: f64, window_fraction: f64) -> (Vec<f64>, f64) {
    let half = spectrum.len() - 1;
    let n = 2 * half;
    let f_nyq = half as f64 * df;
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for (k, v) in spectrum.iter().enumerate() {
        buf[k] = v * window(k as f64 * df, f_nyq, window_fraction);
    }
    // conjugate symmetry; the Nyquist bin is real
    buf[half] = Complex::new(buf[half].re, 0.0);
    for k in 1..half {
        buf[n - k] = buf[k].conj();
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let max_re = buf.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    let max_im = buf.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    let imag_residual = if max_re > 0.0 { max_im / max_re } else { 0.0 };
    (buf.iter().map(|v| v.re * df).collect(), imag_residual)
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}

/// Receiving-end voltage over `[0, horizon)` on `n` samples when `source`
/// energizes an open-ended line of `length`.
pub fn energize(
    provider: &PulProvider,
    length: f64,
    source: &SourceSpec,
    horizon: f64,
    n: usize,
    opts: &EnergizeOptions,
) -> Result<Waveform, TimeDomainError> {
    source.validate()?;
    if !(length >= 0.0 && length.is_finite()) {
        return Err(TlineError::BadLength(length).into());
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(TimeDomainError::BadInput(format!("horizon must be > 0, got {horizon}")));
    }
    if n < 4 || !n.is_power_of_two() {
        return Err(TimeDomainError::BadSampleCount(n));
    }
    let seq = opts.sequence;
    let (df, f_nyq) = required_band(horizon, n);
    if source.kind == SourceKind::AcWithHarmonics && source.highest_frequency() > (1.0 - opts.window_fraction) * f_nyq {
        return Err(TimeDomainError::BadInput(format!(
            "source tone at {} Hz lies in the tapered band (Nyquist {f_nyq} Hz)",
            source.highest_frequency()
        )));
    }
    let (lo, hi) = provider.range(seq)?;
    if !(lo <= df && f_nyq <= hi) {
        return Err(TimeDomainError::Coverage {
            lo,
            hi,
            need_lo: df,
            need_hi: f_nyq,
        });
    }

    let tabulated;
    let params_source: &PulProvider = match opts.tabulate_points {
        Some(points) if provider.is_analytic() && points >= 2 => {
            let table = provider.tabulate(&log_grid(df, f_nyq, points), &[seq])?;
            tabulated = make_provider(PulSource::Table {
                id: provider.id().to_string(),
                table,
            })?;
            &tabulated
        }
        _ => provider,
    };

    let sigma = opts.damping.unwrap_or_else(|| default_damping(horizon));
    let spectrum: Vec<Complex> = (0..=n)
        .into_par_iter()
        .map(|k| -> Result<Complex, TimeDomainError> {
            let f = k as f64 * df;
            let s = Complex::new(sigma, 2.0 * PI * f);
            let p = params_source.params(f.max(df), seq)?;
            Ok(source.laplace(s) * transfer_at(&p, length, s))
        })
        .collect::<Result<_, _>>()?;

    let peak = spectrum.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let taper_start = ((1.0 - opts.window_fraction) * n as f64).floor() as usize;
    let tail = spectrum[taper_start.min(n)..].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut warnings = Vec::new();
    if peak > 0.0 && tail > 1e-3 * peak {
        warnings.push(TimeDomainWarning::Aliasing { tail_ratio: tail / peak });
    }

    let (damped, imag_residual) = synthesize_damped(&spectrum, df, opts.window_fraction);
    let dt = horizon / n as f64;
    let samples: Vec<f64> = damped[..n]
        .iter()
        .enumerate()
        .map(|(m, g)| g * (sigma * m as f64 * dt).exp())
        .collect();

    Ok(Waveform {
        dt,
        samples,
        meta: WaveformMeta {
            provider_id: provider.id().to_string(),
            sequence: seq,
            length,
            termination: Termination::OpenCircuit,
            horizon,
            n,
            damping: sigma,
            window_fraction: opts.window_fraction,
            source: source.clone(),
            imag_residual,
            warnings,
        },
    })
}

/// Relative distance within which resonance features are taken as one
/// resonance.
pub const RESONANCE_CLUSTER_TOL: f64 = 0.05;

/// First `count` resonant frequencies of a line of `length`, found on a grid
/// of `points` samples scaled to the line's quarter-wave frequency. Analytic
/// providers are tabulated on 48 log-spaced frequencies over that band first.
pub fn resonant_frequencies_for_length(
    provider: &PulProvider,
    length: f64,
    seq: Sequence,
    term: Termination,
    count: usize,
    points: usize,
) -> Result<Vec<f64>, TimeDomainError> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(TlineError::BadLength(length).into());
    }
    let (lo, hi) = provider.range(seq)?;
    let probe = 1e3f64.clamp(lo, hi);
    let p = provider.params(probe, seq)?;
    let f1 = quarter_wave_frequency(p.l, p.c, length);
    let grid = FrequencyGrid {
        f_min: (0.25 * f1).max(lo),
        f_max: (1.5 * (count as f64 + 0.5) * f1).min(hi),
        points,
        spacing: Spacing::Linear,
        refine_levels: 3,
    };
    let tabulated;
    let provider = if provider.is_analytic() {
        let table = provider.tabulate(&log_grid(grid.f_min, grid.f_max, 48), &[seq])?;
        tabulated = make_provider(PulSource::Table {
            id: provider.id().to_string(),
            table,
        })?;
        &tabulated
    } else {
        provider
    };
    let resp = sweep(provider, seq, term, &grid, length)?;
    let model = LineModel {
        provider,
        sequence: seq,
        termination: term,
        length,
    };
    let found = find_resonances(&resp, Some(&model), &ResonanceOptions::default());
    Ok(resonance_frequencies(&found, RESONANCE_CLUSTER_TOL)
        .into_iter()
        .take(count)
        .collect())
}
