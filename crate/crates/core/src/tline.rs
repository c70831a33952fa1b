//! Distributed-line step: ABCD matrix, terminal impedances and resonance
//! extraction for one sequence treated as a scalar line.
//!
//! ```text
//! z_c = sqrt(z / y)        θ = sqrt(z·y)·l
//! [U1]   [cosh θ       z_c sinh θ] [U2]
//! [I1] = [sinh θ / z_c cosh θ    ] [I2]
//! Z_SC = z_c tanh θ        Z_OC = z_c / tanh θ
//! ```
//!
//! Both square roots take the principal branch (Re ≥ 0). Hyperbolic
//! functions are evaluated through `e^{-2θ}` so that large attenuations do
//! not overflow.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pul::{PulError, PulProvider, Sequence};
use crate::Complex;

#[derive(Debug, Error)]
pub enum TlineError {
    #[error("shunt admittance is zero at {0} Hz")]
    ZeroAdmittance(f64),
    #[error("line length must be finite and >= 0, got {0}")]
    BadLength(f64),
    #[error("invalid frequency grid: {0}")]
    BadGrid(String),
    #[error(transparent)]
    Pul(#[from] PulError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    #[serde(rename = "sc", alias = "short_circuit")]
    ShortCircuit,
    #[serde(rename = "oc", alias = "open_circuit")]
    OpenCircuit,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::ShortCircuit => "sc",
            Termination::OpenCircuit => "oc",
        })
    }
}

impl std::str::FromStr for Termination {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sc" | "short" | "short_circuit" => Ok(Termination::ShortCircuit),
            "oc" | "open" | "open_circuit" => Ok(Termination::OpenCircuit),
            other => Err(format!("unknown termination `{other}` (expected sc or oc)")),
        }
    }
}

/// Per-unit-length line data at one frequency plus the line length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineOperand {
    pub f: f64,
    pub sequence: Sequence,
    /// Series impedance (Ω/m).
    pub z: Complex,
    /// Shunt admittance (S/m).
    pub y: Complex,
    /// Line length (m).
    pub length: f64,
}

impl LineOperand {
    pub fn from_provider(provider: &PulProvider, f: f64, sequence: Sequence, length: f64) -> Result<Self, TlineError> {
        Ok(Self {
            f,
            sequence,
            z: provider.series_impedance(f, sequence)?,
            y: provider.shunt_admittance(f, sequence)?,
            length,
        })
    }

    fn check(&self) -> Result<(), TlineError> {
        if !(self.length >= 0.0 && self.length.is_finite()) {
            return Err(TlineError::BadLength(self.length));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Propagation {
    /// Electrical length θ = γ·l.
    pub theta: Complex,
    /// Propagation coefficient γ = sqrt(z·y) (1/m).
    pub gamma: Complex,
}

pub fn characteristic_impedance(op: &LineOperand) -> Result<Complex, TlineError> {
    if op.y == Complex::new(0.0, 0.0) {
        return Err(TlineError::ZeroAdmittance(op.f));
    }
    Ok((op.z / op.y).sqrt())
}

pub fn propagation(op: &LineOperand) -> Result<Propagation, TlineError> {
    op.check()?;
    let gamma = (op.z * op.y).sqrt();
    Ok(Propagation {
        theta: gamma * op.length,
        gamma,
    })
}

/// `e^w − 1` without cancellation for small `w`.
fn expm1(w: Complex) -> Complex {
    let half_sin = (0.5 * w.im).sin();
    Complex::new(
        w.re.exp_m1() * w.im.cos() - 2.0 * half_sin * half_sin,
        w.re.exp() * w.im.sin(),
    )
}

/// `(cosh θ, sinh θ)` for Re θ ≥ 0 without forming `e^{-θ}` separately.
fn cosh_sinh(theta: Complex) -> (Complex, Complex) {
    let m = expm1(-2.0 * theta);
    let half = 0.5 * theta.exp();
    (half * (2.0 + m), -half * m)
}

/// `(1 − e^{-2θ}, 1 + e^{-2θ})`, whose ratio is tanh θ.
fn tanh_parts(theta: Complex) -> (Complex, Complex) {
    let m = expm1(-2.0 * theta);
    (-m, 2.0 + m)
}

/// Row-major 2×2 transfer matrix.
pub type Abcd = [[Complex; 2]; 2];

pub fn abcd(op: &LineOperand) -> Result<Abcd, TlineError> {
    let zc = characteristic_impedance(op)?;
    let theta = propagation(op)?.theta;
    let (ch, sh) = cosh_sinh(theta);
    Ok([[ch, zc * sh], [sh / zc, ch]])
}

pub fn abcd_product(a: &Abcd, b: &Abcd) -> Abcd {
    let mut out = [[Complex::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Terminal quantity that may sit on a pole of the response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Terminal {
    Value(Complex),
    Pole,
}

impl Terminal {
    pub fn value(self) -> Option<Complex> {
        match self {
            Terminal::Value(z) => Some(z),
            Terminal::Pole => None,
        }
    }
}

const POLE_RATIO: f64 = 1e-14;

/// Sending-end impedance with the far end shorted or open.
pub fn input_impedance(op: &LineOperand, term: Termination) -> Result<Terminal, TlineError> {
    let zc = characteristic_impedance(op)?;
    let theta = propagation(op)?.theta;
    let (num, den) = tanh_parts(theta);
    let (num, den) = match term {
        Termination::ShortCircuit => (zc * num, den),
        Termination::OpenCircuit => (zc * den, num),
    };
    if den.norm() <= POLE_RATIO * num.norm() || den.norm() == 0.0 {
        return Ok(Terminal::Pole);
    }
    Ok(Terminal::Value(num / den))
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrequencyGrid {
    pub f_min: f64,
    pub f_max: f64,
    pub points: usize,
    pub spacing: Spacing,
    /// Rounds of local bisection of intervals with fast-changing |Z|.
    pub refine_levels: u32,
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        Self {
            f_min: 0.5,
            f_max: 2_000.0,
            points: 400,
            spacing: Spacing::Log,
            refine_levels: 3,
        }
    }
}

impl FrequencyGrid {
    pub fn log(f_min: f64, f_max: f64, points: usize) -> Self {
        Self {
            f_min,
            f_max,
            points,
            spacing: Spacing::Log,
            refine_levels: 0,
        }
    }

    pub fn linear(f_min: f64, f_max: f64, points: usize) -> Self {
        Self {
            spacing: Spacing::Linear,
            ..Self::log(f_min, f_max, points)
        }
    }

    pub fn with_refinement(mut self, levels: u32) -> Self {
        self.refine_levels = levels;
        self
    }

    pub fn validate(&self) -> Result<(), TlineError> {
        if self.points == 0 {
            return Ok(());
        }
        let ok = self.f_min.is_finite()
            && self.f_max.is_finite()
            && self.f_min > 0.0
            && (self.f_max > self.f_min || (self.points == 1 && self.f_max == self.f_min));
        if !ok {
            return Err(TlineError::BadGrid(format!(
                "need 0 < f_min < f_max, got [{}, {}]",
                self.f_min, self.f_max
            )));
        }
        Ok(())
    }

    pub fn frequencies(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.f_min],
            n => (0..n)
                .map(|k| {
                    let t = k as f64 / (n - 1) as f64;
                    match self.spacing {
                        Spacing::Log => self.f_min * (self.f_max / self.f_min).powf(t),
                        Spacing::Linear => self.f_min + t * (self.f_max - self.f_min),
                    }
                })
                .collect(),
        }
    }

    fn midpoint(&self, a: f64, b: f64) -> f64 {
        match self.spacing {
            Spacing::Log => (a * b).sqrt(),
            Spacing::Linear => 0.5 * (a + b),
        }
    }
}

/// A scalar terminal impedance as a function of frequency. `Ok(Pole)` marks
/// an exact pole; errors mark points the backend cannot evaluate.
pub trait ImpedanceFn: Sync {
    fn eval(&self, f: f64) -> Result<Terminal, TlineError>;
}

impl<F> ImpedanceFn for F
where
    F: Fn(f64) -> Result<Terminal, TlineError> + Sync,
{
    fn eval(&self, f: f64) -> Result<Terminal, TlineError> {
        self(f)
    }
}

/// A line of given length fed by a parameter provider.
pub struct LineModel<'a> {
    pub provider: &'a PulProvider,
    pub sequence: Sequence,
    pub termination: Termination,
    pub length: f64,
}

impl ImpedanceFn for LineModel<'_> {
    fn eval(&self, f: f64) -> Result<Terminal, TlineError> {
        let op = LineOperand::from_provider(self.provider, f, self.sequence, self.length)?;
        input_impedance(&op, self.termination)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponsePoint {
    pub f: f64,
    pub z: Complex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedPoint {
    pub f: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyResponse {
    pub sequence: Sequence,
    pub termination: Termination,
    pub provider_id: String,
    pub length: f64,
    /// Finite samples, strictly increasing in `f`.
    pub points: Vec<ResponsePoint>,
    /// Frequencies that landed exactly on a pole.
    pub poles: Vec<f64>,
    /// Frequencies the provider could not serve.
    pub flagged: Vec<FlaggedPoint>,
}

impl FrequencyResponse {
    pub fn frequencies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.f).collect()
    }

    pub fn resistance(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.z.re).collect()
    }

    pub fn reactance(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.z.im).collect()
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.z.norm()).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), TlineError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["f_hz", "re_ohm", "im_ohm", "abs_ohm"])?;
        for p in &self.points {
            w.write_record([p.f, p.z.re, p.z.im, p.z.norm()].map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Response plus its resonances, as exported to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseReport {
    pub response: FrequencyResponse,
    pub resonances: Vec<ResonancePoint>,
}

enum Sample {
    Value(Complex),
    Pole,
    Failed(String),
}

fn sample<M: ImpedanceFn + ?Sized>(model: &M, f: f64) -> Sample {
    match model.eval(f) {
        Ok(Terminal::Value(z)) if z.re.is_finite() && z.im.is_finite() => Sample::Value(z),
        Ok(_) => Sample::Pole,
        Err(e) => Sample::Failed(e.to_string()),
    }
}

/// Intervals worth bisecting: a large step in ln|Z|, an X sign change, or a
/// neighbourhood of a sampled |Z| extremum.
fn intervals_to_refine(points: &[ResponsePoint]) -> Vec<usize> {
    let n = points.len();
    let mut mark = vec![false; n.saturating_sub(1)];
    for i in 0..n.saturating_sub(1) {
        let (a, b) = (points[i].z, points[i + 1].z);
        let step = (b.norm().max(1e-300) / a.norm().max(1e-300)).ln().abs();
        if step > 0.2 || a.im * b.im < 0.0 {
            mark[i] = true;
        }
    }
    for i in 1..n.saturating_sub(1) {
        let (l, m, r) = (points[i - 1].z.norm(), points[i].z.norm(), points[i + 1].z.norm());
        if (m > l && m > r) || (m < l && m < r) {
            mark[i - 1] = true;
            mark[i] = true;
        }
    }
    (0..mark.len()).filter(|&i| mark[i]).collect()
}

/// Evaluates `model` over `grid`, adding midpoints where the response
/// changes quickly. Points that fail are flagged, not fatal.
pub fn sweep_fn<M: ImpedanceFn + ?Sized>(
    model: &M,
    grid: &FrequencyGrid,
    sequence: Sequence,
    termination: Termination,
    provider_id: &str,
    length: f64,
) -> Result<FrequencyResponse, TlineError> {
    grid.validate()?;
    let mut resp = FrequencyResponse {
        sequence,
        termination,
        provider_id: provider_id.to_string(),
        length,
        points: Vec::new(),
        poles: Vec::new(),
        flagged: Vec::new(),
    };
    let mut pending = grid.frequencies();
    for level in 0..=grid.refine_levels {
        let samples: Vec<(f64, Sample)> = pending.par_iter().map(|&f| (f, sample(model, f))).collect();
        for (f, s) in samples {
            match s {
                Sample::Value(z) => resp.points.push(ResponsePoint { f, z }),
                Sample::Pole => resp.poles.push(f),
                Sample::Failed(reason) => resp.flagged.push(FlaggedPoint { f, reason }),
            }
        }
        resp.points.sort_by(|a, b| a.f.total_cmp(&b.f));
        resp.points.dedup_by(|a, b| a.f == b.f);
        if level == grid.refine_levels {
            break;
        }
        pending = intervals_to_refine(&resp.points)
            .into_iter()
            .map(|i| grid.midpoint(resp.points[i].f, resp.points[i + 1].f))
            .filter(|&f| f > 0.0)
            .collect();
        if pending.is_empty() {
            break;
        }
    }
    resp.poles.sort_by(f64::total_cmp);
    resp.flagged.sort_by(|a, b| a.f.total_cmp(&b.f));
    Ok(resp)
}

pub fn sweep(
    provider: &PulProvider,
    sequence: Sequence,
    termination: Termination,
    grid: &FrequencyGrid,
    length: f64,
) -> Result<FrequencyResponse, TlineError> {
    if !(length >= 0.0 && length.is_finite()) {
        return Err(TlineError::BadLength(length));
    }
    let model = LineModel {
        provider,
        sequence,
        termination,
        length,
    };
    sweep_fn(&model, grid, sequence, termination, provider.id(), length)
}

// ---------------------------------------------------------------------------
// Resonances
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResonanceKind {
    ReactanceZeroCrossing,
    MagnitudeMinimum,
    MagnitudeMaximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonancePoint {
    pub f: f64,
    pub kind: ResonanceKind,
    pub refined: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResonanceOptions {
    /// Relative width of the final bracket.
    pub rel_tol: f64,
    /// Features closer than this relative distance are merged.
    pub merge_tol: f64,
    /// Minimum prominence of a sampled |Z| extremum, in ln|Z|.
    pub min_prominence: f64,
}

impl Default for ResonanceOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-4,
            merge_tol: 1e-3,
            min_prominence: 0.05,
        }
    }
}

/// Prominence of sample `i` as a peak of `v`: its height above the higher of
/// the two lowest points reached before meeting a higher sample.
fn prominence(v: &[f64], i: usize) -> f64 {
    let side = |range: &mut dyn Iterator<Item = usize>| {
        let mut base = v[i];
        for j in range {
            if v[j] > v[i] {
                break;
            }
            base = base.min(v[j]);
        }
        base
    };
    let left = side(&mut (0..i).rev());
    let right = side(&mut (i + 1..v.len()));
    v[i] - left.max(right)
}

fn reactance_at<M: ImpedanceFn + ?Sized>(model: &M, f: f64) -> Option<f64> {
    match model.eval(f).ok()? {
        Terminal::Value(z) if z.im.is_finite() => Some(z.im),
        _ => None,
    }
}

fn magnitude_at<M: ImpedanceFn + ?Sized>(model: &M, f: f64) -> Option<f64> {
    match model.eval(f).ok()? {
        Terminal::Value(z) => Some(z.norm()),
        Terminal::Pole => Some(f64::INFINITY),
    }
}

fn bisect_reactance<M: ImpedanceFn + ?Sized>(model: &M, mut a: f64, mut b: f64, mut xa: f64, tol: f64) -> Option<f64> {
    while (b - a) > tol * a {
        let m = 0.5 * (a + b);
        let xm = match reactance_at(model, m) {
            Some(x) => x,
            // an exact pole sits on the sign change
            None => return Some(m),
        };
        if xm == 0.0 {
            return Some(m);
        }
        if (xm > 0.0) == (xa > 0.0) {
            a = m;
            xa = xm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Vertex of the parabola through three points, or `None` when degenerate.
fn parabola_vertex((x0, y0): (f64, f64), (x1, y1): (f64, f64), (x2, y2): (f64, f64)) -> Option<f64> {
    let d = (x0 - x1) * (x0 - x2) * (x1 - x2);
    if d == 0.0 {
        return None;
    }
    let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / d;
    let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / d;
    if a == 0.0 || !a.is_finite() || !b.is_finite() {
        return None;
    }
    let v = -b / (2.0 * a);
    (v > x0.min(x2) && v < x0.max(x2)).then_some(v)
}

/// Golden-section search for an extremum of |Z| in `[a, b]`.
fn golden<M: ImpedanceFn + ?Sized>(model: &M, mut a: f64, mut b: f64, maximize: bool, tol: f64) -> Option<f64> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let score = |f: f64| magnitude_at(model, f).map(|m| if maximize { -m } else { m });
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (score(c)?, score(d)?);
    while (b - a) > tol * a {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = score(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = score(d)?;
        }
    }
    Some(0.5 * (a + b))
}

fn priority(p: &ResonancePoint) -> (bool, bool) {
    (p.refined, p.kind == ResonanceKind::ReactanceZeroCrossing)
}

fn merge(mut found: Vec<ResonancePoint>, tol: f64) -> Vec<ResonancePoint> {
    found.sort_by(|a, b| a.f.total_cmp(&b.f));
    let mut out: Vec<ResonancePoint> = Vec::new();
    for p in found {
        match out.last_mut() {
            Some(last) if (p.f - last.f).abs() <= tol * last.f => {
                if priority(&p) > priority(last) {
                    *last = p;
                }
            }
            _ => out.push(p),
        }
    }
    out
}

/// Resonances of a sampled response: X sign changes (bisection) and local
/// |Z| extrema (parabolic fit, then golden-section polish). Without a
/// `model` only the sampled estimates are returned, flagged unrefined.
pub fn find_resonances<M: ImpedanceFn + ?Sized>(
    resp: &FrequencyResponse,
    model: Option<&M>,
    opts: &ResonanceOptions,
) -> Vec<ResonancePoint> {
    let pts = &resp.points;
    let mut found = Vec::new();

    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.z.im == 0.0 {
            found.push(ResonancePoint {
                f: a.f,
                kind: ResonanceKind::ReactanceZeroCrossing,
                refined: model.is_some(),
            });
            continue;
        }
        if a.z.im * b.z.im >= 0.0 {
            continue;
        }
        let linear = a.f + (b.f - a.f) * a.z.im / (a.z.im - b.z.im);
        let refined = model.and_then(|m| bisect_reactance(m, a.f, b.f, a.z.im, opts.rel_tol));
        found.push(ResonancePoint {
            f: refined.unwrap_or(linear),
            kind: ResonanceKind::ReactanceZeroCrossing,
            refined: refined.is_some(),
        });
    }

    let log_mag: Vec<f64> = pts.iter().map(|p| p.z.norm().max(1e-300).ln()).collect();
    let neg_log_mag: Vec<f64> = log_mag.iter().map(|v| -v).collect();
    for i in 1..pts.len().saturating_sub(1) {
        let (l, m, r) = (pts[i - 1], pts[i], pts[i + 1]);
        let (ml, mm, mr) = (l.z.norm(), m.z.norm(), r.z.norm());
        let maximum = mm > ml && mm > mr;
        let minimum = mm < ml && mm < mr;
        if !maximum && !minimum {
            continue;
        }
        let prom = if maximum {
            prominence(&log_mag, i)
        } else {
            prominence(&neg_log_mag, i)
        };
        if prom < opts.min_prominence {
            continue;
        }
        let kind = if maximum {
            ResonanceKind::MagnitudeMaximum
        } else {
            ResonanceKind::MagnitudeMinimum
        };
        let vertex = parabola_vertex((l.f, ml), (m.f, mm), (r.f, mr)).unwrap_or(m.f);
        let polished = model.and_then(|md| golden(md, l.f, r.f, maximum, opts.rel_tol));
        found.push(ResonancePoint {
            f: polished.unwrap_or(vertex),
            kind,
            refined: polished.is_some(),
        });
    }

    for &f in &resp.poles {
        found.push(ResonancePoint {
            f,
            kind: ResonanceKind::MagnitudeMaximum,
            refined: true,
        });
    }
    merge(found, opts.merge_tol)
}

/// One frequency per resonance: features within `cluster_tol` (relative)
/// of each other describe the same resonance, and the reactance zero
/// crossing represents it when present.
pub fn resonance_frequencies(features: &[ResonancePoint], cluster_tol: f64) -> Vec<f64> {
    let mut sorted = features.to_vec();
    sorted.sort_by(|a, b| a.f.total_cmp(&b.f));
    let mut clusters: Vec<Vec<ResonancePoint>> = Vec::new();
    for p in sorted {
        match clusters.last_mut() {
            Some(c) if (p.f - c[0].f) <= cluster_tol * c[0].f => c.push(p),
            _ => clusters.push(vec![p]),
        }
    }
    clusters
        .iter()
        .map(|c| {
            c.iter()
                .find(|p| p.kind == ResonanceKind::ReactanceZeroCrossing)
                .unwrap_or(&c[0])
                .f
        })
        .collect()
}

/// Quarter-wave frequency `1 / (4 l sqrt(L C))` of a lossless line.
pub fn quarter_wave_frequency(l_per_m: f64, c_per_m: f64, length: f64) -> f64 {
    1.0 / (4.0 * length * (l_per_m * c_per_m).sqrt())
}

/// Phase velocity `ω / Im γ` (m/s).
pub fn phase_velocity(op: &LineOperand) -> Result<f64, TlineError> {
    let gamma = propagation(op)?.gamma;
    Ok(2.0 * PI * op.f / gamma.im)
}
