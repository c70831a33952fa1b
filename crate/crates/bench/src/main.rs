use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use tcac_bench::compare::{compare, CompareOptions, ComputedSeries};
use tcac_bench::config::StudyConfig;
use tcac_bench::error::BenchError;
use tcac_bench::fixtures::{self, FixtureSet};
use tcac_bench::measurement::MeasurementSeries;
use tcac_bench::report::{num, opt_num, text, write_atomic, write_bundle, DataTable, OutputFormat};
use tcac_bench::study::{self, Study};
use tcac_core::geometry::{carson_depth, rotation_angle, skin_depth, slice_length, Environment};
use tcac_core::mfield::{line_profile, LineName, MeasurementLine};
use tcac_core::pul::{make_provider, solve_cross_section, EngineOptions, Excitation, PulProvider, PulSource};
use tcac_core::timedomain::{energize, EnergizeOptions, Rider, SourceSpec};
use tcac_core::tline::{find_resonances, resonance_frequencies, sweep, FrequencyGrid, LineModel, ResonanceOptions, Spacing, Termination};
use tcac_core::{CableSpec, Sequence};

#[derive(Parser)]
#[command(name = "tcac", version, about = "Frequency-domain analysis of three-core armored cables")]
struct Cli {
    /// JSON config file (a study config; other commands read its fixtures_dir and engine options)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; results go to stdout when omitted (except `study`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MediumArg {
    Sea,
    Air,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpacingArg {
    Log,
    Linear,
}

#[derive(Clone, Copy, ValueEnum)]
enum LineArg {
    Ml1,
    Ml2,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Step,
    Ac,
}

#[derive(Args, Clone)]
struct ProviderArgs {
    /// Cable name from the cable fixture (analytic provider)
    #[arg(long, conflicts_with = "table")]
    cable: Option<String>,
    /// Per-unit-length table CSV (table provider)
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "sea")]
    medium: MediumArg,
    /// Cable fixture JSON replacing the bundled one
    #[arg(long)]
    cables: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct GridArgs {
    #[arg(long, default_value_t = 0.5)]
    f_min: f64,
    #[arg(long, default_value_t = 2000.0)]
    f_max: f64,
    #[arg(long, default_value_t = 400)]
    points: usize,
    #[arg(long, value_enum, default_value = "log")]
    spacing: SpacingArg,
    /// Rounds of adaptive refinement
    #[arg(long, default_value_t = 3)]
    refine: u32,
}

impl GridArgs {
    fn grid(&self) -> FrequencyGrid {
        FrequencyGrid {
            f_min: self.f_min,
            f_max: self.f_max,
            points: self.points,
            spacing: match self.spacing {
                SpacingArg::Log => Spacing::Log,
                SpacingArg::Linear => Spacing::Linear,
            },
            refine_levels: self.refine,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Slice length, rotation angle and length scales of the cables
    Geometry {
        /// Cables to report (all when omitted)
        #[arg(long)]
        cable: Vec<String>,
        /// Frequency for skin and Carson depths (Hz)
        #[arg(long, default_value_t = 50.0)]
        f: f64,
        #[arg(long)]
        cables: Option<PathBuf>,
    },
    /// Per-unit-length sequence parameters from the filament model
    Pul {
        #[arg(long)]
        cable: String,
        #[arg(long, value_enum, default_value = "sea")]
        medium: MediumArg,
        #[arg(long, value_delimiter = ',', default_values_t = [Sequence::Positive])]
        sequence: Vec<Sequence>,
        /// Frequencies (Hz), comma separated; a log grid is used when omitted
        #[arg(long, value_delimiter = ',')]
        f: Vec<f64>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        cables: Option<PathBuf>,
    },
    /// Terminal impedance of a line over frequency
    Sweep {
        #[command(flatten)]
        provider: ProviderArgs,
        #[arg(long)]
        length: f64,
        #[arg(long, default_value = "oc")]
        termination: Termination,
        #[arg(long, default_value = "pos")]
        sequence: Sequence,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Refined resonant frequencies of a line
    Resonances {
        #[command(flatten)]
        provider: ProviderArgs,
        #[arg(long)]
        length: f64,
        #[arg(long, default_value = "oc")]
        termination: Termination,
        #[arg(long, default_value = "pos")]
        sequence: Sequence,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Receiving-end voltage of an energized open-ended line
    Energize {
        #[command(flatten)]
        provider: ProviderArgs,
        #[arg(long)]
        length: f64,
        #[arg(long, value_enum, default_value = "step")]
        source: SourceArg,
        /// Step height, or RMS of the AC fundamental (V)
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        /// AC fundamental (Hz)
        #[arg(long, default_value_t = 50.0)]
        fundamental: f64,
        /// AC riders as f_hz:pu, comma separated
        #[arg(long, value_delimiter = ',')]
        rider: Vec<String>,
        /// Time window (s)
        #[arg(long)]
        horizon: f64,
        /// Samples, a power of two
        #[arg(long, default_value_t = 1 << 14)]
        samples: usize,
        /// Damping of the frequency sampling (1/s); ln(50)/horizon when omitted
        #[arg(long)]
        damping: Option<f64>,
    },
    /// Flux density along a measurement line
    Mfield {
        #[arg(long)]
        cable: String,
        #[arg(long)]
        f: f64,
        /// RMS phase current (A)
        #[arg(long)]
        current: f64,
        #[arg(long, value_enum, default_value = "ml1")]
        line: LineArg,
        /// Distances from the cable axis (m), comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        distances: Vec<f64>,
        #[arg(long)]
        cables: Option<PathBuf>,
    },
    /// Relative differences between two series in measurement format
    Compare {
        #[arg(long)]
        measured: PathBuf,
        #[arg(long)]
        computed: PathBuf,
        /// Tolerance band (%) for rows without their own tolerance
        #[arg(long)]
        band_pct: Option<f64>,
    },
    /// Run a named study into a run directory
    Study {
        /// Study name; taken from --config when omitted
        name: Option<String>,
        /// Validate config and fixtures without running
        #[arg(long)]
        dry_run: bool,
        /// List the available studies
        #[arg(long)]
        list: bool,
    },
}

struct Ctx {
    config: Option<StudyConfig>,
    out: Option<PathBuf>,
    format: OutputFormat,
}

impl Ctx {
    fn engine(&self) -> EngineOptions {
        self.config.as_ref().map(|c| c.engine).unwrap_or_default()
    }

    fn fixtures(&self) -> FixtureSet {
        FixtureSet {
            dir: self.config.as_ref().and_then(|c| c.fixtures_dir.clone()),
        }
    }

    fn cables(&self, path: &Option<PathBuf>) -> Result<Vec<CableSpec>, BenchError> {
        match path {
            Some(p) => Ok(tcac_core::geometry::load_cables(p)?),
            None => self.fixtures().cables(),
        }
    }

    fn cable(&self, name: &str, path: &Option<PathBuf>) -> Result<CableSpec, BenchError> {
        let origin = path
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| fixtures::CABLES.into());
        fixtures::find_cable(self.cables(path)?, name, &origin)
    }

    fn provider(&self, args: &ProviderArgs) -> Result<PulProvider, BenchError> {
        match (&args.cable, &args.table) {
            (Some(cable), None) => Ok(make_provider(PulSource::Analytic {
                spec: self.cable(cable, &args.cables)?,
                env: environment(args.medium),
                options: self.engine(),
            })?),
            (None, Some(path)) => {
                let loaded = fixtures::read_path(path)?;
                let table = fixtures::parse_table(&loaded)?;
                let id = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "table".into());
                Ok(make_provider(PulSource::Table { id, table })?)
            }
            _ => Err(BenchError::Invalid("give exactly one of --cable or --table".into())),
        }
    }

    /// Writes `name` into the output directory, or to stdout.
    fn emit(&self, name: &str, bytes: &[u8]) -> Result<(), BenchError> {
        match &self.out {
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir.display(), e))?;
                write_atomic(dir, name, bytes)?;
                eprintln!("wrote {}", dir.join(name).display());
                Ok(())
            }
            None => std::io::stdout().write_all(bytes).map_err(|e| BenchError::io("stdout", e)),
        }
    }

    fn emit_table(&self, t: &DataTable) -> Result<(), BenchError> {
        self.emit(&format!("{}.{}", t.name, self.format.extension()), &t.encode(self.format)?)
    }

    fn emit_json(&self, name: &str, v: &serde_json::Value) -> Result<(), BenchError> {
        let mut bytes = serde_json::to_vec_pretty(v)?;
        bytes.push(b'\n');
        self.emit(name, &bytes)
    }
}

fn environment(m: MediumArg) -> Environment {
    match m {
        MediumArg::Sea => Environment::sea(),
        MediumArg::Air => Environment::air(),
    }
}

fn run(cli: Cli) -> Result<(), BenchError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| BenchError::Invalid(format!("--threads: {e}")))?;
    }
    let config = cli.config.as_deref().map(StudyConfig::load).transpose()?;
    let ctx = Ctx {
        config,
        out: cli.out,
        format: cli.format,
    };
    match cli.command {
        Command::Geometry { cable, f, cables } => geometry(&ctx, &cable, f, &cables),
        Command::Pul {
            cable,
            medium,
            sequence,
            f,
            grid,
            cables,
        } => {
            let provider = make_provider(PulSource::Analytic {
                spec: ctx.cable(&cable, &cables)?,
                env: environment(medium),
                options: ctx.engine(),
            })?;
            let freqs = if f.is_empty() { grid.grid().frequencies() } else { f };
            let table = provider.tabulate(&freqs, &sequence)?;
            match ctx.format {
                OutputFormat::Csv => ctx.emit("pul.csv", table.to_csv_string()?.as_bytes()),
                OutputFormat::Json => ctx.emit_json("pul.json", &serde_json::to_value(table.rows().collect::<Vec<_>>())?),
            }
        }
        Command::Sweep {
            provider,
            length,
            termination,
            sequence,
            grid,
        } => {
            let p = ctx.provider(&provider)?;
            let resp = sweep(&p, sequence, termination, &grid.grid(), length)?;
            let mut t = DataTable::new(format!("z_{sequence}_{termination}"), &["f_hz", "re_ohm", "im_ohm", "abs_ohm"]);
            for pt in &resp.points {
                t.push(vec![num(pt.f), num(pt.z.re), num(pt.z.im), num(pt.z.norm())]);
            }
            if !resp.flagged.is_empty() {
                eprintln!("{} frequencies outside the provider range were skipped", resp.flagged.len());
            }
            ctx.emit_table(&t)
        }
        Command::Resonances {
            provider,
            length,
            termination,
            sequence,
            grid,
        } => {
            let p = ctx.provider(&provider)?;
            let resp = sweep(&p, sequence, termination, &grid.grid(), length)?;
            let model = LineModel {
                provider: &p,
                sequence,
                termination,
                length,
            };
            let features = find_resonances(&resp, Some(&model), &ResonanceOptions::default());
            let clustered = resonance_frequencies(&features, study::CLUSTER_TOL);
            let mut t = DataTable::new("resonances", &["order", "f_hz", "provider_id"]);
            for (k, f) in clustered.iter().enumerate() {
                t.push(vec![json!(k + 1), num(*f), text(p.id())]);
            }
            ctx.emit_table(&t)
        }
        Command::Energize {
            provider,
            length,
            source,
            amplitude,
            fundamental,
            rider,
            horizon,
            samples,
            damping,
        } => {
            let p = ctx.provider(&provider)?;
            let src = match source {
                SourceArg::Step => SourceSpec::step(amplitude),
                SourceArg::Ac => SourceSpec::ac(amplitude, fundamental, parse_riders(&rider)?),
            };
            let opts = EnergizeOptions {
                damping,
                ..EnergizeOptions::default()
            };
            let w = energize(&p, length, &src, horizon, samples, &opts)?;
            for warn in &w.meta.warnings {
                eprintln!("warning: {warn:?}");
            }
            let mut t = DataTable::new("waveform", &["t_s", "u_v"]);
            for (time, u) in w.times().zip(&w.samples) {
                t.push(vec![num(time), num(*u)]);
            }
            ctx.emit_table(&t)
        }
        Command::Mfield {
            cable,
            f,
            current,
            line,
            distances,
            cables,
        } => {
            let spec = ctx.cable(&cable, &cables)?;
            let sol = solve_cross_section(
                &spec,
                &Environment::air(),
                f,
                &Excitation::new(Sequence::Positive, current),
                &ctx.engine(),
            )?;
            let name = match line {
                LineArg::Ml1 => LineName::ML1,
                LineArg::Ml2 => LineName::ML2,
            };
            let profile = line_profile(&sol, &MeasurementLine::new(name, distances))?;
            let mut t = DataTable::new("mfield", &["dist_m", "b_ut", "b_conductors_ut", "b_sheaths_ut", "b_armor_ut"]);
            for (d, s) in profile.line.distances.iter().zip(&profile.samples) {
                t.push(vec![
                    num(*d),
                    num(s.b_rms * 1e6),
                    num(s.groups.conductors * 1e6),
                    num(s.groups.sheaths * 1e6),
                    num(s.groups.armor * 1e6),
                ]);
            }
            ctx.emit_table(&t)
        }
        Command::Compare {
            measured,
            computed,
            band_pct,
        } => {
            let m = load_series(&measured)?;
            let c = load_series(&computed)?;
            let calc = ComputedSeries::new(c.fixture_id.clone(), c.rows.iter().map(|r| (r.x, r.value)).collect());
            let report = compare(&m, &calc, &CompareOptions { band_pct })?;
            match ctx.format {
                OutputFormat::Json => ctx.emit_json("compare.json", &serde_json::to_value(&report)?),
                OutputFormat::Csv => {
                    let mut out = Vec::new();
                    report.write_csv(&mut out)?;
                    ctx.emit("compare.csv", &out)
                }
            }
        }
        Command::Study { name, dry_run, list } => {
            if list {
                for s in Study::ALL {
                    println!("{:<16} {}", s.name(), s.description());
                }
                return Ok(());
            }
            let cfg = match (name, ctx.config.clone()) {
                (Some(n), Some(mut c)) => {
                    c.study = n;
                    c
                }
                (Some(n), None) => StudyConfig::new(n),
                (None, Some(c)) => c,
                (None, None) => return Err(BenchError::Invalid("give a study name or --config".into())),
            };
            let prepared = study::prepare(&cfg)?;
            if dry_run {
                let plan = study::Plan::from(&prepared);
                println!("{}", serde_json::to_string_pretty(&plan)?);
                return Ok(());
            }
            let bundle = study::execute(&prepared)?;
            let dir = ctx
                .out
                .clone()
                .unwrap_or_else(|| Path::new("tcac-runs").join(prepared.study.name()));
            let manifest = write_bundle(&bundle, &dir, ctx.format)?;
            let summary: Vec<_> = bundle
                .report
                .comparisons
                .iter()
                .map(|c| {
                    json!({
                        "fixture": c.fixture_id,
                        "rows": c.summary.rows,
                        "max_abs_eps_pct": opt_num(c.summary.max_abs_eps_pct),
                    })
                })
                .collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "study": bundle.report.study,
                    "provider": bundle.report.provider_id,
                    "run_dir": dir.display().to_string(),
                    "files": manifest.files.iter().map(|f| f.name.clone()).collect::<Vec<_>>(),
                    "comparisons": summary,
                }))?
            );
            Ok(())
        }
    }
}

fn geometry(ctx: &Ctx, names: &[String], f: f64, cables: &Option<PathBuf>) -> Result<(), BenchError> {
    let all = ctx.cables(cables)?;
    let selected: Vec<CableSpec> = if names.is_empty() {
        all
    } else {
        names
            .iter()
            .map(|n| fixtures::find_cable(all.clone(), n, "cables"))
            .collect::<Result<_, _>>()?
    };
    let mut t = DataTable::new(
        "geometry",
        &[
            "cable",
            "slice_length_mm",
            "rotation_deg",
            "f_hz",
            "skin_depth_conductor_mm",
            "skin_depth_sheath_mm",
            "skin_depth_armor_mm",
            "carson_depth_sea_m",
            "estimated",
        ],
    );
    for c in &selected {
        let armor_mu = c.armor_mu.effective();
        t.push(vec![
            text(c.name.clone()),
            num(slice_length(c)? * 1e3),
            num(rotation_angle(c)?.to_degrees()),
            num(f),
            num(skin_depth(c.sigma_conductor, 1.0, f)? * 1e3),
            num(skin_depth(c.sigma_sheath, 1.0, f)? * 1e3),
            num(skin_depth(c.sigma_armor, armor_mu, f)? * 1e3),
            opt_num(carson_depth(Environment::sea().rho_medium, f).ok()),
            serde_json::Value::Bool(c.estimated),
        ]);
    }
    ctx.emit_table(&t)
}

fn parse_riders(items: &[String]) -> Result<Vec<Rider>, BenchError> {
    items
        .iter()
        .map(|s| {
            let (f, a) = s
                .split_once(':')
                .ok_or_else(|| BenchError::Invalid(format!("rider `{s}` must be f_hz:pu")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| BenchError::Invalid(format!("rider `{s}`: {e}")))
            };
            Ok(Rider {
                f: parse(f)?,
                amplitude: parse(a)?,
            })
        })
        .collect()
}

fn load_series(path: &Path) -> Result<MeasurementSeries, BenchError> {
    let loaded = fixtures::read_path(path)?;
    MeasurementSeries::parse(&loaded.text, &loaded.origin)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
