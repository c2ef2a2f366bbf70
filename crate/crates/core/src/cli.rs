//! `dyadlab` command line: argument definitions and subcommand drivers.
//!
//! Every output file is written through a temporary file in the target
//! directory and renamed into place, so a failed run leaves nothing behind.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::complexity::{dimension_estimate, ComplexityProfile};
use crate::dyadic::{Direction, Vec2};
use crate::experiments::{
    bound_crossover, bound_curves, fig1_csv, fig1_grid, half_info_csv, half_information_check, lemma_exhaustive,
    lemma_stress, pinned_distance_study, projection_sweep, HalfInfoRow, Probe, StressSummary, Window,
};
use crate::fractal::{generate, sample_points, Ambient, CellSet, FractalSpec};
use crate::geometry::{annulus_intersection_cover, wolff_arc_length, Annulus};
use crate::selection::{SelectionInstance, TripleRelation};
use crate::{Error, Result};

pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "dyadlab", version, about = "Dyadic geometry and fractal dimension experiments")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Root seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output path; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Print a replayable command line to standard error.
    #[arg(long, global = true)]
    pub echo_config: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Cantor,
    Square,
    Randomtree,
    Segment,
    Product,
}

/// Which set to work on: generated from flags, or read from a DYCS file.
#[derive(Debug, Args)]
pub struct SetArgs {
    #[arg(long, value_enum, conflicts_with = "input")]
    pub kind: Option<Kind>,
    /// Existing DYCS file instead of a generated set.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Digit base for cantor and product (a power of two).
    #[arg(long, default_value_t = 4)]
    pub base: u32,
    /// Allowed digits for cantor and product.
    #[arg(long, value_delimiter = ',', default_value = "0,3")]
    pub digits: Vec<u32>,
    /// Target dimension for randomtree; overrides the declared dimension elsewhere.
    #[arg(long)]
    pub dim: Option<f64>,
    /// Ambient dimension for randomtree.
    #[arg(long, default_value_t = 2)]
    pub ambient: u32,
    /// Precision (bits per coordinate) of the generated set.
    #[arg(long)]
    pub depth: Option<u32>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a set and write it as DYCS.
    Gen {
        #[command(flatten)]
        set: SetArgs,
    },
    /// Cell-count profile and box-dimension estimate.
    Dims {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        window: Option<Window>,
        /// Base precision for the conditional column.
        #[arg(long)]
        s0: Option<u32>,
    },
    /// Per-pin dimension estimates of pinned distance sets.
    Pindist {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        window: Option<Window>,
        #[arg(long, default_value_t = 64)]
        pins: usize,
    },
    /// Projection dimension sweep over a direction grid.
    Project {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        window: Option<Window>,
        #[arg(long, default_value_t = 256)]
        directions: usize,
        /// Shift each grid angle by a seeded offset.
        #[arg(long)]
        jitter: bool,
    },
    /// The three pinned-distance lower-bound curves.
    Fig1 {
        #[arg(long, default_value_t = 512)]
        samples: usize,
    },
    /// Stress the pair-selection engine, or solve one instance file.
    Lemma {
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 50)]
        max_x: usize,
        #[arg(long, default_value_t = 50)]
        max_v: usize,
        /// Also enumerate every tiny instance.
        #[arg(long)]
        exhaustive: bool,
        /// Solve this instance instead of stress testing.
        #[arg(long)]
        instance: Option<PathBuf>,
    },
    /// Sector cover of the intersection of two annuli.
    Annulus {
        #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
        c1: Vec2,
        #[arg(long)]
        r1: f64,
        #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
        c2: Vec2,
        #[arg(long)]
        r2: f64,
        #[arg(long)]
        eps: f64,
        /// Thickness of the second annulus when it differs.
        #[arg(long)]
        eps2: Option<f64>,
    },
    /// Conditional surrogate of an image set against half that of the set.
    Halfinfo {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        s: Option<u32>,
        /// Pins `x,y`; repeatable.
        #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
        pin: Vec<Vec2>,
        /// Projection directions in turns; repeatable.
        #[arg(long)]
        angle: Vec<f64>,
        /// Pins sampled from the set when neither --pin nor --angle is given.
        #[arg(long, default_value_t = 32)]
        pins: usize,
    },
}

fn parse_vec2(s: &str) -> std::result::Result<Vec2, String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let x = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let y = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok([x, y])
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Format(_) => EXIT_IO,
        Error::Parameter(_) | Error::PrecisionTooLarge(_) => EXIT_USAGE,
        _ => EXIT_PRECONDITION,
    }
}

/// The command line without `--out`, `--threads` and `--echo-config`, so
/// that reruns differing only in those produce identical metadata.
pub fn replay_line(args: &[String]) -> String {
    let mut kept = vec!["dyadlab".to_string()];
    let mut skip_next = false;
    for a in args.iter().skip(1) {
        if skip_next {
            skip_next = false;
            continue;
        }
        match a.as_str() {
            "--out" | "--threads" => skip_next = true,
            "--echo-config" => {}
            s if s.starts_with("--out=") || s.starts_with("--threads=") => {}
            s => kept.push(s.to_string()),
        }
    }
    kept.join(" ")
}

/// Writes `bytes` to `path` atomically, or to standard output.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(p).map_err(|e| Error::Io(e.error))?;
            Ok(())
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

struct Loaded {
    set: CellSet,
    description: String,
    declared_dim: Option<f64>,
}

impl SetArgs {
    fn spec(&self, seed: u64) -> Result<FractalSpec> {
        let kind = self.kind.ok_or_else(|| Error::Parameter("one of --kind or --input is required".into()))?;
        let cantor = || -> Result<FractalSpec> {
            if !self.base.is_power_of_two() || self.base < 2 {
                return Err(Error::Parameter(format!("base {} is not a power of two", self.base)));
            }
            Ok(FractalSpec::cantor(self.base.trailing_zeros(), &self.digits))
        };
        Ok(match kind {
            Kind::Cantor => cantor()?,
            Kind::Product => FractalSpec::Product(Box::new(cantor()?), Box::new(cantor()?)),
            Kind::Square => FractalSpec::FullSquare,
            Kind::Segment => FractalSpec::Segment,
            Kind::Randomtree => FractalSpec::RandomTree {
                dim: self.dim.ok_or_else(|| Error::Parameter("randomtree needs --dim".into()))?,
                ambient: Ambient::from_dim(self.ambient)?,
                seed,
            },
        })
    }

    fn load(&self, seed: u64, default_depth: u32) -> Result<Loaded> {
        if let Some(path) = &self.input {
            let file = std::fs::File::open(path)?;
            let set = CellSet::read_from(std::io::BufReader::new(file))?;
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            return Ok(Loaded { set, description: format!("file({name})"), declared_dim: self.dim });
        }
        let spec = self.spec(seed)?;
        let set = generate(&spec, self.depth.unwrap_or(default_depth))?;
        let declared = self.dim.unwrap_or(spec.declared_dimension());
        Ok(Loaded { set, description: spec.describe(), declared_dim: Some(declared) })
    }
}

fn window_or_default(window: Option<Window>, set: &CellSet) -> Result<Window> {
    match window {
        Some(w) => Ok(w),
        None => Window::default_for(set.precision()),
    }
}

fn metadata(config: &str, seed: u64) -> Vec<(String, String)> {
    vec![
        ("config".into(), config.into()),
        ("seed".into(), seed.to_string()),
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
    ]
}

/// Runs a parsed command line. Returns the process exit code for outcomes
/// that are not errors (0, or 1 for a failed verdict).
pub fn run(cli: &Cli, config: &str) -> Result<i32> {
    if cli.common.echo_config {
        eprintln!("{config}");
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.common.threads {
        if n == 0 {
            return Err(Error::Parameter("--threads must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Parameter(e.to_string()))?;
    pool.install(|| dispatch(cli, config))
}

fn dispatch(cli: &Cli, config: &str) -> Result<i32> {
    let seed = cli.common.seed;
    let out = cli.common.out.as_deref();
    let meta = metadata(config, seed);
    match &cli.command {
        Command::Gen { set } => {
            let spec = set.spec(seed)?;
            let cells = generate(&spec, set.depth.unwrap_or(16))?;
            if out.is_some() {
                emit(out, &cells.to_bytes())?;
            }
            println!(
                "cells={} precision={} ambient={} declared_dim={} spec={}",
                cells.len(),
                cells.precision(),
                cells.ambient().dim(),
                spec.declared_dimension(),
                spec.describe()
            );
            Ok(0)
        }
        Command::Dims { set, window, s0 } => {
            let loaded = set.load(seed, 16)?;
            let profile = ComplexityProfile::full(&loaded.set)?;
            let w = window_or_default(*window, &loaded.set)?;
            let est = dimension_estimate(&profile, w.lo, w.hi)?;
            let mut meta = meta;
            meta.push(("set".into(), loaded.description));
            meta.push(("window".into(), w.to_string()));
            meta.push(("dim_est".into(), format!("{:.9}", est.slope)));
            meta.push(("stderr".into(), format!("{:.9}", est.stderr)));
            meta.push(("min_step_slope".into(), format!("{:.9}", est.min_step_slope)));
            if let Some(d) = loaded.declared_dim {
                meta.push(("declared_dim".into(), d.to_string()));
            }
            let csv = profile.to_csv(s0.unwrap_or(w.lo), &meta);
            emit(out, csv.as_bytes())?;
            Ok(0)
        }
        Command::Pindist { set, window, pins } => {
            let loaded = set.load(seed, 20)?;
            let target = loaded
                .declared_dim
                .ok_or_else(|| Error::Parameter("--dim is required with --input".into()))?;
            let w = window_or_default(*window, &loaded.set)?;
            let report = pinned_distance_study(&loaded.set, *pins, target, w, seed, &loaded.description)?;
            emit(out, report.to_csv(&meta).as_bytes())?;
            if out.is_some() {
                println!("max_dim_est={:.6} bound_ours={:.6}", report.max_estimate(), report.bound());
            }
            Ok(0)
        }
        Command::Project { set, window, directions, jitter } => {
            let loaded = set.load(seed, 18)?;
            let w = window_or_default(*window, &loaded.set)?;
            let report = projection_sweep(&loaded.set, *directions, w, *jitter, seed, &loaded.description)?;
            emit(out, report.to_csv(&meta).as_bytes())?;
            if out.is_some() {
                println!("flagged={} fraction={:.6}", report.flagged_angles().len(), report.flagged_fraction());
            }
            Ok(0)
        }
        Command::Fig1 { samples } => {
            let points = bound_curves(&fig1_grid(*samples))?;
            let dominated = points.iter().all(|p| p.strictly_dominates());
            let mut meta = meta;
            if let Some(s) = bound_crossover(0.3, 0.7) {
                meta.push(("sw_fs_crossover".into(), format!("{s:.9}")));
            }
            meta.push(("strict_dominance".into(), dominated.to_string()));
            emit(out, fig1_csv(&points, &meta).as_bytes())?;
            let verdict = format!(
                "strict dominance ours > max(sw, fs): {} on {} points",
                if dominated { "holds" } else { "FAILS" },
                points.len()
            );
            if out.is_some() {
                println!("{verdict}");
            } else {
                eprintln!("{verdict}");
            }
            Ok(if dominated { 0 } else { EXIT_VERDICT })
        }
        Command::Lemma { trials, max_x, max_v, exhaustive, instance } => {
            if let Some(path) = instance {
                return solve_instance(path, out);
            }
            let mut summary = lemma_stress(*trials, *max_x, *max_v, seed);
            if *exhaustive {
                for (x, v) in [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (4, 1), (1, 3)] {
                    summary = summary.merge(lemma_exhaustive(x, v)?);
                }
            }
            let text = stress_text(&summary, &meta);
            if out.is_some() {
                emit(out, text.as_bytes())?;
            } else {
                print!("{text}");
            }
            println!("{} counterexamples", summary.counterexamples.len());
            Ok(if summary.counterexamples.is_empty() { 0 } else { EXIT_VERDICT })
        }
        Command::Annulus { c1, r1, c2, r2, eps, eps2 } => {
            let a1 = Annulus::new(*c1, *r1, *eps)?;
            let a2 = Annulus::new(*c2, *r2, eps2.unwrap_or(*eps))?;
            let sectors = annulus_intersection_cover(&a1, &a2)?;
            let bound = wolff_arc_length(&a1, &a2);
            let mut csv = String::new();
            for (k, v) in &meta {
                let _ = writeln!(csv, "# {k}={v}");
            }
            let _ = writeln!(csv, "# sectors={}", sectors.len());
            let _ = writeln!(csv, "# formula_arc_length={bound:.15e}");
            csv.push_str("start_turns,length_turns,arc_length,within_formula\n");
            for s in &sectors {
                let _ = writeln!(
                    csv,
                    "{:.15},{:.15e},{:.15e},{}",
                    s.start,
                    s.length,
                    s.arc_length(),
                    (s.arc_length() <= bound * (1.0 + 1e-9)) as u8
                );
            }
            emit(out, csv.as_bytes())?;
            Ok(0)
        }
        Command::Halfinfo { set, r, s, pin, angle, pins } => {
            let loaded = set.load(seed, 20)?;
            let r = r.unwrap_or(loaded.set.precision());
            let s = s.unwrap_or(r / 2);
            let mut probes: Vec<(String, Probe)> = Vec::new();
            for p in pin {
                probes.push((format!("pin({};{})", p[0], p[1]), Probe::Pin(*p)));
            }
            for &a in angle {
                probes.push((format!("direction({a})"), Probe::Direction(Direction::from_turns(a)?)));
            }
            if probes.is_empty() {
                for p in sample_points(&loaded.set, *pins, seed)? {
                    let v = p.to_vec2();
                    probes.push((format!("pin({};{})", v[0], v[1]), Probe::Pin(v)));
                }
            }
            let rows: Vec<(String, HalfInfoRow)> = probes
                .into_iter()
                .map(|(name, probe)| Ok((name, half_information_check(&loaded.set, probe, r, s)?)))
                .collect::<Result<_>>()?;
            let mut meta = meta;
            meta.push(("set".into(), loaded.description));
            emit(out, half_info_csv(&rows, &meta).as_bytes())?;
            Ok(0)
        }
    }
}

fn stress_text(summary: &StressSummary, meta: &[(String, String)]) -> String {
    let mut text = String::new();
    for (k, v) in meta {
        let _ = writeln!(text, "# {k}={v}");
    }
    let _ = writeln!(text, "{summary}");
    for c in &summary.counterexamples {
        let _ = writeln!(text, "counterexample:\n{c}");
    }
    text
}

fn solve_instance(path: &Path, out: Option<&Path>) -> Result<i32> {
    let text = std::fs::read_to_string(path)?;
    let inst: SelectionInstance<TripleRelation> = text.parse()?;
    let mut report = String::new();
    match inst.verify_hypotheses() {
        Ok(()) => report.push_str("hypotheses: hold\n"),
        Err(v) => {
            let _ = writeln!(report, "hypotheses: fail ({v})");
        }
    }
    let held = inst.verify_hypotheses().is_ok();
    let found = inst.find_pair();
    match &found {
        Some(c) => {
            let _ = writeln!(report, "pair: u={} v={} witnesses={} threshold={}", c.u, c.v, c.witnesses, c.threshold);
        }
        None => report.push_str("pair: none\n"),
    }
    emit(out, report.as_bytes())?;
    Ok(if held && found.is_none() { EXIT_VERDICT } else { 0 })
}
