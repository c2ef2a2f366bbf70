//! Composed studies: lower-bound curves for pinned distance sets, seeded
//! pinned-distance and projection sweeps over generated sets, and the
//! stress driver for the pair-selection engine.
//!
//! The empirical studies estimate box-counting slopes at finite precision.
//! They illustrate the dimension statements they are named after; they do
//! not verify them, and every CSV they write says so in its header.

use std::fmt::Write as _;
use std::str::FromStr;

use num_rational::Ratio;
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::complexity::{dimension_estimate, ComplexityProfile, DimensionEstimate};
use crate::dyadic::{Direction, Vec2};
use crate::fractal::{sample_points, CellSet};
use crate::geometry::{pinned_distance_count, projection_count};
use crate::rng;
use crate::selection::{SelectionInstance, Similarity, TripleRelation};
use crate::{Error, Result};

pub const HEURISTIC_BANNER: &str =
    "HEURISTIC: finite-precision box-counting estimates; illustrative only, not a test of any dimension theorem";

/// `3s/4`.
pub fn three_quarters_bound(s: f64) -> f64 {
    0.75 * s
}

/// `(s - 2 + sqrt(4 + s^2)) / 2`.
pub fn shmerkin_wang_bound(s: f64) -> f64 {
    (s - 2.0 + (4.0 + s * s).sqrt()) / 2.0
}

/// `s (1 - (2 - s) / (2 (1 + 2s - s^2)))`.
pub fn fiedler_stull_bound(s: f64) -> f64 {
    s * (1.0 - (2.0 - s) / (2.0 * (1.0 + 2.0 * s - s * s)))
}

/// The three pinned-distance lower bounds at one `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundCurvePoint {
    pub s: f64,
    pub ours: f64,
    pub sw: f64,
    pub fs: f64,
}

impl BoundCurvePoint {
    pub fn at(s: f64) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::Parameter(format!("s = {s} is outside (0, 1]")));
        }
        Ok(Self { s, ours: three_quarters_bound(s), sw: shmerkin_wang_bound(s), fs: fiedler_stull_bound(s) })
    }

    /// `ours > max(sw, fs)`.
    pub fn strictly_dominates(&self) -> bool {
        self.ours > self.sw.max(self.fs)
    }
}

pub fn bound_curves(grid: &[f64]) -> Result<Vec<BoundCurvePoint>> {
    grid.iter().map(|&s| BoundCurvePoint::at(s)).collect()
}

/// `samples` evenly spaced points spanning `[0.002, 0.998]`.
pub fn fig1_grid(samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![0.5],
        n => (0..n).map(|i| 0.002 + 0.996 * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Root of `sw(s) - fs(s)` in `[lo, hi]` by bisection; `None` without a sign change.
pub fn bound_crossover(lo: f64, hi: f64) -> Option<f64> {
    let f = |s: f64| shmerkin_wang_bound(s) - fiedler_stull_bound(s);
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    if fa.signum() == f(b).signum() {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m).signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

fn write_meta(out: &mut String, meta: &[(String, String)]) {
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}={v}");
    }
}

pub fn fig1_csv(points: &[BoundCurvePoint], meta: &[(String, String)]) -> String {
    let mut out = String::new();
    write_meta(&mut out, meta);
    out.push_str("s,ours,sw,fs\n");
    for p in points {
        let _ = writeln!(out, "{:.12},{:.12},{:.12},{:.12}", p.s, p.ours, p.sw, p.fs);
    }
    out
}

/// Inclusive regression window `[lo, hi]` of precisions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub lo: u32,
    pub hi: u32,
}

impl Window {
    pub fn new(lo: u32, hi: u32) -> Result<Self> {
        if hi < lo + 3 {
            return Err(Error::Regression((hi + 1).saturating_sub(lo) as usize));
        }
        Ok(Self { lo, hi })
    }

    /// `[r_max / 2, r_max]`.
    pub fn default_for(r_max: u32) -> Result<Self> {
        Self::new(r_max / 2, r_max)
    }

    pub fn precisions(&self) -> Vec<u32> {
        (self.lo..=self.hi).collect()
    }
}

impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once(':').ok_or_else(|| Error::Parameter(format!("window must be lo:hi, got {s:?}")))?;
        let parse = |t: &str| t.trim().parse::<u32>().map_err(|_| Error::Parameter(format!("bad window bound {t:?}")));
        Window::new(parse(a)?, parse(b)?)
    }
}

impl std::fmt::Display for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

/// The set coarsened to each precision of the window.
fn coarsenings(set: &CellSet, window: Window) -> Result<Vec<CellSet>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    if window.hi > set.precision() {
        return Err(Error::Precondition(format!(
            "window top {} exceeds the set's precision {}",
            window.hi,
            set.precision()
        )));
    }
    window.precisions().into_iter().map(|r| set.coarsen(r)).collect()
}

fn line_estimate(window: Window, counts: Vec<u64>) -> Result<DimensionEstimate> {
    let profile = ComplexityProfile::from_counts(1, window.precisions(), counts)?;
    dimension_estimate(&profile, window.lo, window.hi)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PinRow {
    pub pin: Vec2,
    pub estimate: DimensionEstimate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PinnedDistanceReport {
    pub description: String,
    pub target_dim: f64,
    pub seed: u64,
    pub window: Window,
    pub rows: Vec<PinRow>,
}

impl PinnedDistanceReport {
    /// `0.75 s` for the target dimension `s`.
    pub fn bound(&self) -> f64 {
        three_quarters_bound(self.target_dim)
    }

    pub fn max_estimate(&self) -> f64 {
        self.rows.iter().map(|r| r.estimate.slope).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_csv(&self, meta: &[(String, String)]) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {HEURISTIC_BANNER}");
        write_meta(&mut out, meta);
        let _ = writeln!(out, "# set={}", self.description);
        let _ = writeln!(out, "# seed={}", self.seed);
        let _ = writeln!(out, "# target_dim={}", self.target_dim);
        if self.target_dim > 1.0 {
            let _ = writeln!(out, "# note=target dimension above 1, outside the regime of the 3s/4 comparison");
        }
        let _ = writeln!(out, "# comparison=max dim_est {:.6} vs 0.75*s = {:.6}", self.max_estimate(), self.bound());
        out.push_str("pin_x,pin_y,dim_est,stderr,r_lo,r_hi,bound_ours\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:.12},{:.12},{:.9},{:.9},{},{},{:.9}",
                row.pin[0],
                row.pin[1],
                row.estimate.slope,
                row.estimate.stderr,
                row.estimate.window.0,
                row.estimate.window.1,
                self.bound()
            );
        }
        out
    }
}

/// Dimension of `Δ_x E` for each given pin, from the slope of
/// `log2 N_r(Δ_x E)` over the window.
pub fn pinned_distance_study_at(
    set: &CellSet,
    pins: &[Vec2],
    target_dim: f64,
    window: Window,
    seed: u64,
    description: &str,
) -> Result<PinnedDistanceReport> {
    let levels = coarsenings(set, window)?;
    let rows = pins
        .par_iter()
        .map(|&pin| {
            let counts = levels.iter().map(|c| pinned_distance_count(c, pin)).collect::<Result<Vec<_>>>()?;
            Ok(PinRow { pin, estimate: line_estimate(window, counts)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PinnedDistanceReport { description: description.to_string(), target_dim, seed, window, rows })
}

/// Pins are cell centers sampled from `E` itself.
pub fn pinned_distance_study(
    set: &CellSet,
    pins: usize,
    target_dim: f64,
    window: Window,
    seed: u64,
    description: &str,
) -> Result<PinnedDistanceReport> {
    let pins: Vec<Vec2> = sample_points(set, pins, seed)?.iter().map(|p| p.to_vec2()).collect();
    pinned_distance_study_at(set, &pins, target_dim, window, seed, description)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub angle: f64,
    pub estimate: DimensionEstimate,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub description: String,
    pub seed: u64,
    pub jitter: bool,
    pub window: Window,
    /// Estimated dimension of `E` over the same window.
    pub set_estimate: DimensionEstimate,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn flagged_angles(&self) -> Vec<f64> {
        self.rows.iter().filter(|r| r.flagged).map(|r| r.angle).collect()
    }

    pub fn flagged_fraction(&self) -> f64 {
        self.rows.iter().filter(|r| r.flagged).count() as f64 / self.rows.len() as f64
    }

    pub fn to_csv(&self, meta: &[(String, String)]) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {HEURISTIC_BANNER}");
        write_meta(&mut out, meta);
        let _ = writeln!(out, "# set={}", self.description);
        let _ = writeln!(out, "# seed={}", self.seed);
        let _ = writeln!(out, "# jitter={}", self.jitter);
        let _ = writeln!(out, "# set_dim_est={:.9}", self.set_estimate.slope);
        let _ = writeln!(out, "# flag_threshold={:.9}", flag_threshold(self.set_estimate.slope));
        let _ = writeln!(out, "# flagged_fraction={:.6}", self.flagged_fraction());
        out.push_str("angle,dim_est,stderr,flagged\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:.12},{:.9},{:.9},{}",
                row.angle, row.estimate.slope, row.estimate.stderr, row.flagged as u8
            );
        }
        out
    }
}

/// Angles `k / n`, optionally shifted by a seeded offset in `[-1/2n, 1/2n)`.
pub fn direction_grid(n: usize, jitter: bool, seed: u64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let offset = if jitter {
                rng::stream(seed, rng::key(&[0xd1, k as u64])).random::<f64>() - 0.5
            } else {
                0.0
            };
            ((k as f64 + offset) / n as f64).rem_euclid(1.0)
        })
        .collect()
}

/// Half the largest projection dimension a set of dimension `dim` can have
/// on a line.
pub fn flag_threshold(dim: f64) -> f64 {
    dim.min(1.0) / 2.0
}

/// Flags directions whose projection slope falls below [`flag_threshold`] applied to the slope of `E`.
pub fn projection_sweep(
    set: &CellSet,
    directions: usize,
    window: Window,
    jitter: bool,
    seed: u64,
    description: &str,
) -> Result<SweepReport> {
    if directions < 8 {
        return Err(Error::Parameter(format!("a sweep needs at least 8 directions, got {directions}")));
    }
    let levels = coarsenings(set, window)?;
    let set_profile = ComplexityProfile::from_counts(
        set.ambient().dim(),
        window.precisions(),
        levels.iter().map(|c| c.len() as u64).collect(),
    )?;
    let set_estimate = dimension_estimate(&set_profile, window.lo, window.hi)?;
    let threshold = flag_threshold(set_estimate.slope);
    let rows = direction_grid(directions, jitter, seed)
        .into_par_iter()
        .map(|angle| {
            let e = Direction::from_turns(angle)?;
            let counts = levels.iter().map(|c| projection_count(c, &e)).collect::<Result<Vec<_>>>()?;
            let estimate = line_estimate(window, counts)?;
            let flagged = estimate.slope < threshold;
            Ok(SweepRow { angle: e.turns(), estimate, flagged })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport { description: description.to_string(), seed, jitter, window, set_estimate, rows })
}

/// What the image set is taken under.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Probe {
    Pin(Vec2),
    Direction(Direction),
}

/// Set-level comparison of conditional surrogates between an image and `E`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfInfoRow {
    pub r: u32,
    pub s: u32,
    /// `log2 N_r(image) - log2 N_s(image)`.
    pub lhs: f64,
    /// `(log2 N_r(E) - log2 N_s(E)) / 2`.
    pub rhs: f64,
    pub slack: f64,
}

pub fn half_information_check(set: &CellSet, probe: Probe, r: u32, s: u32) -> Result<HalfInfoRow> {
    if s >= r {
        return Err(Error::Precondition(format!("need s < r, got s = {s}, r = {r}")));
    }
    if r > set.precision() {
        return Err(Error::Precondition(format!("precision {r} exceeds the set's precision {}", set.precision())));
    }
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let fine = set.coarsen(r)?;
    let coarse = set.coarsen(s)?;
    let image = |c: &CellSet| match probe {
        Probe::Pin(p) => pinned_distance_count(c, p),
        Probe::Direction(e) => projection_count(c, &e),
    };
    let lhs = (image(&fine)? as f64).log2() - (image(&coarse)? as f64).log2();
    let rhs = 0.5 * ((fine.len() as f64).log2() - (coarse.len() as f64).log2());
    Ok(HalfInfoRow { r, s, lhs, rhs, slack: lhs - rhs })
}

pub fn half_info_csv(rows: &[(String, HalfInfoRow)], meta: &[(String, String)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {HEURISTIC_BANNER}");
    write_meta(&mut out, meta);
    out.push_str("probe,r,s,lhs_bits,rhs_bits,slack\n");
    for (probe, row) in rows {
        let _ = writeln!(out, "{probe},{},{},{:.9},{:.9},{:.9}", row.r, row.s, row.lhs, row.rhs, row.slack);
    }
    out
}

/// Outcome of a batch of selection instances.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StressSummary {
    pub tried: u64,
    /// Hypotheses held and a certificate was found and recounted.
    pub passed: u64,
    /// Hypotheses failed; the instance says nothing about the guarantee.
    pub skipped: u64,
    /// Hypotheses held but no certificate was produced. Should stay empty.
    pub counterexamples: Vec<String>,
}

impl StressSummary {
    fn record<R: Similarity>(&mut self, inst: &SelectionInstance<R>, label: impl FnOnce() -> String) {
        self.tried += 1;
        if inst.verify_hypotheses().is_err() {
            self.skipped += 1;
            return;
        }
        match inst.find_pair() {
            Some(cert) if cert.recount(inst) => self.passed += 1,
            _ => self.counterexamples.push(label()),
        }
    }

    pub fn merge(mut self, other: StressSummary) -> StressSummary {
        self.tried += other.tried;
        self.passed += other.passed;
        self.skipped += other.skipped;
        self.counterexamples.extend(other.counterexamples);
        self
    }
}

impl std::fmt::Display for StressSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "tried={} passed={} skipped={} counterexamples={}",
            self.tried,
            self.passed,
            self.skipped,
            self.counterexamples.len()
        )
    }
}

const ALPHAS: [(u64, u64); 7] = [(1, 10), (1, 4), (1, 3), (1, 2), (2, 3), (3, 4), (9, 10)];

/// Random instance with `|X| <= max_x`, `|V| <= max_v`. Sizes and
/// similarity counts are pushed toward the hypothesis boundaries; about one
/// instance in ten breaks exactly one hypothesis by a single element.
pub fn random_instance(seed: u64, index: u64, max_x: usize, max_v: usize) -> SelectionInstance<TripleRelation> {
    let mut rng = rng::stream(seed, rng::key(&[0x1e33a, index]));
    let x_len = rng.random_range(1..=max_x.max(1));
    let v_len = rng.random_range(1..=max_v.max(1));
    let (p, q) = ALPHAS[rng.random_range(0..ALPHAS.len())];
    let min_size = ((p * x_len as u64).div_ceil(q)) as usize;
    let cap = ((p * p * v_len as u64) / (4 * q * q)) as usize;
    let flaw = rng.random_range(0..20u32);
    let flawed_v = rng.random_range(0..v_len);

    let mut neighborhoods = Vec::with_capacity(v_len);
    for v in 0..v_len {
        let mut size = if rng.random::<bool>() { min_size } else { rng.random_range(min_size..=x_len) };
        if flaw == 0 && v == flawed_v && min_size > 0 {
            size = min_size - 1;
        }
        let mut n: Vec<u32> = sample(&mut rng, x_len, size).into_iter().map(|d| d as u32).collect();
        n.sort_unstable();
        neighborhoods.push(n);
    }
    let flawed_d = neighborhoods[flawed_v].first().copied();
    let mut relation = TripleRelation::new(x_len, v_len);
    for (v, n) in neighborhoods.iter().enumerate() {
        for d in 0..x_len {
            let k = if n.binary_search(&(d as u32)).is_ok() {
                if flaw == 1 && v == flawed_v && flawed_d == Some(d as u32) {
                    (cap + 1).min(v_len)
                } else if rng.random::<bool>() {
                    cap
                } else {
                    rng.random_range(0..=cap)
                }
            } else {
                rng.random_range(0..=v_len.min(3))
            };
            for u in sample(&mut rng, v_len, k) {
                relation.insert(d, u, v).expect("indices are in range");
            }
        }
    }
    SelectionInstance::new(x_len, neighborhoods, Ratio::new(p, q), relation).expect("generated instance is well formed")
}

/// Seeded random instances up to `(max_x, max_v)`.
pub fn lemma_stress(trials: u64, max_x: usize, max_v: usize, seed: u64) -> StressSummary {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let inst = random_instance(seed, i, max_x, max_v);
            let mut s = StressSummary::default();
            s.record(&inst, || format!("seed={seed} index={i}\n{}", inst.to_text()));
            s
        })
        .reduce(StressSummary::default, StressSummary::merge)
}

/// Every neighborhood assignment and every relation on `|X| = x_len`,
/// `|V| = v_len`, for each `alpha` in a fixed grid. Only feasible while
/// `x_len * v_len * (v_len + 1) <= 16`.
pub fn lemma_exhaustive(x_len: usize, v_len: usize) -> Result<StressSummary> {
    let n_bits = x_len * v_len;
    let rel_bits = x_len * v_len * v_len;
    if n_bits + rel_bits > 16 {
        return Err(Error::Parameter(format!("exhaustive enumeration of {x_len} x {v_len} is too large")));
    }
    let summary = (0u64..1 << n_bits)
        .into_par_iter()
        .map(|nmask| {
            let neighborhoods: Vec<Vec<u32>> = (0..v_len)
                .map(|v| (0..x_len).filter(|d| nmask >> (v * x_len + d) & 1 == 1).map(|d| d as u32).collect())
                .collect();
            let mut s = StressSummary::default();
            for rmask in 0u64..1 << rel_bits {
                let mut relation = TripleRelation::new(x_len, v_len);
                for b in 0..rel_bits {
                    if rmask >> b & 1 == 1 {
                        let (d, rest) = (b / (v_len * v_len), b % (v_len * v_len));
                        relation.insert(d, rest / v_len, rest % v_len).expect("in range");
                    }
                }
                for &(p, q) in &ALPHAS {
                    let inst = SelectionInstance::new(x_len, neighborhoods.clone(), Ratio::new(p, q), &relation)
                        .expect("well formed");
                    s.record(&inst, || format!("exhaustive x={x_len} v={v_len} n={nmask:#x} rel={rmask:#x} alpha={p}/{q}"));
                }
            }
            s
        })
        .reduce(StressSummary::default, StressSummary::merge);
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::{generate, Ambient, FractalSpec};

    #[test]
    fn curve_values() {
        let p = BoundCurvePoint::at(0.47671).unwrap();
        assert!((p.sw - 0.26637).abs() < 1e-4);
        assert!((p.fs - 0.26637).abs() < 1e-4);
        assert!((p.ours - 0.35753).abs() < 1e-4);
        let one = BoundCurvePoint::at(1.0).unwrap();
        assert_eq!(one.ours, 0.75);
        assert!((one.sw - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        assert!((one.fs - 0.75).abs() < 1e-15);
        assert!(BoundCurvePoint::at(0.0).is_err());
        assert!(BoundCurvePoint::at(1.01).is_err());
    }

    #[test]
    fn grid_shape() {
        let g = fig1_grid(512);
        assert_eq!(g.len(), 512);
        assert_eq!(g[0], 0.002);
        assert!((g[511] - 0.998).abs() < 1e-15);
    }

    #[test]
    fn window_parsing() {
        assert_eq!("10:20".parse::<Window>().unwrap(), Window { lo: 10, hi: 20 });
        assert!("10:12".parse::<Window>().is_err());
        assert!("10-20".parse::<Window>().is_err());
        assert_eq!(Window::default_for(20).unwrap(), Window { lo: 10, hi: 20 });
    }

    #[test]
    fn circle_around_pin_has_flat_distance_profile() {
        let r = 14;
        let n = 1i64 << r;
        let radius = 0.3;
        let cells: Vec<[i64; 2]> = (0..20_000)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 20_000.0;
                [((0.5 + radius * t.cos()) * n as f64).floor() as i64, ((0.5 + radius * t.sin()) * n as f64).floor() as i64]
            })
            .collect();
        let circle = CellSet::from_cells(Ambient::Plane, r, cells).unwrap();
        let rep = pinned_distance_study_at(&circle, &[[0.5, 0.5]], 1.0, Window::new(7, 14).unwrap(), 0, "circle").unwrap();
        assert!(rep.max_estimate() < 0.1, "{}", rep.max_estimate());
    }

    #[test]
    fn square_distance_sets_are_intervals() {
        let sq = generate(&FractalSpec::FullSquare, 10).unwrap();
        let rep = pinned_distance_study(&sq, 3, 2.0, Window::new(5, 10).unwrap(), 4, "square").unwrap();
        for row in &rep.rows {
            assert!((row.estimate.slope - 1.0).abs() < 0.05, "{:?}", row);
        }
        assert!(rep.to_csv(&[]).contains("outside the regime"));
    }

    #[test]
    fn square_has_no_exceptional_directions() {
        let sq = generate(&FractalSpec::FullSquare, 9).unwrap();
        let rep = projection_sweep(&sq, 16, Window::new(4, 9).unwrap(), true, 3, "square").unwrap();
        assert!(rep.flagged_angles().is_empty(), "{}", rep.to_csv(&[]));
        assert!(projection_sweep(&sq, 7, Window::new(4, 9).unwrap(), false, 3, "square").is_err());
    }

    #[test]
    fn half_information_examples() {
        let sq = generate(&FractalSpec::FullSquare, 12).unwrap();
        let e = Direction::from_turns(0.1).unwrap();
        let row = half_information_check(&sq, Probe::Direction(e), 12, 6).unwrap();
        assert_eq!(row.rhs, 6.0);
        assert!(row.slack.abs() < 0.1, "{row:?}");

        let seg = generate(&FractalSpec::Segment, 12).unwrap();
        let along = Direction::from_turns(0.0).unwrap();
        let row = half_information_check(&seg, Probe::Direction(along), 12, 6).unwrap();
        assert_eq!(row.rhs, 3.0);
        assert!(row.lhs >= row.rhs);
        assert!((row.lhs - 6.0).abs() < 0.05);
        assert!(half_information_check(&seg, Probe::Direction(along), 6, 6).is_err());
    }

    #[test]
    fn tiny_exhaustive_lemma() {
        let s = lemma_exhaustive(2, 2).unwrap();
        assert!(s.counterexamples.is_empty());
        assert_eq!(s.tried, 16 * 256 * ALPHAS.len() as u64);
        assert!(s.passed > 0);
        assert!(lemma_exhaustive(3, 3).is_err());
    }

    #[test]
    fn random_lemma_batch() {
        let s = lemma_stress(300, 20, 20, 5);
        assert!(s.counterexamples.is_empty());
        assert_eq!(s.tried, 300);
        assert!(s.passed > 100, "{s}");
        assert!(s.skipped > 0, "{s}");
    }
}
