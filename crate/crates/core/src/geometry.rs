//! Planar geometry on dyadic cells: pinned-distance and projection images,
//! covers of thin annulus intersections, and point reconstruction from two
//! truncated measurements.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::dyadic::{check_precision, dist, dot, norm, pow2, pow2_neg, sub, Direction, DyadicScalar, Vec2};
use crate::fractal::{Ambient, CellSet};
use crate::{Error, Result};

/// Largest number of sectors an annulus-intersection cover may use.
pub const MAX_SECTORS: usize = 8;

/// Diameter constant for distance reconstruction: regions are at most
/// `RECONSTRUCTION_CONSTANT * 2^(2t - r)` across.
pub const RECONSTRUCTION_CONSTANT: f64 = 64.0;

/// Projection reconstruction regions are at most `4 * 2^(t - r)` across.
pub const PROJECTION_CONSTANT: f64 = 4.0;

const CENTER_BOX: f64 = 0.01;
const RADIUS_BAND: (f64, f64) = (0.99, 1.01);

// Bitmaps above this many bits fall back to sort-and-merge.
const BITMAP_LIMIT: i64 = 1 << 28;

/// Closed index ranges of `r`-dyadic intervals, merged into a 1-D cell set.
fn intervals_to_cells(mut ranges: Vec<(i64, i64)>, r: u32) -> Result<CellSet> {
    let merged = merge_ranges(&mut ranges);
    let cells = merged.iter().flat_map(|&(lo, hi)| (lo..=hi).map(|m| [m, 0])).collect();
    CellSet::from_cells(Ambient::Line, r, cells)
}

fn merge_ranges(ranges: &mut [(i64, i64)]) -> Vec<(i64, i64)> {
    ranges.par_sort_unstable();
    let mut merged: Vec<(i64, i64)> = Vec::new();
    for &(lo, hi) in ranges.iter() {
        match merged.last_mut() {
            Some(last) if lo <= last.1 + 1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    merged
}

/// Number of distinct indices covered by the ranges.
fn count_covered(mut ranges: Vec<(i64, i64)>) -> u64 {
    if ranges.is_empty() {
        return 0;
    }
    let lo = ranges.iter().map(|r| r.0).min().unwrap();
    let hi = ranges.iter().map(|r| r.1).max().unwrap();
    if hi - lo < BITMAP_LIMIT {
        let mut bits = vec![0u64; ((hi - lo) / 64 + 1) as usize];
        for (a, b) in ranges {
            for i in (a - lo)..=(b - lo) {
                bits[(i >> 6) as usize] |= 1 << (i & 63);
            }
        }
        bits.iter().map(|w| w.count_ones() as u64).sum()
    } else {
        merge_ranges(&mut ranges).iter().map(|&(a, b)| (b - a + 1) as u64).sum()
    }
}

fn cell_box(cell: [i64; 2], h: f64, ambient: Ambient) -> ([f64; 2], [f64; 2]) {
    let x0 = cell[0] as f64 * h;
    match ambient {
        Ambient::Line => ([x0, x0 + h], [0.0, 0.0]),
        Ambient::Plane => {
            let y0 = cell[1] as f64 * h;
            ([x0, x0 + h], [y0, y0 + h])
        }
    }
}

/// Closed range `[min, max]` of `|y - pin|` over a closed box.
pub fn box_distance_range(xs: [f64; 2], ys: [f64; 2], pin: Vec2) -> (f64, f64) {
    let dx_min = (xs[0] - pin[0]).max(pin[0] - xs[1]).max(0.0);
    let dy_min = (ys[0] - pin[1]).max(pin[1] - ys[1]).max(0.0);
    let dx_max = (pin[0] - xs[0]).abs().max((pin[0] - xs[1]).abs());
    let dy_max = (pin[1] - ys[0]).abs().max((pin[1] - ys[1]).abs());
    (dx_min.hypot(dy_min), dx_max.hypot(dy_max))
}

/// Closed range of `p_e y` over a closed box.
pub fn box_projection_range(xs: [f64; 2], ys: [f64; 2], e: Vec2) -> (f64, f64) {
    let base = xs[0] * e[0] + ys[0] * e[1];
    let wx = (xs[1] - xs[0]) * e[0];
    let wy = (ys[1] - ys[0]) * e[1];
    (base + wx.min(0.0) + wy.min(0.0), base + wx.max(0.0) + wy.max(0.0))
}

fn image_ranges<F>(set: &CellSet, r: u32, image: F) -> Result<Vec<(i64, i64)>>
where
    F: Fn([f64; 2], [f64; 2]) -> (f64, f64) + Sync,
{
    if r > set.precision() {
        return Err(Error::Precondition(format!(
            "image precision {r} exceeds the set's precision {}",
            set.precision()
        )));
    }
    let coarse;
    let cells = if r == set.precision() {
        set
    } else {
        coarse = set.coarsen(r)?;
        &coarse
    };
    image_ranges_exact(cells, image)
}

// `set` is already at the output precision.
fn image_ranges_exact<F>(set: &CellSet, image: F) -> Result<Vec<(i64, i64)>>
where
    F: Fn([f64; 2], [f64; 2]) -> (f64, f64) + Sync,
{
    let r = set.precision();
    let h = pow2_neg(r);
    let scale = pow2(r);
    let ambient = set.ambient();
    set.cells()
        .par_iter()
        .map(|&c| {
            let (xs, ys) = cell_box(c, h, ambient);
            let (lo, hi) = image(xs, ys);
            let a = (lo * scale).floor();
            let b = (hi * scale).floor();
            if !(a.is_finite() && b.is_finite()) || a.abs() > 9.0e18 || b.abs() > 9.0e18 {
                return Err(Error::PrecisionOverflow { value: hi, precision: r });
            }
            Ok((a as i64, b as i64))
        })
        .collect()
}

/// `r`-dyadic intervals met by `{|y - pin| : y in E}`, computed from the
/// closed distance range of every `r`-cell of `E`. A superset of the exact
/// image, loose by at most one interval at each end of every cell image.
pub fn pinned_distance_cells(set: &CellSet, pin: Vec2, r: u32) -> Result<CellSet> {
    let ranges = image_ranges(set, r, |xs, ys| box_distance_range(xs, ys, pin))?;
    intervals_to_cells(ranges, r)
}

/// Cardinality of [`pinned_distance_cells`] for a set already at precision `r`,
/// without materializing the output.
pub fn pinned_distance_count(set_at_r: &CellSet, pin: Vec2) -> Result<u64> {
    Ok(count_covered(image_ranges_exact(set_at_r, |xs, ys| box_distance_range(xs, ys, pin))?))
}

/// `r`-dyadic intervals met by `p_e E`, from the interval image of each cell.
pub fn projection_cells(set: &CellSet, e: &Direction, r: u32) -> Result<CellSet> {
    let u = e.unit();
    let ranges = image_ranges(set, r, |xs, ys| box_projection_range(xs, ys, u))?;
    intervals_to_cells(ranges, r)
}

/// Cardinality of [`projection_cells`] for a set already at precision `r`.
pub fn projection_count(set_at_r: &CellSet, e: &Direction) -> Result<u64> {
    let u = e.unit();
    Ok(count_covered(image_ranges_exact(set_at_r, |xs, ys| box_projection_range(xs, ys, u))?))
}

/// Open `thickness`-neighborhood of the circle `|y - center| = radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Annulus {
    center: Vec2,
    radius: f64,
    thickness: f64,
}

impl Annulus {
    pub fn new(center: Vec2, radius: f64, thickness: f64) -> Result<Self> {
        if !(center[0].is_finite() && center[1].is_finite() && radius.is_finite() && thickness.is_finite()) {
            return Err(Error::Parameter("annulus parameters must be finite".into()));
        }
        if radius <= 0.0 || thickness <= 0.0 || thickness >= radius {
            return Err(Error::Parameter(format!(
                "annulus needs 0 < thickness < radius, got radius {radius}, thickness {thickness}"
            )));
        }
        Ok(Self { center, radius, thickness })
    }

    pub fn center(&self) -> Vec2 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    pub fn contains(&self, p: Vec2) -> bool {
        (dist(p, self.center) - self.radius).abs() < self.thickness
    }
}

/// `{y in A : center + radius * e_{center,y} in arc}` for an arc given in turns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcSector {
    pub annulus: Annulus,
    /// Start of the arc in turns, in `[0, 1)`.
    pub start: f64,
    /// Arc length in turns, in `(0, 1]`.
    pub length: f64,
}

impl ArcSector {
    /// Length of the arc on the annulus' core circle.
    pub fn arc_length(&self) -> f64 {
        TAU * self.annulus.radius * self.length
    }

    pub fn contains(&self, p: Vec2) -> bool {
        if !self.annulus.contains(p) {
            return false;
        }
        let v = sub(p, self.annulus.center);
        angle_in_arc(v[1].atan2(v[0]) / TAU, self.start, self.length)
    }
}

fn angle_in_arc(turns: f64, start: f64, length: f64) -> bool {
    if length >= 1.0 {
        return true;
    }
    let off = (turns - start).rem_euclid(1.0);
    off <= length + 1e-15 || off >= 1.0 - 1e-15
}

/// Translation and scale that bring a two-circle configuration into the
/// reference frame: centers in `[0, 0.01]^2`, radii in `[0.99, 1.01]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normalization {
    pub shift: Vec2,
    pub scale: f64,
}

impl Normalization {
    pub fn apply(&self, p: Vec2) -> Vec2 {
        [(p[0] - self.shift[0]) * self.scale, (p[1] - self.shift[1]) * self.scale]
    }
}

/// Finds a normalizing map, preferring a power-of-two scale.
pub fn normalize_pair(centers: [Vec2; 2], radii: [f64; 2]) -> Result<Normalization> {
    let shift = [centers[0][0].min(centers[1][0]), centers[0][1].min(centers[1][1])];
    let spread = (centers[0][0] - centers[1][0]).abs().max((centers[0][1] - centers[1][1]).abs());
    let (rmin, rmax) = (radii[0].min(radii[1]), radii[0].max(radii[1]));
    if !(rmin > 0.0 && rmax.is_finite() && spread.is_finite()) {
        return Err(Error::Domain("radii must be positive and finite".into()));
    }
    let lo = RADIUS_BAND.0 / rmin;
    let mut hi = RADIUS_BAND.1 / rmax;
    if spread > 0.0 {
        hi = hi.min(CENTER_BOX / spread);
    }
    if lo > hi * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "radii {:?} with center separation {spread} cannot be scaled into the reference band",
            radii
        )));
    }
    let dyadic = 2f64.powi(lo.log2().ceil() as i32);
    let scale = if dyadic <= hi { dyadic } else { lo };
    Ok(Normalization { shift, scale })
}

/// Maximal arc length, in turns, allowed for a sector covering part of the
/// intersection of two `eps`-annuli with center distance `delta` and radius
/// difference `gap`: `eps / sqrt(max(delta+gap, eps) max(|delta-gap|, eps))`.
/// The scale-free form of `2 pi rho eps / sqrt(...)`.
pub fn wolff_arc_turns(delta: f64, gap: f64, eps: f64) -> f64 {
    eps / ((delta + gap).max(eps) * (delta - gap).abs().max(eps)).sqrt()
}

/// The arc-length bound for a cover of `a1 ∩ a2` by sectors of `a1`, in the
/// units of the inputs. The larger thickness is used when they differ.
pub fn wolff_arc_length(a1: &Annulus, a2: &Annulus) -> f64 {
    let eps = a1.thickness.max(a2.thickness);
    let delta = dist(a1.center, a2.center);
    let gap = (a1.radius - a2.radius).abs();
    TAU * a1.radius * wolff_arc_turns(delta, gap, eps)
}

/// Angular set, around `c1`, of rays along which the rings
/// `inner1 <= |y - c1| <= outer1` and `inner2 <= |y - c2| <= outer2` meet.
/// Returns `(start, sweep)` pairs in radians. Requires `c1 != c2` and
/// `inner1 > |c1 - c2|` so the distance to `c2` grows along each ray.
fn ring_crossing_arcs(c1: Vec2, ring1: (f64, f64), c2: Vec2, ring2: (f64, f64)) -> Vec<(f64, f64)> {
    let d = sub(c2, c1);
    let delta = norm(d);
    let psi = d[1].atan2(d[0]);
    let (inner1, outer1) = ring1;
    let (inner2, outer2) = ring2;
    // Along the ray at angle theta (relative to c2 - c1), |y - c2| <= outer2 at
    // radius inner1 iff cos(theta) >= ca, and |y - c2| >= inner2 at radius
    // outer1 iff cos(theta) <= cb.
    let ca = ((inner1 - outer2) * (inner1 + outer2) + delta * delta) / (2.0 * inner1 * delta);
    let cb = ((outer1 - inner2) * (outer1 + inner2) + delta * delta) / (2.0 * outer1 * delta);
    let pad = 1e-12 * (1.0 + ca.abs().max(cb.abs()));
    let (lo, hi) = (ca - pad, cb + pad);
    if lo > hi || lo >= 1.0 || hi <= -1.0 {
        return Vec::new();
    }
    let a = if hi >= 1.0 { 0.0 } else { hi.acos() };
    let b = if lo <= -1.0 { PI } else { lo.acos() };
    match (a == 0.0, b == PI) {
        (true, true) => vec![(psi, TAU)],
        (true, false) => vec![(psi - b, 2.0 * b)],
        (false, true) => vec![(psi + a, TAU - 2.0 * a)],
        (false, false) => vec![(psi + a, b - a), (psi - b, b - a)],
    }
}

fn to_turns(radians: f64) -> f64 {
    let t = (radians / TAU).rem_euclid(1.0);
    if t >= 1.0 {
        0.0
    } else {
        t
    }
}

/// Covers `a1 ∩ a2` by at most [`MAX_SECTORS`] sectors of `a1`, each no
/// longer than [`wolff_arc_length`].
///
/// The exact angular shadow of the intersection is at most two arcs; arcs
/// longer than the bound are split evenly.
pub fn annulus_intersection_cover(a1: &Annulus, a2: &Annulus) -> Result<Vec<ArcSector>> {
    normalize_pair([a1.center, a2.center], [a1.radius, a2.radius])?;
    let eps = a1.thickness.max(a2.thickness);
    let delta = dist(a1.center, a2.center);
    let gap = (a1.radius - a2.radius).abs();
    let bound = wolff_arc_turns(delta, gap, eps);

    let arcs: Vec<(f64, f64)> = if delta == 0.0 {
        if gap < a1.thickness + a2.thickness {
            vec![(0.0, TAU)]
        } else {
            Vec::new()
        }
    } else {
        ring_crossing_arcs(
            a1.center,
            (a1.radius - a1.thickness, a1.radius + a1.thickness),
            a2.center,
            (a2.radius - a2.thickness, a2.radius + a2.thickness),
        )
    };

    let mut sectors = Vec::new();
    for (start, sweep) in arcs {
        let length = (sweep / TAU).min(1.0);
        let mut pieces = (length / bound).ceil().max(1.0) as usize;
        while length / pieces as f64 > bound {
            pieces += 1;
        }
        let piece = length / pieces as f64;
        for k in 0..pieces {
            sectors.push(ArcSector {
                annulus: *a1,
                start: to_turns(start + TAU * piece * k as f64),
                length: piece,
            });
        }
    }
    if sectors.len() > MAX_SECTORS {
        return Err(Error::Domain(format!(
            "cover needs {} sectors, more than {MAX_SECTORS}",
            sectors.len()
        )));
    }
    Ok(sectors)
}

/// Shape of one candidate region.
#[derive(Clone, Debug, PartialEq)]
pub enum RegionShape {
    /// Intersection of the strips `lo_i <= p_{dir_i} y <= hi_i`.
    Parallelogram { vertices: [Vec2; 4], strips: [(Vec2, f64, f64); 2] },
    /// `inner <= |y - center| <= outer` with polar angle in `[start, start + sweep]` (radians).
    AnnularSector { center: Vec2, inner: f64, outer: f64, start: f64, sweep: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateRegion {
    pub center: Vec2,
    pub diameter: f64,
    pub shape: RegionShape,
}

impl CandidateRegion {
    /// Membership up to a relative slack of `1e-9` of the measurement width.
    pub fn contains(&self, p: Vec2) -> bool {
        match &self.shape {
            RegionShape::Parallelogram { strips, .. } => strips.iter().all(|&(u, lo, hi)| {
                let v = dot(p, u);
                let slack = 1e-9 * (hi - lo);
                v >= lo - slack && v <= hi + slack
            }),
            RegionShape::AnnularSector { center, inner, outer, start, sweep } => {
                let q = sub(p, *center);
                let rho = norm(q);
                let slack = 1e-9 * (outer - inner);
                rho >= inner - slack
                    && rho <= outer + slack
                    && angle_in_arc(q[1].atan2(q[0]) / TAU, to_turns(*start), (sweep / TAU).min(1.0) + 1e-12)
            }
        }
    }
}

/// Candidate locations of a point from two truncated measurements.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionRegion {
    pub regions: Vec<CandidateRegion>,
    /// Separation exponent `t`.
    pub separation: u32,
    pub precision: u32,
    /// The declared per-region diameter bound.
    pub diameter_bound: f64,
}

impl ReconstructionRegion {
    pub fn contains(&self, p: Vec2) -> bool {
        self.regions.iter().any(|g| g.contains(p))
    }

    pub fn max_diameter(&self) -> f64 {
        self.regions.iter().map(|g| g.diameter).fold(0.0, f64::max)
    }
}

fn solve2(u: Vec2, v: Vec2, a: f64, b: f64) -> Vec2 {
    // u . y = a, v . y = b
    let det = u[0] * v[1] - u[1] * v[0];
    [(a * v[1] - b * u[1]) / det, (u[0] * b - v[0] * a) / det]
}

/// Points `y` with `floor_r(p_u y) = pu` and `floor_r(p_v y) = pv`: a
/// parallelogram of diameter at most `4 * 2^(t - r)` where
/// `t = ceil(-log2 min(|u - v|, |u + v|))`.
pub fn reconstruct_from_projections(
    u: &Direction,
    v: &Direction,
    pu: DyadicScalar,
    pv: DyadicScalar,
) -> Result<ReconstructionRegion> {
    if pu.precision() != pv.precision() {
        return Err(Error::PrecisionMismatch { left: pu.precision(), right: pv.precision() });
    }
    let r = pu.precision();
    let (eu, ev) = (u.unit(), v.unit());
    let sep = dist(eu, ev).min(norm([eu[0] + ev[0], eu[1] + ev[1]]));
    let det = eu[0] * ev[1] - eu[1] * ev[0];
    if sep < 1e-15 || det.abs() < 1e-15 {
        return Err(Error::DegenerateStrip);
    }
    let t = (-sep.log2()).ceil().max(0.0) as u32;
    let h = pow2_neg(r);
    let (a0, b0) = (pu.value(), pv.value());
    let (a1, b1) = (a0 + h, b0 + h);
    let vertices = [solve2(eu, ev, a0, b0), solve2(eu, ev, a1, b0), solve2(eu, ev, a1, b1), solve2(eu, ev, a0, b1)];
    let diameter = dist(vertices[0], vertices[2]).max(dist(vertices[1], vertices[3]));
    let center = solve2(eu, ev, a0 + h / 2.0, b0 + h / 2.0);
    let bound = PROJECTION_CONSTANT * 2f64.powi(t as i32 - r as i32);
    Ok(ReconstructionRegion {
        regions: vec![CandidateRegion {
            center,
            diameter,
            shape: RegionShape::Parallelogram { vertices, strips: [(eu, a0, a1), (ev, b0, b1)] },
        }],
        separation: t,
        precision: r,
        diameter_bound: bound,
    })
}

fn annular_sector_diameter(inner: f64, outer: f64, sweep: f64) -> f64 {
    if sweep >= PI {
        return 2.0 * outer;
    }
    let half = (sweep / 2.0).sin();
    let chord = 2.0 * outer * half;
    let diag = ((outer - inner).powi(2) + 4.0 * inner * outer * half * half).sqrt();
    chord.max(diag).max(outer - inner)
}

/// Points `w` with `floor_r(|w - u|) = du` and `floor_r(|w - v|) = dv`, covered
/// by at most two annular sectors around `u`, each of diameter at most
/// `RECONSTRUCTION_CONSTANT * 2^(2t - r)`.
///
/// The caller asserts that the target point sees `u` and `v` in directions at
/// least `2^-t` apart; the nominal crossing of the two measured circles is
/// checked against that and a [`Error::Tangential`] error is raised if it
/// fails. Configurations that cannot be normalized into the reference band
/// (centers within `0.01`, radii within `[0.99, 1.01]` after a common scale)
/// are rejected with [`Error::Domain`].
pub fn reconstruct_from_distances(
    u: Vec2,
    v: Vec2,
    du: DyadicScalar,
    dv: DyadicScalar,
    t: u32,
) -> Result<ReconstructionRegion> {
    if du.precision() != dv.precision() {
        return Err(Error::PrecisionMismatch { left: du.precision(), right: dv.precision() });
    }
    let r = du.precision();
    check_precision(r)?;
    let h = pow2_neg(r);
    let (ru, rv) = (du.value() + h / 2.0, dv.value() + h / 2.0);
    normalize_pair([u, v], [ru, rv])?;
    let delta = dist(u, v);
    if delta == 0.0 {
        return Err(Error::Tangential { separation: 0.0, t });
    }
    if du.value() <= delta {
        return Err(Error::Domain("measured radius does not exceed the center separation".into()));
    }

    // Nominal crossing of the two measured circles.
    let c0 = ((ru - rv) * (ru + rv) + delta * delta) / (2.0 * ru * delta);
    if c0.abs() >= 1.0 {
        return Err(Error::Tangential { separation: 0.0, t });
    }
    let d = sub(v, u);
    let psi = d[1].atan2(d[0]);
    let phi = psi + c0.acos();
    let crossing = [u[0] + ru * phi.cos(), u[1] + ru * phi.sin()];
    let eu = sub(crossing, u);
    let ev = sub(crossing, v);
    let separation = dist([eu[0] / norm(eu), eu[1] / norm(eu)], [ev[0] / norm(ev), ev[1] / norm(ev)]);
    if separation < pow2_neg(t) {
        return Err(Error::Tangential { separation, t });
    }

    let inner = du.value();
    let outer = inner + h;
    let arcs = ring_crossing_arcs(u, (inner, outer), v, (dv.value(), dv.value() + h));
    let regions = arcs
        .into_iter()
        .map(|(start, sweep)| {
            let mid = start + sweep / 2.0;
            let rm = (inner + outer) / 2.0;
            CandidateRegion {
                center: [u[0] + rm * mid.cos(), u[1] + rm * mid.sin()],
                diameter: annular_sector_diameter(inner, outer, sweep),
                shape: RegionShape::AnnularSector { center: u, inner, outer, start, sweep },
            }
        })
        .collect();
    Ok(ReconstructionRegion {
        regions,
        separation: t,
        precision: r,
        diameter_bound: RECONSTRUCTION_CONSTANT * 2f64.powi(2 * t as i32 - r as i32),
    })
}
