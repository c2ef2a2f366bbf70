//! Dyadic cell sets and the generators for the test fractals.
//!
//! A [`CellSet`] at precision `r` is the set of occupied cells
//! `[m 2^-r, (m+1) 2^-r) x [n 2^-r, (n+1) 2^-r)`, stored as sorted integer pairs.
//! One-dimensional sets keep `n = 0` for every cell and serialize a single
//! coordinate per cell.

use std::fmt;
use std::io::{Read, Write};

use rand::Rng;
use rayon::prelude::*;

use crate::dyadic::{check_precision, DyadicPoint};
use crate::rng;
use crate::{Error, Result};

/// Hard cap on the number of cells a generator will materialize.
pub const MAX_CELLS: u64 = 1 << 25;

const MAGIC: &[u8; 4] = b"DYCS";
const FORMAT_VERSION: u8 = 0x01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ambient {
    Line,
    Plane,
}

impl Ambient {
    pub fn dim(self) -> u32 {
        match self {
            Ambient::Line => 1,
            Ambient::Plane => 2,
        }
    }

    pub fn from_dim(d: u32) -> Result<Self> {
        match d {
            1 => Ok(Ambient::Line),
            2 => Ok(Ambient::Plane),
            _ => Err(Error::Parameter(format!("ambient dimension must be 1 or 2, got {d}"))),
        }
    }
}

pub type Cell = [i64; 2];

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CellSet {
    ambient: Ambient,
    precision: u32,
    cells: Vec<Cell>,
}

impl CellSet {
    /// Builds a set from arbitrary cells; sorts and removes duplicates.
    pub fn from_cells(ambient: Ambient, precision: u32, mut cells: Vec<Cell>) -> Result<Self> {
        check_precision(precision)?;
        if ambient == Ambient::Line && cells.iter().any(|c| c[1] != 0) {
            return Err(Error::Parameter("one-dimensional cells must have a zero second coordinate".into()));
        }
        cells.par_sort_unstable();
        cells.dedup();
        Ok(Self { ambient, precision, cells })
    }

    /// Sorted, duplicate-free input is taken as is.
    fn from_sorted(ambient: Ambient, precision: u32, cells: Vec<Cell>) -> Self {
        debug_assert!(cells.windows(2).all(|w| w[0] < w[1]));
        Self { ambient, precision, cells }
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, cell: Cell) -> bool {
        self.cells.binary_search(&cell).is_ok()
    }

    /// The set of `s`-cells containing at least one cell of `self`.
    pub fn coarsen(&self, s: u32) -> Result<CellSet> {
        if s > self.precision {
            return Err(Error::Precondition(format!(
                "cannot coarsen precision {} to finer precision {s}",
                self.precision
            )));
        }
        let k = self.precision - s;
        if k == 0 {
            return Ok(self.clone());
        }
        let mut cells: Vec<Cell> = self.cells.iter().map(|c| [c[0] >> k, c[1] >> k]).collect();
        match self.ambient {
            // A monotone map on the only coordinate keeps the order.
            Ambient::Line => {}
            Ambient::Plane => cells.par_sort_unstable(),
        }
        cells.dedup();
        Ok(CellSet::from_sorted(self.ambient, s, cells))
    }

    /// Number of occupied `s`-cells, without keeping the coarsened set.
    pub fn count_at(&self, s: u32) -> Result<u64> {
        Ok(self.coarsen(s)?.len() as u64)
    }

    /// For every occupied `s`-cell, the number of occupied `precision`-cells inside it.
    pub fn children_counts(&self, s: u32) -> Result<Vec<(Cell, u64)>> {
        if s > self.precision {
            return Err(Error::Precondition(format!(
                "children_counts needs s <= {}, got {s}",
                self.precision
            )));
        }
        let k = self.precision - s;
        let mut parents: Vec<Cell> = self.cells.iter().map(|c| [c[0] >> k, c[1] >> k]).collect();
        parents.par_sort_unstable();
        let mut out: Vec<(Cell, u64)> = Vec::new();
        for p in parents {
            match out.last_mut() {
                Some((last, n)) if *last == p => *n += 1,
                _ => out.push((p, 1)),
            }
        }
        Ok(out)
    }

    /// Center of the `i`-th cell, exactly, at precision `r + 1`.
    pub fn cell_center(&self, i: usize) -> Result<DyadicPoint> {
        let c = self.cells[i];
        let y = match self.ambient {
            Ambient::Line => 0,
            Ambient::Plane => 2 * c[1] + 1,
        };
        DyadicPoint::new(2 * c[0] + 1, y, self.precision + 1)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let per_cell = self.ambient.dim() as usize * 8;
        let mut buf = Vec::with_capacity(18 + per_cell * self.cells.len());
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    /// Writes the `DYCS` binary encoding.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[FORMAT_VERSION, self.ambient.dim() as u8])?;
        w.write_all(&self.precision.to_le_bytes())?;
        w.write_all(&(self.cells.len() as u64).to_le_bytes())?;
        for c in &self.cells {
            w.write_all(&c[0].to_le_bytes())?;
            if self.ambient == Ambient::Plane {
                w.write_all(&c[1].to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_from(bytes)
    }

    /// Parses a `DYCS` stream. Cells must be strictly increasing.
    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut head = [0u8; 18];
        read_exact(&mut r, &mut head)?;
        if &head[0..4] != MAGIC {
            return Err(Error::Format("missing DYCS magic".into()));
        }
        if head[4] != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported DYCS version {}", head[4])));
        }
        let ambient = Ambient::from_dim(head[5] as u32).map_err(|e| Error::Format(e.to_string()))?;
        let precision = u32::from_le_bytes(head[6..10].try_into().unwrap());
        check_precision(precision).map_err(|e| Error::Format(e.to_string()))?;
        let count = u64::from_le_bytes(head[10..18].try_into().unwrap());
        if count > MAX_CELLS * 4 {
            return Err(Error::Format(format!("cell count {count} is implausibly large")));
        }
        let mut cells = Vec::with_capacity(count as usize);
        let mut word = [0u8; 8];
        for _ in 0..count {
            read_exact(&mut r, &mut word)?;
            let x = i64::from_le_bytes(word);
            let y = if ambient == Ambient::Plane {
                read_exact(&mut r, &mut word)?;
                i64::from_le_bytes(word)
            } else {
                0
            };
            cells.push([x, y]);
        }
        if r.read(&mut word)? != 0 {
            return Err(Error::Format("trailing bytes after the last cell".into()));
        }
        if !cells.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Format("cells are not strictly increasing".into()));
        }
        Ok(CellSet::from_sorted(ambient, precision, cells))
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("truncated DYCS stream".into()),
        _ => Error::Io(e),
    })
}

/// Recipe for a generated set.
#[derive(Clone, Debug, PartialEq)]
pub enum FractalSpec {
    /// Numbers in `[0, 1)` whose base `2^digit_bits` digits all lie in `digits`.
    DigitCantor { digit_bits: u32, digits: Vec<u32> },
    /// Cartesian product of two one-dimensional specs.
    Product(Box<FractalSpec>, Box<FractalSpec>),
    /// Seeded branching process: each child cell survives with probability
    /// `2^{s - d}` so the expected branching is `2^s`.
    RandomTree { dim: f64, ambient: Ambient, seed: u64 },
    FullSquare,
    /// The horizontal unit segment `[0, 1) x {0}`.
    Segment,
}

impl FractalSpec {
    pub fn cantor(digit_bits: u32, digits: &[u32]) -> Self {
        FractalSpec::DigitCantor { digit_bits, digits: digits.to_vec() }
    }

    /// The base-4 Cantor set with digits `{0, 3}` (dimension 1/2).
    pub fn mid_four_cantor() -> Self {
        Self::cantor(2, &[0, 3])
    }

    /// `C x C` for the base-4 `{0, 3}` Cantor set (dimension 1).
    pub fn mid_four_product() -> Self {
        FractalSpec::Product(Box::new(Self::mid_four_cantor()), Box::new(Self::mid_four_cantor()))
    }

    pub fn ambient(&self) -> Ambient {
        match self {
            FractalSpec::DigitCantor { .. } => Ambient::Line,
            FractalSpec::Product(..) | FractalSpec::FullSquare | FractalSpec::Segment => Ambient::Plane,
            FractalSpec::RandomTree { ambient, .. } => *ambient,
        }
    }

    /// Declared (target) dimension. Exact for digit sets and their products.
    pub fn declared_dimension(&self) -> f64 {
        match self {
            FractalSpec::DigitCantor { digit_bits, digits } => (digits.len() as f64).log2() / *digit_bits as f64,
            FractalSpec::Product(a, b) => a.declared_dimension() + b.declared_dimension(),
            FractalSpec::RandomTree { dim, .. } => *dim,
            FractalSpec::FullSquare => 2.0,
            FractalSpec::Segment => 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FractalSpec::DigitCantor { digit_bits, digits } => {
                if *digit_bits == 0 || *digit_bits > 16 {
                    return Err(Error::Parameter(format!("digit width {digit_bits} bits is out of range 1..=16")));
                }
                if digits.is_empty() {
                    return Err(Error::Parameter("digit set is empty".into()));
                }
                let base = 1u32 << digit_bits;
                let mut seen = std::collections::BTreeSet::new();
                for &d in digits {
                    if d >= base {
                        return Err(Error::Parameter(format!("digit {d} not below base {base}")));
                    }
                    if !seen.insert(d) {
                        return Err(Error::Parameter(format!("digit {d} repeated")));
                    }
                }
                Ok(())
            }
            FractalSpec::Product(a, b) => {
                if a.ambient() != Ambient::Line || b.ambient() != Ambient::Line {
                    return Err(Error::Parameter("product factors must be one-dimensional".into()));
                }
                a.validate()?;
                b.validate()
            }
            FractalSpec::RandomTree { dim, ambient, .. } => {
                let d = ambient.dim() as f64;
                if !(0.0..=d).contains(dim) {
                    return Err(Error::Parameter(format!("target dimension {dim} outside [0, {d}]")));
                }
                Ok(())
            }
            FractalSpec::FullSquare | FractalSpec::Segment => Ok(()),
        }
    }

    /// Short replayable description used in output metadata.
    pub fn describe(&self) -> String {
        match self {
            FractalSpec::DigitCantor { digit_bits, digits } => {
                let ds: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
                format!("digit_cantor(base={},digits={})", 1u32 << digit_bits, ds.join("+"))
            }
            FractalSpec::Product(a, b) => format!("product({},{})", a.describe(), b.describe()),
            FractalSpec::RandomTree { dim, ambient, seed } => {
                format!("random_tree(dim={dim},ambient={},seed={seed})", ambient.dim())
            }
            FractalSpec::FullSquare => "full_square".into(),
            FractalSpec::Segment => "segment".into(),
        }
    }
}

impl fmt::Display for FractalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

fn too_many(count: u64) -> Error {
    Error::Parameter(format!("generation would produce {count} cells (limit {MAX_CELLS})"))
}

/// Materializes `spec` at precision `r`. Deterministic in `(spec, r)`.
pub fn generate(spec: &FractalSpec, r: u32) -> Result<CellSet> {
    check_precision(r)?;
    spec.validate()?;
    match spec {
        FractalSpec::DigitCantor { digit_bits, digits } => {
            if !r.is_multiple_of(*digit_bits) {
                return Err(Error::Parameter(format!(
                    "precision {r} is not a multiple of the digit width {digit_bits}"
                )));
            }
            let levels = r / digit_bits;
            let count = (digits.len() as u64).checked_pow(levels).unwrap_or(u64::MAX);
            if count > MAX_CELLS {
                return Err(too_many(count));
            }
            let mut sorted = digits.clone();
            sorted.sort_unstable();
            let mut xs: Vec<i64> = vec![0];
            for _ in 0..levels {
                xs = xs
                    .iter()
                    .flat_map(|&m| sorted.iter().map(move |&a| (m << digit_bits) + a as i64))
                    .collect();
            }
            Ok(CellSet::from_sorted(Ambient::Line, r, xs.into_iter().map(|x| [x, 0]).collect()))
        }
        FractalSpec::Product(a, b) => {
            let a = generate(a, r)?;
            let b = generate(b, r)?;
            product(&a, &b)
        }
        FractalSpec::RandomTree { dim, ambient, seed } => random_tree(*dim, *ambient, *seed, r),
        FractalSpec::FullSquare => {
            if 2 * r as u64 > 25 {
                return Err(too_many(1u64 << (2 * r).min(63)));
            }
            let side = 1i64 << r;
            let cells = (0..side).flat_map(|m| (0..side).map(move |n| [m, n])).collect();
            Ok(CellSet::from_sorted(Ambient::Plane, r, cells))
        }
        FractalSpec::Segment => {
            if r as u64 > 25 {
                return Err(too_many(1u64 << r));
            }
            Ok(CellSet::from_sorted(Ambient::Plane, r, (0..1i64 << r).map(|m| [m, 0]).collect()))
        }
    }
}

fn random_tree(dim: f64, ambient: Ambient, seed: u64, r: u32) -> Result<CellSet> {
    let d = ambient.dim();
    let children = 1u32 << d;
    let keep = 2f64.powf(dim - d as f64);
    let mut level: Vec<Cell> = vec![[0, 0]];
    for depth in 0..r {
        let next: Vec<Cell> = level
            .par_iter()
            .flat_map_iter(|&cell| {
                let mut rng = rng::stream(seed, rng::key(&[depth as u64, cell[0] as u64, cell[1] as u64]));
                let mut mask = 0u32;
                for _attempt in 0..2 {
                    mask = (0..children).filter(|_| rng.random::<f64>() < keep).fold(0, |m, i| m | 1 << i);
                    if mask != 0 {
                        break;
                    }
                }
                if mask == 0 {
                    mask = 1 << rng.random_range(0..children);
                }
                (0..children).filter(move |i| mask & (1 << i) != 0).map(move |i| match ambient {
                    Ambient::Line => [2 * cell[0] + i as i64, 0],
                    Ambient::Plane => [2 * cell[0] + (i >> 1) as i64, 2 * cell[1] + (i & 1) as i64],
                })
            })
            .collect();
        if next.len() as u64 > MAX_CELLS {
            return Err(too_many(next.len() as u64));
        }
        level = next;
    }
    CellSet::from_cells(ambient, r, level)
}

/// Cartesian product of two one-dimensional sets at the same precision.
pub fn product(a: &CellSet, b: &CellSet) -> Result<CellSet> {
    if a.ambient != Ambient::Line || b.ambient != Ambient::Line {
        return Err(Error::Parameter("product factors must be one-dimensional".into()));
    }
    if a.precision != b.precision {
        return Err(Error::PrecisionMismatch { left: a.precision, right: b.precision });
    }
    let count = a.len() as u64 * b.len() as u64;
    if count > MAX_CELLS {
        return Err(too_many(count));
    }
    let cells = a.cells.iter().flat_map(|ca| b.cells.iter().map(move |cb| [ca[0], cb[0]])).collect();
    Ok(CellSet::from_sorted(Ambient::Plane, a.precision, cells))
}

/// `k` cell centers drawn uniformly with replacement.
pub fn sample_points(set: &CellSet, k: usize, seed: u64) -> Result<Vec<DyadicPoint>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut rng = rng::stream(seed, rng::key(&[0x005a_3d1e]));
    (0..k).map(|_| set.cell_center(rng.random_range(0..set.len()))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cantor_counts() {
        let c = generate(&FractalSpec::mid_four_cantor(), 8).unwrap();
        assert_eq!(c.len(), 16);
        assert_eq!(c.ambient(), Ambient::Line);
        assert_eq!(FractalSpec::mid_four_cantor().declared_dimension(), 0.5);
        assert_eq!(c.cells()[1], [3, 0]);
        assert!(matches!(generate(&FractalSpec::mid_four_cantor(), 7), Err(Error::Parameter(_))));
        assert!(matches!(generate(&FractalSpec::cantor(2, &[0, 4]), 4), Err(Error::Parameter(_))));
    }

    #[test]
    fn square_and_segment() {
        assert_eq!(generate(&FractalSpec::FullSquare, 5).unwrap().len(), 1024);
        assert_eq!(generate(&FractalSpec::Segment, 6).unwrap().len(), 64);
        assert!(generate(&FractalSpec::FullSquare, 13).is_err());
    }

    #[test]
    fn product_counts() {
        let p = generate(&FractalSpec::mid_four_product(), 8).unwrap();
        assert_eq!(p.len(), 256);
        let full = generate(&FractalSpec::cantor(1, &[0, 1]), 4).unwrap();
        assert_eq!(product(&full, &full).unwrap().len(), 256);
        let single = CellSet::from_cells(Ambient::Line, 4, vec![[5, 0]]).unwrap();
        let c = generate(&FractalSpec::cantor(2, &[0, 3]), 4).unwrap();
        assert_eq!(product(&single, &c).unwrap().len(), c.len());
        let c6 = generate(&FractalSpec::cantor(2, &[0, 3]), 6).unwrap();
        assert!(matches!(product(&c, &c6), Err(Error::PrecisionMismatch { .. })));
    }

    #[test]
    fn random_tree_refines_consistently() {
        for (dim, amb) in [(1.0, Ambient::Plane), (1.585, Ambient::Plane), (0.6, Ambient::Line)] {
            let spec = FractalSpec::RandomTree { dim, ambient: amb, seed: 11 };
            let fine = generate(&spec, 12).unwrap();
            for s in [0, 3, 7, 11] {
                assert_eq!(fine.coarsen(s).unwrap(), generate(&spec, s).unwrap());
            }
            assert_eq!(fine, generate(&spec, 12).unwrap());
        }
    }

    #[test]
    fn sampling() {
        let one = CellSet::from_cells(Ambient::Plane, 3, vec![[2, 5]]).unwrap();
        let pts = sample_points(&one, 4, 9).unwrap();
        assert!(pts.iter().all(|p| p.to_vec2() == [2.5 / 8.0, 5.5 / 8.0]));
        assert!(sample_points(&one, 0, 1).unwrap().is_empty());
        let sq = generate(&FractalSpec::FullSquare, 3).unwrap();
        let pts = sample_points(&sq, 10, 1).unwrap();
        assert_eq!(pts.len(), 10);
        for p in &pts {
            let v = p.to_vec2();
            assert!((0.0..1.0).contains(&v[0]) && (0.0..1.0).contains(&v[1]));
            assert!(sq.contains(p.cell_at(3).unwrap()));
        }
        assert_eq!(pts, sample_points(&sq, 10, 1).unwrap());
        let empty = CellSet::from_cells(Ambient::Plane, 3, vec![]).unwrap();
        assert!(matches!(sample_points(&empty, 1, 0), Err(Error::EmptySet)));
    }

    #[test]
    fn format_layout() {
        let set = CellSet::from_cells(Ambient::Line, 3, vec![[5, 0], [-1, 0]]).unwrap();
        let bytes = set.to_bytes();
        let mut expect = b"DYCS".to_vec();
        expect.extend([1u8, 1, 3, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0]);
        expect.extend((-1i64).to_le_bytes());
        expect.extend(5i64.to_le_bytes());
        assert_eq!(bytes, expect);
        assert_eq!(CellSet::from_bytes(&bytes).unwrap(), set);
        assert!(matches!(CellSet::from_bytes(&bytes[..bytes.len() - 1]), Err(Error::Format(_))));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(CellSet::from_bytes(&bad), Err(Error::Format(_))));
        let mut unsorted = bytes[..18].to_vec();
        unsorted.extend(5i64.to_le_bytes());
        unsorted.extend((-1i64).to_le_bytes());
        assert!(matches!(CellSet::from_bytes(&unsorted), Err(Error::Format(_))));
    }

    fn arb_set() -> impl Strategy<Value = CellSet> {
        (1u32..=2, 0u32..=20, prop::collection::vec((-5000i64..5000, -5000i64..5000), 0..200)).prop_map(
            |(d, r, cells)| {
                let amb = Ambient::from_dim(d).unwrap();
                let cells = cells.into_iter().map(|(x, y)| [x, if d == 1 { 0 } else { y }]).collect();
                CellSet::from_cells(amb, r, cells).unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn dycs_round_trip(set in arb_set()) {
            let bytes = set.to_bytes();
            let back = CellSet::from_bytes(&bytes).unwrap();
            prop_assert_eq!(back.to_bytes(), bytes);
            prop_assert_eq!(back, set);
        }

        #[test]
        fn coarsening_composes(set in arb_set(), a in 0u32..=20, b in 0u32..=20) {
            let r = set.precision();
            let (hi, lo) = (a.max(b).min(r), a.min(b).min(r));
            prop_assert_eq!(set.coarsen(hi).unwrap().coarsen(lo).unwrap(), set.coarsen(lo).unwrap());
        }

        #[test]
        fn cantor_counting_law(k in 1u32..=8, m in 1u32..=3, mask in 1u32..255) {
            let base = 1u32 << m;
            let digits: Vec<u32> = (0..base).filter(|d| mask & (1 << d) != 0).collect();
            prop_assume!(!digits.is_empty());
            let levels = k.min(20 / m);
            prop_assume!((digits.len() as u64).pow(levels) <= 1 << 20);
            let spec = FractalSpec::cantor(m, &digits);
            let set = generate(&spec, levels * m).unwrap();
            prop_assert_eq!(set.len() as u64, (digits.len() as u64).pow(levels));
            let parent = generate(&spec, (levels - 1) * m).unwrap();
            prop_assert_eq!(set.coarsen((levels - 1) * m).unwrap(), parent);
        }
    }
}
