//! Cover-based information surrogates.
//!
//! The surrogate for the information in an `r`-bit approximation of a typical
//! point of `E` is the uniform code length over the occupied `r`-cells,
//! `log2 N_r(E)`. Conditioning on an `s`-bit approximation counts the `r`-cells
//! inside the containing `s`-cell. With these definitions the additivity and
//! precision-sensitivity laws become exact integer statements about cell counts.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::dyadic::DyadicPoint;
use crate::fractal::{Ambient, CellSet};
use crate::{Error, Result};

/// `N_r(E)` at the set's own precision.
pub fn cell_count(set: &CellSet) -> u64 {
    set.len() as u64
}

fn precision_error(requested: u32, native: u32) -> Error {
    Error::Precondition(format!("precision {requested} exceeds the set's native precision {native}"))
}

/// `log2 N_r(E)`, coarsening from the native precision when `r` is smaller.
pub fn surrogate_k(set: &CellSet, r: u32) -> Result<f64> {
    if r > set.precision() {
        return Err(precision_error(r, set.precision()));
    }
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok((set.count_at(r)? as f64).log2())
}

/// Number of occupied `r`-cells inside the `s`-cell containing `x`.
pub fn conditional_count(set: &CellSet, x: &DyadicPoint, r: u32, s: u32) -> Result<u64> {
    if s > r {
        return Err(Error::Precondition(format!("conditioning precision {s} above target precision {r}")));
    }
    if r > set.precision() {
        return Err(precision_error(r, set.precision()));
    }
    let mut anchor = x.cell_at(s)?;
    if set.ambient() == Ambient::Line {
        anchor[1] = 0;
    }
    let shift = set.precision() - s;
    let k = set.precision() - r;
    // Cells are sorted, so the descendants of one s-cell form runs; collecting
    // their r-ancestors and deduplicating gives the count.
    let mut inside: Vec<[i64; 2]> = set
        .cells()
        .iter()
        .filter(|c| [c[0] >> shift, c[1] >> shift] == anchor)
        .map(|c| [c[0] >> k, c[1] >> k])
        .collect();
    inside.sort_unstable();
    inside.dedup();
    if inside.is_empty() {
        return Err(Error::Membership(s));
    }
    Ok(inside.len() as u64)
}

/// `log2` of [`conditional_count`]: the information needed to go from the
/// `s`-cell of `x` to its `r`-cell.
pub fn surrogate_k_cond(set: &CellSet, x: &DyadicPoint, r: u32, s: u32) -> Result<f64> {
    Ok((conditional_count(set, x, r, s)? as f64).log2())
}

/// Extension point for per-point complexity estimators.
pub trait PointComplexity {
    /// Estimated bits to describe the `r`-cell of `x` given its `s`-cell.
    fn conditional_bits(&self, set: &CellSet, x: &DyadicPoint, r: u32, s: u32) -> Result<f64>;
}

/// The default estimator: log-cardinality of the cover.
#[derive(Clone, Copy, Debug, Default)]
pub struct CoverComplexity;

impl PointComplexity for CoverComplexity {
    fn conditional_bits(&self, set: &CellSet, x: &DyadicPoint, r: u32, s: u32) -> Result<f64> {
        surrogate_k_cond(set, x, r, s)
    }
}

/// Surrogate bits per precision for one set.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexityProfile {
    ambient_dim: u32,
    precisions: Vec<u32>,
    counts: Vec<u64>,
}

impl ComplexityProfile {
    /// Counts for every precision in `precisions` (ascending), computed in parallel.
    pub fn of_set(set: &CellSet, precisions: &[u32]) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        if let Some(&r) = precisions.iter().find(|&&r| r > set.precision()) {
            return Err(precision_error(r, set.precision()));
        }
        let counts = precisions.par_iter().map(|&r| set.count_at(r)).collect::<Result<Vec<_>>>()?;
        Self::from_counts(set.ambient().dim(), precisions.to_vec(), counts)
    }

    /// Profile of `set` at every precision `0..=precision`.
    pub fn full(set: &CellSet) -> Result<Self> {
        let rs: Vec<u32> = (0..=set.precision()).collect();
        Self::of_set(set, &rs)
    }

    pub fn from_counts(ambient_dim: u32, precisions: Vec<u32>, counts: Vec<u64>) -> Result<Self> {
        if precisions.len() != counts.len() {
            return Err(Error::Parameter("precisions and counts differ in length".into()));
        }
        if !precisions.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Parameter("precisions must be strictly ascending".into()));
        }
        if counts.contains(&0) {
            return Err(Error::EmptySet);
        }
        Ok(Self { ambient_dim, precisions, counts })
    }

    pub fn ambient_dim(&self) -> u32 {
        self.ambient_dim
    }

    pub fn precisions(&self) -> &[u32] {
        &self.precisions
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn bits(&self) -> Vec<f64> {
        self.counts.iter().map(|&n| (n as f64).log2()).collect()
    }

    pub fn bits_at(&self, r: u32) -> Option<f64> {
        let i = self.precisions.binary_search(&r).ok()?;
        Some((self.counts[i] as f64).log2())
    }

    /// Set-level conditional surrogate `log2(N_r / N_s)`: the log of the mean
    /// number of `r`-cells per occupied `s`-cell.
    pub fn conditional_bits(&self, r: u32, s: u32) -> Option<f64> {
        Some(self.bits_at(r)? - self.bits_at(s)?)
    }

    /// CSV with columns `r,n_cells,bits,cond_bits_vs_s0`. Rows with `r < s0`
    /// leave the last column empty.
    pub fn to_csv(&self, s0: u32, meta: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "# s0={s0}");
        out.push_str("r,n_cells,bits,cond_bits_vs_s0\n");
        let base = self.bits_at(s0);
        for (&r, &n) in self.precisions.iter().zip(&self.counts) {
            let bits = (n as f64).log2();
            let cond = match base {
                Some(b) if r >= s0 => format!("{:.9}", bits - b),
                _ => String::new(),
            };
            let _ = writeln!(out, "{r},{n},{bits:.9},{cond}");
        }
        out
    }
}

/// Least-squares slope of bits against precision.
#[derive(Clone, Debug, PartialEq)]
pub struct DimensionEstimate {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    /// Smallest per-step slope `(bits_{i+1} - bits_i) / (r_{i+1} - r_i)` in
    /// the window; a finite-scale stand-in for a liminf.
    pub min_step_slope: f64,
    pub window: (u32, u32),
    pub points: usize,
}

/// Ordinary least squares over the precisions of `profile` inside `[lo, hi]`.
/// The slope is clamped to `[0, d]`.
pub fn dimension_estimate(profile: &ComplexityProfile, lo: u32, hi: u32) -> Result<DimensionEstimate> {
    let bits = profile.bits();
    let pts: Vec<(f64, f64)> = profile
        .precisions
        .iter()
        .zip(bits)
        .filter(|(&r, _)| r >= lo && r <= hi)
        .map(|(&r, b)| (r as f64, b))
        .collect();
    if pts.len() < 4 {
        return Err(Error::Regression(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let raw = sxy / sxx;
    let intercept = my - raw * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - raw * p.0).powi(2)).sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    let min_step_slope = pts
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .fold(f64::INFINITY, f64::min);
    Ok(DimensionEstimate {
        slope: raw.clamp(0.0, profile.ambient_dim as f64),
        stderr,
        intercept,
        min_step_slope,
        window: (lo, hi),
        points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::{generate, FractalSpec};

    #[test]
    fn counts_and_bits() {
        let sq = generate(&FractalSpec::FullSquare, 5).unwrap();
        assert_eq!(cell_count(&sq), 1024);
        assert_eq!(surrogate_k(&sq, 5).unwrap(), 10.0);
        let one = CellSet::from_cells(Ambient::Plane, 7, vec![[3, 3]]).unwrap();
        assert_eq!(cell_count(&one), 1);
        assert_eq!(surrogate_k(&one, 7).unwrap(), 0.0);
        let c = generate(&FractalSpec::mid_four_cantor(), 8).unwrap();
        assert_eq!(surrogate_k(&c, 8).unwrap(), 4.0);
        let p = generate(&FractalSpec::mid_four_product(), 8).unwrap();
        assert_eq!(cell_count(&p), 256);
        assert!(surrogate_k(&p, 9).is_err());
    }

    #[test]
    fn conditional_examples() {
        let sq = generate(&FractalSpec::FullSquare, 6).unwrap();
        let x = DyadicPoint::floor([0.3, 0.7], 6).unwrap();
        for s in 0..=6 {
            assert_eq!(surrogate_k_cond(&sq, &x, 6, s).unwrap(), 2.0 * (6 - s) as f64);
        }
        let p = generate(&FractalSpec::mid_four_product(), 8).unwrap();
        let y = p.cell_center(17).unwrap();
        assert_eq!(surrogate_k_cond(&p, &y, 8, 6).unwrap(), 2.0);
        assert_eq!(surrogate_k_cond(&p, &y, 6, 6).unwrap(), 0.0);
        let outside = DyadicPoint::floor([0.3, 0.3], 8).unwrap();
        assert!(matches!(surrogate_k_cond(&p, &outside, 8, 4), Err(Error::Membership(4))));
        assert!(surrogate_k_cond(&p, &y, 6, 7).is_err());
    }

    #[test]
    fn regression_examples() {
        let sq = generate(&FractalSpec::FullSquare, 8).unwrap();
        let est = dimension_estimate(&ComplexityProfile::full(&sq).unwrap(), 0, 8).unwrap();
        assert!((est.slope - 2.0).abs() < 1e-9);
        assert!(est.stderr < 1e-9);
        let pt = CellSet::from_cells(Ambient::Plane, 10, vec![[1, 1]]).unwrap();
        let est = dimension_estimate(&ComplexityProfile::full(&pt).unwrap(), 2, 10).unwrap();
        assert_eq!(est.slope, 0.0);
        let prof = ComplexityProfile::full(&sq).unwrap();
        assert!(matches!(dimension_estimate(&prof, 2, 4), Err(Error::Regression(3))));
    }

    #[test]
    fn csv_layout() {
        let c = generate(&FractalSpec::mid_four_cantor(), 4).unwrap();
        let prof = ComplexityProfile::full(&c).unwrap();
        let csv = prof.to_csv(2, &[("seed".into(), "0".into())]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# seed=0");
        assert_eq!(lines[1], "# s0=2");
        assert_eq!(lines[2], "r,n_cells,bits,cond_bits_vs_s0");
        assert_eq!(lines[3], "0,1,0.000000000,");
        assert_eq!(lines[7], "4,4,2.000000000,1.000000000");
    }
}
