//! Dyadic rationals `m * 2^-r`, grid truncation and directions on the circle.
//!
//! All truncation is integer arithmetic on mantissas, so nested truncation
//! identities hold bit for bit. Floating point only enters when a real input
//! is first placed on a grid (`x * 2^r` is exact for `r <= 60`, the floor is
//! then taken on that exact product).

use std::f64::consts::TAU;
use std::fmt;

use crate::{Error, Result};

/// Largest supported precision. Keeps mantissas of coordinates in `[-4, 4]`
/// inside the signed 63-bit range.
pub const MAX_PRECISION: u32 = 60;

pub type Vec2 = [f64; 2];

#[inline]
pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: Vec2, b: Vec2) -> f64 {
    norm(sub(a, b))
}

/// `2^r` as an exact float.
#[inline]
pub fn pow2(r: u32) -> f64 {
    debug_assert!(r <= 1023);
    f64::from_bits(((1023 + r as u64) & 0x7ff) << 52)
}

/// `2^-r` as an exact float.
#[inline]
pub fn pow2_neg(r: u32) -> f64 {
    debug_assert!(r <= 1022);
    f64::from_bits(((1023 - r as u64) & 0x7ff) << 52)
}

pub(crate) fn check_precision(r: u32) -> Result<()> {
    if r > MAX_PRECISION {
        Err(Error::PrecisionTooLarge(r))
    } else {
        Ok(())
    }
}

/// `floor(x * 2^r)` as an integer mantissa.
pub fn floor_mantissa(x: f64, r: u32) -> Result<i64> {
    check_precision(r)?;
    let scaled = (x * pow2(r)).floor();
    // i64::MIN is exactly -2^63; anything at or beyond +2^63 overflows.
    const TWO_63: f64 = 9_223_372_036_854_775_808.0;
    if !scaled.is_finite() || !(-TWO_63..TWO_63).contains(&scaled) {
        return Err(Error::PrecisionOverflow { value: x, precision: r });
    }
    Ok(scaled as i64)
}

/// A dyadic rational `mantissa * 2^-precision`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DyadicScalar {
    mantissa: i64,
    precision: u32,
}

impl DyadicScalar {
    pub fn new(mantissa: i64, precision: u32) -> Result<Self> {
        check_precision(precision)?;
        Ok(Self { mantissa, precision })
    }

    /// `2^-r * floor(2^r * x)`.
    pub fn floor(x: f64, r: u32) -> Result<Self> {
        Ok(Self { mantissa: floor_mantissa(x, r)?, precision: r })
    }

    pub fn mantissa(&self) -> i64 {
        self.mantissa
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn value(&self) -> f64 {
        self.mantissa as f64 * pow2_neg(self.precision)
    }

    /// Same value expressed at a finer precision.
    pub fn at_precision(&self, r: u32) -> Result<Self> {
        check_precision(r)?;
        if r < self.precision {
            return Err(Error::Precondition(format!(
                "cannot re-express precision {} exactly at coarser precision {r}",
                self.precision
            )));
        }
        let mantissa = self
            .mantissa
            .checked_mul(1i64 << (r - self.precision))
            .ok_or(Error::PrecisionOverflow { value: self.value(), precision: r })?;
        Ok(Self { mantissa, precision: r })
    }

    /// Truncation to a coarser grid: `floor_s` of this value.
    pub fn refine_floor(&self, s: u32) -> Result<Self> {
        if s > self.precision {
            return Err(Error::Precondition(format!(
                "refine_floor needs s <= r, got s = {s}, r = {}",
                self.precision
            )));
        }
        Ok(Self { mantissa: self.mantissa >> (self.precision - s), precision: s })
    }

    /// Exact value comparison across precisions.
    pub fn same_value(&self, other: &Self) -> bool {
        let r = self.precision.max(other.precision);
        let lhs = (self.mantissa as i128) << (r - self.precision);
        let rhs = (other.mantissa as i128) << (r - other.precision);
        lhs == rhs
    }
}

impl fmt::Display for DyadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^-{}", self.mantissa, self.precision)
    }
}

/// A point of the planar grid `D_r^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DyadicPoint {
    mantissas: [i64; 2],
    precision: u32,
}

impl DyadicPoint {
    pub fn new(mx: i64, my: i64, precision: u32) -> Result<Self> {
        check_precision(precision)?;
        Ok(Self { mantissas: [mx, my], precision })
    }

    /// Coordinatewise `floor_r`.
    pub fn floor(p: Vec2, r: u32) -> Result<Self> {
        Ok(Self { mantissas: [floor_mantissa(p[0], r)?, floor_mantissa(p[1], r)?], precision: r })
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn mantissas(&self) -> [i64; 2] {
        self.mantissas
    }

    pub fn x(&self) -> DyadicScalar {
        DyadicScalar { mantissa: self.mantissas[0], precision: self.precision }
    }

    pub fn y(&self) -> DyadicScalar {
        DyadicScalar { mantissa: self.mantissas[1], precision: self.precision }
    }

    pub fn to_vec2(&self) -> Vec2 {
        let h = pow2_neg(self.precision);
        [self.mantissas[0] as f64 * h, self.mantissas[1] as f64 * h]
    }

    /// `floor_s` of this point for `s <= r`; `floor_s(floor_r(x)) == floor_s(x)`.
    pub fn refine_floor(&self, s: u32) -> Result<Self> {
        if s > self.precision {
            return Err(Error::Precondition(format!(
                "refine_floor needs s <= r, got s = {s}, r = {}",
                self.precision
            )));
        }
        let k = self.precision - s;
        Ok(Self { mantissas: [self.mantissas[0] >> k, self.mantissas[1] >> k], precision: s })
    }

    /// The `s`-dyadic cell containing this point, for any `s` (finer precisions
    /// just rescale the mantissas).
    pub fn cell_at(&self, s: u32) -> Result<[i64; 2]> {
        if s <= self.precision {
            Ok(self.refine_floor(s)?.mantissas)
        } else {
            check_precision(s)?;
            let k = s - self.precision;
            let scale = 1i64 << k;
            let mx = self.mantissas[0].checked_mul(scale);
            let my = self.mantissas[1].checked_mul(scale);
            match (mx, my) {
                (Some(mx), Some(my)) => Ok([mx, my]),
                _ => Err(Error::PrecisionOverflow { value: self.to_vec2()[0], precision: s }),
            }
        }
    }
}

/// `floor_r` applied to a real planar point.
pub fn floor_r(p: Vec2, r: u32) -> Result<DyadicPoint> {
    DyadicPoint::floor(p, r)
}

/// Nested truncation of an already truncated point.
pub fn refine_floor(p: &DyadicPoint, s: u32) -> Result<DyadicPoint> {
    p.refine_floor(s)
}

/// A unit direction, stored as its angle in turns, `a in [0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    turns: f64,
}

impl Direction {
    pub fn from_turns(turns: f64) -> Result<Self> {
        if !turns.is_finite() {
            return Err(Error::Parameter(format!("direction angle {turns} is not finite")));
        }
        let mut a = turns - turns.floor();
        if a >= 1.0 {
            a = 0.0;
        }
        Ok(Self { turns: a })
    }

    pub fn turns(&self) -> f64 {
        self.turns
    }

    pub fn unit(&self) -> Vec2 {
        let (s, c) = (TAU * self.turns).sin_cos();
        [c, s]
    }

    /// `e_{u,v} = (v - u) / |v - u|`.
    pub fn between(u: Vec2, v: Vec2) -> Result<Self> {
        let d = sub(v, u);
        if d[0] == 0.0 && d[1] == 0.0 {
            return Err(Error::DegenerateDirection);
        }
        if !(d[0].is_finite() && d[1].is_finite()) {
            return Err(Error::Parameter("non-finite point".into()));
        }
        Self::from_turns(d[1].atan2(d[0]) / TAU)
    }
}

pub fn direction_between(u: Vec2, v: Vec2) -> Result<Direction> {
    Direction::between(u, v)
}

/// Orthogonal projection `p_e x = x . e`.
pub fn project(x: Vec2, e: &Direction) -> f64 {
    dot(x, e.unit())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(p: &DyadicPoint) -> Vec2 {
        p.to_vec2()
    }

    #[test]
    fn floor_examples() {
        assert_eq!(pt(&floor_r([0.3, 0.0], 2).unwrap()), [0.25, 0.0]);
        for r in [0, 1, 17, 60] {
            assert_eq!(pt(&floor_r([0.0, 0.0], r).unwrap()), [0.0, 0.0]);
        }
        assert_eq!(pt(&floor_r([1.0, -0.3], 2).unwrap()), [1.0, -0.5]);
    }

    #[test]
    fn floor_overflow_is_reported() {
        assert!(matches!(floor_r([4.0, 0.0], 61), Err(Error::PrecisionTooLarge(61))));
        assert!(matches!(floor_r([16.0, 0.0], 60), Err(Error::PrecisionOverflow { .. })));
        assert!(matches!(floor_r([f64::NAN, 0.0], 3), Err(Error::PrecisionOverflow { .. })));
        assert!(floor_r([-4.0, 3.999], 60).is_ok());
    }

    #[test]
    fn refine_examples() {
        let p = floor_r([0.75, 0.25], 2).unwrap();
        assert_eq!(pt(&p.refine_floor(1).unwrap()), [0.5, 0.0]);
        let q = floor_r([0.25, 0.25], 2).unwrap();
        assert_eq!(q.refine_floor(2).unwrap(), q);
        let n = floor_r([-0.25, 0.0], 2).unwrap();
        assert_eq!(pt(&n.refine_floor(0).unwrap()), [-1.0, 0.0]);
        assert!(matches!(q.refine_floor(3), Err(Error::Precondition(_))));
    }

    #[test]
    fn direction_examples() {
        assert_eq!(direction_between([0.0, 0.0], [1.0, 0.0]).unwrap().turns(), 0.0);
        assert!((direction_between([0.0, 0.0], [0.0, 2.0]).unwrap().turns() - 0.25).abs() < 1e-15);
        assert!((direction_between([1.0, 1.0], [0.0, 0.0]).unwrap().turns() - 0.625).abs() < 1e-15);
        assert!(matches!(direction_between([1.0, 2.0], [1.0, 2.0]), Err(Error::DegenerateDirection)));
        assert_eq!(Direction::from_turns(-0.25).unwrap().turns(), 0.75);
        assert_eq!(Direction::from_turns(3.0).unwrap().turns(), 0.0);
    }

    #[test]
    fn projection_examples() {
        let e0 = Direction::from_turns(0.0).unwrap();
        assert_eq!(project([3.0, 4.0], &e0), 3.0);
        let e = Direction::from_turns(0.125).unwrap();
        assert!((project([3.0, 4.0], &e) - 7.0 / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(project([0.0, 0.0], &Direction::from_turns(0.3).unwrap()), 0.0);
    }

    #[test]
    fn scalar_rescaling() {
        let a = DyadicScalar::new(-3, 2).unwrap();
        let b = a.at_precision(7).unwrap();
        assert_eq!(b.mantissa(), -96);
        assert_eq!(a.value(), b.value());
        assert!(a.same_value(&b));
        assert_ne!(a, b);
        assert!(DyadicScalar::new(1 << 62, 0).unwrap().at_precision(2).is_err());
    }

    proptest! {
        #[test]
        fn nesting_is_exact(x in -4.0f64..4.0, y in -4.0f64..4.0, r in 0u32..=60, k in 0u32..=60) {
            let s = r.min(k);
            let fine = floor_r([x, y], r).unwrap();
            prop_assert_eq!(fine.refine_floor(s).unwrap(), floor_r([x, y], s).unwrap());
        }

        #[test]
        fn truncation_error_below_cell_diagonal(x in -4.0f64..4.0, y in -4.0f64..4.0, r in 0u32..=50) {
            let p = floor_r([x, y], r).unwrap().to_vec2();
            prop_assert!(p[0] <= x && p[1] <= y);
            prop_assert!(dist(p, [x, y]) < 2f64.powf(0.5 - r as f64));
        }

        #[test]
        fn projection_is_contraction(a in prop::array::uniform2(-10.0f64..10.0),
                                     b in prop::array::uniform2(-10.0f64..10.0),
                                     t in 0.0f64..1.0) {
            let e = Direction::from_turns(t).unwrap();
            let u = e.unit();
            prop_assert!((norm(u) - 1.0).abs() < 1e-12);
            prop_assert!((project(a, &e) - project(b, &e)).abs() <= dist(a, b) * (1.0 + 1e-12) + 1e-15);
        }

        // Round trip from the origin: `t * e` is an exact rescaling of `e`.
        #[test]
        fn direction_round_trip(t in 0.0f64..1.0, k in 0u32..=40) {
            let e = Direction::from_turns(t).unwrap();
            let step = pow2_neg(k);
            let u = e.unit();
            let back = direction_between([0.0, 0.0], [step * u[0], step * u[1]]).unwrap();
            let diff = (back.turns() - e.turns()).abs();
            prop_assert!(diff.min(1.0 - diff) < 1e-10);
        }
    }
}
