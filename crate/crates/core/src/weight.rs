//! Numeric modes for edge weights.
//!
//! Integer costs are solved exactly (tolerance zero). Floating costs use a
//! tightness tolerance scaled by the largest weight magnitude.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

pub trait Weight:
    Copy
    + PartialOrd
    + Debug
    + Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + Sum
    + Send
    + Sync
    + 'static
{
    const ZERO: Self;
    const ONE: Self;
    /// True when arithmetic in this type is exact.
    const EXACT: bool;

    fn is_finite(self) -> bool;

    fn abs(self) -> Self;

    /// `self * k`, or `None` on overflow / non-finite result.
    fn checked_scale(self, k: usize) -> Option<Self>;

    fn checked_add(self, other: Self) -> Option<Self>;

    /// Tightness tolerance for a matrix whose largest magnitude is `max_abs`.
    /// `override_eps` replaces the default relative factor in float mode.
    fn tolerance(max_abs: Self, override_eps: Option<f64>) -> Self;

    fn to_f64(self) -> f64;

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Weight for i64 {
    const ZERO: Self = 0;
    const ONE: Self = 1;
    const EXACT: bool = true;

    fn is_finite(self) -> bool {
        true
    }

    fn abs(self) -> Self {
        i64::abs(self)
    }

    fn checked_scale(self, k: usize) -> Option<Self> {
        i64::try_from(k).ok().and_then(|k| self.checked_mul(k))
    }

    fn checked_add(self, other: Self) -> Option<Self> {
        i64::checked_add(self, other)
    }

    fn tolerance(_max_abs: Self, _override_eps: Option<f64>) -> Self {
        0
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

/// Default relative tolerance factor for float mode.
pub const DEFAULT_FLOAT_EPS: f64 = 1e-9;

impl Weight for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    const EXACT: bool = false;

    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }

    fn abs(self) -> Self {
        f64::abs(self)
    }

    fn checked_scale(self, k: usize) -> Option<Self> {
        let r = self * k as f64;
        r.is_finite().then_some(r)
    }

    fn checked_add(self, other: Self) -> Option<Self> {
        let r = self + other;
        r.is_finite().then_some(r)
    }

    fn tolerance(max_abs: Self, override_eps: Option<f64>) -> Self {
        override_eps.unwrap_or(DEFAULT_FLOAT_EPS) * (1.0 + max_abs)
    }

    fn to_f64(self) -> f64 {
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_mode_has_zero_tolerance() {
        assert_eq!(i64::tolerance(1_000_000, Some(0.5)), 0);
    }

    #[test]
    fn float_tolerance_scales_with_magnitude() {
        assert_eq!(f64::tolerance(0.0, None), 1e-9);
        assert!((f64::tolerance(999.0, None) - 1e-6).abs() < 1e-18);
        assert_eq!(f64::tolerance(1.0, Some(0.25)), 0.5);
    }

    #[test]
    fn checked_scale_detects_overflow() {
        assert_eq!(3i64.checked_scale(4), Some(12));
        assert_eq!(i64::MAX.checked_scale(2), None);
        assert_eq!(f64::MAX.checked_scale(2), None);
    }
}
