use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A time `kβ + s` stored as the exact pair `(k, s)` with `s ∈ [0, β)`.
///
/// The total `kβ + s` is only ever formed for reporting; comparisons and
/// period shifts are exact.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct CyclicTime {
    pub period: u64,
    pub offset: f64,
}

impl CyclicTime {
    pub const ZERO: CyclicTime = CyclicTime { period: 0, offset: 0.0 };

    pub const fn new(period: u64, offset: f64) -> Self {
        CyclicTime { period, offset }
    }

    /// The start of period `k`, i.e. the time `kβ`.
    pub const fn periods(k: u64) -> Self {
        CyclicTime { period: k, offset: 0.0 }
    }

    /// Converts a real time `t ≥ 0` (only for user-facing inputs).
    pub fn from_real(t: f64, beta: f64) -> Self {
        let k = (t / beta).floor().max(0.0);
        let s = (t - k * beta).clamp(0.0, beta);
        if s >= beta {
            CyclicTime::new(k as u64 + 1, 0.0)
        } else {
            CyclicTime::new(k as u64, s)
        }
    }

    pub fn total(self, beta: f64) -> f64 {
        self.period as f64 * beta + self.offset
    }

    /// Exact shift by a whole number of periods.
    pub fn plus_periods(self, k: u64) -> Self {
        CyclicTime::new(self.period + k, self.offset)
    }

    /// `self - k` periods, if non-negative.
    pub fn minus_periods(self, k: u64) -> Option<Self> {
        self.period.checked_sub(k).map(|p| CyclicTime::new(p, self.offset))
    }

    /// Adds a non-negative real duration.
    pub fn add_real(self, x: f64, beta: f64) -> Self {
        debug_assert!(x >= 0.0);
        let s = self.offset + x;
        let k = (s / beta).floor();
        let mut rest = s - k * beta;
        let mut period = self.period + k as u64;
        if rest >= beta {
            rest -= beta;
            period += 1;
        }
        CyclicTime::new(period, rest.max(0.0))
    }

    /// Subtracts a non-negative real duration; `None` if the result would be negative.
    pub fn sub_real(self, x: f64, beta: f64) -> Option<Self> {
        debug_assert!(x >= 0.0);
        let s = self.offset - x;
        if s >= 0.0 {
            return Some(CyclicTime::new(self.period, s));
        }
        let back = (-s / beta).ceil();
        let mut rest = s + back * beta;
        let mut back = back as u64;
        if rest >= beta {
            rest -= beta;
            back -= 1;
        }
        self.period.checked_sub(back).map(|p| CyclicTime::new(p, rest.max(0.0)))
    }

    /// Adds another cyclic duration.
    pub fn add(self, other: CyclicTime, beta: f64) -> Self {
        let mut period = self.period + other.period;
        let mut s = self.offset + other.offset;
        if s >= beta {
            s -= beta;
            period += 1;
        }
        CyclicTime::new(period, s)
    }

    /// `self - other` as a cyclic duration; `None` if `other > self`.
    pub fn sub(self, other: CyclicTime, beta: f64) -> Option<Self> {
        if other > self {
            return None;
        }
        let mut period = self.period - other.period;
        let mut s = self.offset - other.offset;
        if s < 0.0 {
            s += beta;
            period -= 1;
            if s >= beta {
                s = 0.0;
                period += 1;
            }
        }
        Some(CyclicTime::new(period, s))
    }

    /// Real length of `[earlier, self]`; negative if `earlier > self`.
    pub fn since(self, earlier: CyclicTime, beta: f64) -> f64 {
        (self.period as f64 - earlier.period as f64) * beta + (self.offset - earlier.offset)
    }
}

impl PartialEq for CyclicTime {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for CyclicTime {}

impl PartialOrd for CyclicTime {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CyclicTime {
    fn cmp(&self, other: &Self) -> Ordering {
        self.period
            .cmp(&other.period)
            .then_with(|| self.offset.total_cmp(&other.offset))
    }
}

impl fmt::Display for CyclicTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}β+{}", self.period, self.offset)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_lexicographic() {
        assert!(CyclicTime::new(1, 0.1) > CyclicTime::new(0, 0.9));
        assert!(CyclicTime::new(2, 0.1) < CyclicTime::new(2, 0.2));
        assert_eq!(CyclicTime::new(3, 0.5), CyclicTime::new(3, 0.5));
    }

    #[test]
    fn arithmetic_normalizes() {
        let beta = 2.0;
        assert_eq!(
            CyclicTime::new(1, 1.5).add(CyclicTime::new(0, 1.0), beta),
            CyclicTime::new(2, 0.5)
        );
        assert_eq!(
            CyclicTime::new(2, 0.5).sub(CyclicTime::new(0, 1.0), beta),
            Some(CyclicTime::new(1, 1.5))
        );
        assert_eq!(CyclicTime::new(0, 1.0).sub(CyclicTime::new(0, 1.5), beta), None);
        assert_eq!(CyclicTime::new(0, 1.5).add_real(3.0, beta), CyclicTime::new(2, 0.5));
        assert_eq!(CyclicTime::from_real(5.0, beta), CyclicTime::new(2, 1.0));
        assert_eq!(CyclicTime::new(3, 0.25).since(CyclicTime::new(1, 1.0), beta), 3.25);
        assert_eq!(
            CyclicTime::new(2, 0.5).sub_real(1.0, beta),
            Some(CyclicTime::new(1, 1.5))
        );
        assert_eq!(CyclicTime::new(2, 0.5).sub_real(4.5, beta), Some(CyclicTime::ZERO));
        assert_eq!(
            CyclicTime::new(2, 0.5).sub_real(0.5, beta),
            Some(CyclicTime::periods(2))
        );
        assert_eq!(CyclicTime::new(0, 0.5).sub_real(1.0, beta), None);
        assert_eq!(
            CyclicTime::new(5, 0.0).sub_real(2.0, 0.5),
            Some(CyclicTime::new(1, 0.0))
        );
    }
}
