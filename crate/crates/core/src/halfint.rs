//! Exact half-integer labels for angular momenta and their projections.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use crate::error::Error;

/// A half-integer stored as twice its value, so `1/2` is `HalfInt(1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);
    pub const ONE: HalfInt = HalfInt(2);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn integer(n: i32) -> Self {
        HalfInt(2 * n)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub const fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }

    /// True when `self` and `other` differ by an integer.
    pub const fn same_parity(self, other: HalfInt) -> bool {
        (self.0 - other.0) % 2 == 0
    }

    /// The integer value, if `self` is one.
    pub fn as_integer(self) -> Option<i32> {
        self.is_integer().then_some(self.0 / 2)
    }

    /// `self + other` as an integer; panics if the sum is half-odd.
    pub(crate) fn int_sum(self, other: HalfInt) -> i64 {
        let t = self.0 + other.0;
        debug_assert!(t % 2 == 0, "non-integer combination {self} + {other}");
        i64::from(t / 2)
    }

    /// `self - other` as an integer; panics if the difference is half-odd.
    pub(crate) fn int_diff(self, other: HalfInt) -> i64 {
        let t = self.0 - other.0;
        debug_assert!(t % 2 == 0, "non-integer combination {self} - {other}");
        i64::from(t / 2)
    }

    /// Projections `-j, -j+1, ..., j` of this angular momentum.
    pub fn projections(self) -> impl DoubleEndedIterator<Item = HalfInt> + Clone {
        let j = self.0;
        (0..j + 1).map(move |k| HalfInt(2 * k - j))
    }

    /// Number of projections, `2j + 1`.
    pub fn multiplicity(self) -> usize {
        debug_assert!(self.0 >= 0);
        (self.0 + 1) as usize
    }

    /// Whether `(self, m)` is a valid angular momentum / projection pair.
    pub fn admits(self, m: HalfInt) -> bool {
        self.0 >= 0 && m.0.abs() <= self.0 && self.same_parity(m)
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts integers (`1`, `-2`) and odd numerators over two (`1/2`, `-3/2`).
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = || Error::Parse(format!("'{s}' is not an integer or p/2 half-integer"));
        match s.split_once('/') {
            None => {
                let n: i32 = s.parse().map_err(|_| bad())?;
                n.checked_mul(2).map(HalfInt).ok_or_else(bad)
            }
            Some((num, den)) => {
                if den.trim() != "2" {
                    return Err(bad());
                }
                let p: i32 = num.trim().parse().map_err(|_| bad())?;
                if p % 2 == 0 {
                    return Err(Error::Parse(format!(
                        "'{s}' is not reduced; write it as {}",
                        p / 2
                    )));
                }
                Ok(HalfInt(p))
            }
        }
    }
}

/// `|j1 - j2|, |j1 - j2| + 1, ..., j1 + j2`.
pub fn couple_range(j1: HalfInt, j2: HalfInt) -> Vec<HalfInt> {
    debug_assert!(j1.twice() >= 0 && j2.twice() >= 0);
    let lo = (j1 - j2).abs().twice();
    let hi = (j1 + j2).twice();
    (lo..=hi).step_by(2).map(HalfInt).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h(s: &str) -> HalfInt {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(h("1/2"), HalfInt::HALF);
        assert_eq!(h("3/2").twice(), 3);
        assert_eq!(h("-1/2").twice(), -1);
        assert_eq!(h("2").twice(), 4);
        assert_eq!(h("3/2").to_string(), "3/2");
        assert_eq!(HalfInt::integer(-3).to_string(), "-3");
        assert!("2/2".parse::<HalfInt>().is_err());
        assert!("1/3".parse::<HalfInt>().is_err());
        assert!("0.5".parse::<HalfInt>().is_err());
    }

    #[test]
    fn couple_range_examples() {
        assert_eq!(
            couple_range(HalfInt::ONE, HalfInt::HALF),
            vec![h("1/2"), h("3/2")]
        );
        assert_eq!(couple_range(HalfInt::ZERO, h("7/2")), vec![h("7/2")]);
        assert_eq!(
            couple_range(HalfInt::ONE, h("5/2")),
            vec![h("3/2"), h("5/2"), h("7/2")]
        );
    }

    /// Total-J content of `j1 ⊗ j2` recovered by peeling off highest weights
    /// from the M-degeneracy table of the product space.
    fn couple_range_by_degeneracy(j1: HalfInt, j2: HalfInt) -> Vec<HalfInt> {
        use std::collections::BTreeMap;
        let mut deg: BTreeMap<i32, i64> = BTreeMap::new();
        for m1 in j1.projections() {
            for m2 in j2.projections() {
                *deg.entry((m1 + m2).twice()).or_default() += 1;
            }
        }
        let mut out = Vec::new();
        let top = (j1 + j2).twice();
        let mut prev = 0;
        for tm in (0..=top).rev().filter(|t| (t - top) % 2 == 0) {
            let d = deg.get(&tm).copied().unwrap_or(0);
            for _ in prev..d {
                out.push(HalfInt(tm));
            }
            prev = d;
        }
        out.sort();
        out
    }

    proptest! {
        #[test]
        fn couple_range_matches_degeneracy(a in 0i32..12, b in 0i32..12) {
            let (j1, j2) = (HalfInt(a), HalfInt(b));
            let r = couple_range(j1, j2);
            prop_assert_eq!(&r, &couple_range_by_degeneracy(j1, j2));
            let dim: usize = r.iter().map(|j| j.multiplicity()).sum();
            prop_assert_eq!(dim, j1.multiplicity() * j2.multiplicity());
        }

        #[test]
        fn display_round_trip(t in -400i32..400) {
            let x = HalfInt(t);
            prop_assert_eq!(x.to_string().parse::<HalfInt>().unwrap(), x);
        }
    }
}
