//! Interval algebra for scalar hypotheses.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::real::Real;

/// A real interval. Infinite endpoints are always stored open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, lo_closed: bool, hi: T, hi_closed: bool) -> Self {
        Self {
            lo,
            hi,
            lo_closed: lo_closed && lo.is_finite(),
            hi_closed: hi_closed && hi.is_finite(),
        }
    }

    pub fn closed(lo: T, hi: T) -> Self {
        Self::new(lo, true, hi, true)
    }

    pub fn open(lo: T, hi: T) -> Self {
        Self::new(lo, false, hi, false)
    }

    pub fn real_line() -> Self {
        Self::open(T::neg_infinity(), T::infinity())
    }

    /// `(-inf, x]`
    pub fn at_most(x: T) -> Self {
        Self::new(T::neg_infinity(), false, x, true)
    }

    /// `(x, inf)`
    pub fn greater_than(x: T) -> Self {
        Self::new(x, false, T::infinity(), false)
    }

    pub fn point(x: T) -> Self {
        Self::closed(x, x)
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_nan()
            || self.hi.is_nan()
            || self.lo > self.hi
            || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, x: T) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    /// Whether `x` lies in the closure of the interval.
    pub fn contains_closure(&self, x: T) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let (lo, lo_closed) = match self.lo.partial_cmp(&other.lo) {
            Some(Ordering::Greater) => (self.lo, self.lo_closed),
            Some(Ordering::Less) => (other.lo, other.lo_closed),
            _ => (self.lo, self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Less) => (self.hi, self.hi_closed),
            Some(Ordering::Greater) => (other.hi, other.hi_closed),
            _ => (self.hi, self.hi_closed && other.hi_closed),
        };
        Self::new(lo, lo_closed, hi, hi_closed)
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

impl<T: Real> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lb = if self.lo_closed { '[' } else { '(' };
        let rb = if self.hi_closed { ']' } else { ')' };
        write!(f, "{lb}{},{}{rb}", fmt_endpoint(self.lo), fmt_endpoint(self.hi))
    }
}

fn fmt_endpoint<T: Real>(x: T) -> String {
    if x == T::infinity() {
        "inf".into()
    } else if x == T::neg_infinity() {
        "-inf".into()
    } else {
        x.to_string()
    }
}

/// Finite union of disjoint, ordered, nonempty intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet<T> {
    parts: Vec<Interval<T>>,
}

impl<T: Real> Default for IntervalSet<T> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<T: Real> From<Interval<T>> for IntervalSet<T> {
    fn from(i: Interval<T>) -> Self {
        Self::from_intervals([i])
    }
}

impl<T: Real> IntervalSet<T> {
    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    /// Normalizes an arbitrary collection: drops empties, sorts, and merges
    /// overlapping or touching pieces.
    pub fn from_intervals<I: IntoIterator<Item = Interval<T>>>(items: I) -> Self {
        let mut v: Vec<Interval<T>> = items.into_iter().filter(|i| !i.is_empty()).collect();
        v.sort_by(|a, b| {
            a.lo.partial_cmp(&b.lo)
                .unwrap_or(Ordering::Equal)
                .then_with(|| b.lo_closed.cmp(&a.lo_closed))
        });
        let mut parts: Vec<Interval<T>> = Vec::with_capacity(v.len());
        for iv in v {
            if let Some(last) = parts.last_mut() {
                let touches = iv.lo < last.hi || (iv.lo == last.hi && (last.hi_closed || iv.lo_closed));
                if touches {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                        last.hi_closed = iv.hi_closed;
                    } else if iv.hi == last.hi {
                        last.hi_closed |= iv.hi_closed;
                    }
                    continue;
                }
            }
            parts.push(iv);
        }
        Self { parts }
    }

    pub fn parts(&self) -> &[Interval<T>] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, x: T) -> bool {
        self.parts.iter().any(|p| p.contains(x))
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_intervals(self.parts.iter().chain(other.parts.iter()).copied())
    }

    pub fn intersect_interval(&self, other: &Interval<T>) -> Self {
        Self::from_intervals(self.parts.iter().map(|p| p.intersect(other)))
    }

    pub fn intersect(&self, other: &Self) -> Self {
        Self::from_intervals(
            self.parts
                .iter()
                .flat_map(|a| other.parts.iter().map(move |b| a.intersect(b))),
        )
    }

    /// Complement relative to `space`.
    pub fn complement_within(&self, space: &Interval<T>) -> Self {
        let clipped = self.intersect_interval(space);
        let mut out = Vec::with_capacity(clipped.parts.len() + 1);
        let mut cursor = space.lo;
        let mut cursor_closed = space.lo_closed;
        for p in &clipped.parts {
            out.push(Interval::new(cursor, cursor_closed, p.lo, !p.lo_closed));
            cursor = p.hi;
            cursor_closed = !p.hi_closed;
        }
        out.push(Interval::new(cursor, cursor_closed, space.hi, space.hi_closed));
        Self::from_intervals(out)
    }

    /// `self ⊆ other`, compared piecewise.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.parts.iter().all(|a| {
            other.parts.iter().any(|b| {
                let lo_ok = b.lo < a.lo || (b.lo == a.lo && (b.lo_closed || !a.lo_closed));
                let hi_ok = b.hi > a.hi || (b.hi == a.hi && (b.hi_closed || !a.hi_closed));
                lo_ok && hi_ok
            })
        })
    }
}

impl<T: Real> fmt::Display for IntervalSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return f.write_str("{}");
        }
        for (k, p) in self.parts.iter().enumerate() {
            if k > 0 {
                f.write_str(" U ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

fn parse_endpoint<T: Real>(s: &str, input: &str) -> Result<T> {
    let s = s.trim();
    let lower = s.to_ascii_lowercase();
    match lower.as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => return Ok(T::infinity()),
        "-inf" | "-infinity" => return Ok(T::neg_infinity()),
        _ => {}
    }
    s.parse::<f64>().map(T::lit).map_err(|e| Error::Parse {
        input: input.to_string(),
        reason: format!("bad endpoint `{s}`: {e}"),
    })
}

fn parse_interval<T: Real>(s: &str, input: &str) -> Result<Interval<T>> {
    let s = s.trim();
    let err = |reason: &str| Error::Parse {
        input: input.to_string(),
        reason: reason.to_string(),
    };
    let mut chars = s.chars();
    let lo_closed = match chars.next() {
        Some('[') => true,
        Some('(') => false,
        _ => return Err(err("interval must start with `[` or `(`")),
    };
    let hi_closed = match s.chars().last() {
        Some(']') => true,
        Some(')') => false,
        _ => return Err(err("interval must end with `]` or `)`")),
    };
    let body = &s[1..s.len() - 1];
    let (a, b) = body
        .split_once(',')
        .ok_or_else(|| err("interval needs two comma-separated endpoints"))?;
    let lo: T = parse_endpoint(a, input)?;
    let hi: T = parse_endpoint(b, input)?;
    if lo > hi {
        return Err(err("lower endpoint exceeds upper endpoint"));
    }
    Ok(Interval::new(lo, lo_closed, hi, hi_closed))
}

impl<T: Real> FromStr for IntervalSet<T> {
    type Err = Error;

    /// Accepts `(-inf,150]`, `[0,0.2]`, `(0.2,1] U [0.9,1]`, and `{}` for the
    /// empty set. `∪` is accepted as a union separator too.
    fn from_str(input: &str) -> Result<Self> {
        let trimmed = input.trim();
        if trimmed == "{}" || trimmed.eq_ignore_ascii_case("empty") {
            return Ok(Self::empty());
        }
        let normalized = trimmed.replace('∪', " U ");
        let pieces = normalized
            .split(" U ")
            .flat_map(|p| p.split(" u "))
            .map(|p| parse_interval(p, input))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_intervals(pieces))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(s: &str) -> IntervalSet<f64> {
        s.parse().unwrap()
    }

    #[test]
    fn complement_examples() {
        let line = Interval::<f64>::real_line();
        let unit = Interval::closed(0.0, 1.0);
        assert_eq!(set("(-inf,150]").complement_within(&line), set("(150,inf)"));
        assert_eq!(set("[0,0.2]").complement_within(&unit), set("(0.2,1]"));
        assert_eq!(set("[0,0.1] U [0.9,1]").complement_within(&unit), set("(0.1,0.9)"));
        assert_eq!(IntervalSet::from(unit).complement_within(&unit), IntervalSet::empty());
        assert_eq!(IntervalSet::empty().complement_within(&unit), IntervalSet::from(unit));
    }

    #[test]
    fn parse_and_display() {
        let s = set("(0.2,1] U [0.9,1]");
        assert_eq!(s.parts().len(), 1);
        assert_eq!(s.to_string(), "(0.2,1]");
        assert_eq!(set("(-inf,150]").to_string(), "(-inf,150]");
        assert_eq!(set("[0,0.1] ∪ [0.5,0.6)").to_string(), "[0,0.1] U [0.5,0.6)");
        assert!(set("{}").is_empty());
        assert!("[1,0]".parse::<IntervalSet<f64>>().is_err());
        assert!("0,1".parse::<IntervalSet<f64>>().is_err());
        assert!("[a,1]".parse::<IntervalSet<f64>>().is_err());
    }

    #[test]
    fn infinite_endpoints_are_open() {
        let i = Interval::new(f64::NEG_INFINITY, true, 3.0, true);
        assert!(!i.lo_closed);
    }

    #[test]
    fn merging_touching_pieces() {
        let s = set("[0,0.1] U (0.1,0.2]");
        assert_eq!(s, set("[0,0.2]"));
        let t = set("[0,0.1) U (0.1,0.2]");
        assert_eq!(t.parts().len(), 2);
        assert!(!t.contains(0.1));
    }

    fn arb_set() -> impl Strategy<Value = IntervalSet<f64>> {
        prop::collection::vec((0.0..1.0f64, 0.0..0.3f64, any::<bool>(), any::<bool>()), 0..5).prop_map(|v| {
            IntervalSet::from_intervals(v.into_iter().map(|(a, w, lc, hc)| Interval::new(a, lc, (a + w).min(1.0), hc)))
        })
    }

    proptest! {
        #[test]
        fn complement_is_an_involution(s in arb_set()) {
            let unit = Interval::closed(0.0, 1.0);
            let back = s.complement_within(&unit).complement_within(&unit);
            prop_assert_eq!(back, s.intersect_interval(&unit));
        }

        #[test]
        fn complement_partitions_the_space(s in arb_set(), x in 0.0..=1.0f64) {
            let unit = Interval::closed(0.0, 1.0);
            let c = s.complement_within(&unit);
            prop_assert!(s.contains(x) != c.contains(x));
        }
    }
}
