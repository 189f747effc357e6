//! Integer and set domains.
//!
//! Integer domains are ordered lists of disjoint, non-adjacent closed
//! intervals. Set domains are a pair of bounds `glb ⊆ lub` plus cardinality
//! limits.

use std::collections::BTreeSet;
use std::fmt;

/// Smallest representable integer value.
pub const INT_MIN: i32 = -2_147_483_645;
/// Largest representable integer value.
pub const INT_MAX: i32 = 2_147_483_645;

/// Raised when a narrowing operation leaves a domain empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Wipeout;

pub type Narrowed = Result<bool, Wipeout>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntDomain {
    ranges: Vec<(i32, i32)>,
}

impl IntDomain {
    /// `lo..=hi`. The caller guarantees `lo <= hi`.
    pub fn interval(lo: i32, hi: i32) -> Self {
        debug_assert!(lo <= hi);
        IntDomain {
            ranges: vec![(lo, hi)],
        }
    }

    pub fn singleton(v: i32) -> Self {
        Self::interval(v, v)
    }

    pub fn from_values<I: IntoIterator<Item = i32>>(values: I) -> Option<Self> {
        let mut vals: Vec<i32> = values.into_iter().collect();
        if vals.is_empty() {
            return None;
        }
        vals.sort_unstable();
        vals.dedup();
        let mut ranges: Vec<(i32, i32)> = Vec::new();
        for v in vals {
            match ranges.last_mut() {
                Some(last) if last.1 as i64 + 1 == v as i64 => last.1 = v,
                _ => ranges.push((v, v)),
            }
        }
        Some(IntDomain { ranges })
    }

    pub fn min(&self) -> i32 {
        self.ranges[0].0
    }

    pub fn max(&self) -> i32 {
        self.ranges[self.ranges.len() - 1].1
    }

    pub fn size(&self) -> u64 {
        self.ranges
            .iter()
            .map(|&(lo, hi)| (hi as i64 - lo as i64 + 1) as u64)
            .sum()
    }

    pub fn is_assigned(&self) -> bool {
        self.ranges.len() == 1 && self.ranges[0].0 == self.ranges[0].1
    }

    pub fn value(&self) -> Option<i32> {
        self.is_assigned().then(|| self.ranges[0].0)
    }

    pub fn ranges(&self) -> &[(i32, i32)] {
        &self.ranges
    }

    pub fn contains(&self, v: i32) -> bool {
        self.ranges
            .binary_search_by(|&(lo, hi)| {
                if hi < v {
                    std::cmp::Ordering::Less
                } else if lo > v {
                    std::cmp::Ordering::Greater
                } else {
                    std::cmp::Ordering::Equal
                }
            })
            .is_ok()
    }

    pub fn values(&self) -> impl Iterator<Item = i32> + '_ {
        self.ranges.iter().flat_map(|&(lo, hi)| lo..=hi)
    }

    /// True when no value is shared with `other`.
    pub fn disjoint(&self, other: &IntDomain) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.ranges.len() && j < other.ranges.len() {
            let (a, b) = (self.ranges[i], other.ranges[j]);
            if a.1 < b.0 {
                i += 1;
            } else if b.1 < a.0 {
                j += 1;
            } else {
                return false;
            }
        }
        true
    }

    /// Removes every value below `lo`.
    pub fn restrict_min(&mut self, lo: i64) -> Narrowed {
        if lo <= self.min() as i64 {
            return Ok(false);
        }
        if lo > self.max() as i64 {
            return Err(Wipeout);
        }
        let lo = lo as i32;
        let first = self.ranges.iter().position(|&(_, hi)| hi >= lo).unwrap();
        self.ranges.drain(..first);
        if self.ranges[0].0 < lo {
            self.ranges[0].0 = lo;
        }
        Ok(true)
    }

    /// Removes every value above `hi`.
    pub fn restrict_max(&mut self, hi: i64) -> Narrowed {
        if hi >= self.max() as i64 {
            return Ok(false);
        }
        if hi < self.min() as i64 {
            return Err(Wipeout);
        }
        let hi = hi as i32;
        let last = self.ranges.iter().rposition(|&(lo, _)| lo <= hi).unwrap();
        self.ranges.truncate(last + 1);
        let n = self.ranges.len();
        if self.ranges[n - 1].1 > hi {
            self.ranges[n - 1].1 = hi;
        }
        Ok(true)
    }

    pub fn assign(&mut self, v: i64) -> Narrowed {
        if v < INT_MIN as i64 || v > INT_MAX as i64 || !self.contains(v as i32) {
            return Err(Wipeout);
        }
        if self.is_assigned() {
            return Ok(false);
        }
        self.ranges = vec![(v as i32, v as i32)];
        Ok(true)
    }

    pub fn remove(&mut self, v: i64) -> Narrowed {
        if v < INT_MIN as i64 || v > INT_MAX as i64 {
            return Ok(false);
        }
        let v = v as i32;
        let Some(idx) = self.ranges.iter().position(|&(lo, hi)| lo <= v && v <= hi) else {
            return Ok(false);
        };
        let (lo, hi) = self.ranges[idx];
        if lo == hi {
            if self.ranges.len() == 1 {
                return Err(Wipeout);
            }
            self.ranges.remove(idx);
        } else if v == lo {
            self.ranges[idx].0 = lo + 1;
        } else if v == hi {
            self.ranges[idx].1 = hi - 1;
        } else {
            self.ranges[idx] = (lo, v - 1);
            self.ranges.insert(idx + 1, (v + 1, hi));
        }
        Ok(true)
    }

    /// Intersects with `other`.
    pub fn intersect(&mut self, other: &IntDomain) -> Narrowed {
        let mut out = Vec::with_capacity(self.ranges.len());
        let (mut i, mut j) = (0, 0);
        while i < self.ranges.len() && j < other.ranges.len() {
            let (a, b) = (self.ranges[i], other.ranges[j]);
            let lo = a.0.max(b.0);
            let hi = a.1.min(b.1);
            if lo <= hi {
                out.push((lo, hi));
            }
            if a.1 < b.1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        if out.is_empty() {
            return Err(Wipeout);
        }
        if out == self.ranges {
            return Ok(false);
        }
        self.ranges = out;
        Ok(true)
    }

    /// Keeps only values accepted by `keep`. Intended for small domains.
    pub fn retain(&mut self, mut keep: impl FnMut(i32) -> bool) -> Narrowed {
        let before = self.size();
        let kept = IntDomain::from_values(self.values().filter(|&v| keep(v))).ok_or(Wipeout)?;
        let changed = kept.size() != before;
        *self = kept;
        Ok(changed)
    }
}

impl fmt::Debug for IntDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for IntDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(v) = self.value() {
            return write!(f, "{v}");
        }
        write!(f, "{{")?;
        for (i, &(lo, hi)) in self.ranges.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            if lo == hi {
                write!(f, "{lo}")?;
            } else {
                write!(f, "{lo}..{hi}")?;
            }
        }
        write!(f, "}}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SetDomain {
    glb: BTreeSet<i32>,
    lub: BTreeSet<i32>,
    card_min: u32,
    card_max: u32,
}

impl SetDomain {
    /// Caller guarantees `glb ⊆ lub`.
    pub fn new(glb: BTreeSet<i32>, lub: BTreeSet<i32>) -> Self {
        debug_assert!(glb.is_subset(&lub));
        let card_max = lub.len() as u32;
        let card_min = glb.len() as u32;
        SetDomain {
            glb,
            lub,
            card_min,
            card_max,
        }
    }

    pub fn glb(&self) -> &BTreeSet<i32> {
        &self.glb
    }

    pub fn lub(&self) -> &BTreeSet<i32> {
        &self.lub
    }

    pub fn card_bounds(&self) -> (u32, u32) {
        (self.card_min, self.card_max)
    }

    pub fn is_assigned(&self) -> bool {
        self.glb.len() == self.lub.len()
    }

    /// Smallest element that is possible but not yet required.
    pub fn first_undecided(&self) -> Option<i32> {
        self.lub.iter().copied().find(|v| !self.glb.contains(v))
    }

    pub fn include(&mut self, v: i32) -> Narrowed {
        if self.glb.contains(&v) {
            return Ok(false);
        }
        if !self.lub.contains(&v) {
            return Err(Wipeout);
        }
        self.glb.insert(v);
        self.normalize()?;
        Ok(true)
    }

    pub fn exclude(&mut self, v: i32) -> Narrowed {
        if !self.lub.contains(&v) {
            return Ok(false);
        }
        if self.glb.contains(&v) {
            return Err(Wipeout);
        }
        self.lub.remove(&v);
        self.normalize()?;
        Ok(true)
    }

    pub fn include_all<'a>(&mut self, vs: impl IntoIterator<Item = &'a i32>) -> Narrowed {
        let mut changed = false;
        for &v in vs {
            changed |= self.include(v)?;
        }
        Ok(changed)
    }

    /// Restricts the upper bound to elements accepted by `keep`.
    pub fn restrict_lub(&mut self, mut keep: impl FnMut(i32) -> bool) -> Narrowed {
        let drop: Vec<i32> = self.lub.iter().copied().filter(|&v| !keep(v)).collect();
        let mut changed = false;
        for v in drop {
            changed |= self.exclude(v)?;
        }
        Ok(changed)
    }

    pub fn restrict_card(&mut self, lo: u32, hi: u32) -> Narrowed {
        let (old_lo, old_hi) = (self.card_min, self.card_max);
        self.card_min = self.card_min.max(lo);
        self.card_max = self.card_max.min(hi);
        let glb_before = self.glb.len();
        let lub_before = self.lub.len();
        self.normalize()?;
        Ok(old_lo != self.card_min
            || old_hi != self.card_max
            || glb_before != self.glb.len()
            || lub_before != self.lub.len())
    }

    // Cardinality reasoning limited to |glb| <= |S| <= |lub|.
    fn normalize(&mut self) -> Result<(), Wipeout> {
        self.card_min = self.card_min.max(self.glb.len() as u32);
        self.card_max = self.card_max.min(self.lub.len() as u32);
        if self.card_min > self.card_max {
            return Err(Wipeout);
        }
        if self.card_max as usize == self.glb.len() && self.lub.len() > self.glb.len() {
            self.lub = self.glb.clone();
        } else if self.card_min as usize == self.lub.len() && self.glb.len() < self.lub.len() {
            self.glb = self.lub.clone();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holes_split_intervals() {
        let mut d = IntDomain::interval(0, 9);
        assert_eq!(d.remove(4), Ok(true));
        assert_eq!(d.ranges(), &[(0, 3), (5, 9)]);
        assert_eq!(d.size(), 9);
        assert!(!d.contains(4));
        assert_eq!(d.remove(4), Ok(false));
        assert_eq!(d.restrict_min(4), Ok(true));
        assert_eq!(d.ranges(), &[(5, 9)]);
        assert_eq!(d.restrict_max(4), Err(Wipeout));
    }

    #[test]
    fn intersect_and_disjoint() {
        let mut a = IntDomain::from_values([1, 2, 3, 7, 8]).unwrap();
        let b = IntDomain::from_values([3, 4, 8, 9]).unwrap();
        assert!(!a.disjoint(&b));
        assert_eq!(a.intersect(&b), Ok(true));
        assert_eq!(a.values().collect::<Vec<_>>(), vec![3, 8]);
        let c = IntDomain::interval(4, 7);
        assert!(a.disjoint(&c));
        assert_eq!(a.intersect(&c), Err(Wipeout));
    }

    #[test]
    fn singleton_removal_wipes_out() {
        let mut d = IntDomain::singleton(5);
        assert_eq!(d.value(), Some(5));
        assert_eq!(d.remove(5), Err(Wipeout));
        assert_eq!(d.assign(6), Err(Wipeout));
    }

    #[test]
    fn set_bounds_and_cardinality() {
        let mut s = SetDomain::new(BTreeSet::new(), (1..=3).collect());
        assert_eq!(s.include(2), Ok(true));
        assert_eq!(s.exclude(2), Err(Wipeout));
        assert_eq!(s.restrict_card(0, 1), Ok(true));
        assert!(s.is_assigned());
        assert_eq!(s.lub().iter().copied().collect::<Vec<_>>(), vec![2]);
        assert_eq!(s.include(9), Err(Wipeout));
    }
}
