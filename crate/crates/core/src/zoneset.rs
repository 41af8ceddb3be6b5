//! Subsets of the zone frame encoded as bitmasks.

use std::fmt;

/// Largest frame the model will fit: the table holds `2^n - 1` cells per
/// access point and fusion costs up to `4^n` per combination.
pub const MAX_ZONES: usize = 16;

/// Frames larger than this trigger a warning about table size.
pub const WARN_ZONES: usize = 12;

/// A set of zones; bit `k` set means zone `k` belongs to the set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ZoneSet(u32);

impl ZoneSet {
    pub const EMPTY: ZoneSet = ZoneSet(0);

    pub const fn from_bits(bits: u32) -> Self {
        ZoneSet(bits)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub fn singleton(zone: usize) -> Self {
        debug_assert!(zone < MAX_ZONES);
        ZoneSet(1 << zone)
    }

    /// The whole frame of `n_zones` zones.
    pub fn full(n_zones: usize) -> Self {
        debug_assert!(n_zones <= MAX_ZONES);
        ZoneSet(((1u64 << n_zones) - 1) as u32)
    }

    pub fn from_zones<I: IntoIterator<Item = usize>>(zones: I) -> Self {
        ZoneSet(zones.into_iter().fold(0, |acc, k| acc | (1 << k)))
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn cardinality(self) -> u32 {
        self.0.count_ones()
    }

    pub const fn contains(self, zone: usize) -> bool {
        zone < 32 && self.0 & (1 << zone) != 0
    }

    pub const fn intersect(self, other: ZoneSet) -> ZoneSet {
        ZoneSet(self.0 & other.0)
    }

    pub const fn is_subset_of(self, other: ZoneSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Whether every bit lies inside a frame of `n_zones` zones.
    pub fn fits_frame(self, n_zones: usize) -> bool {
        (self.0 as u64) < (1u64 << n_zones)
    }

    /// Zone indices in ascending order.
    pub fn zones(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let k = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(k)
        })
    }

    /// Every non-empty subset of a frame of `n_zones` zones, in ascending
    /// bit order. Cell `i` of a model table corresponds to bits `i + 1`.
    pub fn non_empty(n_zones: usize) -> impl Iterator<Item = ZoneSet> {
        (1..(1u64 << n_zones)).map(|b| ZoneSet(b as u32))
    }

    /// Number of non-empty subsets of a frame of `n_zones` zones.
    pub fn non_empty_count(n_zones: usize) -> usize {
        (1usize << n_zones) - 1
    }
}

impl fmt::Display for ZoneSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, k) in self.zones().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}")?;
        }
        f.write_str("}")
    }
}
