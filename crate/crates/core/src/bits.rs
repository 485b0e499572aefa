//! Fixed-capacity bit sets over at most 64 elements.

macro_rules! bitset64 {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
        pub struct $name(pub u64);

        impl $name {
            pub const EMPTY: Self = Self(0);

            #[inline]
            pub fn bits(self) -> u64 {
                self.0
            }

            #[inline]
            pub fn is_empty(self) -> bool {
                self.0 == 0
            }

            #[inline]
            pub fn len(self) -> usize {
                self.0.count_ones() as usize
            }

            #[inline]
            pub fn union(self, other: Self) -> Self {
                Self(self.0 | other.0)
            }

            #[inline]
            pub fn intersection(self, other: Self) -> Self {
                Self(self.0 & other.0)
            }

            #[inline]
            pub fn difference(self, other: Self) -> Self {
                Self(self.0 & !other.0)
            }

            #[inline]
            pub fn is_subset(self, other: Self) -> bool {
                self.0 & !other.0 == 0
            }

            /// All subsets of `self`, starting with the empty set, in increasing
            /// numeric order of the underlying mask.
            pub fn subsets(self) -> impl Iterator<Item = Self> {
                let full = self.0;
                let mut next = Some(0u64);
                std::iter::from_fn(move || {
                    let cur = next?;
                    next = if cur == full { None } else { Some((cur.wrapping_sub(full)) & full) };
                    Some(Self(cur))
                })
            }

            /// Subsets of `self` ordered by cardinality, then by mask.
            pub fn subsets_by_size(self) -> Vec<Self> {
                let mut all: Vec<Self> = self.subsets().collect();
                all.sort_by_key(|s| (s.len(), s.0));
                all
            }
        }
    };
}

pub(crate) use bitset64;

/// Iterate set bit positions of `mask` in ascending order.
pub(crate) fn bit_positions(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

/// Mask with the lowest `k` bits set, valid for `k <= 64`.
#[inline]
pub(crate) fn low_bits(k: u32) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}
