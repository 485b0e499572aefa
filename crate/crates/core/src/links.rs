//! The chain of links `{1, …, n}`, subsets of it, and the contiguous fragments
//! that remain after removing links.

use crate::bits::{bit_positions, bitset64, low_bits};
use crate::error::{Error, Result};
use std::fmt;

/// The ground chain `L = {1, …, n}` with `1 <= n <= 64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinkSet {
    n: u32,
}

impl LinkSet {
    pub fn new(n: u32) -> Result<Self> {
        if (1..=64).contains(&n) {
            Ok(Self { n })
        } else {
            Err(Error::ChainLength(n))
        }
    }

    pub fn n(self) -> u32 {
        self.n
    }

    pub fn all(self) -> Subset {
        Subset(low_bits(self.n))
    }

    pub fn whole(self) -> Fragment {
        Fragment::new(1, self.n + 1)
    }

    pub fn contains(self, link: u32) -> bool {
        (1..=self.n).contains(&link)
    }

    /// Every subset of the chain, in increasing mask order.
    pub fn subsets(self) -> impl Iterator<Item = Subset> {
        self.all().subsets()
    }

    pub fn check(self, g: Subset) -> Result<()> {
        if g.is_subset(self.all()) {
            Ok(())
        } else {
            let link = g.difference(self.all()).links().next().unwrap_or(0);
            Err(Error::LinkOutOfRange { link, n: self.n })
        }
    }
}

bitset64!(
    /// A subset of links; link `a` is stored at bit `a - 1`.
    Subset
);

impl Subset {
    pub fn from_links<I: IntoIterator<Item = u32>>(links: I) -> Self {
        links.into_iter().fold(Self::EMPTY, |s, a| s.with(a))
    }

    #[inline]
    pub fn contains(self, link: u32) -> bool {
        link >= 1 && link <= 64 && self.0 >> (link - 1) & 1 == 1
    }

    #[inline]
    pub fn with(self, link: u32) -> Self {
        debug_assert!((1..=64).contains(&link));
        Self(self.0 | 1u64 << (link - 1))
    }

    /// Links in ascending order.
    pub fn links(self) -> impl Iterator<Item = u32> {
        bit_positions(self.0).map(|i| i as u32 + 1)
    }

    pub fn to_vec(self) -> Vec<u32> {
        self.links().collect()
    }

    /// Parse a comma- or semicolon-separated list of strictly increasing links.
    pub fn parse(text: &str, chain: LinkSet) -> Result<Self> {
        let mut out = Self::EMPTY;
        let mut last = 0u32;
        for tok in text.split([',', ';']).map(str::trim).filter(|t| !t.is_empty()) {
            let link: u32 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("not a link index: {tok:?}")))?;
            if !chain.contains(link) {
                return Err(Error::LinkOutOfRange { link, n: chain.n() });
            }
            if link <= last {
                return Err(Error::Parse(format!("links must be strictly increasing: {text:?}")));
            }
            last = link;
            out = out.with(link);
        }
        Ok(out)
    }

    /// `"1;3;4"`, the empty set being the empty string.
    pub fn to_csv_label(self) -> String {
        self.links().map(|a| a.to_string()).collect::<Vec<_>>().join(";")
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.links()).finish()
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.links().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

/// A contiguous run of links `start..end` (half-open).
///
/// An empty fragment keeps its position: `start == end == k` is the empty
/// slot immediately left of link `k` (or right of `k - 1`). Two empty
/// fragments at different positions are therefore different values.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fragment {
    start: u32,
    end: u32,
}

impl Fragment {
    pub fn new(start: u32, end: u32) -> Self {
        assert!(start >= 1 && start <= end, "bad fragment {start}..{end}");
        Self { start, end }
    }

    pub fn start(self) -> u32 {
        self.start
    }

    pub fn end(self) -> u32 {
        self.end
    }

    pub fn is_empty(self) -> bool {
        self.start == self.end
    }

    pub fn len(self) -> u32 {
        self.end - self.start
    }

    /// Smallest and largest link, if any.
    pub fn bounds(self) -> Option<(u32, u32)> {
        (!self.is_empty()).then(|| (self.start, self.end - 1))
    }

    pub fn contains(self, link: u32) -> bool {
        (self.start..self.end).contains(&link)
    }

    pub fn links(self) -> impl Iterator<Item = u32> {
        self.start..self.end
    }

    pub fn mask(self) -> Subset {
        Subset(low_bits(self.end - 1) & !low_bits(self.start - 1))
    }

    /// `{b in self : b < link}`.
    pub fn left_of(self, link: u32) -> Self {
        debug_assert!(self.contains(link));
        Self::new(self.start, link)
    }

    /// `{b in self : b > link}`.
    pub fn right_of(self, link: u32) -> Self {
        debug_assert!(self.contains(link));
        Self::new(link + 1, self.end)
    }

    /// The fragments of `self` left after removing `removed` (which must lie
    /// inside `self`), in left-to-right order; `|removed| + 1` entries.
    pub fn split(self, removed: Subset) -> Vec<Fragment> {
        debug_assert!(removed.is_subset(self.mask()));
        let mut out = Vec::with_capacity(removed.len() + 1);
        let mut start = self.start;
        for a in removed.links() {
            out.push(Fragment::new(start, a));
            start = a + 1;
        }
        out.push(Fragment::new(start, self.end));
        out
    }
}

impl fmt::Debug for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bounds() {
            None => write!(f, "∅@{}", self.start),
            Some((lo, hi)) if lo == hi => write!(f, "{{{lo}}}"),
            Some((lo, hi)) => write!(f, "{{{lo}..{hi}}}"),
        }
    }
}

/// `ℒ_G`: the fragments of the chain after removing `g`, left to right,
/// including empty ones.
pub fn fragments_of(g: Subset, chain: LinkSet) -> Result<Vec<Fragment>> {
    chain.check(g)?;
    Ok(chain.whole().split(g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[u32]) -> Subset {
        Subset::from_links(xs.iter().copied())
    }

    fn spans(frags: &[Fragment]) -> Vec<Vec<u32>> {
        frags.iter().map(|f| f.links().collect()).collect()
    }

    #[test]
    fn fragments_of_two_adjacent_links() {
        let l = LinkSet::new(5).unwrap();
        let fr = fragments_of(set(&[2, 3]), l).unwrap();
        assert_eq!(spans(&fr), vec![vec![1], vec![], vec![4, 5]]);
        assert!(fr[1].is_empty());
    }

    #[test]
    fn fragments_of_empty_and_full() {
        let l = LinkSet::new(5).unwrap();
        assert_eq!(spans(&fragments_of(Subset::EMPTY, l).unwrap()), vec![vec![1, 2, 3, 4, 5]]);
        let full = fragments_of(l.all(), l).unwrap();
        assert_eq!(full.len(), 6);
        assert!(full.iter().all(|f| f.is_empty()));
        // empty slots at distinct positions are distinct
        let mut dedup = full.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), 6);
    }

    #[test]
    fn fragments_of_endpoints() {
        let l = LinkSet::new(5).unwrap();
        let fr = fragments_of(set(&[1, 5]), l).unwrap();
        assert_eq!(spans(&fr), vec![vec![], vec![2, 3, 4], vec![]]);
    }

    #[test]
    fn fragments_of_rejects_out_of_range() {
        let l = LinkSet::new(3).unwrap();
        assert!(matches!(fragments_of(set(&[4]), l), Err(Error::LinkOutOfRange { link: 4, n: 3 })));
    }

    #[test]
    fn chain_limits() {
        assert!(LinkSet::new(0).is_err());
        assert!(LinkSet::new(65).is_err());
        let l = LinkSet::new(64).unwrap();
        assert_eq!(l.all().len(), 64);
        assert_eq!(l.whole().mask(), l.all());
    }

    #[test]
    fn parse_subset() {
        let l = LinkSet::new(6).unwrap();
        assert_eq!(Subset::parse("1,3,4", l).unwrap(), set(&[1, 3, 4]));
        assert_eq!(Subset::parse("", l).unwrap(), Subset::EMPTY);
        assert!(Subset::parse("3,1", l).is_err());
        assert!(Subset::parse("7", l).is_err());
        assert_eq!(set(&[1, 3, 4]).to_csv_label(), "1;3;4");
    }
}
