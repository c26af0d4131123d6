use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::structure::Cardinality;

/// A presentation of halting pairs (e, n): a finite list in enumeration
/// order, followed (when `infinite` is non-empty) by an endless tail that
/// interleaves the infinite columns, each running through every n not
/// already listed for it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnumerationSource {
    pairs: Vec<(u64, u64)>,
    infinite: BTreeSet<u64>,
    columns: u64,
}

impl EnumerationSource {
    pub fn new(pairs: Vec<(u64, u64)>, infinite: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for p in &pairs {
            if !seen.insert(*p) {
                return Err(Error::InvalidArgument(format!(
                    "pair ({},{}) enumerated twice",
                    p.0, p.1
                )));
            }
        }
        let infinite: BTreeSet<u64> = infinite.into_iter().collect();
        let columns = pairs
            .iter()
            .map(|p| p.0 + 1)
            .chain(infinite.iter().map(|e| e + 1))
            .max()
            .unwrap_or(0);
        Ok(EnumerationSource {
            pairs,
            infinite,
            columns,
        })
    }

    /// `"3:0,1,2;5:0"` lists column 3 with inputs 0, 1, 2 and then column 5
    /// with input 0. The empty string is the empty source.
    pub fn parse(spec: &str, infinite: &[u64]) -> Result<Self> {
        let mut pairs = Vec::new();
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (e, ns) = part
                .split_once(':')
                .ok_or_else(|| Error::InvalidArgument(format!("expected `e:n,..` in `{part}`")))?;
            let e: u64 = e
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad column `{e}`")))?;
            for n in ns.split(',').map(str::trim).filter(|n| !n.is_empty()) {
                let n: u64 = n
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad input `{n}`")))?;
                pairs.push((e, n));
            }
        }
        Self::new(pairs, infinite.iter().copied())
    }

    /// Widens the range of columns considered to at least `0..n`.
    pub fn with_columns(mut self, n: u64) -> Self {
        self.columns = self.columns.max(n);
        self
    }

    pub fn pairs(&self) -> &[(u64, u64)] {
        &self.pairs
    }

    pub fn infinite_columns(&self) -> &BTreeSet<u64> {
        &self.infinite
    }

    /// Columns `0..columns()` are the ones constructions instantiate.
    pub fn columns(&self) -> u64 {
        self.columns
    }

    pub fn is_infinite(&self, e: u64) -> bool {
        self.infinite.contains(&e)
    }

    /// Listed inputs of column e, in enumeration order.
    pub fn listed(&self, e: u64) -> Vec<u64> {
        self.pairs.iter().filter(|p| p.0 == e).map(|p| p.1).collect()
    }

    /// |W_e|.
    pub fn column_size(&self, e: u64) -> Cardinality {
        if self.is_infinite(e) {
            Cardinality::Infinite
        } else {
            Cardinality::Finite(self.listed(e).len() as u64)
        }
    }

    /// sup W_e: `Some(None)` for an empty column, `None` when infinite.
    pub fn sup(&self, e: u64) -> Option<Option<u64>> {
        (!self.is_infinite(e)).then(|| self.listed(e).into_iter().max())
    }

    /// {e}(n)↓.
    pub fn halts(&self, e: u64, n: u64) -> bool {
        self.is_infinite(e) || self.pairs.contains(&(e, n))
    }

    /// The position-th element of column e in enumeration order.
    pub fn column_member(&self, e: u64, position: u64) -> Option<u64> {
        let listed = self.listed(e);
        if let Some(n) = listed.get(position as usize) {
            return Some(*n);
        }
        if !self.is_infinite(e) {
            return None;
        }
        let rank = position - listed.len() as u64;
        let listed: BTreeSet<u64> = listed.into_iter().collect();
        (0..).filter(|n| !listed.contains(n)).nth(rank as usize)
    }

    /// The i-th pair (eᵢ, nᵢ) of the enumeration.
    pub fn pair_at(&self, i: u64) -> Option<(u64, u64)> {
        if let Some(p) = self.pairs.get(i as usize) {
            return Some(*p);
        }
        if self.infinite.is_empty() {
            return None;
        }
        let tail = i - self.pairs.len() as u64;
        let m = self.infinite.len() as u64;
        let e = *self.infinite.iter().nth((tail % m) as usize)?;
        let position = self.listed(e).len() as u64 + tail / m;
        Some((e, self.column_member(e, position)?))
    }

    /// Listed columns with their inputs.
    pub fn table(&self) -> BTreeMap<u64, Vec<u64>> {
        let mut out: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for (e, n) in &self.pairs {
            out.entry(*e).or_default().push(*n);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_sizes() {
        let s = EnumerationSource::parse("3:0,1,2;5:0", &[9]).unwrap();
        assert_eq!(s.pairs(), &[(3, 0), (3, 1), (3, 2), (5, 0)]);
        assert_eq!(s.column_size(3), Cardinality::Finite(3));
        assert_eq!(s.column_size(4), Cardinality::Finite(0));
        assert_eq!(s.column_size(9), Cardinality::Infinite);
        assert_eq!(s.columns(), 10);
        assert_eq!(s.sup(3), Some(Some(2)));
        assert_eq!(s.sup(4), Some(None));
        assert_eq!(s.sup(9), None);
        assert!(EnumerationSource::parse("", &[]).unwrap().pairs().is_empty());
    }

    #[test]
    fn duplicates_rejected() {
        assert!(EnumerationSource::parse("1:0;1:0", &[]).is_err());
        assert!(EnumerationSource::parse("1:x", &[]).is_err());
    }

    #[test]
    fn infinite_tail_skips_listed_inputs() {
        let s = EnumerationSource::parse("2:1", &[2, 4]).unwrap();
        let prefix: Vec<(u64, u64)> = (0..7).map(|i| s.pair_at(i).unwrap()).collect();
        assert_eq!(
            prefix,
            vec![(2, 1), (2, 0), (4, 0), (2, 2), (4, 1), (2, 3), (4, 2)]
        );
        let set: BTreeSet<_> = (0..200).map(|i| s.pair_at(i).unwrap()).collect();
        assert_eq!(set.len(), 200);
        assert_eq!(EnumerationSource::parse("2:1", &[]).unwrap().pair_at(1), None);
    }
}
