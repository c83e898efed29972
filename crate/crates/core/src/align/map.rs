use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::AlignError;

/// A word alignment: a set of `(source index, target index)` pairs over a
/// `source_len × target_len` grid. Indices are 0-based. Many-to-one and
/// many-to-many links are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MapRepr", into = "MapRepr")]
pub struct AlignmentMap {
    source_len: usize,
    target_len: usize,
    pairs: BTreeSet<(usize, usize)>,
}

impl AlignmentMap {
    pub fn new(source_len: usize, target_len: usize) -> Self {
        Self { source_len, target_len, pairs: BTreeSet::new() }
    }

    pub fn from_pairs(
        source_len: usize,
        target_len: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, AlignError> {
        let mut map = Self::new(source_len, target_len);
        for (j, i) in pairs {
            map.insert(j, i)?;
        }
        Ok(map)
    }

    /// Adds a pair; returns whether it was new.
    pub fn insert(&mut self, j: usize, i: usize) -> Result<bool, AlignError> {
        if j >= self.source_len || i >= self.target_len {
            return Err(AlignError::PairOutOfRange { j, i, source_len: self.source_len, target_len: self.target_len });
        }
        Ok(self.pairs.insert((j, i)))
    }

    pub fn contains(&self, j: usize, i: usize) -> bool {
        self.pairs.contains(&(j, i))
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    pub fn pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn targets_of(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.pairs.range((j, 0)..(j + 1, 0)).map(|&(_, i)| i)
    }

    /// Target indices linked to any of `sources`.
    pub fn image(&self, sources: &BTreeSet<usize>) -> BTreeSet<usize> {
        self.pairs.iter().filter(|(j, _)| sources.contains(j)).map(|&(_, i)| i).collect()
    }

    pub fn same_shape(&self, other: &AlignmentMap) -> bool {
        self.source_len == other.source_len && self.target_len == other.target_len
    }
}

#[derive(Serialize, Deserialize)]
struct MapRepr {
    source_len: usize,
    target_len: usize,
    pairs: Vec<[usize; 2]>,
}

impl TryFrom<MapRepr> for AlignmentMap {
    type Error = AlignError;
    fn try_from(r: MapRepr) -> Result<Self, Self::Error> {
        AlignmentMap::from_pairs(r.source_len, r.target_len, r.pairs.into_iter().map(|[j, i]| (j, i)))
    }
}

impl From<AlignmentMap> for MapRepr {
    fn from(m: AlignmentMap) -> Self {
        MapRepr {
            source_len: m.source_len,
            target_len: m.target_len,
            pairs: m.pairs.into_iter().map(|(j, i)| [j, i]).collect(),
        }
    }
}
