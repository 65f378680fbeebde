//! Action labels and dense label sets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// An action label: a base name plus an optional list of integer indices.
///
/// The canonical textual form joins the indices with dots (`get.1`,
/// `ret.0.2`). Ordering is by name, then indices, and is the order used
/// everywhere a deterministic label order is needed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Label {
    name: String,
    indices: Vec<u32>,
}

impl Label {
    pub fn new(name: impl Into<String>, indices: Vec<u32>) -> Self {
        Self {
            name: name.into(),
            indices,
        }
    }

    pub fn simple(name: impl Into<String>) -> Self {
        Self::new(name, Vec::new())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        for i in &self.indices {
            write!(f, ".{i}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed label `{0}`")]
pub struct LabelParseError(pub String);

impl FromStr for Label {
    type Err = LabelParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split('.');
        let name = parts.next().unwrap_or_default();
        let valid_name = name
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid_name {
            return Err(LabelParseError(s.to_string()));
        }
        let indices = parts
            .map(|p| p.parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| LabelParseError(s.to_string()))?;
        Ok(Label::new(name, indices))
    }
}

/// Dense id of a label inside a [`crate::model::Model`] alphabet.
///
/// Ids are assigned in canonical label order, so comparing ids compares labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelId(pub u32);

impl LabelId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A set of labels over a fixed alphabet, stored as a membership vector.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelSet {
    bits: Vec<bool>,
}

impl LabelSet {
    pub fn empty(universe: usize) -> Self {
        Self {
            bits: vec![false; universe],
        }
    }

    pub fn from_ids(universe: usize, ids: impl IntoIterator<Item = LabelId>) -> Self {
        let mut set = Self::empty(universe);
        for id in ids {
            set.insert(id);
        }
        set
    }

    pub fn insert(&mut self, id: LabelId) {
        self.bits[id.index()] = true;
    }

    #[inline]
    pub fn contains(&self, id: LabelId) -> bool {
        self.bits.get(id.index()).copied().unwrap_or(false)
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = LabelId> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| LabelId(i as u32))
    }

    pub fn is_disjoint(&self, other: &LabelSet) -> bool {
        self.iter().all(|id| !other.contains(id))
    }

    pub fn is_subset(&self, other: &LabelSet) -> bool {
        self.iter().all(|id| other.contains(id))
    }
}
