//! Multisets of species: the concrete states of a CGF system.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::Name;

/// Finite map from species to multiplicity. Zero entries are never stored,
/// so structural equality and the derived ordering (lexicographic on the
/// sorted `(name, multiplicity)` pairs) are the state identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Multiset(BTreeMap<Name, u64>);

impl Multiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(name: Name, count: u64) -> Self {
        let mut m = Self::new();
        m.set(name, count);
        m
    }

    pub fn get(&self, name: &Name) -> u64 {
        self.0.get(name).copied().unwrap_or(0)
    }

    pub fn set(&mut self, name: Name, count: u64) {
        if count == 0 {
            self.0.remove(&name);
        } else {
            self.0.insert(name, count);
        }
    }

    pub fn add(&mut self, name: &Name, count: u64) {
        let n = self.get(name) + count;
        self.set(name.clone(), n);
    }

    /// Remove `count` copies, truncating at zero.
    pub fn remove(&mut self, name: &Name, count: u64) {
        let n = self.get(name).saturating_sub(count);
        self.set(name.clone(), n);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total number of molecules.
    pub fn size(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, u64)> {
        self.0.iter().map(|(k, v)| (k, *v))
    }

    pub fn species(&self) -> impl Iterator<Item = &Name> {
        self.0.keys()
    }

    /// Pointwise sum `M ⊕ N`.
    pub fn msum(&self, other: &Multiset) -> Multiset {
        let mut out = self.clone();
        for (name, n) in other.iter() {
            out.add(name, n);
        }
        out
    }

    /// Pointwise truncated difference `M ⊖ N`.
    pub fn mdiff(&self, other: &Multiset) -> Multiset {
        let mut out = self.clone();
        for (name, n) in other.iter() {
            out.remove(name, n);
        }
        out
    }
}

impl FromIterator<(Name, u64)> for Multiset {
    fn from_iter<I: IntoIterator<Item = (Name, u64)>>(iter: I) -> Self {
        let mut m = Multiset::new();
        for (name, n) in iter {
            m.add(&name, n);
        }
        m
    }
}

impl fmt::Display for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (name, n)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{name}:{n}")?;
        }
        write!(f, "}}")
    }
}
