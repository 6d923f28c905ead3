use serde::Serialize;

use super::spectrum::Spectrum;
use crate::error::{Error, Result};

/// Label used for groups that carry no spectral index (the complement in a
/// two-part split).
pub const NO_LABEL: i64 = i64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PartitionKind {
    Trivial,
    TwoPart { k: i64 },
    Coarse { m: usize },
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub label: i64,
    /// Positions into the spectrum's entry list.
    pub entries: Vec<usize>,
    /// Basis indices covered by the group, ascending.
    pub basis: Vec<usize>,
}

/// A grouping of spectrum entries; each group yields one spectral projection.
#[derive(Debug, Clone)]
pub struct Partition {
    kind: PartitionKind,
    groups: Vec<Group>,
    group_of_entry: Vec<usize>,
    group_of_basis: Vec<usize>,
    entry_dims: Vec<usize>,
}

impl PartialEq for Partition {
    fn eq(&self, other: &Self) -> bool {
        self.entry_dims == other.entry_dims && self.group_of_entry == other.group_of_entry
    }
}

impl Partition {
    fn build(kind: PartitionKind, spec: &Spectrum, groups: Vec<(i64, Vec<usize>)>) -> Result<Self> {
        let len = spec.len();
        let mut group_of_entry = vec![usize::MAX; len];
        let mut out = Vec::with_capacity(groups.len());
        for (g, (label, mut entries)) in groups.into_iter().enumerate() {
            if entries.is_empty() {
                return Err(Error::invalid("partition group is empty"));
            }
            entries.sort_unstable();
            let mut basis = Vec::new();
            for &pos in &entries {
                if pos >= len {
                    return Err(Error::invalid(format!("entry position {pos} outside spectrum")));
                }
                if group_of_entry[pos] != usize::MAX {
                    return Err(Error::invalid(format!("entry position {pos} appears in two groups")));
                }
                group_of_entry[pos] = g;
                basis.extend(spec.basis_range(pos));
            }
            out.push(Group { label, entries, basis });
        }
        if group_of_entry.contains(&usize::MAX) {
            return Err(Error::invalid("partition groups do not cover the spectrum"));
        }
        let group_of_basis = (0..spec.dim()).map(|i| group_of_entry[spec.entry_of_basis(i)]).collect();
        Ok(Partition { kind, groups: out, group_of_entry, group_of_basis, entry_dims: spec.multiplicities() })
    }

    /// One group per spectrum entry.
    pub fn trivial(spec: &Spectrum) -> Self {
        let groups = spec.entries().iter().enumerate().map(|(p, e)| (e.index, vec![p])).collect();
        Self::build(PartitionKind::Trivial, spec, groups).expect("trivial partition is always valid")
    }

    /// All entries with `|index| <= m` merged into one group labelled 0.
    pub fn coarse(spec: &Spectrum, m: usize) -> Self {
        let mut centre = Vec::new();
        let mut groups = Vec::new();
        for (p, e) in spec.entries().iter().enumerate() {
            if e.index.unsigned_abs() as usize <= m {
                centre.push(p);
            } else {
                groups.push((e.index, vec![p]));
            }
        }
        let mut all = Vec::with_capacity(groups.len() + 1);
        let split = groups.iter().position(|(l, _)| *l > 0).unwrap_or(groups.len());
        all.extend(groups.drain(..split));
        if !centre.is_empty() {
            all.push((0, centre));
        }
        all.extend(groups);
        Self::build(PartitionKind::Coarse { m }, spec, all).expect("coarse partition is always valid")
    }

    /// `{k}` and its complement.
    pub fn two_part(spec: &Spectrum, k: i64) -> Result<Self> {
        let pos = spec.entries().iter().enumerate().filter(|(_, e)| e.index == k).map(|(p, _)| p).collect::<Vec<_>>();
        if pos.len() != 1 {
            return Err(Error::invalid(format!("index {k} must label exactly one spectrum entry")));
        }
        let rest: Vec<usize> = (0..spec.len()).filter(|p| *p != pos[0]).collect();
        let mut groups = vec![(k, pos)];
        if !rest.is_empty() {
            groups.push((NO_LABEL, rest));
        }
        Self::build(PartitionKind::TwoPart { k }, spec, groups)
    }

    /// Everything in one group.
    pub fn single(spec: &Spectrum) -> Self {
        Self::build(PartitionKind::Custom, spec, vec![(0, (0..spec.len()).collect())])
            .expect("single-group partition is always valid")
    }

    pub fn custom(spec: &Spectrum, groups: Vec<(i64, Vec<usize>)>) -> Result<Self> {
        Self::build(PartitionKind::Custom, spec, groups)
    }

    pub fn kind(&self) -> PartitionKind {
        self.kind
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.group_of_basis.len()
    }

    pub fn entry_dims(&self) -> &[usize] {
        &self.entry_dims
    }

    pub fn group_of_entry(&self, pos: usize) -> usize {
        self.group_of_entry[pos]
    }

    pub fn group_of_basis(&self, i: usize) -> usize {
        self.group_of_basis[i]
    }

    pub fn basis_groups(&self) -> &[usize] {
        &self.group_of_basis
    }

    pub fn group_dim(&self, g: usize) -> usize {
        self.groups[g].basis.len()
    }

    /// True when every group uses a single basis vector.
    pub fn is_scalar(&self) -> bool {
        self.groups.iter().all(|g| g.basis.len() == 1)
    }

    /// Same spectrum shape (entry count and multiplicities).
    pub fn same_spectrum(&self, other: &Partition) -> bool {
        self.entry_dims == other.entry_dims
    }

    /// Every group of `self` lies inside a single group of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if !self.same_spectrum(coarser) {
            return false;
        }
        self.groups.iter().all(|g| {
            let target = coarser.group_of_entry[g.entries[0]];
            g.entries.iter().all(|&p| coarser.group_of_entry[p] == target)
        })
    }
}
