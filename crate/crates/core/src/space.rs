//! Labeled tensor-product spaces and the index arithmetic behind partial
//! traces, partial transposes, and embeddings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered set of labeled subsystems with dimensions.
///
/// The tensor-index order is the registration order and is immutable after
/// creation; the first subsystem is the most significant index (row-major),
/// matching the Kronecker-product convention. An empty registry is the
/// one-dimensional scalar space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceRegistry {
    subsystems: Vec<(String, usize)>,
}

impl SpaceRegistry {
    pub fn new<L: Into<String>>(subsystems: Vec<(L, usize)>) -> Result<Self> {
        let subsystems: Vec<(String, usize)> =
            subsystems.into_iter().map(|(l, d)| (l.into(), d)).collect();
        for (i, (label, dim)) in subsystems.iter().enumerate() {
            if *dim == 0 {
                return Err(Error::ZeroDimension);
            }
            if subsystems[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::LabelCollision(label.clone()));
            }
        }
        Ok(SpaceRegistry { subsystems })
    }

    /// Single-subsystem registry.
    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        SpaceRegistry::new(vec![(label.into(), dim)])
    }

    /// The scalar space (no subsystems, total dimension 1).
    pub fn scalar() -> Self {
        SpaceRegistry { subsystems: vec![] }
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.subsystems.iter().map(|(l, _)| l.as_str())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|&(_, d)| d).collect()
    }

    pub fn subsystems(&self) -> &[(String, usize)] {
        &self.subsystems
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|&(_, d)| d).product()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.subsystems.iter().position(|(l, _)| l == label)
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.position(label)
            .map(|i| self.subsystems[i].1)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    /// Concatenation of two registries; labels must be disjoint.
    pub fn join(&self, other: &SpaceRegistry) -> Result<SpaceRegistry> {
        let mut subsystems = self.subsystems.clone();
        for (l, d) in &other.subsystems {
            if self.contains(l) {
                return Err(Error::LabelCollision(l.clone()));
            }
            subsystems.push((l.clone(), *d));
        }
        Ok(SpaceRegistry { subsystems })
    }

    /// Positions of `labels` in registry order. Errors on unknown labels.
    pub fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            out.push(
                self.position(l)
                    .ok_or_else(|| Error::UnknownLabel(l.to_string()))?,
            );
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Sub-registry of the given labels, kept in registry order.
    pub fn subregistry(&self, labels: &[&str]) -> Result<SpaceRegistry> {
        let positions = self.positions(labels)?;
        Ok(SpaceRegistry {
            subsystems: positions
                .iter()
                .map(|&i| self.subsystems[i].clone())
                .collect(),
        })
    }

    /// Labels not listed in `labels`, in registry order.
    pub fn complement(&self, labels: &[&str]) -> Vec<String> {
        self.subsystems
            .iter()
            .filter(|(l, _)| !labels.contains(&l.as_str()))
            .map(|(l, _)| l.clone())
            .collect()
    }

    /// Splits the registry axes into kept and traced positions.
    pub(crate) fn split(&self, keep_labels: &[&str]) -> Result<AxisSplit> {
        let keep = self.positions(keep_labels)?;
        let rest: Vec<usize> = (0..self.len()).filter(|i| !keep.contains(i)).collect();
        Ok(AxisSplit::new(self.dims(), keep, rest))
    }
}

impl Serialize for SpaceRegistry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            labels: Vec<&'a str>,
            dims: Vec<usize>,
        }
        Repr {
            labels: self.labels().collect(),
            dims: self.dims(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpaceRegistry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            labels: Vec<String>,
            dims: Vec<usize>,
        }
        let r = Repr::deserialize(d)?;
        if r.labels.len() != r.dims.len() {
            return Err(serde::de::Error::custom("labels and dims lengths differ"));
        }
        SpaceRegistry::new(r.labels.into_iter().zip(r.dims).collect())
            .map_err(serde::de::Error::custom)
    }
}

/// Row-major flat index for a multi-index over `dims`.
pub(crate) fn flat_index(idx: &[usize], dims: &[usize]) -> usize {
    let mut flat = 0;
    for (i, d) in idx.iter().zip(dims) {
        flat = flat * d + i;
    }
    flat
}

/// Inverse of [`flat_index`].
pub(crate) fn unflatten(mut flat: usize, dims: &[usize], out: &mut [usize]) {
    for (o, d) in out.iter_mut().zip(dims).rev() {
        *o = flat % d;
        flat /= d;
    }
}

/// Precomputed bookkeeping for merging a (kept, traced) index pair back into
/// a flat index over the full registry. Offsets of the two groups add, so the
/// merge is two table lookups.
pub(crate) struct AxisSplit {
    keep_offsets: Vec<usize>,
    rest_offsets: Vec<usize>,
}

impl AxisSplit {
    fn new(dims: Vec<usize>, keep: Vec<usize>, rest: Vec<usize>) -> Self {
        let strides = {
            let mut s = vec![1usize; dims.len()];
            for i in (0..dims.len().saturating_sub(1)).rev() {
                s[i] = s[i + 1] * dims[i + 1];
            }
            s
        };
        let offsets = |axes: &[usize]| -> Vec<usize> {
            let group_dims: Vec<usize> = axes.iter().map(|&i| dims[i]).collect();
            let total: usize = group_dims.iter().product();
            let mut out = vec![0usize; total];
            let mut idx = vec![0usize; axes.len()];
            for (flat, slot) in out.iter_mut().enumerate() {
                unflatten(flat, &group_dims, &mut idx);
                *slot = idx
                    .iter()
                    .zip(axes)
                    .map(|(&i, &axis)| i * strides[axis])
                    .sum();
            }
            out
        };
        AxisSplit {
            keep_offsets: offsets(&keep),
            rest_offsets: offsets(&rest),
        }
    }

    pub(crate) fn keep_dim(&self) -> usize {
        self.keep_offsets.len()
    }

    pub(crate) fn rest_dim(&self) -> usize {
        self.rest_offsets.len()
    }

    /// Flat full-space index from flat kept and traced indices.
    pub(crate) fn merge(&self, kept: usize, rest: usize) -> usize {
        self.keep_offsets[kept] + self.rest_offsets[rest]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_basics() {
        let reg = SpaceRegistry::new(vec![("a", 2), ("b", 3), ("c", 2)]).unwrap();
        assert_eq!(reg.total_dim(), 12);
        assert_eq!(reg.position("b"), Some(1));
        assert_eq!(reg.dim_of("c").unwrap(), 2);
        assert!(reg.dim_of("x").is_err());
        assert_eq!(reg.complement(&["b"]), vec!["a", "c"]);
    }

    #[test]
    fn duplicate_label_rejected() {
        assert!(matches!(
            SpaceRegistry::new(vec![("a", 2), ("a", 2)]),
            Err(Error::LabelCollision(_))
        ));
    }

    #[test]
    fn zero_dim_rejected() {
        assert!(matches!(
            SpaceRegistry::new(vec![("a", 0)]),
            Err(Error::ZeroDimension)
        ));
    }

    #[test]
    fn join_disjoint() {
        let ab = SpaceRegistry::new(vec![("a", 2), ("b", 2)]).unwrap();
        let c = SpaceRegistry::single("c", 3).unwrap();
        let abc = ab.join(&c).unwrap();
        assert_eq!(abc.total_dim(), 12);
        assert!(ab.join(&ab).is_err());
    }

    #[test]
    fn scalar_registry() {
        let s = SpaceRegistry::scalar();
        assert_eq!(s.total_dim(), 1);
        assert!(s.is_empty());
    }

    #[test]
    fn flat_roundtrip() {
        let dims = [2, 3, 4];
        let mut idx = [0usize; 3];
        for flat in 0..24 {
            unflatten(flat, &dims, &mut idx);
            assert_eq!(flat_index(&idx, &dims), flat);
        }
    }

    #[test]
    fn split_merge_consistent() {
        let reg = SpaceRegistry::new(vec![("a", 2), ("b", 3), ("c", 2)]).unwrap();
        let split = reg.split(&["a", "c"]).unwrap();
        assert_eq!(split.keep_dim(), 4);
        assert_eq!(split.rest_dim(), 3);
        // merged indices must enumerate the full space exactly once
        let mut seen = vec![false; 12];
        for k in 0..4 {
            for r in 0..3 {
                let f = split.merge(k, r);
                assert!(!seen[f]);
                seen[f] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
}
