//! Partitions of the cell set in canonical restricted-growth form,
//! plus enumeration with prefix pruning.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::UnionFind;

#[derive(Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("cell id {0} out of range 1..={1}")]
    CellOutOfRange(usize, usize),
    #[error("cell {0} appears in more than one class")]
    DuplicateCell(usize),
    #[error("cell {0} missing from the partition")]
    MissingCell(usize),
    #[error("restricted growth string is malformed at position {0}")]
    BadGrowthString(usize),
}

/// Partition of cells `1..=n` stored as a restricted growth string:
/// `class_of[c]` is the class index of cell c (0-based internally),
/// classes are numbered by first appearance so equal partitions
/// compare equal structurally.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Partition {
    class_of: Vec<usize>,
    n_classes: usize,
}

impl Partition {
    /// Singleton partition: every cell alone.
    pub fn singletons(n: usize) -> Self {
        Partition { class_of: (0..n).collect(), n_classes: n }
    }

    /// Total partition: all cells in one class.
    pub fn total(n: usize) -> Self {
        Partition { class_of: vec![0; n], n_classes: if n == 0 { 0 } else { 1 } }
    }

    /// Build from explicit classes given with 1-based cell ids.
    pub fn from_classes(n: usize, classes: &[&[usize]]) -> Result<Self, PartitionError> {
        let mut class_of = vec![usize::MAX; n];
        for (k, class) in classes.iter().enumerate() {
            for &c in class.iter() {
                if c == 0 || c > n {
                    return Err(PartitionError::CellOutOfRange(c, n));
                }
                if class_of[c - 1] != usize::MAX {
                    return Err(PartitionError::DuplicateCell(c));
                }
                class_of[c - 1] = k;
            }
        }
        for (i, &k) in class_of.iter().enumerate() {
            if k == usize::MAX {
                return Err(PartitionError::MissingCell(i + 1));
            }
        }
        Ok(Self::from_labels(&class_of))
    }

    /// Build from an arbitrary labelling (0-based cells), renumbering
    /// classes into restricted growth form.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = std::collections::BTreeMap::new();
        let mut class_of = Vec::with_capacity(labels.len());
        let mut next = 0;
        for &l in labels {
            let k = *map.entry(l).or_insert_with(|| {
                let k = next;
                next += 1;
                k
            });
            class_of.push(k);
        }
        Partition { class_of, n_classes: next }
    }

    /// Validated restricted growth string: first element 0, each element
    /// at most one more than the running maximum.
    pub fn from_rgs(class_of: Vec<usize>) -> Result<Self, PartitionError> {
        let mut max_seen = 0usize;
        for (i, &k) in class_of.iter().enumerate() {
            if i == 0 {
                if k != 0 {
                    return Err(PartitionError::BadGrowthString(0));
                }
            } else if k > max_seen + 1 {
                return Err(PartitionError::BadGrowthString(i));
            }
            max_seen = max_seen.max(k);
        }
        let n_classes = if class_of.is_empty() { 0 } else { max_seen + 1 };
        Ok(Partition { class_of, n_classes })
    }

    pub fn n_cells(&self) -> usize {
        self.class_of.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Class index of a 0-based cell.
    #[inline]
    pub fn class_of(&self, cell: usize) -> usize {
        self.class_of[cell]
    }

    pub fn labels(&self) -> &[usize] {
        &self.class_of
    }

    /// Classes as sorted lists of 0-based cells, ordered by class index.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_classes];
        for (c, &k) in self.class_of.iter().enumerate() {
            out[k].push(c);
        }
        out
    }

    /// Classes as sorted lists of 1-based cells.
    pub fn classes_1based(&self) -> Vec<Vec<usize>> {
        self.classes().into_iter().map(|cl| cl.into_iter().map(|c| c + 1).collect()).collect()
    }

    pub fn is_singletons(&self) -> bool {
        self.n_classes == self.n_cells()
    }

    pub fn is_total(&self) -> bool {
        self.n_classes <= 1
    }

    pub fn same_class(&self, a: usize, b: usize) -> bool {
        self.class_of[a] == self.class_of[b]
    }

    /// True when every class of `self` lies inside a single class of
    /// `coarser`, i.e. `self` refines `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        assert_eq!(self.n_cells(), coarser.n_cells());
        let mut seen: Vec<Option<usize>> = vec![None; self.n_classes];
        for (c, &k) in self.class_of.iter().enumerate() {
            let target = coarser.class_of[c];
            match seen[k] {
                None => seen[k] = Some(target),
                Some(t) if t == target => {}
                Some(_) => return false,
            }
        }
        true
    }

    /// Coarsest partition refining both inputs (classwise intersections).
    pub fn meet(&self, other: &Partition) -> Partition {
        assert_eq!(self.n_cells(), other.n_cells());
        let labels: Vec<usize> = self
            .class_of
            .iter()
            .zip(&other.class_of)
            .map(|(&a, &b)| a * other.n_classes + b)
            .collect();
        Partition::from_labels(&labels)
    }

    /// Finest partition coarsened by both inputs (transitive closure of
    /// merging along either).
    pub fn join(&self, other: &Partition) -> Partition {
        assert_eq!(self.n_cells(), other.n_cells());
        let n = self.n_cells();
        let mut uf = UnionFind::new(n);
        for p in [self, other] {
            let mut first: Vec<Option<usize>> = vec![None; p.n_classes];
            for (c, &k) in p.class_of.iter().enumerate() {
                match first[k] {
                    None => first[k] = Some(c),
                    Some(f) => {
                        uf.union(f, c);
                    }
                }
            }
        }
        let labels: Vec<usize> = (0..n).map(|c| uf.find(c)).collect();
        Partition::from_labels(&labels)
    }

    /// Image of the partition under a cell permutation: cell `perm[c]`
    /// inherits the class of cell `c`, then classes are renumbered.
    pub fn apply_permutation(&self, perm: &[usize]) -> Partition {
        let n = self.n_cells();
        assert_eq!(perm.len(), n);
        let mut labels = vec![0usize; n];
        for c in 0..n {
            labels[perm[c]] = self.class_of[c];
        }
        Partition::from_labels(&labels)
    }

    /// Display form `{1,4},{2,5},{3,6}` with 1-based cells.
    pub fn display(&self) -> String {
        let parts: Vec<String> = self
            .classes_1based()
            .iter()
            .map(|cl| {
                let inner: Vec<String> = cl.iter().map(|c| c.to_string()).collect();
                format!("{{{}}}", inner.join(","))
            })
            .collect();
        parts.join(",")
    }

    /// Parse `1,4|2,5|3,6` (classes separated by `|`).
    pub fn parse_classes(n: usize, s: &str) -> Result<Self, PartitionError> {
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for chunk in s.split('|') {
            let mut class = Vec::new();
            for tok in chunk.split(',') {
                let tok = tok.trim();
                if tok.is_empty() {
                    continue;
                }
                let c: usize = tok.parse().map_err(|_| PartitionError::CellOutOfRange(0, n))?;
                class.push(c);
            }
            if !class.is_empty() {
                classes.push(class);
            }
        }
        let refs: Vec<&[usize]> = classes.iter().map(|c| c.as_slice()).collect();
        Partition::from_classes(n, &refs)
    }
}

/// Enumerate all partitions of `1..=n` in restricted growth order,
/// pruning subtrees where `prefix_ok` rejects the partial string.
/// `emit` receives each complete partition that survives.
pub fn for_each_partition(
    n: usize,
    mut prefix_ok: impl FnMut(&[usize]) -> bool,
    mut emit: impl FnMut(&Partition),
) {
    fn rec(
        rgs: &mut Vec<usize>,
        depth: usize,
        max_label: usize,
        n: usize,
        prefix_ok: &mut dyn FnMut(&[usize]) -> bool,
        emit: &mut dyn FnMut(&Partition),
    ) {
        if depth == n {
            let p = Partition::from_rgs(rgs.clone()).expect("generator emits valid strings");
            emit(&p);
            return;
        }
        for k in 0..=max_label + 1 {
            rgs[depth] = k;
            if prefix_ok(&rgs[..depth + 1]) {
                rec(rgs, depth + 1, max_label.max(k), n, prefix_ok, emit);
            }
        }
    }

    if n == 0 {
        return;
    }
    let mut rgs = vec![0usize; n];
    if !prefix_ok(&rgs[..1]) {
        return;
    }
    rec(&mut rgs, 1, 0, n, &mut prefix_ok, &mut emit);
}

/// Bell number for small n, used in tests and size guards.
pub fn bell_number(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for v in &row {
            next.push(next.last().unwrap() + v);
        }
        row = next;
    }
    row[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_from_classes() {
        let p = Partition::from_classes(6, &[&[3, 6], &[1, 4], &[2, 5]]).unwrap();
        // renumbered by first appearance of each class along cells 1..6
        assert_eq!(p.labels(), &[0, 1, 2, 0, 1, 2]);
        assert_eq!(p.display(), "{1,4},{2,5},{3,6}");
    }

    #[test]
    fn from_classes_rejects_bad_input() {
        assert_eq!(Partition::from_classes(3, &[&[1, 2]]), Err(PartitionError::MissingCell(3)));
        assert_eq!(
            Partition::from_classes(3, &[&[1, 2], &[2, 3]]),
            Err(PartitionError::DuplicateCell(2))
        );
        assert_eq!(
            Partition::from_classes(3, &[&[1, 2, 4]]),
            Err(PartitionError::CellOutOfRange(4, 3))
        );
    }

    #[test]
    fn refinement_and_subspace_direction() {
        let fine = Partition::from_classes(4, &[&[1], &[2], &[3, 4]]).unwrap();
        let coarse = Partition::from_classes(4, &[&[1, 2], &[3, 4]]).unwrap();
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
        assert!(Partition::singletons(4).refines(&coarse));
        assert!(coarse.refines(&Partition::total(4)));
    }

    #[test]
    fn meet_and_join() {
        let a = Partition::from_classes(4, &[&[1, 2], &[3, 4]]).unwrap();
        let b = Partition::from_classes(4, &[&[1, 3], &[2, 4]]).unwrap();
        assert_eq!(a.meet(&b), Partition::singletons(4));
        assert_eq!(a.join(&b), Partition::total(4));
    }

    #[test]
    fn permutation_action() {
        let p = Partition::from_classes(4, &[&[1, 2], &[3], &[4]]).unwrap();
        // swap cells 1 and 3 (0-based images)
        let perm = vec![2, 1, 0, 3];
        let q = p.apply_permutation(&perm);
        assert_eq!(q, Partition::from_classes(4, &[&[2, 3], &[1], &[4]]).unwrap());
    }

    #[test]
    fn enumeration_counts_match_bell() {
        for n in 1..=7 {
            let mut count = 0u64;
            for_each_partition(n, |_| true, |_| count += 1);
            assert_eq!(count, bell_number(n), "n={n}");
        }
    }

    #[test]
    fn enumeration_with_pruning() {
        // forbid cell 2 sharing a class with cell 1: exactly the partitions
        // of {1..4} where rgs[1] == 1
        let mut count = 0;
        for_each_partition(4, |prefix| prefix.len() < 2 || prefix[1] == 1, |_| count += 1);
        // partitions of 4 elements with 1 and 2 separated: Bell(4)-ish count
        let mut expect = 0;
        for_each_partition(
            4,
            |_| true,
            |p| {
                if !p.same_class(0, 1) {
                    expect += 1;
                }
            },
        );
        assert_eq!(count, expect);
        assert_eq!(count, 10);
    }

    #[test]
    fn parse_roundtrip() {
        let p = Partition::parse_classes(6, "1,4|2,5|3,6").unwrap();
        assert_eq!(p.display(), "{1,4},{2,5},{3,6}");
    }

    #[test]
    fn bell_numbers() {
        assert_eq!(bell_number(0), 1);
        assert_eq!(bell_number(5), 52);
        assert_eq!(bell_number(10), 115_975);
        assert_eq!(bell_number(13), 27_644_437);
    }
}
