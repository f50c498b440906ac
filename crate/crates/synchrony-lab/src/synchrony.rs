//! Balanced partitions (synchrony subspaces) and their refinement lattice.
//!
//! Two independent routes decide whether a partition is balanced: the
//! combinatorial input-count check and invariance of the polydiagonal
//! under the adjacency matrices. They are kept separate on purpose and
//! cross-validated in tests.

use serde::Serialize;
use thiserror::Error;

use crate::graph::NetworkGraph;
use crate::partition::{for_each_partition, Partition};

pub const DEFAULT_MAX_CELLS: usize = 13;

#[derive(Debug, Error, PartialEq)]
pub enum SynchronyError {
    #[error("partition merges cells {0} and {1} from different cell classes")]
    MixedCellClasses(usize, usize),
    #[error("graph has {n} cells, enumeration guard is {guard}")]
    TooManyCells { n: usize, guard: usize },
    #[error("partition covers {got} cells, graph has {want}")]
    SizeMismatch { got: usize, want: usize },
}

/// One balanced partition in a lattice, with its role flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternEntry {
    pub partition: Partition,
    /// singleton partition (no synchrony at all)
    pub trivial: bool,
    /// total synchrony (one class)
    pub total: bool,
}

/// All balanced partitions of a graph plus the containment relation of
/// their polydiagonal subspaces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynchronyLattice {
    pub patterns: Vec<PatternEntry>,
    /// (i, j) present iff subspace of pattern i is strictly contained in
    /// subspace of pattern j, i.e. partition j strictly refines i.
    pub refinement_edges: Vec<(usize, usize)>,
}

impl SynchronyLattice {
    pub fn nontrivial(&self) -> impl Iterator<Item = &PatternEntry> {
        self.patterns.iter().filter(|p| !p.trivial && !p.total)
    }

    pub fn position_of(&self, p: &Partition) -> Option<usize> {
        self.patterns.iter().position(|e| &e.partition == p)
    }
}

fn check_sizes(g: &NetworkGraph, p: &Partition) -> Result<(), SynchronyError> {
    if p.n_cells() != g.n_cells() {
        return Err(SynchronyError::SizeMismatch { got: p.n_cells(), want: g.n_cells() });
    }
    Ok(())
}

fn check_cell_classes(g: &NetworkGraph, p: &Partition) -> Result<(), SynchronyError> {
    let mut first: Vec<Option<usize>> = vec![None; p.n_classes()];
    for c in 0..g.n_cells() {
        let k = p.class_of(c);
        match first[k] {
            None => first[k] = Some(c),
            Some(f) => {
                if g.cell_class(f) != g.cell_class(c) {
                    return Err(SynchronyError::MixedCellClasses(f + 1, c + 1));
                }
            }
        }
    }
    Ok(())
}

/// Input count key: how many inputs a cell receives per source class,
/// split by weight so distinct weights never alias. Unweighted graphs
/// only ever see the 1.0 bucket, which keeps the check exact integer
/// combinatorics.
fn input_counts(
    g: &NetworkGraph,
    p: &Partition,
    edge_class: usize,
    cell: usize,
) -> Vec<(usize, u64, usize)> {
    let mut counts: std::collections::BTreeMap<(usize, u64), usize> =
        std::collections::BTreeMap::new();
    for &src in g.inputs(edge_class, cell) {
        let w = g.weight(src, cell).to_bits();
        *counts.entry((p.class_of(src), w)).or_insert(0) += 1;
    }
    counts.into_iter().map(|((j, w), c)| (j, w, c)).collect()
}

/// Combinatorial balance check: for every class K of `p`, every edge
/// class, and every class J, each cell of K receives the same number of
/// inputs from J. Errors (rather than answering false) when `p` merges
/// cells from different cell classes, so enumeration can prune.
pub fn is_balanced(g: &NetworkGraph, p: &Partition) -> Result<bool, SynchronyError> {
    check_sizes(g, p)?;
    check_cell_classes(g, p)?;
    for k in 0..g.n_edge_classes() {
        let mut seen: Vec<Option<Vec<(usize, u64, usize)>>> = vec![None; p.n_classes()];
        for c in 0..g.n_cells() {
            let counts = input_counts(g, p, k, c);
            match &seen[p.class_of(c)] {
                None => seen[p.class_of(c)] = Some(counts),
                Some(prev) => {
                    if prev != &counts {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Adjacency route: the polydiagonal of `p` is invariant under every
/// per-class adjacency matrix iff row sums over each class J are
/// constant on each class K. Integer arithmetic when unweighted;
/// weighted sums are accumulated in sorted order and compared with a
/// scaled 1e-12 tolerance.
pub fn is_invariant_under_adjacency(g: &NetworkGraph, p: &Partition) -> bool {
    assert_eq!(p.n_cells(), g.n_cells());
    if !g.has_weights() {
        for k in 0..g.n_edge_classes() {
            let mut seen: Vec<Option<Vec<usize>>> = vec![None; p.n_classes()];
            for c in 0..g.n_cells() {
                let mut row = vec![0usize; p.n_classes()];
                for &src in g.inputs(k, c) {
                    row[p.class_of(src)] += 1;
                }
                match &seen[p.class_of(c)] {
                    None => seen[p.class_of(c)] = Some(row),
                    Some(prev) => {
                        if prev != &row {
                            return false;
                        }
                    }
                }
            }
        }
        return true;
    }
    let tol = 1e-12 * (1.0 + g.max_abs_weight() * g.n_cells() as f64);
    for k in 0..g.n_edge_classes() {
        let mut seen: Vec<Option<Vec<f64>>> = vec![None; p.n_classes()];
        for c in 0..g.n_cells() {
            let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); p.n_classes()];
            for &src in g.inputs(k, c) {
                buckets[p.class_of(src)].push(g.weight(src, c));
            }
            let row: Vec<f64> = buckets
                .into_iter()
                .map(|mut b| {
                    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
                    b.into_iter().sum()
                })
                .collect();
            match &seen[p.class_of(c)] {
                None => seen[p.class_of(c)] = Some(row),
                Some(prev) => {
                    if prev.iter().zip(&row).any(|(a, b)| (a - b).abs() > tol) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Partial-balance feasibility for an enumeration prefix. Cells
/// `0..assigned` carry classes; inputs from unassigned cells provide
/// slack. Sound (never prunes a completable prefix) because a future
/// assignment can only move counts by at most the slack.
fn prefix_feasible(g: &NetworkGraph, rgs: &[usize]) -> bool {
    let assigned = rgs.len();
    let n_classes = rgs.iter().max().map_or(0, |m| m + 1);
    // same-class cells must share cell class and full input signature
    let mut rep: Vec<Option<usize>> = vec![None; n_classes];
    for c in 0..assigned {
        match rep[rgs[c]] {
            None => rep[rgs[c]] = Some(c),
            Some(r) => {
                if g.cell_class(r) != g.cell_class(c) {
                    return false;
                }
                for k in 0..g.n_edge_classes() {
                    if g.inputs(k, r).len() != g.inputs(k, c).len() {
                        return false;
                    }
                }
            }
        }
    }
    for k in 0..g.n_edge_classes() {
        let mut counts: Vec<Vec<usize>> = Vec::with_capacity(assigned);
        let mut slack: Vec<usize> = Vec::with_capacity(assigned);
        for c in 0..assigned {
            let mut row = vec![0usize; n_classes];
            let mut un = 0usize;
            for &src in g.inputs(k, c) {
                if src < assigned {
                    row[rgs[src]] += 1;
                } else {
                    un += 1;
                }
            }
            counts.push(row);
            slack.push(un);
        }
        for c in 0..assigned {
            let r = rep[rgs[c]].unwrap();
            if r == c {
                continue;
            }
            for (&a, &b) in counts[r].iter().zip(&counts[c]) {
                if a > b + slack[c] || b > a + slack[r] {
                    return false;
                }
            }
        }
    }
    true
}

/// Enumerate every balanced partition and assemble the refinement
/// lattice. Deterministic order: ascending class count, then
/// lexicographic on the growth string.
pub fn enumerate_synchrony(g: &NetworkGraph) -> Result<SynchronyLattice, SynchronyError> {
    enumerate_synchrony_guarded(g, DEFAULT_MAX_CELLS)
}

pub fn enumerate_synchrony_guarded(
    g: &NetworkGraph,
    max_cells: usize,
) -> Result<SynchronyLattice, SynchronyError> {
    let n = g.n_cells();
    if n > max_cells {
        return Err(SynchronyError::TooManyCells { n, guard: max_cells });
    }
    let mut balanced: Vec<Partition> = Vec::new();
    for_each_partition(
        n,
        |prefix| prefix_feasible(g, prefix),
        |p| {
            if is_balanced(g, p) == Ok(true) {
                balanced.push(p.clone());
            }
        },
    );
    balanced.sort_by(|a, b| (a.n_classes(), a.labels()).cmp(&(b.n_classes(), b.labels())));
    let patterns: Vec<PatternEntry> = balanced
        .into_iter()
        .map(|partition| {
            let trivial = partition.is_singletons();
            let total = partition.is_total();
            PatternEntry { partition, trivial, total }
        })
        .collect();
    let mut refinement_edges = Vec::new();
    for i in 0..patterns.len() {
        for j in 0..patterns.len() {
            if i == j {
                continue;
            }
            let (pi, pj) = (&patterns[i].partition, &patterns[j].partition);
            if pi != pj && pj.refines(pi) {
                refinement_edges.push((i, j));
            }
        }
    }
    Ok(SynchronyLattice { patterns, refinement_edges })
}
