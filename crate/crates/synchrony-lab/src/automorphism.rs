//! Automorphism groups of typed graphs, orbit partitions, and the
//! exotic / symmetry-forced classification of balanced partitions.

use serde::Serialize;
use thiserror::Error;

use crate::graph::NetworkGraph;
use crate::linalg::UnionFind;
use crate::partition::Partition;
use crate::synchrony::{is_balanced, SynchronyLattice};

pub const DEFAULT_MAX_CELLS: usize = 14;

#[derive(Debug, Error, PartialEq)]
pub enum AutomorphismError {
    #[error("graph has {n} cells, automorphism guard is {guard}")]
    TooManyCells { n: usize, guard: usize },
    #[error("partition is not balanced for this graph")]
    NotBalanced,
}

/// Bijection on cells; `image[c]` is the image of 0-based cell c.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { image: (0..n).collect() }
    }

    pub fn from_image(image: Vec<usize>) -> Self {
        let n = image.len();
        let mut seen = vec![false; n];
        for &i in &image {
            assert!(i < n && !seen[i], "not a bijection");
            seen[i] = true;
        }
        Permutation { image }
    }

    /// Build from disjoint cycles over 1-based cells; cells not
    /// mentioned stay fixed.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Self {
        let mut image: Vec<usize> = (0..n).collect();
        for cycle in cycles {
            for w in 0..cycle.len() {
                let from = cycle[w] - 1;
                let to = cycle[(w + 1) % cycle.len()] - 1;
                image[from] = to;
            }
        }
        Permutation::from_image(image)
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    #[inline]
    pub fn apply(&self, c: usize) -> usize {
        self.image[c]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// `self` after `other`: (self * other)(c) = self(other(c)).
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.n(), other.n());
        Permutation { image: other.image.iter().map(|&c| self.image[c]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut image = vec![0; self.n()];
        for (c, &t) in self.image.iter().enumerate() {
            image[t] = c;
        }
        Permutation { image }
    }

    /// Disjoint cycle notation over 1-based cells, fixed points omitted,
    /// e.g. `(1 4)(2 5)`. The identity prints as `()`.
    pub fn cycle_notation(&self) -> String {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = String::new();
        for start in 0..n {
            if seen[start] || self.image[start] == start {
                seen[start] = true;
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut c = self.image[start];
            while c != start {
                seen[c] = true;
                cycle.push(c);
                c = self.image[c];
            }
            out.push('(');
            let labels: Vec<String> = cycle.iter().map(|&c| (c + 1).to_string()).collect();
            out.push_str(&labels.join(" "));
            out.push(')');
        }
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }

    /// Action on a state vector: entry c moves to position γ(c).
    pub fn act_on_vector(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n());
        let mut out = vec![0.0; x.len()];
        for (c, &t) in self.image.iter().enumerate() {
            out[t] = x[c];
        }
        out
    }
}

/// Fully enumerated automorphism group with a small generating set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AutomorphismGroup {
    pub elements: Vec<Permutation>,
    pub generators: Vec<Permutation>,
}

impl AutomorphismGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.elements.binary_search(p).is_ok()
    }
}

/// Subgroup generated by `gens` inside the symmetric group, as a sorted
/// element list. Plain breadth-first closure; fine at desk scale.
pub fn generate_subgroup(n: usize, gens: &[Permutation]) -> Vec<Permutation> {
    let mut elements: std::collections::BTreeSet<Permutation> = std::collections::BTreeSet::new();
    elements.insert(Permutation::identity(n));
    let mut frontier: Vec<Permutation> = vec![Permutation::identity(n)];
    while let Some(p) = frontier.pop() {
        for g in gens {
            let q = g.compose(&p);
            if elements.insert(q.clone()) {
                frontier.push(q);
            }
        }
    }
    elements.into_iter().collect()
}

fn greedy_generators(elements: &[Permutation]) -> Vec<Permutation> {
    let n = match elements.first() {
        Some(p) => p.n(),
        None => return Vec::new(),
    };
    let mut gens: Vec<Permutation> = Vec::new();
    let mut closure = vec![Permutation::identity(n)];
    for p in elements {
        if p.is_identity() || closure.binary_search(p).is_ok() {
            continue;
        }
        gens.push(p.clone());
        closure = generate_subgroup(n, &gens);
        if closure.len() == elements.len() {
            break;
        }
    }
    gens
}

/// All permutations of the cells preserving cell classes, every
/// edge-class arrow relation, and weights. Backtracking with vertex
/// invariants (cell class plus per-class in/out degrees).
pub fn find_automorphisms(g: &NetworkGraph) -> Result<AutomorphismGroup, AutomorphismError> {
    find_automorphisms_guarded(g, DEFAULT_MAX_CELLS)
}

pub fn find_automorphisms_guarded(
    g: &NetworkGraph,
    max_cells: usize,
) -> Result<AutomorphismGroup, AutomorphismError> {
    let n = g.n_cells();
    if n > max_cells {
        return Err(AutomorphismError::TooManyCells { n, guard: max_cells });
    }
    let n_classes = g.n_edge_classes();
    assert!(n_classes <= 32, "edge-class bitmask limited to 32 classes");
    // mask[t*n + h]: bit k set iff class-k arrow t -> h exists
    let mut mask = vec![0u32; n * n];
    for k in 0..n_classes {
        for &(t, h) in g.arrows(k) {
            mask[t * n + h] |= 1 << k;
        }
    }
    let invariant: Vec<(usize, Vec<usize>, Vec<usize>)> = (0..n)
        .map(|c| {
            let ins: Vec<usize> = (0..n_classes).map(|k| g.inputs(k, c).len()).collect();
            let outs: Vec<usize> = (0..n_classes)
                .map(|k| g.arrows(k).iter().filter(|&&(t, _)| t == c).count())
                .collect();
            (g.cell_class(c), ins, outs)
        })
        .collect();

    let mut elements: Vec<Permutation> = Vec::new();
    let mut img = vec![usize::MAX; n];
    let mut used = vec![false; n];

    fn consistent(
        g: &NetworkGraph,
        mask: &[u32],
        n: usize,
        img: &[usize],
        c: usize,
        t: usize,
    ) -> bool {
        for d in 0..n {
            let id = img[d];
            if id == usize::MAX {
                continue;
            }
            if mask[c * n + d] != mask[t * n + id] || mask[d * n + c] != mask[id * n + t] {
                return false;
            }
            if g.has_weights()
                && (g.weight(c, d).to_bits() != g.weight(t, id).to_bits()
                    || g.weight(d, c).to_bits() != g.weight(id, t).to_bits())
            {
                return false;
            }
        }
        true
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(
        g: &NetworkGraph,
        mask: &[u32],
        invariant: &[(usize, Vec<usize>, Vec<usize>)],
        n: usize,
        depth: usize,
        img: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Permutation>,
    ) {
        if depth == n {
            out.push(Permutation::from_image(img.clone()));
            return;
        }
        for t in 0..n {
            if used[t] || invariant[t] != invariant[depth] {
                continue;
            }
            if !consistent(g, mask, n, img, depth, t) {
                continue;
            }
            img[depth] = t;
            used[t] = true;
            rec(g, mask, invariant, n, depth + 1, img, used, out);
            img[depth] = usize::MAX;
            used[t] = false;
        }
    }

    rec(g, &mask, &invariant, n, 0, &mut img, &mut used, &mut elements);
    elements.sort();
    let generators = greedy_generators(&elements);
    Ok(AutomorphismGroup { elements, generators })
}

/// Partition of `{1..n}` into orbits of the group generated by `perms`.
pub fn orbit_partition(perms: &[Permutation], n: usize) -> Partition {
    let mut uf = UnionFind::new(n);
    for p in perms {
        assert_eq!(p.n(), n);
        for c in 0..n {
            uf.union(c, p.apply(c));
        }
    }
    let labels: Vec<usize> = (0..n).map(|c| uf.find(c)).collect();
    Partition::from_labels(&labels)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ExoticVerdict {
    /// The pattern equals the orbit partition of a subgroup; the witness
    /// is the largest such subgroup (the stabilizer of the classes).
    Symmetric {
        witness: Vec<Permutation>,
    },
    Exotic,
}

impl ExoticVerdict {
    pub fn is_exotic(&self) -> bool {
        matches!(self, ExoticVerdict::Exotic)
    }
}

/// Decide whether a balanced partition is forced by symmetry. Any
/// subgroup whose orbits equal the classes of `p` fixes each class
/// setwise, hence lies in the class stabilizer H; conversely H-orbits
/// refine the classes. So `p` is symmetry-forced iff the orbits of H
/// are exactly the classes of `p`.
pub fn detect_exotic(g: &NetworkGraph, p: &Partition) -> Result<ExoticVerdict, AutomorphismError> {
    let aut = find_automorphisms(g)?;
    detect_exotic_with_group(g, p, &aut)
}

pub fn detect_exotic_with_group(
    g: &NetworkGraph,
    p: &Partition,
    aut: &AutomorphismGroup,
) -> Result<ExoticVerdict, AutomorphismError> {
    match is_balanced(g, p) {
        Ok(true) => {}
        _ => return Err(AutomorphismError::NotBalanced),
    }
    let n = g.n_cells();
    let stabilizer: Vec<Permutation> = aut
        .elements
        .iter()
        .filter(|gamma| (0..n).all(|c| p.class_of(gamma.apply(c)) == p.class_of(c)))
        .cloned()
        .collect();
    if &orbit_partition(&stabilizer, n) == p {
        Ok(ExoticVerdict::Symmetric { witness: stabilizer })
    } else {
        Ok(ExoticVerdict::Exotic)
    }
}

/// One orbit of the automorphism action on balanced partitions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugacyClass {
    /// lexicographically least growth string in the orbit
    pub representative: Partition,
    /// indices into the lattice's pattern list
    pub members: Vec<usize>,
    pub trivial: bool,
    pub total: bool,
}

/// Group the lattice's patterns into orbits under Aut(G).
pub fn conjugacy_group_patterns(
    g: &NetworkGraph,
    lattice: &SynchronyLattice,
) -> Result<Vec<ConjugacyClass>, AutomorphismError> {
    let aut = find_automorphisms(g)?;
    let mut assigned = vec![false; lattice.patterns.len()];
    let mut classes = Vec::new();
    for i in 0..lattice.patterns.len() {
        if assigned[i] {
            continue;
        }
        let entry = &lattice.patterns[i];
        let mut members = Vec::new();
        let mut representative = entry.partition.clone();
        for gamma in &aut.elements {
            let q = entry.partition.apply_permutation(gamma.image());
            if q.labels() < representative.labels() {
                representative = q.clone();
            }
            if let Some(j) = lattice.position_of(&q) {
                if !assigned[j] {
                    assigned[j] = true;
                    members.push(j);
                }
            }
        }
        members.sort_unstable();
        classes.push(ConjugacyClass {
            representative,
            members,
            trivial: entry.trivial,
            total: entry.total,
        });
    }
    classes.sort_by(|a, b| {
        (a.representative.n_classes(), a.representative.labels())
            .cmp(&(b.representative.n_classes(), b.representative.labels()))
    });
    Ok(classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NetworkGraph;
    use crate::synchrony::enumerate_synchrony;

    #[test]
    fn permutation_basics() {
        let p = Permutation::from_cycles(6, &[&[1, 4], &[2, 5]]);
        assert_eq!(p.cycle_notation(), "(1 4)(2 5)");
        assert_eq!(p.apply(0), 3);
        assert!(p.compose(&p).is_identity());
        let q = Permutation::from_cycles(6, &[&[1, 5, 6], &[2, 3, 4]]);
        assert_eq!(q.cycle_notation(), "(1 5 6)(2 3 4)");
        assert!(q.compose(&q.inverse()).is_identity());
        assert_eq!(Permutation::identity(4).cycle_notation(), "()");
    }

    #[test]
    fn orbit_partitions() {
        let n = 6;
        assert_eq!(orbit_partition(&[Permutation::identity(n)], n), Partition::singletons(n));
        let p = Permutation::from_cycles(n, &[&[1, 4], &[2, 5], &[3, 6]]);
        assert_eq!(orbit_partition(&[p], n), Partition::parse_classes(n, "1,4|2,5|3,6").unwrap());
        let q = Permutation::from_cycles(n, &[&[1, 5, 6], &[2, 3, 4]]);
        assert_eq!(orbit_partition(&[q], n), Partition::parse_classes(n, "1,5,6|2,3,4").unwrap());
    }

    #[test]
    fn ring_groups_are_dihedral() {
        for n in 3..=8 {
            let g = NetworkGraph::make_ring(n).unwrap();
            let aut = find_automorphisms(&g).unwrap();
            assert_eq!(aut.order(), 2 * n, "ring {n}");
        }
    }

    #[test]
    fn g6_group_order_48_with_pinned_elements() {
        let g = NetworkGraph::make_gn(6).unwrap();
        let aut = find_automorphisms(&g).unwrap();
        assert_eq!(aut.order(), 48);
        let rot = Permutation::from_cycles(6, &[&[1, 2, 3, 4, 5, 6]]);
        let refl = Permutation::from_image(vec![0, 5, 4, 3, 2, 1]);
        let t14 = Permutation::from_cycles(6, &[&[1, 4]]);
        let t25 = Permutation::from_cycles(6, &[&[2, 5]]);
        for p in [rot, refl, t14, t25] {
            assert!(aut.contains(&p), "{}", p.cycle_notation());
        }
    }

    #[test]
    fn fig5_group_order_12_with_pinned_generators() {
        let g = NetworkGraph::make_example("fig5").unwrap();
        let aut = find_automorphisms(&g).unwrap();
        assert_eq!(aut.order(), 12);
        for p in [
            Permutation::from_cycles(6, &[&[1, 5], &[2, 4]]),
            Permutation::from_cycles(6, &[&[1, 2], &[3, 6], &[4, 5]]),
            Permutation::from_cycles(6, &[&[1, 5, 6], &[2, 3, 4]]),
        ] {
            assert!(aut.contains(&p), "{}", p.cycle_notation());
        }
    }

    #[test]
    fn fig1_group_is_z2() {
        let g = NetworkGraph::make_example("fig1").unwrap();
        let aut = find_automorphisms(&g).unwrap();
        assert_eq!(aut.order(), 2);
        let sigma = Permutation::from_cycles(6, &[&[1, 2], &[3, 6], &[4, 5]]);
        assert!(aut.contains(&sigma));
        assert_eq!(aut.generators, vec![sigma]);
    }

    #[test]
    fn group_axioms_closure_and_inverses() {
        let g = NetworkGraph::make_gn(6).unwrap();
        let aut = find_automorphisms(&g).unwrap();
        for a in &aut.elements {
            assert!(aut.contains(&a.inverse()));
            for b in &aut.elements {
                assert!(aut.contains(&a.compose(b)));
            }
        }
        assert!(aut.contains(&Permutation::identity(6)));
        // generators regenerate the group
        assert_eq!(generate_subgroup(6, &aut.generators).len(), 48);
    }

    #[test]
    fn fig1_pattern_is_exotic() {
        let g = NetworkGraph::make_example("fig1").unwrap();
        let p = Partition::parse_classes(6, "1,4|2,5|3,6").unwrap();
        assert_eq!(detect_exotic(&g, &p), Ok(ExoticVerdict::Exotic));
    }

    #[test]
    fn g6_patterns_all_symmetric() {
        let g = NetworkGraph::make_gn(6).unwrap();
        let lat = enumerate_synchrony(&g).unwrap();
        let aut = find_automorphisms(&g).unwrap();
        for entry in &lat.patterns {
            let v = detect_exotic_with_group(&g, &entry.partition, &aut).unwrap();
            assert!(!v.is_exotic(), "{}", entry.partition.display());
        }
    }

    #[test]
    fn detect_exotic_rejects_unbalanced() {
        let g = NetworkGraph::make_gn(6).unwrap();
        let p = Partition::parse_classes(6, "1,2|3,4,5,6").unwrap();
        assert_eq!(detect_exotic(&g, &p), Err(AutomorphismError::NotBalanced));
    }

    #[test]
    fn subgroup_orbits_are_balanced() {
        for g in [
            NetworkGraph::make_gn(6).unwrap(),
            NetworkGraph::make_example("fig5").unwrap(),
            NetworkGraph::make_ring(6).unwrap(),
        ] {
            let aut = find_automorphisms(&g).unwrap();
            for gamma in &aut.elements {
                let p = orbit_partition(std::slice::from_ref(gamma), g.n_cells());
                assert_eq!(is_balanced(&g, &p), Ok(true), "{}", gamma.cycle_notation());
            }
        }
    }

    #[test]
    fn g6_conjugacy_classes() {
        let g = NetworkGraph::make_gn(6).unwrap();
        let lat = enumerate_synchrony(&g).unwrap();
        let classes = conjugacy_group_patterns(&g, &lat).unwrap();
        let nontrivial: Vec<&ConjugacyClass> =
            classes.iter().filter(|c| !c.trivial && !c.total).collect();
        assert_eq!(nontrivial.len(), 8);
        let members_total: usize = nontrivial.iter().map(|c| c.members.len()).sum();
        assert_eq!(members_total, 29);
        // every pattern lands in exactly one class
        let all: usize = classes.iter().map(|c| c.members.len()).sum();
        assert_eq!(all, lat.patterns.len());
    }

    #[test]
    fn fig5_conjugacy_classes() {
        let g = NetworkGraph::make_example("fig5").unwrap();
        let lat = enumerate_synchrony(&g).unwrap();
        let classes = conjugacy_group_patterns(&g, &lat).unwrap();
        let nontrivial: Vec<&ConjugacyClass> =
            classes.iter().filter(|c| !c.trivial && !c.total).collect();
        assert_eq!(nontrivial.len(), 5);
    }

    #[test]
    fn guard_rejects_large_graphs() {
        let g = NetworkGraph::make_gn(15).unwrap();
        assert_eq!(
            find_automorphisms(&g),
            Err(AutomorphismError::TooManyCells { n: 15, guard: 14 })
        );
    }
}
