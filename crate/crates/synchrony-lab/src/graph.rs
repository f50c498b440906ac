//! Typed network graphs over identical cells: construction, validation,
//! serialization, and the generators for the built-in example graphs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("self edge at cell {0}")]
    SelfEdge(usize),
    #[error("edge {{{0},{1}}} listed with conflicting classes")]
    ConflictingEdgeClass(usize, usize),
    #[error("edge class {class:?} spans incompatible cell classes")]
    CompatibilityViolation { class: String },
    #[error("malformed graph document: {0}")]
    MalformedDocument(String),
    #[error("cell id {0} out of range 1..={1}")]
    CellOutOfRange(usize, usize),
    #[error("graph needs at least {min} cells, got {got}")]
    TooFewCells { min: usize, got: usize },
    #[error("unknown built-in graph {0:?}")]
    UnknownName(String),
}

/// Typed graph over cells `1..=n` (0-based internally). Edges carry an
/// edge class; cells carry a cell class. Stored as directed arrows; a
/// bidirected graph holds both orientations of every edge, which is the
/// only form the dynamics layer accepts. Purely combinatorial analyses
/// (synchrony, automorphisms) also work on genuinely directed graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    n_cells: usize,
    cell_class: Vec<usize>,
    cell_class_names: Vec<String>,
    edge_class_names: Vec<String>,
    // arrows[k] = sorted (tail, head) pairs of edge class k
    arrows: Vec<Vec<(usize, usize)>>,
    // inputs[k][head] = sorted tails of class-k arrows into head
    inputs: Vec<Vec<Vec<usize>>>,
    weights: Option<BTreeMap<(usize, usize), f64>>,
    directed: bool,
}

/// Multiset of input-edge classes of one cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputSignature {
    pub cell: usize,
    pub multiset: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkClass {
    Regular,
    Homogeneous,
    Nonhomogeneous,
}

impl std::fmt::Display for NetworkClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            NetworkClass::Regular => "regular",
            NetworkClass::Homogeneous => "homogeneous",
            NetworkClass::Nonhomogeneous => "nonhomogeneous",
        };
        f.write_str(s)
    }
}

/// Per-edge-class adjacency matrix: entry (i, j) is the weight of the
/// arrow j -> i (1.0 when unweighted).
#[derive(Debug, Clone)]
pub struct AdjacencyMatrix {
    pub edge_class: String,
    pub entries: Matrix,
}

struct Builder {
    n: usize,
    cell_class: Vec<usize>,
    cell_class_names: Vec<String>,
    edge_class_names: Vec<String>,
    directed: bool,
}

impl Builder {
    fn new(n: usize, cell_classes: &[String], directed: bool) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::TooFewCells { min: 1, got: 0 });
        }
        if cell_classes.len() != n {
            return Err(GraphError::MalformedDocument(format!(
                "cell_classes has {} entries for {} cells",
                cell_classes.len(),
                n
            )));
        }
        let mut names: Vec<String> = Vec::new();
        let mut cell_class = Vec::with_capacity(n);
        for label in cell_classes {
            let idx = match names.iter().position(|x| x == label) {
                Some(i) => i,
                None => {
                    names.push(label.clone());
                    names.len() - 1
                }
            };
            cell_class.push(idx);
        }
        Ok(Builder {
            n,
            cell_class,
            cell_class_names: names,
            edge_class_names: Vec::new(),
            directed,
        })
    }

    fn class_index(&mut self, label: &str) -> usize {
        match self.edge_class_names.iter().position(|x| x == label) {
            Some(i) => i,
            None => {
                self.edge_class_names.push(label.to_string());
                self.edge_class_names.len() - 1
            }
        }
    }

    fn check_cell(&self, c: usize) -> Result<usize, GraphError> {
        if c == 0 || c > self.n {
            return Err(GraphError::CellOutOfRange(c, self.n));
        }
        Ok(c - 1)
    }

    fn finish(
        self,
        arrows: Vec<Vec<(usize, usize)>>,
        weights: Option<BTreeMap<(usize, usize), f64>>,
    ) -> Result<NetworkGraph, GraphError> {
        // compatibility: within one edge class the cell classes at the two
        // endpoints must not vary. Bidirected edges are compared as
        // unordered pairs, directed arrows as (tail, head) pairs.
        for (k, list) in arrows.iter().enumerate() {
            let mut pattern: Option<(usize, usize)> = None;
            for &(t, h) in list {
                let mut pair = (self.cell_class[t], self.cell_class[h]);
                if !self.directed && pair.0 > pair.1 {
                    pair = (pair.1, pair.0);
                }
                match pattern {
                    None => pattern = Some(pair),
                    Some(p) if p == pair => {}
                    Some(_) => {
                        return Err(GraphError::CompatibilityViolation {
                            class: self.edge_class_names[k].clone(),
                        })
                    }
                }
            }
        }
        let mut inputs = vec![vec![Vec::new(); self.n]; arrows.len()];
        for (k, list) in arrows.iter().enumerate() {
            for &(t, h) in list {
                inputs[k][h].push(t);
            }
            for v in inputs[k].iter_mut() {
                v.sort_unstable();
            }
        }
        Ok(NetworkGraph {
            n_cells: self.n,
            cell_class: self.cell_class,
            cell_class_names: self.cell_class_names,
            edge_class_names: self.edge_class_names,
            arrows,
            inputs,
            weights,
            directed: self.directed,
        })
    }
}

impl NetworkGraph {
    /// Bidirected graph from undirected typed edges with 1-based cells.
    pub fn from_undirected(
        n: usize,
        cell_classes: &[String],
        edges: &[(usize, usize, &str)],
    ) -> Result<Self, GraphError> {
        Self::from_undirected_weighted(n, cell_classes, edges, None)
    }

    pub fn from_undirected_weighted(
        n: usize,
        cell_classes: &[String],
        edges: &[(usize, usize, &str)],
        weights: Option<&BTreeMap<(usize, usize), f64>>,
    ) -> Result<Self, GraphError> {
        let mut b = Builder::new(n, cell_classes, false)?;
        // one class per unordered pair; duplicates collapse
        let mut pair_class: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &(u, v, class) in edges {
            let u0 = b.check_cell(u)?;
            let v0 = b.check_cell(v)?;
            if u0 == v0 {
                return Err(GraphError::SelfEdge(u));
            }
            let key = (u0.min(v0), u0.max(v0));
            let k = b.class_index(class);
            match pair_class.get(&key) {
                None => {
                    pair_class.insert(key, k);
                }
                Some(&k2) if k2 == k => {}
                Some(_) => return Err(GraphError::ConflictingEdgeClass(key.0 + 1, key.1 + 1)),
            }
        }
        let mut arrows = vec![Vec::new(); b.edge_class_names.len()];
        for (&(u, v), &k) in &pair_class {
            arrows[k].push((u, v));
            arrows[k].push((v, u));
        }
        for list in arrows.iter_mut() {
            list.sort_unstable();
        }
        let weights = match weights {
            None => None,
            Some(w) => {
                let mut table = BTreeMap::new();
                for (&(u, v), &wt) in w {
                    let u0 = b.check_cell(u)?;
                    let v0 = b.check_cell(v)?;
                    let key = (u0.min(v0), u0.max(v0));
                    if !pair_class.contains_key(&key) {
                        return Err(GraphError::MalformedDocument(format!(
                            "weight given for missing edge {u}-{v}"
                        )));
                    }
                    table.insert((u0, v0), wt);
                    table.insert((v0, u0), wt);
                }
                Some(table)
            }
        };
        b.finish(arrows, weights)
    }

    /// Directed graph from explicit 1-based (tail, head, class) arrows.
    /// Parallel arrows between the same pair are allowed across distinct
    /// edge classes (a pair of cells can interact through two channels).
    pub fn from_arrows(
        n: usize,
        cell_classes: &[String],
        arrow_list: &[(usize, usize, &str)],
    ) -> Result<Self, GraphError> {
        let mut b = Builder::new(n, cell_classes, true)?;
        let mut seen: BTreeMap<(usize, usize, usize), ()> = BTreeMap::new();
        let mut arrows: Vec<Vec<(usize, usize)>> = Vec::new();
        for &(t, h, class) in arrow_list {
            let t0 = b.check_cell(t)?;
            let h0 = b.check_cell(h)?;
            if t0 == h0 {
                return Err(GraphError::SelfEdge(t));
            }
            let k = b.class_index(class);
            if arrows.len() < b.edge_class_names.len() {
                arrows.resize(b.edge_class_names.len(), Vec::new());
            }
            if seen.insert((k, t0, h0), ()).is_none() {
                arrows[k].push((t0, h0));
            }
        }
        for list in arrows.iter_mut() {
            list.sort_unstable();
        }
        b.finish(arrows, None)
    }

    /// Ring of n cells with nearest neighbor coupling.
    pub fn make_ring(n: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::TooFewCells { min: 3, got: n });
        }
        let classes = vec!["a".to_string(); n];
        let edges: Vec<(usize, usize, &str)> = (1..=n).map(|i| (i, i % n + 1, "a")).collect();
        Self::from_undirected(n, &classes, &edges)
    }

    /// Circulant graph C_n(1,2): nearest and next nearest neighbors.
    pub fn make_gn(n: usize) -> Result<Self, GraphError> {
        if n < 5 {
            return Err(GraphError::TooFewCells { min: 5, got: n });
        }
        let classes = vec!["a".to_string(); n];
        let mut edges: Vec<(usize, usize, &str)> = Vec::with_capacity(2 * n);
        for i in 1..=n {
            edges.push((i, i % n + 1, "a"));
            edges.push((i, (i + 1) % n + 1, "a"));
        }
        Self::from_undirected(n, &classes, &edges)
    }

    /// Built-in example graphs.
    ///
    /// `fig1`: six identical cells with two arrow types, one source hub
    /// per type; its synchrony pattern {1,4},{2,5},{3,6} is not forced by
    /// any automorphism.
    /// `fig2`: nonhomogeneous bidirected graph with cell classes
    /// {1,2,4,5} and {3,6}.
    /// `fig5`: homogeneous six-cell graph with two edge classes, each
    /// cell carrying two inputs of either class.
    pub fn make_example(name: &str) -> Result<Self, GraphError> {
        match name {
            "fig1" => {
                let classes = vec!["a".to_string(); 6];
                let arrows = [
                    (3, 1, "solid"),
                    (3, 4, "solid"),
                    (3, 6, "solid"),
                    (6, 2, "solid"),
                    (6, 3, "solid"),
                    (6, 5, "solid"),
                    (3, 1, "dashed"),
                    (3, 5, "dashed"),
                    (3, 6, "dashed"),
                    (6, 2, "dashed"),
                    (6, 3, "dashed"),
                    (6, 4, "dashed"),
                ];
                Self::from_arrows(6, &classes, &arrows)
            }
            "fig2" => {
                let classes: Vec<String> =
                    ["p", "p", "q", "p", "p", "q"].iter().map(|s| s.to_string()).collect();
                let edges = [
                    (1, 2, "theta"),
                    (1, 5, "theta"),
                    (2, 4, "theta"),
                    (4, 5, "theta"),
                    (1, 6, "phi"),
                    (2, 3, "phi"),
                    (3, 4, "phi"),
                    (5, 6, "phi"),
                ];
                Self::from_undirected(6, &classes, &edges)
            }
            "fig5" => {
                let classes = vec!["a".to_string(); 6];
                let edges = [
                    (1, 2, "sin"),
                    (1, 3, "sin"),
                    (2, 6, "sin"),
                    (3, 5, "sin"),
                    (4, 5, "sin"),
                    (4, 6, "sin"),
                    (1, 5, "id"),
                    (1, 6, "id"),
                    (2, 3, "id"),
                    (2, 4, "id"),
                    (3, 4, "id"),
                    (5, 6, "id"),
                ];
                Self::from_undirected(6, &classes, &edges)
            }
            other => Err(GraphError::UnknownName(other.to_string())),
        }
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn has_weights(&self) -> bool {
        self.weights.is_some()
    }

    pub fn n_edge_classes(&self) -> usize {
        self.edge_class_names.len()
    }

    pub fn edge_class_names(&self) -> &[String] {
        &self.edge_class_names
    }

    pub fn cell_class_names(&self) -> &[String] {
        &self.cell_class_names
    }

    /// Cell class index of 0-based cell.
    #[inline]
    pub fn cell_class(&self, c: usize) -> usize {
        self.cell_class[c]
    }

    pub fn cell_class_name(&self, c: usize) -> &str {
        &self.cell_class_names[self.cell_class[c]]
    }

    /// All (tail, head) arrows of one edge class, 0-based, sorted.
    pub fn arrows(&self, class: usize) -> &[(usize, usize)] {
        &self.arrows[class]
    }

    /// Sorted tails of class-k arrows into `head` (0-based).
    #[inline]
    pub fn inputs(&self, class: usize, head: usize) -> &[usize] {
        &self.inputs[class][head]
    }

    /// Arrow weight, 1.0 when the graph is unweighted.
    #[inline]
    pub fn weight(&self, tail: usize, head: usize) -> f64 {
        match &self.weights {
            None => 1.0,
            Some(w) => w.get(&(tail, head)).copied().unwrap_or(1.0),
        }
    }

    /// Total number of arrows across classes; a bidirected graph counts
    /// each undirected edge twice.
    pub fn n_arrows(&self) -> usize {
        self.arrows.iter().map(|a| a.len()).sum()
    }

    /// Undirected edge list (u < v, class index), only for bidirected graphs.
    pub fn undirected_edges(&self) -> Vec<(usize, usize, usize)> {
        assert!(!self.directed, "directed graphs have no undirected edge list");
        let mut out = Vec::new();
        for (k, list) in self.arrows.iter().enumerate() {
            for &(t, h) in list {
                if t < h {
                    out.push((t, h, k));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn input_signature(&self, cell_1based: usize) -> InputSignature {
        let c = cell_1based - 1;
        let mut multiset = BTreeMap::new();
        for (k, name) in self.edge_class_names.iter().enumerate() {
            let count = self.inputs[k][c].len();
            if count > 0 {
                multiset.insert(name.clone(), count);
            }
        }
        InputSignature { cell: cell_1based, multiset }
    }

    pub fn classify(&self) -> NetworkClass {
        let first = self.input_signature(1).multiset;
        let homogeneous = (2..=self.n_cells).all(|c| self.input_signature(c).multiset == first);
        if homogeneous && self.edge_class_names.len() == 1 {
            NetworkClass::Regular
        } else if homogeneous {
            NetworkClass::Homogeneous
        } else {
            NetworkClass::Nonhomogeneous
        }
    }

    /// One n x n matrix per edge class; entry (i, j) is the weight of
    /// arrow j -> i, so row i collects the inputs of cell i.
    pub fn adjacency_matrices(&self) -> Vec<AdjacencyMatrix> {
        self.edge_class_names
            .iter()
            .enumerate()
            .map(|(k, name)| {
                let mut m = Matrix::zeros(self.n_cells);
                for &(t, h) in &self.arrows[k] {
                    m.add_to(h, t, self.weight(t, h));
                }
                AdjacencyMatrix { edge_class: name.clone(), entries: m }
            })
            .collect()
    }

    pub fn max_abs_weight(&self) -> f64 {
        match &self.weights {
            None => 1.0,
            Some(w) => w.values().fold(1.0f64, |m, v| m.max(v.abs())),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    u: usize,
    v: usize,
    class: String,
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    cells: usize,
    cell_classes: Vec<String>,
    edges: Vec<EdgeDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    directed: bool,
}

fn parse_weight_key(key: &str) -> Result<(usize, usize), GraphError> {
    let mut it = key.splitn(2, '-');
    let bad = || GraphError::MalformedDocument(format!("weight key {key:?} is not \"u-v\""));
    let u = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    let v = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    Ok((u, v))
}

/// Parse a graph document; see the README for the schema. Directed
/// duplicates of an undirected edge collapse; with `"directed": true`
/// entries are read as (tail, head) arrows.
pub fn parse_graph(document: &str) -> Result<NetworkGraph, GraphError> {
    let doc: GraphDoc =
        serde_json::from_str(document).map_err(|e| GraphError::MalformedDocument(e.to_string()))?;
    let edges: Vec<(usize, usize, &str)> =
        doc.edges.iter().map(|e| (e.u, e.v, e.class.as_str())).collect();
    if doc.directed {
        if doc.weights.is_some() {
            return Err(GraphError::MalformedDocument(
                "weights are not supported on directed graphs".into(),
            ));
        }
        return NetworkGraph::from_arrows(doc.cells, &doc.cell_classes, &edges);
    }
    let weights = match &doc.weights {
        None => None,
        Some(w) => {
            let mut table = BTreeMap::new();
            for (key, &wt) in w {
                table.insert(parse_weight_key(key)?, wt);
            }
            Some(table)
        }
    };
    NetworkGraph::from_undirected_weighted(doc.cells, &doc.cell_classes, &edges, weights.as_ref())
}

/// Canonical serialization: edges grouped by class, sorted within each
/// class, u < v when undirected; weights keyed "u-v" with u < v.
/// Golden files depend on this exact order.
pub fn serialize_graph(g: &NetworkGraph) -> String {
    let cell_classes: Vec<String> =
        (0..g.n_cells()).map(|c| g.cell_class_name(c).to_string()).collect();
    // group by class in index order so a reparse assigns the same
    // class indices back
    let (edges, weights) = if g.directed {
        let mut list = Vec::new();
        for (k, name) in g.edge_class_names.iter().enumerate() {
            let mut arrows = g.arrows[k].clone();
            arrows.sort_unstable();
            for (t, h) in arrows {
                list.push(EdgeDoc { u: t + 1, v: h + 1, class: name.clone() });
            }
        }
        (list, None)
    } else {
        let mut by_class = g.undirected_edges();
        by_class.sort_by_key(|&(u, v, k)| (k, u, v));
        let list: Vec<EdgeDoc> = by_class
            .into_iter()
            .map(|(u, v, k)| EdgeDoc { u: u + 1, v: v + 1, class: g.edge_class_names[k].clone() })
            .collect();
        let weights = g.weights.as_ref().map(|w| {
            w.iter()
                .filter(|(&(u, v), _)| u < v)
                .map(|(&(u, v), &wt)| (format!("{}-{}", u + 1, v + 1), wt))
                .collect::<BTreeMap<String, f64>>()
        });
        (list, weights)
    };
    let doc = GraphDoc { cells: g.n_cells(), cell_classes, edges, weights, directed: g.directed };
    serde_json::to_string_pretty(&doc).expect("graph document serializes")
}
