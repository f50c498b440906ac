//! Vector fields whose Jacobians are Laplacian everywhere: maps built
//! from a scalar potential in difference coordinates, and additive
//! pairwise-coupling systems on bidirected graphs.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse_expr, Expr, ExprError};
use crate::graph::{GraphError, NetworkGraph};
use crate::linalg::Matrix;

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("edge class {class:?} has no coupling function")]
    MissingCoupling { class: String },
    #[error("cell class {class:?} has no constant term")]
    MissingConstant { class: String },
    #[error("additive systems require a bidirected graph")]
    NotBidirected,
    #[error("system document is malformed: {0}")]
    MalformedDocument(String),
}

/// A field on R^n is determined by a scalar g of the n-1 difference
/// coordinates t_i = x_i - x_n together with a constant k.
#[derive(Debug, Clone)]
pub struct DifferencePotential {
    n: usize,
    g: Expr,
    source: String,
    k: f64,
}

impl DifferencePotential {
    pub fn new(n: usize, g_source: &str, k: f64) -> Result<Self, FieldError> {
        assert!(n >= 2, "need at least two coordinates");
        let g = parse_expr(g_source, n - 1)?;
        Ok(DifferencePotential { n, g, source: g_source.to_string(), k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

/// Maps R^n -> R^n with symmetric zero-row-sum Jacobian everywhere.
pub trait VectorField {
    fn dim(&self) -> usize;

    fn evaluate(&self, x: &[f64]) -> Vec<f64>;

    /// Exact Jacobian when the field carries one; None means callers
    /// must fall back to finite differences.
    fn analytic_jacobian(&self, _x: &[f64]) -> Option<Matrix> {
        None
    }

    /// Scalar function that decreases along trajectories, when the
    /// field is an explicit negative gradient.
    fn descent_potential(&self, _x: &[f64]) -> Option<f64> {
        None
    }
}

/// Central-difference Jacobian with step h = 1e-5 * (1 + |x|_inf).
pub fn finite_difference_jacobian(f: &dyn VectorField, x: &[f64]) -> Matrix {
    let n = f.dim();
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let h = 1e-5 * (1.0 + scale);
    let mut jac = Matrix::zeros(n);
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    for j in 0..n {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        let fp = f.evaluate(&xp);
        let fm = f.evaluate(&xm);
        for i in 0..n {
            jac.set(i, j, (fp[i] - fm[i]) / (2.0 * h));
        }
        xp[j] = x[j];
        xm[j] = x[j];
    }
    jac
}

/// Field derived from a difference potential: the first n-1 components
/// are the partials of g in difference coordinates, the last balances
/// the sum to the constant k.
#[derive(Debug, Clone)]
pub struct PotentialField {
    n: usize,
    g: Expr,
    partials: Vec<Expr>,
    hessian: Vec<Vec<Expr>>,
    k: f64,
}

pub fn laplacian_map_from_potential(p: &DifferencePotential) -> Result<PotentialField, FieldError> {
    let m = p.n - 1;
    let mut partials = Vec::with_capacity(m);
    for i in 0..m {
        partials.push(p.g.differentiate(i)?);
    }
    let mut hessian = Vec::with_capacity(m);
    for gi in &partials {
        let mut row = Vec::with_capacity(m);
        for j in 0..m {
            row.push(gi.differentiate(j)?);
        }
        hessian.push(row);
    }
    Ok(PotentialField { n: p.n, g: p.g.clone(), partials, hessian, k: p.k })
}

impl PotentialField {
    fn differences(&self, x: &[f64]) -> Vec<f64> {
        let last = x[self.n - 1];
        x[..self.n - 1].iter().map(|v| v - last).collect()
    }
}

impl VectorField for PotentialField {
    fn dim(&self) -> usize {
        self.n
    }

    fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let t = self.differences(x);
        let mut f: Vec<f64> = self.partials.iter().map(|p| p.eval(&t)).collect();
        let sum: f64 = f.iter().sum();
        f.push(self.k - sum);
        f
    }

    fn analytic_jacobian(&self, x: &[f64]) -> Option<Matrix> {
        let t = self.differences(x);
        let m = self.n - 1;
        let mut jac = Matrix::zeros(self.n);
        for i in 0..m {
            let mut row_sum = 0.0;
            for j in 0..m {
                let h = self.hessian[i][j].eval(&t);
                jac.set(i, j, h);
                row_sum += h;
            }
            jac.set(i, m, -row_sum);
        }
        // last row keeps columns summing to zero
        for j in 0..self.n {
            let mut col_sum = 0.0;
            for i in 0..m {
                col_sum += jac.get(i, j);
            }
            jac.set(m, j, -col_sum);
        }
        Some(jac)
    }

    fn descent_potential(&self, x: &[f64]) -> Option<f64> {
        let t = self.differences(x);
        Some(-self.g.eval(&t) - self.k * x[self.n - 1])
    }
}

/// Pairwise coupling function, odd by construction in every variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OddCoupling {
    Sine {
        amplitude: f64,
    },
    Linear {
        slope: f64,
    },
    /// coefficients c_i of t^(2i+1)
    OddPolynomial {
        coefficients: Vec<f64>,
    },
    /// terms (a_m, m) of sum a_m * sin(m t)
    ScaledSineSum {
        terms: Vec<(f64, u32)>,
    },
}

impl OddCoupling {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            OddCoupling::Sine { amplitude } => amplitude * t.sin(),
            OddCoupling::Linear { slope } => slope * t,
            OddCoupling::OddPolynomial { coefficients } => {
                let mut acc = 0.0;
                let mut pow = t;
                for c in coefficients {
                    acc += c * pow;
                    pow *= t * t;
                }
                acc
            }
            OddCoupling::ScaledSineSum { terms } => {
                terms.iter().map(|&(a, m)| a * (m as f64 * t).sin()).sum()
            }
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        match self {
            OddCoupling::Sine { amplitude } => amplitude * t.cos(),
            OddCoupling::Linear { slope } => *slope,
            OddCoupling::OddPolynomial { coefficients } => {
                let mut acc = 0.0;
                let mut pow = 1.0;
                for (i, c) in coefficients.iter().enumerate() {
                    let e = (2 * i + 1) as f64;
                    acc += c * e * pow;
                    pow *= t * t;
                }
                acc
            }
            OddCoupling::ScaledSineSum { terms } => {
                terms.iter().map(|&(a, m)| a * m as f64 * (m as f64 * t).cos()).sum()
            }
        }
    }

    /// Even antiderivative normalized to vanish at zero.
    pub fn antideriv(&self, t: f64) -> f64 {
        match self {
            OddCoupling::Sine { amplitude } => amplitude * (1.0 - t.cos()),
            OddCoupling::Linear { slope } => slope * t * t / 2.0,
            OddCoupling::OddPolynomial { coefficients } => {
                let mut acc = 0.0;
                let mut pow = t * t;
                for (i, c) in coefficients.iter().enumerate() {
                    let e = (2 * i + 2) as f64;
                    acc += c * pow / e;
                    pow *= t * t;
                }
                acc
            }
            OddCoupling::ScaledSineSum { terms } => {
                terms.iter().map(|&(a, m)| a / m as f64 * (1.0 - (m as f64 * t).cos())).sum()
            }
        }
    }

    pub fn is_2pi_periodic(&self) -> bool {
        match self {
            OddCoupling::Sine { .. } | OddCoupling::ScaledSineSum { .. } => true,
            OddCoupling::Linear { slope } => *slope == 0.0,
            OddCoupling::OddPolynomial { coefficients } => coefficients.iter().all(|c| *c == 0.0),
        }
    }
}

/// System x' = f(x) with f_c = k_[c] + sum over inputs d of
/// phi_[class](x_d - x_c); the Jacobian is Laplacian at every point.
#[derive(Debug, Clone)]
pub struct AdditiveLaplacianSystem {
    graph: NetworkGraph,
    /// per edge class, graph index order
    couplings: Vec<OddCoupling>,
    /// per cell class, graph index order
    constants: Vec<f64>,
}

pub fn build_additive_system(
    graph: &NetworkGraph,
    couplings: &BTreeMap<String, OddCoupling>,
    constants: &BTreeMap<String, f64>,
) -> Result<AdditiveLaplacianSystem, FieldError> {
    if graph.is_directed() {
        return Err(FieldError::NotBidirected);
    }
    let mut by_class = Vec::with_capacity(graph.n_edge_classes());
    for name in graph.edge_class_names() {
        let c = couplings
            .get(name)
            .ok_or_else(|| FieldError::MissingCoupling { class: name.clone() })?;
        by_class.push(c.clone());
    }
    let mut ks = Vec::with_capacity(graph.cell_class_names().len());
    for name in graph.cell_class_names() {
        let k = constants
            .get(name)
            .ok_or_else(|| FieldError::MissingConstant { class: name.clone() })?;
        ks.push(*k);
    }
    Ok(AdditiveLaplacianSystem { graph: graph.clone(), couplings: by_class, constants: ks })
}

impl AdditiveLaplacianSystem {
    pub fn graph(&self) -> &NetworkGraph {
        &self.graph
    }

    pub fn coupling(&self, edge_class: usize) -> &OddCoupling {
        &self.couplings[edge_class]
    }

    pub fn constant(&self, cell_class: usize) -> f64 {
        self.constants[cell_class]
    }

    /// Sum of the constant terms over cells; equals sum f_c(x) everywhere.
    pub fn constant_sum(&self) -> f64 {
        (0..self.graph.n_cells()).map(|c| self.constants[self.graph.cell_class(c)]).sum()
    }

    /// The dynamics close on the torus exactly when every coupling has
    /// period 2 pi.
    pub fn torus_reducible(&self) -> bool {
        self.couplings.iter().all(|c| c.is_2pi_periodic())
    }

    pub fn jacobian(&self, x: &[f64]) -> Matrix {
        let n = self.graph.n_cells();
        assert_eq!(x.len(), n);
        let mut jac = Matrix::zeros(n);
        for c in 0..n {
            let mut diag = 0.0;
            for (k, phi) in self.couplings.iter().enumerate() {
                for &d in self.graph.inputs(k, c) {
                    let w = self.graph.weight(d, c) * phi.deriv(x[d] - x[c]);
                    jac.add_to(c, d, w);
                    diag -= w;
                }
            }
            jac.add_to(c, c, diag);
        }
        jac
    }

    /// Descent function: sum of even antiderivatives over undirected
    /// edges minus the linear constant term, so that f = -grad.
    pub fn potential(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for (u, v, k) in self.graph.undirected_edges() {
            total += self.graph.weight(u, v) * self.couplings[k].antideriv(x[v] - x[u]);
        }
        for (c, &xc) in x.iter().enumerate().take(self.graph.n_cells()) {
            total -= self.constants[self.graph.cell_class(c)] * xc;
        }
        total
    }
}

impl VectorField for AdditiveLaplacianSystem {
    fn dim(&self) -> usize {
        self.graph.n_cells()
    }

    fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let n = self.graph.n_cells();
        assert_eq!(x.len(), n);
        let mut f = Vec::with_capacity(n);
        for c in 0..n {
            let mut acc = self.constants[self.graph.cell_class(c)];
            for (k, phi) in self.couplings.iter().enumerate() {
                for &d in self.graph.inputs(k, c) {
                    acc += self.graph.weight(d, c) * phi.eval(x[d] - x[c]);
                }
            }
            f.push(acc);
        }
        f
    }

    fn analytic_jacobian(&self, x: &[f64]) -> Option<Matrix> {
        Some(self.jacobian(x))
    }

    fn descent_potential(&self, x: &[f64]) -> Option<f64> {
        Some(self.potential(x))
    }
}

/// Per-sample Laplacian structure check of a field's Jacobian.
#[derive(Debug, Clone, Serialize)]
pub struct LaplacianCheckReport {
    pub samples: usize,
    pub max_symmetry_defect: f64,
    pub max_row_sum_defect: f64,
    /// worst relative disagreement between analytic and
    /// finite-difference Jacobians, when the field has one
    pub max_fd_relative_error: Option<f64>,
    pub defect_tol: f64,
    pub fd_relative_tol: f64,
    pub pass: bool,
}

pub const LAPLACIAN_CHECK_DEFECT_TOL: f64 = 1e-8;
pub const LAPLACIAN_CHECK_FD_TOL: f64 = 1e-4;

/// Check symmetry and zero row sums of the Jacobian at each sample
/// point, via finite differences and the analytic form when present.
pub fn verify_laplacian_map(
    f: &dyn VectorField,
    sample_points: &[Vec<f64>],
) -> LaplacianCheckReport {
    let mut max_sym = 0.0f64;
    let mut max_row = 0.0f64;
    let mut max_fd: Option<f64> = None;
    for x in sample_points {
        let fd = finite_difference_jacobian(f, x);
        let (jac, fd_err) = match f.analytic_jacobian(x) {
            Some(a) => {
                let mut diff = 0.0f64;
                for i in 0..a.n() {
                    for j in 0..a.n() {
                        diff = diff.max((a.get(i, j) - fd.get(i, j)).abs());
                    }
                }
                let rel = diff / (1.0 + a.max_abs_entry());
                (a, Some(rel))
            }
            None => (fd, None),
        };
        max_sym = max_sym.max(jac.symmetry_defect());
        max_row = max_row.max(jac.row_sum_defect());
        if let Some(e) = fd_err {
            max_fd = Some(max_fd.unwrap_or(0.0).max(e));
        }
    }
    let scale =
        1.0 + sample_points.iter().flat_map(|x| x.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let defect_tol = LAPLACIAN_CHECK_DEFECT_TOL * scale;
    let pass = max_sym <= defect_tol
        && max_row <= defect_tol
        && max_fd.is_none_or(|e| e <= LAPLACIAN_CHECK_FD_TOL);
    LaplacianCheckReport {
        samples: sample_points.len(),
        max_symmetry_defect: max_sym,
        max_row_sum_defect: max_row,
        max_fd_relative_error: max_fd,
        defect_tol,
        fd_relative_tol: LAPLACIAN_CHECK_FD_TOL,
        pass,
    }
}

/// Draw sample points uniformly from [-radius, radius]^n.
pub fn sample_points<R: Rng>(rng: &mut R, n: usize, count: usize, radius: f64) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..n).map(|_| rng.gen_range(-radius..radius)).collect()).collect()
}

/// Sign condition on couplings near the origin: t * phi(t) > 0 for all
/// t in (-epsilon, epsilon) away from zero.
#[derive(Debug, Clone, Serialize)]
pub struct CouplingSignReport {
    pub epsilon: f64,
    pub per_coupling: Vec<CouplingSignEntry>,
    /// every coupling kept the product positive at all sampled points
    pub sampled_holds: bool,
    /// sufficient analytic test: phi'(0) > 0 for every coupling
    pub derivative_positive_at_zero: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CouplingSignEntry {
    pub edge_class: String,
    pub sampled_holds: bool,
    pub derivative_at_zero: f64,
}

pub const COUPLING_SIGN_SAMPLES: usize = 1000;

pub fn check_coupling_sign(sys: &AdditiveLaplacianSystem, epsilon: f64) -> CouplingSignReport {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let mut entries = Vec::new();
    for (k, name) in sys.graph.edge_class_names().iter().enumerate() {
        let phi = &sys.couplings[k];
        let mut holds = true;
        for i in 0..COUPLING_SIGN_SAMPLES {
            // midpoints of a uniform grid on (-eps, eps), never zero
            let t = -epsilon + 2.0 * epsilon * (i as f64 + 0.5) / COUPLING_SIGN_SAMPLES as f64;
            if t * phi.eval(t) <= 0.0 {
                holds = false;
                break;
            }
        }
        entries.push(CouplingSignEntry {
            edge_class: name.clone(),
            sampled_holds: holds,
            derivative_at_zero: phi.deriv(0.0),
        });
    }
    CouplingSignReport {
        epsilon,
        sampled_holds: entries.iter().all(|e| e.sampled_holds),
        derivative_positive_at_zero: entries.iter().all(|e| e.derivative_at_zero > 0.0),
        per_coupling: entries,
    }
}

#[derive(Serialize, Deserialize)]
struct SystemDoc {
    graph: serde_json::Value,
    couplings: BTreeMap<String, OddCoupling>,
    #[serde(default)]
    constants: BTreeMap<String, f64>,
}

/// Parse `{"graph": .., "couplings": {class: ..}, "constants": {class: ..}}`.
/// Cell classes absent from `constants` default to zero.
pub fn parse_system(text: &str) -> Result<AdditiveLaplacianSystem, FieldError> {
    let doc: SystemDoc =
        serde_json::from_str(text).map_err(|e| FieldError::MalformedDocument(e.to_string()))?;
    let graph_text = serde_json::to_string(&doc.graph)
        .map_err(|e| FieldError::MalformedDocument(e.to_string()))?;
    let graph = crate::graph::parse_graph(&graph_text)?;
    let mut constants = doc.constants;
    for name in graph.cell_class_names() {
        constants.entry(name.clone()).or_insert(0.0);
    }
    build_additive_system(&graph, &doc.couplings, &constants)
}
