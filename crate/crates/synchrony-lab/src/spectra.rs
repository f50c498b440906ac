//! Signed-graph spectral analysis of Laplacian matrices: validation,
//! component counts of the positive/negative subgraphs, eigenvalue sign
//! signatures, and the component-count bounds on the signature.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{jacobi_eigenvalues, LinalgError, Matrix, UnionFind};

pub const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, PartialEq)]
pub enum SpectraError {
    #[error("matrix is not symmetric (max defect {defect:.3e} > tol {tol:.3e})")]
    NotSymmetric { defect: f64, tol: f64 },
    #[error("matrix rows do not sum to zero (max defect {defect:.3e} > tol {tol:.3e})")]
    RowSumNonzero { defect: f64, tol: f64 },
    #[error("eigensolver did not converge")]
    NoConvergence,
    #[error("matrix document is malformed: {0}")]
    MalformedDocument(String),
}

/// Validated symmetric zero-row-sum matrix. The induced signed graph
/// has edge weight w_ij = l_ij for i != j.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    entries: Matrix,
    tol: f64,
}

/// Connected component counts of the full graph and of the subgraphs
/// carrying only positive / only negative edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ComponentCounts {
    pub c_g: usize,
    pub c_g_plus: usize,
    pub c_g_minus: usize,
}

/// Closed integer intervals for the eigenvalue sign counts, derived
/// from component counts alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SignatureBounds {
    pub n_plus: (usize, usize),
    pub n_zero: (usize, usize),
    pub n_minus: (usize, usize),
}

impl SignatureBounds {
    pub fn contains(&self, signature: (usize, usize, usize)) -> bool {
        let (p, z, m) = signature;
        p >= self.n_plus.0
            && p <= self.n_plus.1
            && z >= self.n_zero.0
            && z <= self.n_zero.1
            && m >= self.n_minus.0
            && m <= self.n_minus.1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignedSpectrumReport {
    /// (n_plus, n_zero, n_minus)
    pub signature: (usize, usize, usize),
    pub counts: ComponentCounts,
    pub bounds: SignatureBounds,
    pub eigenvalues: Vec<f64>,
    pub within_bounds: bool,
    /// eigenvalue whose magnitude is closest to zero_tol; a tiny gap
    /// means the zero/nonzero classification is tolerance-sensitive
    pub nearest_to_zero_tol: f64,
    pub zero_tol: f64,
}

pub fn default_zero_tol(m: &Matrix) -> f64 {
    1e-9 * (1.0 + m.inf_norm()) * m.n() as f64
}

pub fn default_edge_tol(m: &Matrix) -> f64 {
    1e-12 * (1.0 + m.inf_norm())
}

/// Wrap a matrix after checking symmetry and zero row sums within tol.
pub fn validate_laplacian(m: &Matrix, tol: f64) -> Result<LaplacianMatrix, SpectraError> {
    let sym = m.symmetry_defect();
    if sym > tol {
        return Err(SpectraError::NotSymmetric { defect: sym, tol });
    }
    let row = m.row_sum_defect();
    if row > tol {
        return Err(SpectraError::RowSumNonzero { defect: row, tol });
    }
    Ok(LaplacianMatrix { entries: m.clone(), tol })
}

impl LaplacianMatrix {
    pub fn n(&self) -> usize {
        self.entries.n()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn validation_tol(&self) -> f64 {
        self.tol
    }
}

/// Count connected components of G (any edge with |w| > edge_tol),
/// G+ (w > edge_tol) and G- (w < -edge_tol). Entries below the
/// threshold count as absent edges.
pub fn component_counts(l: &LaplacianMatrix, edge_tol: f64) -> ComponentCounts {
    let n = l.n();
    let m = &l.entries;
    let mut all = UnionFind::new(n);
    let mut plus = UnionFind::new(n);
    let mut minus = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = m.get(i, j);
            if w.abs() > edge_tol {
                all.union(i, j);
            }
            if w > edge_tol {
                plus.union(i, j);
            }
            if w < -edge_tol {
                minus.union(i, j);
            }
        }
    }
    ComponentCounts { c_g: all.count(), c_g_plus: plus.count(), c_g_minus: minus.count() }
}

/// Signature intervals from component counts: with c = c(G),
/// c+ = c(G+), c- = c(G-) on n vertices,
/// n_plus in [c+ - c, n - c-], n_minus in [c- - c, n - c+],
/// n_zero in [c, n + 2c - c+ - c-]; lower bounds clamped at zero.
pub fn signature_bounds(counts: ComponentCounts, n: usize) -> SignatureBounds {
    let ComponentCounts { c_g: c, c_g_plus: cp, c_g_minus: cm } = counts;
    SignatureBounds {
        n_plus: (cp.saturating_sub(c), n - cm),
        n_minus: (cm.saturating_sub(c), n - cp),
        n_zero: (c, (n + 2 * c).saturating_sub(cp + cm)),
    }
}

/// Full sign signature via the symmetric eigensolver, with component
/// bounds attached. Eigenvalues within zero_tol of 0 count as zero.
pub fn eigen_signature(
    l: &LaplacianMatrix,
    zero_tol: f64,
) -> Result<SignedSpectrumReport, SpectraError> {
    let eigenvalues = jacobi_eigenvalues(&l.entries, JACOBI_MAX_SWEEPS).map_err(|e| match e {
        LinalgError::NoConvergence { .. } => SpectraError::NoConvergence,
        LinalgError::RaggedRows => unreachable!("matrix type is square"),
    })?;
    let mut n_plus = 0;
    let mut n_zero = 0;
    let mut n_minus = 0;
    for &ev in &eigenvalues {
        if ev > zero_tol {
            n_plus += 1;
        } else if ev < -zero_tol {
            n_minus += 1;
        } else {
            n_zero += 1;
        }
    }
    let counts = component_counts(l, default_edge_tol(&l.entries));
    let bounds = signature_bounds(counts, l.n());
    let signature = (n_plus, n_zero, n_minus);
    let nearest_to_zero_tol = eigenvalues
        .iter()
        .copied()
        .min_by(|a, b| {
            let da = (a.abs() - zero_tol).abs();
            let db = (b.abs() - zero_tol).abs();
            da.partial_cmp(&db).unwrap()
        })
        .unwrap_or(0.0);
    Ok(SignedSpectrumReport {
        signature,
        counts,
        bounds,
        eigenvalues,
        within_bounds: bounds.contains(signature),
        nearest_to_zero_tol,
        zero_tol,
    })
}

/// Convenience: validate with a scale-aware tolerance, then analyze
/// with default tolerances.
pub fn analyze_matrix(
    m: &Matrix,
    validation_tol: Option<f64>,
    zero_tol: Option<f64>,
) -> Result<SignedSpectrumReport, SpectraError> {
    let vtol = validation_tol.unwrap_or_else(|| default_zero_tol(m));
    let l = validate_laplacian(m, vtol)?;
    let ztol = zero_tol.unwrap_or_else(|| default_zero_tol(m));
    eigen_signature(&l, ztol)
}

#[derive(Serialize, Deserialize)]
struct MatrixDoc {
    n: usize,
    rows: Vec<Vec<f64>>,
}

pub fn parse_matrix_document(text: &str) -> Result<Matrix, SpectraError> {
    let doc: MatrixDoc =
        serde_json::from_str(text).map_err(|e| SpectraError::MalformedDocument(e.to_string()))?;
    if doc.rows.len() != doc.n || doc.rows.iter().any(|r| r.len() != doc.n) {
        return Err(SpectraError::MalformedDocument(format!("expected {0}x{0} rows", doc.n)));
    }
    Matrix::from_rows(&doc.rows).map_err(|e| SpectraError::MalformedDocument(e.to_string()))
}

pub fn serialize_matrix_document(m: &Matrix) -> String {
    let doc = MatrixDoc { n: m.n(), rows: m.rows() };
    serde_json::to_string_pretty(&doc).expect("matrix document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Jacobian of the six-cell two-class gradient system at the
    /// quarter-turn point: paired +1/-1 couplings, two isolated cells.
    pub(crate) fn quarter_turn_matrix() -> Matrix {
        let rows = [
            [0.0, 1.0, 0.0, 0.0, -1.0, 0.0],
            [1.0, 0.0, 0.0, -1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0, 1.0, 0.0],
            [-1.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        ];
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        Matrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn validates_simple_laplacian() {
        let m = Matrix::from_rows(&[vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        assert!(validate_laplacian(&m, 1e-12).is_ok());
    }

    #[test]
    fn rejects_asymmetric_and_nonzero_rows() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(validate_laplacian(&m, 1e-12), Err(SpectraError::NotSymmetric { .. })));
        let m2 = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(validate_laplacian(&m2, 1e-12), Err(SpectraError::RowSumNonzero { .. })));
    }

    #[test]
    fn quarter_turn_counts_and_signature() {
        let m = quarter_turn_matrix();
        let l = validate_laplacian(&m, 1e-12).unwrap();
        let counts = component_counts(&l, default_edge_tol(&m));
        assert_eq!(counts, ComponentCounts { c_g: 3, c_g_plus: 4, c_g_minus: 4 });
        let bounds = signature_bounds(counts, 6);
        assert_eq!(bounds.n_plus, (1, 2));
        assert_eq!(bounds.n_minus, (1, 2));
        assert_eq!(bounds.n_zero, (3, 4));
        let report = eigen_signature(&l, default_zero_tol(&m)).unwrap();
        assert_eq!(report.signature, (1, 4, 1));
        assert!(report.within_bounds);
        let expect = [-2.0, 0.0, 0.0, 0.0, 0.0, 2.0];
        for (ev, ex) in report.eigenvalues.iter().zip(expect) {
            assert!((ev - ex).abs() < 1e-10, "{ev} vs {ex}");
        }
    }

    #[test]
    fn all_positive_connected_counts() {
        // path graph weights +1: G- has no edges
        let rows = vec![vec![-1.0, 1.0, 0.0], vec![1.0, -2.0, 1.0], vec![0.0, 1.0, -1.0]];
        let m = Matrix::from_rows(&rows).unwrap();
        let l = validate_laplacian(&m, 1e-12).unwrap();
        let counts = component_counts(&l, default_edge_tol(&m));
        assert_eq!(counts, ComponentCounts { c_g: 1, c_g_plus: 1, c_g_minus: 3 });
    }

    #[test]
    fn zero_matrix_signature() {
        let m = Matrix::zeros(6);
        let l = validate_laplacian(&m, 1e-12).unwrap();
        let report = eigen_signature(&l, default_zero_tol(&m)).unwrap();
        assert_eq!(report.signature, (0, 6, 0));
        assert_eq!(
            component_counts(&l, default_edge_tol(&m)),
            ComponentCounts { c_g: 6, c_g_plus: 6, c_g_minus: 6 }
        );
    }

    #[test]
    fn bounds_examples() {
        let b = signature_bounds(ComponentCounts { c_g: 1, c_g_plus: 2, c_g_minus: 2 }, 6);
        assert_eq!(b.n_plus, (1, 4));
        let b8 = signature_bounds(ComponentCounts { c_g: 1, c_g_plus: 6, c_g_minus: 1 }, 6);
        assert_eq!(b8.n_plus, (5, 5));
        let b5 = signature_bounds(ComponentCounts { c_g: 1, c_g_plus: 3, c_g_minus: 1 }, 6);
        assert_eq!(b5.n_plus, (2, 5));
    }

    #[test]
    fn kernel_contains_ones_vector() {
        let m = quarter_turn_matrix();
        let ones = vec![1.0; 6];
        let prod = m.mat_vec(&ones);
        assert!(prod.iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn matrix_document_roundtrip() {
        let m = quarter_turn_matrix();
        let text = serialize_matrix_document(&m);
        let back = parse_matrix_document(&text).unwrap();
        assert_eq!(back, m);
        assert!(matches!(
            parse_matrix_document("{\"n\":2,\"rows\":[[0.0]]}"),
            Err(SpectraError::MalformedDocument(_))
        ));
    }

    #[test]
    fn block_diagonal_counts_and_signatures_add() {
        let a = Matrix::from_rows(&[vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let b = quarter_turn_matrix();
        let n = a.n() + b.n();
        let mut big = Matrix::zeros(n);
        for i in 0..a.n() {
            for j in 0..a.n() {
                big.set(i, j, a.get(i, j));
            }
        }
        for i in 0..b.n() {
            for j in 0..b.n() {
                big.set(a.n() + i, a.n() + j, b.get(i, j));
            }
        }
        let ra = analyze_matrix(&a, None, None).unwrap();
        let rb = analyze_matrix(&b, None, None).unwrap();
        let rbig = analyze_matrix(&big, None, None).unwrap();
        assert_eq!(rbig.counts.c_g, ra.counts.c_g + rb.counts.c_g);
        assert_eq!(rbig.counts.c_g_plus, ra.counts.c_g_plus + rb.counts.c_g_plus);
        assert_eq!(rbig.counts.c_g_minus, ra.counts.c_g_minus + rb.counts.c_g_minus);
        assert_eq!(rbig.signature.0, ra.signature.0 + rb.signature.0);
        assert_eq!(rbig.signature.1, ra.signature.1 + rb.signature.1);
        assert_eq!(rbig.signature.2, ra.signature.2 + rb.signature.2);
    }

    #[test]
    fn trace_matches_eigenvalue_sum() {
        let m = quarter_turn_matrix();
        let l = validate_laplacian(&m, 1e-12).unwrap();
        let report = eigen_signature(&l, default_zero_tol(&m)).unwrap();
        let sum: f64 = report.eigenvalues.iter().sum();
        assert!((sum - m.trace()).abs() <= 1e-9 * 6.0 * m.inf_norm().max(1.0));
    }
}
