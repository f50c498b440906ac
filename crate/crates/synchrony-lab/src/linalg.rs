//! Small dense linear algebra: square matrices, Gaussian elimination,
//! and a cyclic Jacobi eigenvalue solver for symmetric matrices.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("jacobi sweep limit {sweeps} reached, off-diagonal norm {off_norm:.3e}")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("matrix rows have inconsistent lengths")]
    RaggedRows,
}

/// Dense square matrix, row-major storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    a: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, a: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(LinalgError::RaggedRows);
        }
        let mut a = Vec::with_capacity(n * n);
        for r in rows {
            a.extend_from_slice(r);
        }
        Ok(Matrix { n, a })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    /// Max absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                d = d.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        d
    }

    pub fn row_sum_defect(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).iter().sum::<f64>().abs()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Solve `self * x = b` by Gaussian elimination with partial pivoting.
    /// Returns None when a pivot falls below the singularity threshold.
    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut aug = self.a.clone();
        let mut x = b.to_vec();
        let tol = 1e-14 * (1.0 + self.max_abs_entry());
        for col in 0..n {
            let mut piv = col;
            for r in (col + 1)..n {
                if aug[r * n + col].abs() > aug[piv * n + col].abs() {
                    piv = r;
                }
            }
            if aug[piv * n + col].abs() <= tol {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    aug.swap(col * n + j, piv * n + j);
                }
                x.swap(col, piv);
            }
            let d = aug[col * n + col];
            for r in (col + 1)..n {
                let f = aug[r * n + col] / d;
                if f == 0.0 {
                    continue;
                }
                for j in col..n {
                    aug[r * n + j] -= f * aug[col * n + j];
                }
                x[r] -= f * x[col];
            }
        }
        for col in (0..n).rev() {
            let mut s = x[col];
            for j in (col + 1)..n {
                s -= aug[col * n + j] * x[j];
            }
            x[col] = s / aug[col * n + col];
        }
        Some(x)
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
/// returned in ascending order.
pub fn jacobi_eigenvalues(m: &Matrix, max_sweeps: usize) -> Result<Vec<f64>, LinalgError> {
    let n = m.n;
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![m.get(0, 0)]);
    }
    let mut a = m.a.clone();
    let scale = m.max_abs_entry();
    // Absolute threshold below which an off-diagonal entry counts as zero.
    let stop = 1e-14 * (1.0 + scale) * n as f64;

    let off_norm = |a: &[f64]| {
        let mut s = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * a[i * n + j] * a[i * n + j];
            }
        }
        s.sqrt()
    };

    for _ in 0..max_sweeps {
        if off_norm(&a) <= stop {
            let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
            eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
            return Ok(eig);
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= stop / (n * n) as f64 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // Rotation angle from the standard two-sided Jacobi formula.
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let off = off_norm(&a);
    if off <= stop {
        let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        return Ok(eig);
    }
    Err(LinalgError::NoConvergence { sweeps: max_sweeps, off_norm: off })
}

/// Union-find with path compression and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    count: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n], count: n }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.count -= 1;
        true
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Groups of member indices, each sorted, ordered by smallest member.
    pub fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let roots: Vec<usize> = (0..n).map(|i| self.find(i)).collect();
        let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> =
            std::collections::BTreeMap::new();
        for (i, &r) in roots.iter().enumerate() {
            by_root.entry(r).or_default().push(i);
        }
        let mut gs: Vec<Vec<usize>> = by_root.into_values().collect();
        gs.sort_by_key(|g| g[0]);
        gs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        let m = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let x = m.solve(&[5.0, 10.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn solve_singular_returns_none() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(m.solve(&[1.0, 2.0]).is_none());
    }

    #[test]
    fn jacobi_on_known_spectrum() {
        // diag(1,2,3) conjugated stays {1,2,3}; test a simple tridiagonal.
        let m =
            Matrix::from_rows(&[vec![2.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]])
                .unwrap();
        let eig = jacobi_eigenvalues(&m, 50).unwrap();
        let sqrt2 = 2.0f64.sqrt();
        let expect = [2.0 - sqrt2, 2.0, 2.0 + sqrt2];
        for (e, x) in eig.iter().zip(expect) {
            assert!((e - x).abs() < 1e-10, "{e} vs {x}");
        }
    }

    #[test]
    fn jacobi_preserves_trace() {
        let m =
            Matrix::from_rows(&[vec![1.0, 0.5, 0.25], vec![0.5, -2.0, 1.0], vec![0.25, 1.0, 0.75]])
                .unwrap();
        let eig = jacobi_eigenvalues(&m, 50).unwrap();
        let sum: f64 = eig.iter().sum();
        assert!((sum - m.trace()).abs() < 1e-10);
    }

    #[test]
    fn union_find_groups() {
        let mut uf = UnionFind::new(5);
        uf.union(0, 3);
        uf.union(1, 4);
        assert_eq!(uf.count(), 3);
        assert_eq!(uf.groups(), vec![vec![0, 3], vec![1, 4], vec![2]]);
    }
}
