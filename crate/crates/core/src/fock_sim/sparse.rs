//! Column-compressed complex matrices for Fock-space mode operators.

use num_complex::Complex64;

use crate::linalg::CMatrix;

/// Square sparse matrix stored by columns; each column sorted by row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    cols: Vec<Vec<(usize, Complex64)>>,
}

impl SparseOp {
    pub fn zero(dim: usize) -> Self {
        SparseOp {
            dim,
            cols: vec![Vec::new(); dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        SparseOp {
            dim,
            cols: (0..dim).map(|k| vec![(k, Complex64::new(1.0, 0.0))]).collect(),
        }
    }

    /// Jordan-Wigner annihilator `c_k` on `m` modes: `c_k |s> = (-1)^{#{j<k : s_j = 1}} |s - e_k>`.
    pub fn jordan_wigner(k: usize, m: usize) -> Self {
        let dim = 1usize << m;
        let bit = 1usize << k;
        let cols = (0..dim)
            .map(|s| {
                if s & bit == 0 {
                    Vec::new()
                } else {
                    let sign = if (s & (bit - 1)).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
                    vec![(s ^ bit, Complex64::new(sign, 0.0))]
                }
            })
            .collect();
        SparseOp { dim, cols }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn column(&self, c: usize) -> &[(usize, Complex64)] {
        &self.cols[c]
    }

    pub fn adjoint(&self) -> Self {
        let mut cols = vec![Vec::new(); self.dim];
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                cols[r].push((c, v.conj()));
            }
        }
        SparseOp { dim: self.dim, cols }
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        SparseOp {
            dim: self.dim,
            cols: self
                .cols
                .iter()
                .map(|col| col.iter().map(|&(r, v)| (r, v * alpha)).collect())
                .collect(),
        }
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, other: &SparseOp, alpha: Complex64) -> Self {
        assert_eq!(self.dim, other.dim, "sparse add: dimensions differ");
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(a, b)| merge(a, b, alpha))
            .collect();
        SparseOp { dim: self.dim, cols }
    }

    /// Sparse product `self * other`.
    pub fn mul(&self, other: &SparseOp) -> Self {
        assert_eq!(self.dim, other.dim, "sparse mul: dimensions differ");
        let mut acc = vec![Complex64::new(0.0, 0.0); self.dim];
        let mut touched = vec![false; self.dim];
        let mut rows = Vec::new();
        let cols = other
            .cols
            .iter()
            .map(|bcol| {
                for &(k, bv) in bcol {
                    for &(r, av) in &self.cols[k] {
                        if !touched[r] {
                            touched[r] = true;
                            rows.push(r);
                        }
                        acc[r] += av * bv;
                    }
                }
                rows.sort_unstable();
                let out: Vec<(usize, Complex64)> = rows
                    .iter()
                    .filter_map(|&r| {
                        let v = acc[r];
                        acc[r] = Complex64::new(0.0, 0.0);
                        touched[r] = false;
                        (v != Complex64::new(0.0, 0.0)).then_some((r, v))
                    })
                    .collect();
                rows.clear();
                out
            })
            .collect();
        SparseOp { dim: self.dim, cols }
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut d = CMatrix::zeros(self.dim, self.dim);
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                d[(r, c)] += v;
            }
        }
        d
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.cols
            .iter()
            .flat_map(|c| c.iter().map(|e| e.1.norm()))
            .fold(0.0, f64::max)
    }

    /// Largest entry modulus of `self - alpha * 1`.
    pub fn max_abs_minus_identity(&self, alpha: Complex64) -> f64 {
        let mut m: f64 = 0.0;
        for (c, col) in self.cols.iter().enumerate() {
            let mut diag_seen = false;
            for &(r, v) in col {
                if r == c {
                    diag_seen = true;
                    m = m.max((v - alpha).norm());
                } else {
                    m = m.max(v.norm());
                }
            }
            if !diag_seen {
                m = m.max(alpha.norm());
            }
        }
        m
    }

    /// Applies to a dense vector.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        for (c, col) in self.cols.iter().enumerate() {
            if x[c] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for &(r, v) in col {
                y[r] += v * x[c];
            }
        }
        y
    }
}

fn merge(a: &[(usize, Complex64)], b: &[(usize, Complex64)], alpha: Complex64) -> Vec<(usize, Complex64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i]);
            i += 1;
        } else if take_b {
            out.push((b[j].0, b[j].1 * alpha));
            j += 1;
        } else {
            out.push((a[i].0, a[i].1 + b[j].1 * alpha));
            i += 1;
            j += 1;
        }
    }
    out
}

/// Dense times sparse, `d * s`.
pub fn dense_sparse(d: &CMatrix, s: &SparseOp) -> CMatrix {
    assert_eq!(d.ncols(), s.dim(), "dense_sparse: dimensions differ");
    let mut out = CMatrix::zeros(d.nrows(), s.dim());
    for c in 0..s.dim() {
        for &(r, v) in s.column(c) {
            let src = d.column(r);
            let mut dst = out.column_mut(c);
            dst.axpy(v, &src, Complex64::new(1.0, 0.0));
        }
    }
    out
}

/// Sparse times dense, `s * d`.
pub fn sparse_dense(s: &SparseOp, d: &CMatrix) -> CMatrix {
    assert_eq!(s.dim(), d.nrows(), "sparse_dense: dimensions differ");
    let mut out = CMatrix::zeros(s.dim(), d.ncols());
    for j in 0..d.ncols() {
        for c in 0..s.dim() {
            let x = d[(c, j)];
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            for &(r, v) in s.column(c) {
                out[(r, j)] += v * x;
            }
        }
    }
    out
}
