//! Dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Complex matrix product through three real GEMMs.
///
/// nalgebra's generic complex product does not hit the blocked real kernel,
/// which is an order of magnitude slower for the Fock-space sizes used here.
pub fn cmatmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "cmatmul: inner dimensions differ");
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let t1 = &ar * &br;
    let t2 = &ai * &bi;
    let t3 = (&ar + &ai) * (&br + &bi);
    DMatrix::from_fn(a.nrows(), b.ncols(), |i, j| {
        Complex64::new(t1[(i, j)] - t2[(i, j)], t3[(i, j)] - t1[(i, j)] - t2[(i, j)])
    })
}

fn split(a: &CMatrix) -> (DMatrix<f64>, DMatrix<f64>) {
    (a.map(|z| z.re), a.map(|z| z.im))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (DVector<f64>, CMatrix) {
    let n = m.nrows();
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Largest absolute entry of a complex matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Deterministic start vector with every entry nonzero and no symmetry.
fn start_vector(n: usize) -> CVector {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    DVector::from_fn(n, |_, _| {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let u = (state >> 11) as f64 / (1u64 << 53) as f64;
        let v = ((state.rotate_left(17)) >> 11) as f64 / (1u64 << 53) as f64;
        Complex64::new(0.5 + u, v - 0.5)
    })
}

/// Operator norm (largest singular value).
///
/// Lanczos on `B^dagger B` with full reorthogonalization; stops once the Ritz
/// residual is below `tol` times the top Ritz value or the top Ritz value has
/// stalled (relative change below `1e-3 tol` twice in a row). An exhausted Krylov
/// budget falls back to a full SVD.
pub fn op_norm(b: &CMatrix, tol: f64) -> f64 {
    let n = b.ncols();
    if n == 0 || b.nrows() == 0 {
        return 0.0;
    }
    let kmax = n.min(160);
    let mut q = start_vector(n);
    let nq = q.norm();
    q /= Complex64::new(nq, 0.0);
    let mut basis: Vec<CVector> = Vec::with_capacity(kmax);
    let mut alpha: Vec<f64> = Vec::with_capacity(kmax);
    let mut beta: Vec<f64> = Vec::with_capacity(kmax);
    let mut prev = f64::NEG_INFINITY;
    let mut stalled = 0;
    for _ in 0..kmax {
        let mut w = b.ad_mul(&(b * &q));
        alpha.push(q.dotc(&w).re);
        basis.push(q);
        for _ in 0..2 {
            for v in &basis {
                let c = v.dotc(&w);
                w.axpy(-c, v, Complex64::new(1.0, 0.0));
            }
        }
        let bn = w.norm();
        let (theta, last) = top_ritz(&alpha, &beta);
        if bn == 0.0 || bn * last.abs() <= tol * theta || bn <= 1e-14 * theta {
            return theta.max(0.0).sqrt();
        }
        stalled = if theta - prev <= 1e-3 * tol * theta { stalled + 1 } else { 0 };
        if stalled >= 2 {
            return theta.max(0.0).sqrt();
        }
        prev = theta;
        beta.push(bn);
        q = w / Complex64::new(bn, 0.0);
    }
    svd_norm(b)
}

/// Largest eigenvalue of the Lanczos tridiagonal and the last entry of its eigenvector.
fn top_ritz(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let k = alpha.len();
    let t = DMatrix::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    let top = (0..k).max_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j])).expect("k >= 1");
    (eig.eigenvalues[top], eig.eigenvectors[(k - 1, top)])
}

/// Operator norm through a full singular value decomposition.
pub fn svd_norm(b: &CMatrix) -> f64 {
    b.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

/// Moore-Penrose-style spectral power of a Hermitian PSD matrix given its eigen-pairs:
/// returns `U diag(f(lambda)) U^dagger` over eigenvalues above `threshold`.
pub fn spectral_function(
    values: &DVector<f64>,
    vectors: &CMatrix,
    threshold: f64,
    f: impl Fn(f64) -> f64,
) -> CMatrix {
    let n = vectors.nrows();
    let kept: Vec<usize> = (0..values.len()).filter(|&k| values[k] > threshold).collect();
    let u = DMatrix::from_fn(n, kept.len(), |i, j| vectors[(i, kept[j])]);
    let scaled = DMatrix::from_fn(n, kept.len(), |i, j| u[(i, j)] * f(values[kept[j]]));
    cmatmul(&scaled, &u.adjoint())
}

/// Determinant of a small complex matrix.
pub fn det(m: &CMatrix) -> Result<Complex64> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "determinant of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    Ok(m.clone().lu().determinant())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, m: usize, seed: f64) -> CMatrix {
        DMatrix::from_fn(n, m, |i, j| {
            let x = (i * 7 + j * 3) as f64 + seed;
            Complex64::new(x.sin(), (1.3 * x).cos())
        })
    }

    #[test]
    fn cmatmul_matches_naive() {
        let a = sample(7, 5, 0.1);
        let b = sample(5, 9, 0.7);
        let d = cmatmul(&a, &b) - &a * &b;
        assert!(max_abs(&d) < 1e-12);
    }

    #[test]
    fn lanczos_matches_svd() {
        let a = sample(12, 12, 0.3);
        let p = op_norm(&a, 1e-9);
        let s = svd_norm(&a);
        assert!((p - s).abs() < 1e-9 * s, "{p} vs {s}");
        let big = sample(200, 200, 1.7);
        let (p, s) = (op_norm(&big, 1e-9), svd_norm(&big));
        assert!((p - s).abs() < 1e-9 * s, "{p} vs {s}");
        assert_eq!(op_norm(&CMatrix::zeros(5, 5), 1e-9), 0.0);
        // degenerate top singular value
        let id = CMatrix::identity(40, 40) * Complex64::new(3.0, 0.0);
        assert!((op_norm(&id, 1e-9) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_ascending_and_residual() {
        let a = sample(6, 6, 1.1);
        let h = &a + a.adjoint();
        let (vals, vecs) = hermitian_eigen(&h);
        for k in 1..vals.len() {
            assert!(vals[k] >= vals[k - 1]);
        }
        let d = &h * &vecs - &vecs * DMatrix::from_diagonal(&vals.map(|x| Complex64::new(x, 0.0)));
        assert!(max_abs(&d) < 1e-12);
    }

    #[test]
    fn det_of_identity() {
        let id = CMatrix::identity(3, 3);
        assert!((det(&id).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(det(&CMatrix::zeros(2, 3)).is_err());
    }
}
