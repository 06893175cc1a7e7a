//! Gauge-invariant quasi-free states.
//!
//! `P` is a projection on the orthonormal mode space of a [`ModeBasis`]; the frame
//! vector `chi_gamma` has coordinates `conj(V[gamma, :])` there.

use num_complex::Complex64;

use super::{mode_operators, ModeBasis, SparseOp};
use crate::error::{Error, Result};
use crate::interactions::MonomialDescriptor;
use crate::linalg::{cmatmul, det, hermitian_eigen, max_abs, CMatrix};

fn check_projection(p: &CMatrix, m: usize) -> Result<()> {
    if p.nrows() != m || p.ncols() != m {
        return Err(Error::Dimension(format!("projection is {}x{}, mode space has dimension {m}", p.nrows(), p.ncols())));
    }
    let dev = max_abs(&(cmatmul(p, p) - p)).max(max_abs(&(p - p.adjoint())));
    if dev > crate::quadratic::PROJECTION_TOL {
        return Err(Error::NotProjection(dev));
    }
    Ok(())
}

fn split(basis: &ModeBasis, m: &MonomialDescriptor) -> Result<(Vec<usize>, Vec<usize>)> {
    if !m.is_normal_ordered() {
        return Err(Error::NotNormalOrdered);
    }
    let mut creations = Vec::new();
    let mut annihilations = Vec::new();
    for f in m.factors() {
        let k = basis.index_of(&f.site)?;
        if f.dagger {
            creations.push(k);
        } else {
            annihilations.push(k);
        }
    }
    Ok((creations, annihilations))
}

/// `omega_P(a*(f_n) ... a*(f_1) a(g_1) ... a(g_m)) = delta_nm det <g_i, P f_j>`.
pub fn quasifree_expectation(p: &CMatrix, basis: &ModeBasis, monomial: &MonomialDescriptor) -> Result<Complex64> {
    check_projection(p, basis.n_modes())?;
    let (cre, ann) = split(basis, monomial)?;
    let n = cre.len();
    if n != ann.len() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let gram = CMatrix::from_fn(n, n, |i, j| {
        let g = basis.onb_coords(ann[i]);
        let f = basis.onb_coords(cre[n - 1 - j]);
        g.dotc(&(p * f))
    });
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    det(&gram)
}

/// Same expectation as a vacuum expectation in the particle-hole transformed Fock
/// representation: with `P = sum_occ u u^*`, `a(f) -> sum_unocc <f,u> c_u + sum_occ <f,u> c_u^*`.
pub fn fock_representation_expectation(
    p: &CMatrix,
    basis: &ModeBasis,
    monomial: &MonomialDescriptor,
) -> Result<Complex64> {
    check_projection(p, basis.n_modes())?;
    split(basis, monomial)?;
    let ops = mode_operators(basis)?;
    let (values, vectors) = hermitian_eigen(p);
    let m = basis.n_modes();
    let dim = ops.dim();
    let annihilator = |k: usize| -> SparseOp {
        let x = basis.onb_coords(k);
        (0..m).fold(SparseOp::zero(dim), |acc, j| {
            let w = x.dotc(&vectors.column(j));
            if values[j] > 0.5 {
                acc.add_scaled(&ops.c[j].adjoint(), w)
            } else {
                acc.add_scaled(&ops.c[j], w)
            }
        })
    };
    let mut state = vec![Complex64::new(0.0, 0.0); dim];
    state[0] = Complex64::new(1.0, 0.0);
    for f in monomial.factors().iter().rev() {
        let a = annihilator(basis.index_of(&f.site)?);
        let op = if f.dagger { a.adjoint() } else { a };
        state = op.apply(&state);
    }
    Ok(state[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interactions::Factor;
    use crate::lattice::Site;

    fn basis() -> ModeBasis {
        let z = Complex64::new(0.2, 0.1);
        let one = Complex64::new(1.0, 0.0);
        let gram = CMatrix::from_row_slice(2, 2, &[one, z, z.conj(), one]);
        ModeBasis::new(vec![Site::new(0, 0, 0), Site::new(0, 1, 0)], gram).unwrap()
    }

    fn rank_one() -> CMatrix {
        let u = nalgebra::DVector::from_vec(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]);
        &u * u.adjoint()
    }

    fn fac(k: i64, dagger: bool) -> Factor {
        Factor { site: Site::new(0, k, 0), dagger }
    }

    #[test]
    fn one_by_one_is_matrix_element() {
        let b = basis();
        let p = rank_one();
        let m = MonomialDescriptor::new(vec![fac(0, true), fac(1, false)]).unwrap();
        let got = quasifree_expectation(&p, &b, &m).unwrap();
        let expect = b.onb_coords(1).dotc(&(&p * b.onb_coords(0)));
        assert!((got - expect).norm() < 1e-14);
        let oracle = fock_representation_expectation(&p, &b, &m).unwrap();
        assert!((got - oracle).norm() < 1e-12);
    }

    #[test]
    fn unbalanced_monomial_vanishes() {
        let b = basis();
        let m = MonomialDescriptor::new(vec![fac(0, true), fac(1, true)]).unwrap();
        assert_eq!(quasifree_expectation(&rank_one(), &b, &m).unwrap(), Complex64::new(0.0, 0.0));
        assert!(fock_representation_expectation(&rank_one(), &b, &m).unwrap().norm() < 1e-14);
    }

    #[test]
    fn rejects_bad_inputs() {
        let b = basis();
        let m = MonomialDescriptor::new(vec![fac(0, false), fac(1, true)]).unwrap();
        assert_eq!(quasifree_expectation(&rank_one(), &b, &m), Err(Error::NotNormalOrdered));
        let half = CMatrix::identity(2, 2) * Complex64::new(0.5, 0.0);
        let ok = MonomialDescriptor::new(vec![fac(0, true), fac(1, false)]).unwrap();
        assert!(matches!(quasifree_expectation(&half, &b, &ok), Err(Error::NotProjection(_))));
    }
}
