//! Exact many-body dynamics for fermions in frame modes.
//!
//! The frame vectors of a window span an `m`-dimensional space (`m` = numerical
//! rank of the Gram matrix `Z`). With `Z = V V^dagger` and Jordan-Wigner modes
//! `c_k` of that space, `a_gamma = sum_k V[gamma,k] c_k` satisfies
//! `{a_g, a_h^*} = Z[g,h]` and `{a_g, a_h} = 0`.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame_analysis::gram;
use crate::interactions::{Interaction, MonomialDescriptor};
use crate::lattice::{Site, Window};
use crate::linalg::{cmatmul, hermitian_eigen, max_abs, op_norm, CMatrix};
use crate::magnetic_frame::MagneticParams;
use crate::quadratic::QuadraticCoefficients;

pub mod lr;
pub mod quasifree;
pub mod sparse;

pub use lr::{lr_check, volume_convergence, ConvergenceRow, LrConfig, LrReport, LrRow};
pub use quasifree::{fock_representation_expectation, quasifree_expectation};
pub use sparse::{dense_sparse, sparse_dense, SparseOp};

/// Largest number of orthonormal modes (Fock dimension `2^12`).
pub const MAX_MODES: usize = 12;
/// Gram eigenvalues below this fraction of the largest are dropped.
pub const MODE_REL_THRESHOLD: f64 = 1e-13;
/// Relative accuracy of operator norms.
pub const NORM_TOL: f64 = 1e-9;

/// Factorization `Z = V V^dagger` of a window's Gram matrix.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    pub sites: Vec<Site>,
    pub gram: CMatrix,
    /// `n x m`.
    pub v: CMatrix,
    pub factor_residual: f64,
}

impl ModeBasis {
    pub fn new(sites: Vec<Site>, gram: CMatrix) -> Result<Self> {
        let n = sites.len();
        if n == 0 {
            return Err(Error::EmptySet("mode window"));
        }
        if gram.nrows() != n || gram.ncols() != n {
            return Err(Error::Dimension(format!("{n} sites but a {}x{} Gram matrix", gram.nrows(), gram.ncols())));
        }
        let (values, vectors) = hermitian_eigen(&gram);
        let top = values[n - 1];
        if !(top > 0.0) {
            return Err(Error::Numerical("Gram matrix has no positive eigenvalue".into()));
        }
        let kept: Vec<usize> = (0..n).filter(|&k| values[k] > MODE_REL_THRESHOLD * top).collect();
        let v = CMatrix::from_fn(n, kept.len(), |i, j| vectors[(i, kept[j])] * values[kept[j]].sqrt());
        let factor_residual = max_abs(&(cmatmul(&v, &v.adjoint()) - &gram));
        Ok(ModeBasis {
            sites,
            gram,
            v,
            factor_residual,
        })
    }

    pub fn from_window(window: &Window, params: &MagneticParams) -> Result<Self> {
        let g = gram(window, params);
        Self::new(g.sites, g.entries)
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn n_modes(&self) -> usize {
        self.v.ncols()
    }

    pub fn index_of(&self, s: &Site) -> Result<usize> {
        self.sites
            .iter()
            .position(|x| x == s)
            .ok_or(Error::UnknownSite(s.triple()))
    }

    /// Coordinates of `chi_gamma` in the orthonormal mode basis, `conj(V[gamma, :])`.
    pub fn onb_coords(&self, k: usize) -> DVector<Complex64> {
        DVector::from_iterator(self.n_modes(), self.v.row(k).iter().map(|z| z.conj()))
    }
}

/// Dense operator on the Fock space.
#[derive(Debug, Clone)]
pub struct FockOperator {
    pub matrix: CMatrix,
    pub hermitian: bool,
}

impl FockOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Flags the operator Hermitian after checking `|A - A^dagger| < 1e-12 max(1, |A|)`.
    pub fn hermitian(matrix: CMatrix) -> Result<Self> {
        let asym = max_abs(&(&matrix - matrix.adjoint()));
        if asym > 1e-12 * max_abs(&matrix).max(1.0) {
            return Err(Error::Numerical(format!("assembled Hamiltonian is not Hermitian ({asym:e})")));
        }
        Ok(FockOperator { matrix, hermitian: true })
    }

    pub fn norm(&self) -> f64 {
        op_norm(&self.matrix, NORM_TOL)
    }
}

/// `a_gamma` for every window site on the Fock space of the orthonormal modes.
#[derive(Debug, Clone)]
pub struct ModeOperators {
    pub basis: ModeBasis,
    pub c: Vec<SparseOp>,
    pub a: Vec<SparseOp>,
    pub a_dag: Vec<SparseOp>,
}

impl ModeOperators {
    pub fn dim(&self) -> usize {
        1 << self.basis.n_modes()
    }
}

/// Fermionic mode operators; rank deficiency just lowers the mode count.
pub fn mode_operators(basis: &ModeBasis) -> Result<ModeOperators> {
    let m = basis.n_modes();
    if m > MAX_MODES {
        return Err(Error::param("window", format!("{m} modes exceed the limit of {MAX_MODES}")));
    }
    let c: Vec<SparseOp> = (0..m).map(|k| SparseOp::jordan_wigner(k, m)).collect();
    let dim = 1 << m;
    let a: Vec<SparseOp> = (0..basis.n_sites())
        .map(|g| {
            c.iter()
                .enumerate()
                .fold(SparseOp::zero(dim), |acc, (k, ck)| acc.add_scaled(ck, basis.v[(g, k)]))
        })
        .collect();
    let a_dag = a.iter().map(SparseOp::adjoint).collect();
    Ok(ModeOperators {
        basis: basis.clone(),
        c,
        a,
        a_dag,
    })
}

/// Entrywise deviations from the frame CAR relations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarReport {
    /// `max |{a_g, a_h^*} - Z[g,h] 1|`.
    pub mixed: f64,
    /// `max |{a_g, a_h}|`.
    pub same: f64,
}

pub fn car_check(ops: &ModeOperators) -> CarReport {
    let n = ops.basis.n_sites();
    let one = Complex64::new(1.0, 0.0);
    let mut mixed: f64 = 0.0;
    let mut same: f64 = 0.0;
    for g in 0..n {
        for h in 0..n {
            let ac = ops.a[g].mul(&ops.a_dag[h]).add_scaled(&ops.a_dag[h].mul(&ops.a[g]), one);
            mixed = mixed.max(ac.max_abs_minus_identity(ops.basis.gram[(g, h)]));
            let aa = ops.a[g].mul(&ops.a[h]).add_scaled(&ops.a[h].mul(&ops.a[g]), one);
            same = same.max(aa.max_abs());
        }
    }
    CarReport { mixed, same }
}

/// Product of the factors of a monomial, left to right.
pub fn monomial_operator(ops: &ModeOperators, m: &MonomialDescriptor) -> Result<SparseOp> {
    let mut acc = SparseOp::identity(ops.dim());
    for f in m.factors() {
        let k = ops.basis.index_of(&f.site)?;
        let op = if f.dagger { &ops.a_dag[k] } else { &ops.a[k] };
        acc = acc.mul(op);
    }
    Ok(acc)
}

/// `H = sum_terms f_k (M_k + M_k^*)`.
pub fn interaction_hamiltonian(inter: &Interaction, ops: &ModeOperators) -> Result<FockOperator> {
    let mut h = SparseOp::zero(ops.dim());
    for t in &inter.terms {
        let m = monomial_operator(ops, &t.monomial)?;
        let f = Complex64::new(t.coeff, 0.0);
        h = h.add_scaled(&m, f).add_scaled(&m.adjoint(), f);
    }
    FockOperator::hermitian(h.to_dense())
}

/// `H = sum t(g',g) a*_g' a_g - sum c(g)`.
pub fn quadratic_hamiltonian(q: &QuadraticCoefficients, ops: &ModeOperators) -> Result<FockOperator> {
    q.validate()?;
    let idx: Vec<usize> = q.sites.iter().map(|s| ops.basis.index_of(s)).collect::<Result<_>>()?;
    let v = &ops.basis.v;
    let m = ops.basis.n_modes();
    // h = V_q^dagger t V_q in orthonormal modes
    let vq = CMatrix::from_fn(idx.len(), m, |a, k| v[(idx[a], k)]);
    let h1 = cmatmul(&vq.adjoint(), &cmatmul(&q.hopping, &vq));
    let constant: f64 = q.constants.iter().sum();
    let mut h = SparseOp::identity(ops.dim()).scale(Complex64::new(-constant, 0.0));
    for k in 0..m {
        let ck_dag = ops.c[k].adjoint();
        for l in 0..m {
            if h1[(k, l)] != Complex64::new(0.0, 0.0) {
                h = h.add_scaled(&ck_dag.mul(&ops.c[l]), h1[(k, l)]);
            }
        }
    }
    FockOperator::hermitian(h.to_dense())
}

/// Eigen-decomposition of a Hamiltonian, reused for every time and operator.
#[derive(Debug, Clone)]
pub struct Dynamics {
    pub energies: DVector<f64>,
    pub vectors: CMatrix,
}

impl Dynamics {
    pub fn new(h: &FockOperator) -> Result<Self> {
        if !h.hermitian {
            return Err(Error::param("H", "evolution needs a Hermitian generator"));
        }
        let (energies, vectors) = hermitian_eigen(&h.matrix);
        Ok(Dynamics { energies, vectors })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `A` in the energy basis, `Q^dagger A Q`.
    pub fn to_energy_basis(&self, a: &CMatrix) -> CMatrix {
        cmatmul(&self.vectors.adjoint(), &cmatmul(a, &self.vectors))
    }

    /// `e^{itH} A e^{-itH}` from `A` given in the energy basis.
    pub fn evolve_energy_basis(&self, a_e: &CMatrix, t: f64) -> CMatrix {
        let n = self.dim();
        let ph: Vec<Complex64> = self.energies.iter().map(|&e| Complex64::from_polar(1.0, e * t)).collect();
        let rotated = CMatrix::from_fn(n, n, |i, j| a_e[(i, j)] * ph[i] * ph[j].conj());
        cmatmul(&self.vectors, &cmatmul(&rotated, &self.vectors.adjoint()))
    }

    pub fn evolve(&self, a: &CMatrix, t: f64) -> Result<CMatrix> {
        if a.nrows() != self.dim() || a.ncols() != self.dim() {
            return Err(Error::Dimension(format!(
                "operator is {}x{}, Hamiltonian has dimension {}",
                a.nrows(),
                a.ncols(),
                self.dim()
            )));
        }
        Ok(self.evolve_energy_basis(&self.to_energy_basis(a), t))
    }

    /// `max |U^dagger U - 1|` for `U = e^{-itH}`.
    pub fn unitarity_residual(&self, t: f64) -> f64 {
        let n = self.dim();
        let ph = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, -self.energies[i] * t)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let u = cmatmul(&self.vectors, &cmatmul(&ph, &self.vectors.adjoint()));
        max_abs(&(cmatmul(&u.adjoint(), &u) - CMatrix::identity(n, n)))
    }
}

/// `tau_t(A) = e^{itH} A e^{-itH}`.
pub fn evolve(a: &FockOperator, t: f64, h: &FockOperator) -> Result<FockOperator> {
    if a.dim() != h.dim() {
        return Err(Error::Dimension(format!("operator dimension {} vs Hamiltonian {}", a.dim(), h.dim())));
    }
    let d = Dynamics::new(h)?;
    Ok(FockOperator {
        matrix: d.evolve(&a.matrix, t)?,
        hermitian: a.hermitian,
    })
}

/// Norms of `{tau_t(a_g), a_h^*}` and `{tau_t(a_g), a_h}`.
///
/// The two remaining flavours are adjoints of these and have the same norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlavorNorms {
    pub mixed: f64,
    pub same: f64,
}

impl FlavorNorms {
    pub fn max(&self) -> f64 {
        self.mixed.max(self.same)
    }
}

/// Flavour norms for an already evolved `tau_t(a_g)`.
pub fn anticommutator_norms(evolved: &CMatrix, ops: &ModeOperators, h: usize) -> FlavorNorms {
    let mixed = dense_sparse(evolved, &ops.a_dag[h]) + sparse_dense(&ops.a_dag[h], evolved);
    let same = dense_sparse(evolved, &ops.a[h]) + sparse_dense(&ops.a[h], evolved);
    FlavorNorms {
        mixed: fock_norm(&mixed, 0),
        same: fock_norm(&same, -2),
    }
}

/// Operator norm on the Fock space, using particle-number blocks when `b` maps every
/// sector with `k` particles into the sector with `k + shift`.
///
/// Off-block entries up to `1e-12 max|b|` are treated as round-off; anything larger
/// falls back to the dense Lanczos estimate.
pub fn fock_norm(b: &CMatrix, shift: i32) -> f64 {
    let dim = b.nrows();
    if dim == 0 || b.ncols() != dim || !dim.is_power_of_two() {
        return op_norm(b, NORM_TOL);
    }
    let m = dim.trailing_zeros() as usize;
    let count = |s: usize| s.count_ones() as i32;
    let scale = max_abs(b);
    if scale == 0.0 {
        return 0.0;
    }
    let mut off: f64 = 0.0;
    for c in 0..dim {
        for r in 0..dim {
            if count(r) != count(c) + shift {
                off = off.max(b[(r, c)].norm());
            }
        }
    }
    if off > 1e-12 * scale {
        return op_norm(b, NORM_TOL);
    }
    let mut sectors: Vec<Vec<usize>> = vec![Vec::new(); m + 1];
    for s in 0..dim {
        sectors[s.count_ones() as usize].push(s);
    }
    let mut best: f64 = 0.0;
    for (k, cols) in sectors.iter().enumerate() {
        let target = k as i32 + shift;
        if target < 0 || target > m as i32 {
            continue;
        }
        let rows = &sectors[target as usize];
        let block = CMatrix::from_fn(rows.len(), cols.len(), |i, j| b[(rows[i], cols[j])]);
        let gram = if rows.len() < cols.len() { cmatmul(&block, &block.adjoint()) } else { cmatmul(&block.adjoint(), &block) };
        let (values, _) = hermitian_eigen(&gram);
        best = best.max(values[values.len() - 1].max(0.0).sqrt());
    }
    best
}

/// `F = max over flavours of |{tau_t(a_g^#), a_h^#}|`.
pub fn anticommutator_norm(
    t: f64,
    g: &Site,
    h: &Site,
    dynamics: &Dynamics,
    ops: &ModeOperators,
) -> Result<FlavorNorms> {
    let gi = ops.basis.index_of(g)?;
    let hi = ops.basis.index_of(h)?;
    let evolved = dynamics.evolve(&ops.a[gi].to_dense(), t)?;
    Ok(anticommutator_norms(&evolved, ops, hi))
}

/// `tau_t(a_g)` for every site, in parallel.
pub(crate) fn evolve_all(dynamics: &Dynamics, energy_basis: &[CMatrix], t: f64) -> Vec<CMatrix> {
    energy_basis
        .par_iter()
        .map(|a_e| dynamics.evolve_energy_basis(a_e, t))
        .collect()
}

/// Single-particle propagator `V e^{-i h t} V^dagger` with `h = V^dagger T V`:
/// entry `(g, h)` equals `{tau_t(a_g), a_h^*}` for the quadratic Hamiltonian with hopping `T`.
pub fn free_propagator(basis: &ModeBasis, hopping: &CMatrix, t: f64) -> Result<CMatrix> {
    if hopping.nrows() != basis.n_sites() || hopping.ncols() != basis.n_sites() {
        return Err(Error::Dimension("hopping matrix does not match the mode window".into()));
    }
    let h = cmatmul(&basis.v.adjoint(), &cmatmul(hopping, &basis.v));
    let (e, q) = hermitian_eigen(&h);
    let m = e.len();
    let ph = CMatrix::from_fn(m, m, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, -e[i] * t)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let u = cmatmul(&q, &cmatmul(&ph, &q.adjoint()));
    Ok(cmatmul(&basis.v, &cmatmul(&u, &basis.v.adjoint())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interactions::{density_density, InteractionTerm};
    use crate::lattice::LatticeParams;

    fn chain(n: i64, alpha: f64) -> (Window, MagneticParams) {
        let lat = LatticeParams::new(alpha, alpha, 0, 0.0).unwrap();
        let w = Window::from_sites(lat, (0..n).map(|i| Site::new(0, i, 0))).unwrap();
        let p = MagneticParams::for_window(&w, 1.0).unwrap();
        (w, p)
    }

    fn diagonal_basis(n: usize) -> ModeBasis {
        let sites = (0..n as i64).map(|i| Site::new(0, i, 0)).collect();
        ModeBasis::new(sites, CMatrix::identity(n, n)).unwrap()
    }

    #[test]
    fn diagonal_gram_gives_lattice_fermions() {
        let ops = mode_operators(&diagonal_basis(3)).unwrap();
        let r = car_check(&ops);
        assert!(r.mixed < 1e-15 && r.same < 1e-15);
        assert_eq!(ops.dim(), 8);
    }

    #[test]
    fn two_mode_overlap_oracle() {
        // Z = [[1, z], [conj z, 1]]: {a_1, a_2^*} = z 1 entrywise
        let z = Complex64::new(0.3, -0.4);
        let gram = CMatrix::from_row_slice(2, 2, &[Complex64::new(1.0, 0.0), z, z.conj(), Complex64::new(1.0, 0.0)]);
        let basis = ModeBasis::new(vec![Site::new(0, 0, 0), Site::new(0, 1, 0)], gram).unwrap();
        let ops = mode_operators(&basis).unwrap();
        let ac = ops.a[0].mul(&ops.a_dag[1]).add_scaled(&ops.a_dag[1].mul(&ops.a[0]), Complex64::new(1.0, 0.0));
        let d = ac.to_dense();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { z } else { Complex64::new(0.0, 0.0) };
                assert!((d[(i, j)] - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn magnetic_chain_car_and_norms() {
        let (w, p) = chain(5, 1.0);
        let basis = ModeBasis::from_window(&w, &p).unwrap();
        assert!(basis.factor_residual < 1e-10);
        let ops = mode_operators(&basis).unwrap();
        let r = car_check(&ops);
        assert!(r.mixed < 1e-12 && r.same < 1e-12, "{r:?}");
        for a in &ops.a {
            assert!((op_norm(&a.to_dense(), 1e-12) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rank_deficient_window_collapses_modes() {
        let (w, p) = chain(6, 0.3);
        let basis = ModeBasis::from_window(&w, &p).unwrap();
        assert!(basis.n_modes() <= basis.n_sites());
        assert!(basis.factor_residual < 1e-10);
        let r = car_check(&mode_operators(&basis).unwrap());
        assert!(r.mixed < 1e-12);
    }

    #[test]
    fn empty_interaction_is_zero() {
        let ops = mode_operators(&diagonal_basis(2)).unwrap();
        let h = interaction_hamiltonian(&Interaction::default(), &ops).unwrap();
        assert_eq!(max_abs(&h.matrix), 0.0);
    }

    #[test]
    fn density_term_on_orthonormal_modes() {
        // f n_x n_y: diagonal, f on the doubly occupied configuration (x M + M^* = 2 n_x n_y)
        let basis = diagonal_basis(2);
        let ops = mode_operators(&basis).unwrap();
        let (x, y) = (basis.sites[0], basis.sites[1]);
        let f = 0.7;
        let inter = Interaction {
            terms: vec![InteractionTerm::new(vec![x, y], f, MonomialDescriptor::density_pair(x, y)).unwrap()],
            pair_potential: None,
        };
        let h = interaction_hamiltonian(&inter, &ops).unwrap();
        for s in 0..4 {
            for t in 0..4 {
                let expect = if s == t && s == 3 { 2.0 * f } else { 0.0 };
                assert!((h.matrix[(s, t)] - Complex64::new(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn quadratic_subset_sums() {
        let basis = diagonal_basis(3);
        let ops = mode_operators(&basis).unwrap();
        let e = [0.5, -1.25, 2.0];
        let q = QuadraticCoefficients::diagonal(basis.sites.clone(), &e).unwrap();
        let h = quadratic_hamiltonian(&q, &ops).unwrap();
        let (vals, _) = hermitian_eigen(&h.matrix);
        let mut sums: Vec<f64> = (0..8u32)
            .map(|s| (0..3).filter(|&k| s >> k & 1 == 1).map(|k| e[k]).sum())
            .collect();
        sums.sort_by(f64::total_cmp);
        for (a, b) in vals.iter().zip(&sums) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn evolution_properties() {
        let (w, p) = chain(4, 1.0);
        let basis = ModeBasis::from_window(&w, &p).unwrap();
        let ops = mode_operators(&basis).unwrap();
        let inter = density_density(1.0, 1.0, &w).unwrap();
        let h = interaction_hamiltonian(&inter, &ops).unwrap();
        let d = Dynamics::new(&h).unwrap();
        let a = ops.a[1].to_dense();
        assert!(max_abs(&(d.evolve(&a, 0.0).unwrap() - &a)) < 1e-12);
        assert!(max_abs(&(d.evolve(&h.matrix, 0.8).unwrap() - &h.matrix)) < 1e-11);
        let two = d.evolve(&d.evolve(&a, 0.3).unwrap(), 0.5).unwrap();
        assert!(max_abs(&(two - d.evolve(&a, 0.8).unwrap())) < 1e-10);
        assert!(d.unitarity_residual(1.7) < 1e-11);
        let at = d.evolve(&a, 1.3).unwrap();
        assert!((op_norm(&at, 1e-12) - op_norm(&a, 1e-12)).abs() < 1e-9);
        let fa = FockOperator { matrix: a.clone(), hermitian: false };
        assert!(evolve(&fa, 0.0, &h).is_ok());
        let small = FockOperator { matrix: CMatrix::zeros(2, 2), hermitian: false };
        assert!(matches!(evolve(&small, 1.0, &h), Err(Error::Dimension(_))));
    }

    #[test]
    fn sector_norm_matches_dense() {
        let (w, p) = chain(4, 1.0);
        let basis = ModeBasis::from_window(&w, &p).unwrap();
        let ops = mode_operators(&basis).unwrap();
        let h = interaction_hamiltonian(&density_density(1.0, 1.0, &w).unwrap(), &ops).unwrap();
        let d = Dynamics::new(&h).unwrap();
        let ev = d.evolve(&ops.a[0].to_dense(), 0.7).unwrap();
        let mixed = dense_sparse(&ev, &ops.a_dag[3]) + sparse_dense(&ops.a_dag[3], &ev);
        let same = dense_sparse(&ev, &ops.a[3]) + sparse_dense(&ops.a[3], &ev);
        for (b, shift) in [(&mixed, 0), (&same, -2), (&ev, -1)] {
            let exact = crate::linalg::svd_norm(b);
            assert!((fock_norm(b, shift) - exact).abs() < 1e-12 * exact.max(1.0));
        }
        // wrong shift falls back to the dense estimate
        assert!((fock_norm(&ev, 0) - crate::linalg::svd_norm(&ev)).abs() < 1e-9);
    }

    #[test]
    fn time_zero_flavours() {
        let (w, p) = chain(4, 1.0);
        let basis = ModeBasis::from_window(&w, &p).unwrap();
        let ops = mode_operators(&basis).unwrap();
        let h = interaction_hamiltonian(&density_density(1.0, 1.0, &w).unwrap(), &ops).unwrap();
        let d = Dynamics::new(&h).unwrap();
        let (g, k) = (w.sites()[0], w.sites()[2]);
        let f = anticommutator_norm(0.0, &g, &k, &d, &ops).unwrap();
        // |Z| = e^{-|dgamma|^2/4} = e^{-1}
        assert!((f.mixed - (-1.0f64).exp()).abs() < 1e-9);
        assert!(f.same < 1e-12);
        // the adjoint flavour {tau(a_g^*), a_h} has the same norm
        let ev = d.evolve(&ops.a_dag[0].to_dense(), 0.0).unwrap();
        let other = dense_sparse(&ev, &ops.a[2]) + sparse_dense(&ops.a[2], &ev);
        assert!((op_norm(&other, 1e-12) - f.mixed).abs() < 1e-9);
    }

    #[test]
    fn free_dynamics_matches_many_body() {
        let (w, p) = chain(4, 1.2);
        let basis = ModeBasis::from_window(&w, &p).unwrap();
        let ops = mode_operators(&basis).unwrap();
        let t_hop = CMatrix::from_fn(4, 4, |a, b| basis.gram[(a, b)] * Complex64::new(0.5, 0.0));
        let q = QuadraticCoefficients {
            sites: basis.sites.clone(),
            hopping: t_hop.clone(),
            constants: vec![0.1; 4],
            filled_levels: vec![],
        };
        let h = quadratic_hamiltonian(&q, &ops).unwrap();
        let d = Dynamics::new(&h).unwrap();
        let prop = free_propagator(&basis, &t_hop, 0.9).unwrap();
        for g in 0..4 {
            for k in 0..4 {
                let f = anticommutator_norm(0.9, &basis.sites[g], &basis.sites[k], &d, &ops).unwrap();
                assert!((f.mixed - prop[(g, k)].norm()).abs() < 1e-9);
            }
        }
    }
}
