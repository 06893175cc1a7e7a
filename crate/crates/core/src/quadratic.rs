//! Frame-mode coefficients of quadratic Hamiltonians:
//! `t_H(g', g) = <chi_g', S^{-1} H S^{-1} chi_g>` and `c_H(g) = <chi_g, P H P S^{-1} chi_g>`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frame_analysis::{FrameOperatorTrunc, ModeCutoff};
use crate::lattice::{Site, Window};
use crate::linalg::{cmatmul, max_abs, CMatrix};
use crate::magnetic_frame::MagneticParams;

/// Hermiticity tolerance for single-particle operators.
pub const HERMITIAN_TOL: f64 = 1e-13;
/// `|P^2 - P|` tolerance for projections.
pub const PROJECTION_TOL: f64 = 1e-10;

/// Operator on the truncated coordinate space `levels x {0..modes}`.
///
/// Row `b * modes + m` is mode `m` of level `levels[b]`.
#[derive(Debug, Clone)]
pub struct SingleParticleOperator {
    pub levels: Vec<u32>,
    pub modes: usize,
    pub matrix: CMatrix,
    /// Frame vectors are eigenvectors (energy depends on the level only).
    pub frame_eigen: bool,
}

impl SingleParticleOperator {
    pub fn new(levels: Vec<u32>, modes: usize, matrix: CMatrix) -> Result<Self> {
        let n = levels.len() * modes;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Dimension(format!(
                "operator is {}x{}, coordinate space has dimension {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let asym = max_abs(&(&matrix - matrix.adjoint()));
        if asym > HERMITIAN_TOL * max_abs(&matrix).max(1.0) {
            return Err(Error::param("H", format!("not Hermitian: |H - H^dagger| = {asym:e}")));
        }
        Ok(SingleParticleOperator {
            levels,
            modes,
            matrix,
            frame_eigen: false,
        })
    }

    fn diagonal(levels: Vec<u32>, modes: usize, per_level: impl Fn(u32) -> f64) -> Self {
        let n = levels.len() * modes;
        let mut matrix = CMatrix::zeros(n, n);
        for (b, &r) in levels.iter().enumerate() {
            for m in 0..modes {
                matrix[(b * modes + m, b * modes + m)] = Complex64::new(per_level(r), 0.0);
            }
        }
        SingleParticleOperator {
            levels,
            modes,
            matrix,
            frame_eigen: true,
        }
    }

    pub fn zero(levels: Vec<u32>, modes: usize) -> Self {
        Self::diagonal(levels, modes, |_| 0.0)
    }

    pub fn identity(levels: Vec<u32>, modes: usize) -> Self {
        Self::diagonal(levels, modes, |_| 1.0)
    }

    /// `Pi_r`, the projector onto Landau level `r`.
    pub fn level_projector(levels: Vec<u32>, modes: usize, r: u32) -> Self {
        Self::diagonal(levels, modes, |l| if l == r { 1.0 } else { 0.0 })
    }

    /// `H_B = sum_r q(r) Pi_r` with `q(r) = eps_b (r + 1/2)`.
    pub fn landau(levels: Vec<u32>, modes: usize, eps_b: f64) -> Self {
        Self::diagonal(levels, modes, |r| landau_q(eps_b, r))
    }

    /// `S^k` of a truncated frame operator, in the operator's own layout.
    pub fn frame_power(op: &FrameOperatorTrunc, k: u32) -> Self {
        let levels: Vec<u32> = op.levels.iter().map(|b| b.level).collect();
        let modes = op.modes;
        let mut matrix = CMatrix::zeros(levels.len() * modes, levels.len() * modes);
        for (b, block) in op.levels.iter().enumerate() {
            let s = block.matrix();
            let mut p = CMatrix::identity(modes, modes);
            for _ in 0..k {
                p = cmatmul(&p, &s);
            }
            matrix.view_mut((b * modes, b * modes), (modes, modes)).copy_from(&p);
        }
        SingleParticleOperator {
            levels,
            modes,
            matrix,
            frame_eigen: false,
        }
    }

    fn check_layout(&self, op: &FrameOperatorTrunc) -> Result<()> {
        let levels: Vec<u32> = op.levels.iter().map(|b| b.level).collect();
        if levels != self.levels || op.modes != self.modes {
            return Err(Error::Dimension(format!(
                "operator layout (levels {:?}, {} modes) differs from the frame operator (levels {:?}, {} modes)",
                self.levels, self.modes, levels, op.modes
            )));
        }
        Ok(())
    }

    pub fn is_projection(&self) -> Result<()> {
        let dev = max_abs(&(cmatmul(&self.matrix, &self.matrix) - &self.matrix));
        if dev > PROJECTION_TOL {
            return Err(Error::NotProjection(dev));
        }
        Ok(())
    }
}

/// `q(r) = eps_b (r + 1/2)`.
pub fn landau_q(eps_b: f64, r: u32) -> f64 {
    eps_b * (r as f64 + 0.5)
}

/// Synthesis matrix `C` (coordinates x sites) and pseudo-inverse `S^+` in the
/// block layout of `op`.
fn full_layout(op: &FrameOperatorTrunc) -> (CMatrix, CMatrix) {
    let dim = op.levels.len() * op.modes;
    let mut c = CMatrix::zeros(dim, op.n_sites);
    let mut s_inv = CMatrix::zeros(dim, dim);
    for (b, block) in op.levels.iter().enumerate() {
        for (col, &k) in block.sites.iter().enumerate() {
            c.view_mut((b * op.modes, k), (op.modes, 1)).copy_from(&block.coords.column(col));
        }
        let inv = op.inverse_power(block.level, 1).expect("level exists");
        s_inv.view_mut((b * op.modes, b * op.modes), (op.modes, op.modes)).copy_from(&inv);
    }
    (c, s_inv)
}

/// `t(g', g) = <chi_g', S^+ H S^+ chi_g>` over all sites of the frame operator.
pub fn hopping_coeffs(h: &SingleParticleOperator, op: &FrameOperatorTrunc) -> Result<CMatrix> {
    h.check_layout(op)?;
    let (c, s_inv) = full_layout(op);
    let dual = cmatmul(&s_inv, &c);
    Ok(cmatmul(&dual.adjoint(), &cmatmul(&h.matrix, &dual)))
}

/// Per-site constants with the size of the discarded imaginary parts.
#[derive(Debug, Clone)]
pub struct ConstantTerms {
    pub values: Vec<f64>,
    pub max_imag: f64,
}

/// `c(g) = <chi_g, P H P S^+ chi_g>`.
pub fn constant_terms(
    h: &SingleParticleOperator,
    p: &SingleParticleOperator,
    op: &FrameOperatorTrunc,
) -> Result<ConstantTerms> {
    h.check_layout(op)?;
    p.check_layout(op)?;
    p.is_projection()?;
    let (c, s_inv) = full_layout(op);
    let php = cmatmul(&p.matrix, &cmatmul(&h.matrix, &p.matrix));
    let right = cmatmul(&php, &cmatmul(&s_inv, &c));
    let mut values = Vec::with_capacity(op.n_sites);
    let mut max_imag: f64 = 0.0;
    for k in 0..op.n_sites {
        let z: Complex64 = c.column(k).dotc(&right.column(k));
        values.push(z.re);
        max_imag = max_imag.max(z.im.abs());
    }
    Ok(ConstantTerms { values, max_imag })
}

/// Quadratic Hamiltonian `sum t(g',g) a*_g' a_g - sum c(g)` over a set of sites.
#[derive(Debug, Clone)]
pub struct QuadraticCoefficients {
    pub sites: Vec<Site>,
    /// `t[(a, b)] = t(sites[a], sites[b])`, coefficient of `a*_{sites[a]} a_{sites[b]}`.
    pub hopping: CMatrix,
    pub constants: Vec<f64>,
    /// Levels filled by the reference projection `P`.
    pub filled_levels: Vec<u32>,
}

impl QuadraticCoefficients {
    pub fn validate(&self) -> Result<()> {
        let n = self.sites.len();
        if self.hopping.nrows() != n || self.hopping.ncols() != n || self.constants.len() != n {
            return Err(Error::Dimension(format!(
                "{} sites, hopping {}x{}, {} constants",
                n,
                self.hopping.nrows(),
                self.hopping.ncols(),
                self.constants.len()
            )));
        }
        let asym = max_abs(&(&self.hopping - self.hopping.adjoint()));
        if asym > 1e-12 * max_abs(&self.hopping).max(1.0) {
            return Err(Error::param("t", format!("hopping matrix is not Hermitian ({asym:e})")));
        }
        Ok(())
    }

    /// Diagonal hopping with no constants, a plain lattice model.
    pub fn diagonal(sites: Vec<Site>, energies: &[f64]) -> Result<Self> {
        let h = DVector::from_iterator(energies.len(), energies.iter().map(|&e| Complex64::new(e, 0.0)));
        let q = QuadraticCoefficients {
            constants: vec![0.0; sites.len()],
            sites,
            hopping: CMatrix::from_diagonal(&h),
            filled_levels: Vec::new(),
        };
        q.validate()?;
        Ok(q)
    }
}

/// Landau coefficients on the inner window, every level of `window`.
///
/// `t_r(g', g) = q(r) <chi_(r,g'), S^{-2} chi_(r,g)>`, zero across levels, and
/// `c_r(g) = <chi_(r,g), S^{-1} chi_(r,g)>` (all levels filled).
#[derive(Debug, Clone)]
pub struct LandauCoefficients {
    pub coefficients: QuadraticCoefficients,
    /// `(r, q(r))` for each level present.
    pub q: Vec<(u32, f64)>,
    /// `|[S, H_B]|` in coordinates; zero for level-diagonal `H_B`.
    pub commutator_residual: f64,
}

pub fn landau_coefficients(window: &Window, params: &MagneticParams, margin: f64) -> Result<LandauCoefficients> {
    params.require_overcomplete("landau_coefficients")?;
    let op = FrameOperatorTrunc::build(window, params, ModeCutoff::CoveredDisk)?;
    let inner = window.inner_indices(margin * params.ell_b);
    if inner.is_empty() {
        return Err(Error::EmptySet("inner window (enlarge the window or reduce the margin)"));
    }
    let s2 = op.sandwich(2);
    let s1 = op.sandwich(1);
    let sites: Vec<Site> = inner.iter().map(|&k| window.sites()[k]).collect();
    let hopping = CMatrix::from_fn(inner.len(), inner.len(), |a, b| {
        let (sa, sb) = (&sites[a], &sites[b]);
        if sa.r != sb.r {
            Complex64::new(0.0, 0.0)
        } else {
            s2[(inner[a], inner[b])] * landau_q(params.eps_b, sa.r)
        }
    });
    let constants = inner.iter().map(|&k| s1[(k, k)].re).collect();
    let levels = window.levels();
    let hb = SingleParticleOperator::landau(levels.clone(), op.modes, params.eps_b);
    let s = SingleParticleOperator::frame_power(&op, 1);
    let comm = cmatmul(&s.matrix, &hb.matrix) - cmatmul(&hb.matrix, &s.matrix);
    Ok(LandauCoefficients {
        coefficients: QuadraticCoefficients {
            sites,
            hopping,
            constants,
            filled_levels: levels.clone(),
        },
        q: levels.iter().map(|&r| (r, landau_q(params.eps_b, r))).collect(),
        commutator_residual: max_abs(&comm),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame_analysis::{gram, s_inverse_power_elements, DEFAULT_MARGIN};
    use crate::lattice::LatticeParams;
    use std::f64::consts::PI;

    fn pi_setup(radius: f64, level_max: u32, cutoff: ModeCutoff) -> (Window, MagneticParams, FrameOperatorTrunc) {
        let a = PI.sqrt();
        let w = Window::square(LatticeParams::new(a, a, level_max, radius).unwrap()).unwrap();
        let p = MagneticParams::for_window(&w, 1.0).unwrap();
        let op = FrameOperatorTrunc::build(&w, &p, cutoff).unwrap();
        (w, p, op)
    }

    fn levels(op: &FrameOperatorTrunc) -> Vec<u32> {
        op.levels.iter().map(|b| b.level).collect()
    }

    #[test]
    fn q_values() {
        assert_eq!(landau_q(1.0, 0), 0.5);
        assert_eq!(landau_q(2.0, 3), 7.0);
    }

    #[test]
    fn zero_hamiltonian() {
        let (_, _, op) = pi_setup(2.0, 0, ModeCutoff::CoveredDisk);
        let h = SingleParticleOperator::zero(levels(&op), op.modes);
        let t = hopping_coeffs(&h, &op).unwrap();
        assert_eq!(max_abs(&t), 0.0);
    }

    #[test]
    fn s_squared_gives_gram() {
        let (w, p, op) = pi_setup(2.0, 1, ModeCutoff::Full);
        let h = SingleParticleOperator::frame_power(&op, 2);
        let t = hopping_coeffs(&h, &op).unwrap();
        let g = gram(&w, &p);
        assert!(max_abs(&(&t - &g.entries)) < 1e-9, "{}", max_abs(&(&t - &g.entries)));
    }

    #[test]
    fn level_projector_matches_s_minus_two() {
        let (w, p, op) = pi_setup(5.0, 0, ModeCutoff::CoveredDisk);
        let h = SingleParticleOperator::level_projector(levels(&op), op.modes, 0);
        let t = hopping_coeffs(&h, &op).unwrap();
        let e = s_inverse_power_elements(2, &w, &p, DEFAULT_MARGIN).unwrap();
        for (a, &i) in e.inner.iter().enumerate() {
            for (b, &j) in e.inner.iter().enumerate() {
                assert!((t[(i, j)] - e.matrix[(a, b)]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn hopping_is_hermitian() {
        let (_, p, op) = pi_setup(3.0, 1, ModeCutoff::CoveredDisk);
        let h = SingleParticleOperator::landau(levels(&op), op.modes, p.eps_b);
        let t = hopping_coeffs(&h, &op).unwrap();
        assert!(max_abs(&(&t - t.adjoint())) < 1e-12 * max_abs(&t));
    }

    #[test]
    fn constants() {
        let (_, _, op) = pi_setup(3.0, 0, ModeCutoff::CoveredDisk);
        let lv = levels(&op);
        let h = SingleParticleOperator::level_projector(lv.clone(), op.modes, 0);
        let zero = SingleParticleOperator::zero(lv.clone(), op.modes);
        let c0 = constant_terms(&h, &zero, &op).unwrap();
        assert!(c0.values.iter().all(|&c| c == 0.0));
        let id = SingleParticleOperator::identity(lv.clone(), op.modes);
        let c = constant_terms(&h, &id, &op).unwrap();
        assert!(c.values.iter().all(|&c| c > 0.0));
        assert!(c.max_imag < 1e-12);
        let mut not_p = id.clone();
        not_p.matrix *= Complex64::new(0.5, 0.0);
        assert!(matches!(constant_terms(&h, &not_p, &op), Err(Error::NotProjection(_))));
    }

    #[test]
    fn rejects_non_hermitian_and_bad_layout() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(SingleParticleOperator::new(vec![0], 2, m).is_err());
        let (_, _, op) = pi_setup(2.0, 0, ModeCutoff::CoveredDisk);
        let h = SingleParticleOperator::zero(vec![0], op.modes + 1);
        assert!(matches!(hopping_coeffs(&h, &op), Err(Error::Dimension(_))));
    }

    #[test]
    fn landau_levels_decouple() {
        let a = PI.sqrt();
        let w = Window::square(LatticeParams::new(a, a, 1, 5.0).unwrap()).unwrap();
        let p = MagneticParams::for_window(&w, 1.0).unwrap();
        let l = landau_coefficients(&w, &p, DEFAULT_MARGIN).unwrap();
        let q = &l.coefficients;
        q.validate().unwrap();
        for a in 0..q.sites.len() {
            for b in 0..q.sites.len() {
                if q.sites[a].r != q.sites[b].r {
                    assert_eq!(q.hopping[(a, b)], Complex64::new(0.0, 0.0));
                }
            }
        }
        assert_eq!(l.q, vec![(0, 0.5), (1, 1.5)]);
        assert_eq!(l.commutator_residual, 0.0);
        assert!(q.constants.iter().all(|&c| c > 0.0));
    }

    #[test]
    fn diagonal_model() {
        let s = vec![Site::new(0, 0, 0), Site::new(0, 1, 0)];
        let q = QuadraticCoefficients::diagonal(s, &[1.0, 2.0]).unwrap();
        assert_eq!(q.hopping[(1, 1)], Complex64::new(2.0, 0.0));
        assert_eq!(q.constants, vec![0.0, 0.0]);
    }
}
