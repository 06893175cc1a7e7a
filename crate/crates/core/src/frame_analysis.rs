//! Gram matrices, truncated frame operators, frame-bound estimates and
//! decay certificates for `<chi_gamma, S^{-p} chi_gamma'>`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{LatticeParams, Site, Window};
use crate::linalg::{cmatmul, hermitian_eigen, CMatrix, CVector};
use crate::magnetic_frame::{
    chi_coords, coherent_coeffs, overlap, LaguerreCoords, MagneticParams, Regime,
};

/// Eigenvalues below this fraction of the largest one are treated as kernel.
pub const PINV_REL_THRESHOLD: f64 = 1e-10;
/// Default distance (in units of `ell_b`) between reported sites and the window edge.
pub const DEFAULT_MARGIN: f64 = 6.0;
/// Relative slack absorbing rounding in the `|entry| <= bound` comparisons.
pub const BOUND_SLACK: f64 = 1e-12;

/// Hermitian matrix of overlaps `<chi_p, chi_q>` on a window.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub sites: Vec<Site>,
    pub entries: CMatrix,
}

impl GramMatrix {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> DVector<f64> {
        hermitian_eigen(&self.entries).0
    }
}

pub fn gram(window: &Window, params: &MagneticParams) -> GramMatrix {
    let sites = window.sites().to_vec();
    let n = sites.len();
    let entries = CMatrix::from_fn(n, n, |a, b| overlap(&sites[a], &sites[b], params));
    GramMatrix { sites, entries }
}

/// Which Laguerre modes carry the truncated frame operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeCutoff {
    /// All modes `m <= M` of the truncation rule; nonzero spectrum equals the Gram's.
    Full,
    /// Modes whose classical radius `ell sqrt(2m)` lies in the disk covered by the window.
    ///
    /// Modes outside that disk are only partly reached by the frame and carry the
    /// near-kernel spectrum that would otherwise dominate `S^{-p}`.
    CoveredDisk,
    /// Explicit cutoff `m <= M'`.
    Modes(usize),
}

/// Frame operator of one Landau level in truncated coordinates.
#[derive(Debug, Clone)]
pub struct LevelBlock {
    pub level: u32,
    /// Window indices of the sites on this level.
    pub sites: Vec<usize>,
    /// Coordinates of the frame vectors as columns, rows `m = 0..modes`.
    pub coords: CMatrix,
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

impl LevelBlock {
    /// `S = C C^dagger`.
    pub fn matrix(&self) -> CMatrix {
        cmatmul(&self.coords, &self.coords.adjoint())
    }
}

/// `S_Lambda = sum_gamma |chi_gamma><chi_gamma|` restricted to a set of Laguerre modes.
#[derive(Debug, Clone)]
pub struct FrameOperatorTrunc {
    pub levels: Vec<LevelBlock>,
    pub modes: usize,
    pub n_sites: usize,
    pub lambda_max: f64,
    pub threshold: f64,
}

/// `floor(rho^2 / 2 ell^2)`: largest `m` whose classical orbit fits in radius `rho`.
pub fn modes_in_disk(rho: f64, ell: f64) -> usize {
    if rho <= 0.0 {
        0
    } else {
        (rho * rho / (2.0 * ell * ell)).floor() as usize
    }
}

impl FrameOperatorTrunc {
    pub fn build(window: &Window, params: &MagneticParams, cutoff: ModeCutoff) -> Result<Self> {
        if window.is_empty() {
            return Err(Error::EmptySet("window"));
        }
        let last = match cutoff {
            ModeCutoff::Full => params.laguerre_trunc,
            ModeCutoff::CoveredDisk => {
                modes_in_disk(window.covered_radius(), params.ell_b).min(params.laguerre_trunc)
            }
            ModeCutoff::Modes(m) => m.min(params.laguerre_trunc),
        };
        let modes = last + 1;
        let mut levels = Vec::new();
        for r in window.levels() {
            let idx = window.level_indices(r);
            let mut coords = CMatrix::zeros(modes, idx.len());
            for (col, &k) in idx.iter().enumerate() {
                let c = chi_coords(&window.sites()[k], params)?;
                coords.set_column(col, &c.coeffs.rows(0, modes));
            }
            let s = cmatmul(&coords, &coords.adjoint());
            let (values, vectors) = hermitian_eigen(&s);
            levels.push(LevelBlock {
                level: r,
                sites: idx,
                coords,
                values,
                vectors,
            });
        }
        let lambda_max = levels
            .iter()
            .map(|b| b.values.iter().copied().fold(0.0, f64::max))
            .fold(0.0, f64::max);
        Ok(FrameOperatorTrunc {
            levels,
            modes,
            n_sites: window.len(),
            lambda_max,
            threshold: PINV_REL_THRESHOLD * lambda_max,
        })
    }

    pub fn level(&self, r: u32) -> Option<&LevelBlock> {
        self.levels.iter().find(|b| b.level == r)
    }

    /// Eigenvalues above the pseudo-inverse threshold, all levels, ascending.
    pub fn nonzero_spectrum(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .levels
            .iter()
            .flat_map(|b| b.values.iter().copied())
            .filter(|&x| x > self.threshold)
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Smallest retained eigenvalue over all levels.
    pub fn min_retained(&self) -> f64 {
        self.nonzero_spectrum().first().copied().unwrap_or(0.0)
    }

    /// `(S^+)^p` on one level (`p = 0` gives the range projector).
    pub fn inverse_power(&self, r: u32, p: u32) -> Option<CMatrix> {
        let b = self.level(r)?;
        Some(crate::linalg::spectral_function(
            &b.values,
            &b.vectors,
            self.threshold,
            |x| x.powi(-(p as i32)),
        ))
    }

    /// `<chi_a, S^{-p} chi_b>` over all window sites; zero across levels.
    pub fn sandwich(&self, p: u32) -> CMatrix {
        let mut out = CMatrix::zeros(self.n_sites, self.n_sites);
        for b in &self.levels {
            let inv = self.inverse_power(b.level, p).expect("level exists");
            let block = cmatmul(&b.coords.adjoint(), &cmatmul(&inv, &b.coords));
            for (x, &i) in b.sites.iter().enumerate() {
                for (y, &j) in b.sites.iter().enumerate() {
                    out[(i, j)] = block[(x, y)];
                }
            }
        }
        out
    }

    /// `(S^+)^p` applied to a coordinate vector, truncated or zero-padded to the block size.
    pub fn apply_inverse_power(&self, phi: &LaguerreCoords, p: u32) -> Result<LaguerreCoords> {
        let inv = self.inverse_power(phi.level, p).ok_or_else(|| {
            Error::param("phi", format!("level {} is not part of the window", phi.level))
        })?;
        let v = CVector::from_fn(self.modes, |m, _| {
            phi.coeffs.get(m).copied().unwrap_or(Complex64::new(0.0, 0.0))
        });
        Ok(LaguerreCoords::new(phi.level, &inv * v))
    }
}

/// Inner-window block of `<chi_a, S^{-p} chi_b>`.
#[derive(Debug, Clone)]
pub struct InversePowerElements {
    pub p: u32,
    /// Window indices of the reported sites.
    pub inner: Vec<usize>,
    pub sites: Vec<Site>,
    pub matrix: CMatrix,
}

/// `<chi_gamma, S^{-p} chi_gamma'>` on the inner window (sites at least `margin * ell_b`
/// inside the covered disk). `p = 0` returns the closed-form Gram block.
pub fn s_inverse_power_elements(
    p: u32,
    window: &Window,
    params: &MagneticParams,
    margin: f64,
) -> Result<InversePowerElements> {
    params.require_overcomplete("s_inverse_power_elements")?;
    let inner = window.inner_indices(margin * params.ell_b);
    if inner.is_empty() {
        return Err(Error::EmptySet("inner window (enlarge the window or reduce the margin)"));
    }
    let sites: Vec<Site> = inner.iter().map(|&k| window.sites()[k]).collect();
    let full = if p == 0 {
        gram(window, params).entries
    } else {
        FrameOperatorTrunc::build(window, params, ModeCutoff::CoveredDisk)?.sandwich(p)
    };
    let matrix = CMatrix::from_fn(inner.len(), inner.len(), |a, b| full[(inner[a], inner[b])]);
    Ok(InversePowerElements {
        p,
        inner,
        sites,
        matrix,
    })
}

/// Frame-bound estimates on one window.
#[derive(Debug, Clone)]
pub struct FrameBounds {
    pub n_sites: usize,
    /// Lower bound estimate: smallest eigenvalue of `S_Lambda` compressed to the
    /// Laguerre modes inside the inner disk.
    pub a_est: f64,
    /// Largest Gram eigenvalue.
    pub b_est: f64,
    /// Smallest Gram eigenvalue above the pseudo-inverse threshold.
    pub gram_min_retained: f64,
    pub numerical_rank: usize,
    pub inner_modes: usize,
    /// Numerical rank far below the expected density `n Delta / 2 pi`.
    pub ill_conditioned: bool,
}

/// Frame-bound estimates over a nested sequence of windows.
pub fn frame_bounds_estimate(
    windows: &[Window],
    ell_b: f64,
    margin: f64,
) -> Result<Vec<FrameBounds>> {
    if windows.len() < 2 {
        return Err(Error::param("windows", "need at least two nested windows"));
    }
    for pair in windows.windows(2) {
        if !pair[0].sites().iter().all(|s| pair[1].contains(s)) {
            return Err(Error::NotNested("frame-bound windows must increase".into()));
        }
    }
    windows.iter().map(|w| frame_bounds_one(w, ell_b, margin)).collect()
}

pub fn frame_bounds_one(window: &Window, ell_b: f64, margin: f64) -> Result<FrameBounds> {
    let params = MagneticParams::for_window(window, ell_b)?;
    let g = gram(window, &params);
    let eig = g.eigenvalues();
    let b_est = eig.iter().copied().fold(0.0, f64::max);
    let thr = PINV_REL_THRESHOLD * b_est;
    let retained: Vec<f64> = eig.iter().copied().filter(|&x| x > thr).collect();
    let gram_min_retained = retained.iter().copied().fold(f64::INFINITY, f64::min);
    let rho_in = window.covered_radius() - margin * ell_b;
    let inner_modes = modes_in_disk(rho_in, ell_b) + 1;
    let op = FrameOperatorTrunc::build(window, &params, ModeCutoff::Modes(inner_modes - 1))?;
    let a_est = op
        .levels
        .iter()
        .map(|b| b.values.iter().copied().fold(f64::INFINITY, f64::min))
        .fold(f64::INFINITY, f64::min);
    let n = window.len();
    let density = (params.delta() / (2.0 * std::f64::consts::PI)).min(1.0);
    let spatial: std::collections::BTreeSet<(i64, i64)> =
        window.sites().iter().map(|s| (s.i, s.j)).collect();
    let boundary = spatial
        .iter()
        .filter(|&&(i, j)| {
            [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .any(|(di, dj)| !spatial.contains(&(i + di, j + dj)))
        })
        .count()
        * window.levels().len();
    let expected = (n as f64 * density).floor() as usize;
    let ill_conditioned =
        params.regime() == Regime::Overcomplete && retained.len() + boundary < expected;
    Ok(FrameBounds {
        n_sites: n,
        a_est,
        b_est,
        gram_min_retained,
        numerical_rank: retained.len(),
        inner_modes,
        ill_conditioned,
    })
}

/// Tuning of the Neumann-series certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateTuning {
    pub g: f64,
    pub lambda: f64,
    pub delta: f64,
    pub eps: f64,
    pub theta: f64,
}

impl CertificateTuning {
    /// `delta = lambda/2`, `eps = lambda/4`, `theta = (lambda - delta)/2`.
    pub fn defaults(g: f64, lambda: f64) -> Self {
        let delta = lambda / 2.0;
        CertificateTuning {
            g,
            lambda,
            delta,
            eps: lambda / 4.0,
            theta: (lambda - delta) / 2.0,
        }
    }

    /// Localization constants of the magnetic frame: `G = 1`, `lambda = 1/(4 ell^2)`.
    pub fn magnetic(params: &MagneticParams) -> Self {
        Self::defaults(1.0, params.varpi())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g >= 1.0) {
            return Err(Error::param("G", format!("must be >= 1, got {}", self.g)));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::param("lambda", format!("must be positive, got {}", self.lambda)));
        }
        if !(0.0 < self.eps && self.eps < self.delta && self.delta < self.lambda) {
            return Err(Error::param(
                "eps",
                format!(
                    "need 0 < eps < delta < lambda, got eps={} delta={} lambda={}",
                    self.eps, self.delta, self.lambda
                ),
            ));
        }
        if !(0.0 < self.theta && self.theta < self.lambda - self.delta) {
            return Err(Error::param(
                "theta",
                format!("need 0 < theta < lambda - delta, got {}", self.theta),
            ));
        }
        Ok(())
    }
}

/// Constants certifying `|<chi_a, S^{-p} chi_b>| <= a_p e^{-lambda_p d(a, b)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayCertificate {
    pub g: f64,
    pub lambda: f64,
    pub delta: f64,
    pub eps: f64,
    pub theta: f64,
    pub p: u32,
    pub s_min: f64,
    pub s_max: f64,
    pub c_eps: f64,
    pub r_p: f64,
    pub d_p: f64,
    pub e_p: f64,
    pub lambda_p: f64,
    pub a_p: f64,
}

impl DecayCertificate {
    pub fn bound(&self, d: f64) -> f64 {
        self.a_p * (-self.lambda_p * d).exp()
    }

    pub fn to_text(&self) -> String {
        use crate::format::sig15;
        let rows = [
            ("G", self.g),
            ("lambda", self.lambda),
            ("delta", self.delta),
            ("eps", self.eps),
            ("theta", self.theta),
            ("p", self.p as f64),
            ("s_min", self.s_min),
            ("s_max", self.s_max),
            ("c_eps", self.c_eps),
            ("r_p", self.r_p),
            ("d_p", self.d_p),
            ("E_p", self.e_p),
            ("lambda_p", self.lambda_p),
            ("a_p", self.a_p),
        ];
        let body: Vec<String> = rows
            .iter()
            .map(|(k, v)| format!("  \"{k}\": {}", sig15(*v)))
            .collect();
        format!("{{\n{}\n}}\n", body.join(",\n"))
    }
}

/// Neumann-series certificate; `m_eps` is an upper bound on `sup_gamma sum_xi e^{-eps d}`.
pub fn neumann_certificate(
    tuning: &CertificateTuning,
    s_min: f64,
    s_max: f64,
    p: u32,
    m_eps: f64,
) -> Result<DecayCertificate> {
    tuning.validate()?;
    if !(s_min > 0.0) {
        return Err(Error::param("s_min", format!("certificate needs s_min > 0, got {s_min}")));
    }
    if !(s_max >= s_min) {
        return Err(Error::param("s_max", format!("need s_max >= s_min, got {s_max} < {s_min}")));
    }
    if p == 0 {
        return Err(Error::param("p", "must be a positive integer"));
    }
    let pi = p as i32;
    let c_eps = tuning.g * m_eps;
    let r_p = 1.0 - (s_min / s_max).powi(pi);
    let d_p = tuning.g * (1.0 + (c_eps / s_max).powi(pi));
    let e_p = (tuning.lambda - tuning.delta - tuning.theta) / (d_p / r_p).ln();
    let lambda_p = tuning.theta.min((1.0 / r_p).ln() * e_p);
    let a_p = 2.0 / (s_max.powi(pi) * (1.0 - r_p));
    Ok(DecayCertificate {
        g: tuning.g,
        lambda: tuning.lambda,
        delta: tuning.delta,
        eps: tuning.eps,
        theta: tuning.theta,
        p,
        s_min,
        s_max,
        c_eps,
        r_p,
        d_p,
        e_p,
        lambda_p,
        a_p,
    })
}

/// Pairwise comparison `|entry| <= prefactor e^{-rate d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub max_ratio: f64,
    pub pairs: usize,
    /// `(row, col, |entry|, bound)`.
    pub violations: Vec<(usize, usize, f64, f64)>,
}

impl DecayReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn verify_decay(
    matrix: &CMatrix,
    sites: &[Site],
    lattice: &LatticeParams,
    prefactor: f64,
    rate: f64,
) -> Result<DecayReport> {
    if matrix.nrows() != sites.len() || matrix.ncols() != sites.len() {
        return Err(Error::Dimension(format!(
            "matrix {}x{} vs {} sites",
            matrix.nrows(),
            matrix.ncols(),
            sites.len()
        )));
    }
    let mut max_ratio = 0.0_f64;
    let mut violations = Vec::new();
    for a in 0..sites.len() {
        for b in 0..sites.len() {
            let d = lattice.distance(&sites[a], &sites[b]);
            let bound = prefactor * (-rate * d).exp();
            let v = matrix[(a, b)].norm();
            let ratio = v / bound;
            max_ratio = max_ratio.max(ratio);
            if v > bound * (1.0 + BOUND_SLACK) {
                violations.push((a, b, v, bound));
            }
        }
    }
    Ok(DecayReport {
        max_ratio,
        pairs: sites.len() * sites.len(),
        violations,
    })
}

/// Exponential rate of the decay envelope.
///
/// For each distinct distance the largest `log|entry|` is kept (entries above
/// `1e-12` only); a least-squares line weighted by the pair multiplicity is fitted
/// through those envelope points and minus its slope is returned.
pub fn fit_decay_rate(matrix: &CMatrix, sites: &[Site], lattice: &LatticeParams) -> Option<f64> {
    let mut pts: Vec<(f64, f64, f64)> = Vec::new();
    for a in 0..sites.len() {
        for b in 0..sites.len() {
            let v = matrix[(a, b)].norm();
            if v <= 1e-12 {
                continue;
            }
            let d = lattice.distance(&sites[a], &sites[b]);
            match pts.iter_mut().find(|(x, _, _)| (x - d).abs() <= 1e-9 * (1.0 + d)) {
                Some(p) => {
                    p.1 = p.1.max(v.ln());
                    p.2 += 1.0;
                }
                None => pts.push((d, v.ln(), 1.0)),
            }
        }
    }
    if pts.len() < 2 {
        return None;
    }
    let wsum: f64 = pts.iter().map(|p| p.2).sum();
    let xm = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / wsum;
    let ym = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / wsum;
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - xm) * (p.1 - ym)).sum();
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - xm).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(-sxy / sxx)
}

/// Analysis coefficients `s_gamma(phi) = <S^{-1} chi_gamma, phi>` and synthesis check.
#[derive(Debug, Clone)]
pub struct FrameCoefficients {
    /// Indexed like the window sites.
    pub coeffs: CVector,
    /// `|sum_gamma s_gamma chi_gamma - phi|` in coordinates.
    pub residual: f64,
    /// Weight of `phi` on modes outside the frame operator's block.
    pub outside_weight: f64,
}

pub fn frame_coefficients(
    phi: &LaguerreCoords,
    op: &FrameOperatorTrunc,
) -> Result<FrameCoefficients> {
    let b = op.level(phi.level).ok_or_else(|| {
        Error::param("phi", format!("level {} is not part of the window", phi.level))
    })?;
    let inv_phi = op.apply_inverse_power(phi, 1)?;
    let local = b.coords.ad_mul(&inv_phi.coeffs);
    let mut coeffs = CVector::zeros(op.n_sites);
    for (x, &k) in b.sites.iter().enumerate() {
        coeffs[k] = local[x];
    }
    let synth = &b.coords * &local;
    let mut residual2 = 0.0;
    let mut outside = 0.0;
    for m in 0..phi.coeffs.len().max(op.modes) {
        let target = phi.coeffs.get(m).copied().unwrap_or(Complex64::new(0.0, 0.0));
        if m < op.modes {
            residual2 += (synth[m] - target).norm_sqr();
        } else {
            outside += target.norm_sqr();
        }
    }
    Ok(FrameCoefficients {
        coeffs,
        residual: (residual2 + outside).sqrt(),
        outside_weight: outside.sqrt(),
    })
}

/// Coordinates of `chi` at an arbitrary point of the plane, lowest level.
pub fn point_coords(gamma: crate::Point, params: &MagneticParams) -> LaguerreCoords {
    LaguerreCoords::new(0, coherent_coeffs(gamma, params.laguerre_trunc, params.ell_b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeParams;
    use std::f64::consts::PI;

    fn pi_window(radius: f64, level_max: u32) -> (Window, MagneticParams) {
        let a = PI.sqrt();
        let w = Window::square(LatticeParams::new(a, a, level_max, radius).unwrap()).unwrap();
        let p = MagneticParams::for_window(&w, 1.0).unwrap();
        (w, p)
    }

    #[test]
    fn gram_two_sites() {
        let lat = LatticeParams::new(2.0, 2.0, 0, 0.0).unwrap();
        let w = Window::from_sites(lat, [Site::new(0, 0, 0), Site::new(0, 1, 0)]).unwrap();
        let p = MagneticParams::for_window(&w, 1.0).unwrap();
        let g = gram(&w, &p);
        assert!((g.entries[(0, 1)].norm() - (-1.0f64).exp()).abs() < 1e-15);
        let ev = g.eigenvalues();
        assert!((ev[0] - 0.632120558828558).abs() < 1e-14);
        assert!((ev[1] - 1.36787944117144).abs() < 1e-14);
    }

    #[test]
    fn gram_single_site() {
        let lat = LatticeParams::new(1.0, 1.0, 0, 0.0).unwrap();
        let w = Window::square(lat).unwrap();
        let p = MagneticParams::for_window(&w, 1.0).unwrap();
        let g = gram(&w, &p);
        assert_eq!(g.entries.shape(), (1, 1));
        assert_eq!(g.entries[(0, 0)], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn frame_operator_and_gram_share_spectrum() {
        let (w, p) = pi_window(3.0, 1);
        let op = FrameOperatorTrunc::build(&w, &p, ModeCutoff::Full).unwrap();
        let g = gram(&w, &p);
        let mut ge: Vec<f64> = g.eigenvalues().iter().copied().filter(|&x| x > op.threshold).collect();
        ge.sort_by(f64::total_cmp);
        let se = op.nonzero_spectrum();
        assert_eq!(ge.len(), se.len());
        for (a, b) in ge.iter().zip(&se) {
            assert!((a - b).abs() <= 1e-9 * op.lambda_max, "{a} vs {b}");
        }
    }

    #[test]
    fn certificate_examples() {
        let t = CertificateTuning {
            g: 1.0,
            lambda: 1.5,
            delta: 0.75,
            eps: 0.375,
            theta: 0.25,
        };
        let c = neumann_certificate(&t, 1.0, 2.0, 1, 2.163953).unwrap();
        assert!((c.r_p - 0.5).abs() < 1e-15);
        assert!((c.a_p - 2.0).abs() < 1e-15);
        assert!((c.d_p - 2.0819765).abs() < 1e-12);
        // independently scripted evaluation of the same formulas
        assert!((c.e_p - 0.350516870626164).abs() < 1e-12);
        assert!((c.lambda_p - 0.242959780613221).abs() < 1e-12);
        assert!(neumann_certificate(&t, 0.0, 2.0, 1, 2.0).is_err());
        let bad = CertificateTuning { theta: 0.8, ..t };
        assert!(neumann_certificate(&bad, 1.0, 2.0, 1, 2.0).is_err());
    }

    #[test]
    fn certificate_degrades_with_p() {
        let t = CertificateTuning::defaults(1.0, 0.25);
        let mut prev = f64::INFINITY;
        for p in 1..=12 {
            let c = neumann_certificate(&t, 1.0, 2.0, p, 10.0).unwrap();
            assert!(c.lambda_p <= prev);
            assert!(c.lambda_p < c.lambda);
            prev = c.lambda_p;
        }
        let far = neumann_certificate(&t, 1.0, 2.0, 60, 10.0).unwrap();
        assert!(far.r_p > 1.0 - 1e-15);
        assert!(far.a_p > 1e15);
    }

    #[test]
    fn verify_zero_matrix() {
        let lat = LatticeParams::new(1.0, 1.0, 0, 1.0).unwrap();
        let w = Window::square(lat).unwrap();
        let z = CMatrix::zeros(w.len(), w.len());
        let r = verify_decay(&z, w.sites(), &lat, 1.0, 0.5).unwrap();
        assert_eq!(r.max_ratio, 0.0);
        assert!(r.passed());
    }

    #[test]
    fn gram_satisfies_its_own_localization() {
        for a in [0.5, 1.0, PI.sqrt(), 2.5] {
            let lat = LatticeParams::new(a, a, 0, 4.0).unwrap();
            let w = Window::square(lat).unwrap();
            let p = MagneticParams::for_window(&w, 1.0).unwrap();
            let g = gram(&w, &p);
            let r = verify_decay(&g.entries, w.sites(), &lat, 1.0, p.varpi()).unwrap();
            assert!(r.passed(), "alpha = {a}: max ratio {}", r.max_ratio);
        }
    }

    #[test]
    fn inverse_sandwich_diagonal_is_density() {
        // canonical dual frame identity: <chi, S^{-1} chi> = Delta / 2 pi,
        // checked 8 ell inside the covered disk where the cutoff leakage is below 1e-7
        let (w, p) = pi_window(6.0, 0);
        let e = s_inverse_power_elements(1, &w, &p, 8.0).unwrap();
        assert!(e.sites.len() >= 9);
        for k in 0..e.sites.len() {
            let z = e.matrix[(k, k)];
            assert!(z.im.abs() < 1e-12);
            assert!((z.re - 0.5).abs() < 1e-6, "{}", z.re);
        }
    }

    #[test]
    fn p_zero_is_gram() {
        let (w, p) = pi_window(6.0, 0);
        let e = s_inverse_power_elements(0, &w, &p, DEFAULT_MARGIN).unwrap();
        let g = gram(&w, &p);
        for (a, &i) in e.inner.iter().enumerate() {
            for (b, &j) in e.inner.iter().enumerate() {
                assert_eq!(e.matrix[(a, b)], g.entries[(i, j)]);
            }
        }
    }

    #[test]
    fn threshold_regime_rejected() {
        let a = (2.0 * PI).sqrt();
        let w = Window::square(LatticeParams::new(a, a, 0, 2.0).unwrap()).unwrap();
        let p = MagneticParams::for_window(&w, 1.0).unwrap();
        assert!(matches!(
            s_inverse_power_elements(1, &w, &p, 1.0),
            Err(Error::Regime { .. })
        ));
    }

    #[test]
    fn frame_coefficients_round_trip_and_minimal_norm() {
        let (w, p) = pi_window(6.0, 0);
        let op = FrameOperatorTrunc::build(&w, &p, ModeCutoff::CoveredDisk).unwrap();
        let phi = chi_coords(&Site::new(0, 0, 0), &p).unwrap();
        let fc = frame_coefficients(&phi, &op).unwrap();
        assert!(fc.residual < 1e-7, "{}", fc.residual);
        let zero = LaguerreCoords::zeros(0, p.laguerre_trunc);
        let z = frame_coefficients(&zero, &op).unwrap();
        assert!(z.coeffs.iter().all(|c| c.norm() == 0.0));

        // alternatives s + n with C n = 0 are never shorter
        let b = op.level(0).unwrap();
        let cplus = cmatmul(&b.coords.adjoint(), &cmatmul(&op.inverse_power(0, 1).unwrap(), &b.coords));
        let n = w.len();
        for t in 0..20 {
            let x = CVector::from_fn(n, |k, _| {
                let s = (k * 31 + t * 17) as f64;
                Complex64::new(s.sin(), (0.7 * s).cos())
            });
            let kernel_part = &x - &cplus * &x;
            let alt = &fc.coeffs + &kernel_part;
            assert!((&b.coords * &kernel_part).norm() < 1e-8);
            assert!(alt.norm() > fc.coeffs.norm());
        }
    }
}
