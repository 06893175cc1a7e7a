//! Magnetic Gabor frame `chi_(r, gamma)` over Landau levels.
//!
//! Coordinates are taken in the magnetic Laguerre basis `psi_(r, m)`, `m = 0..=M`.
//! Phase convention: `wedge(g, x) = g1 x2 - g2 x1` and
//! `chi_gamma(x) = e^{-i wedge(gamma, x)/2 ell^2} psi_0(x - gamma)`.
//! Inner products are antilinear in the first argument.

pub mod laguerre;
pub mod quadrature;

use std::f64::consts::{E, PI, SQRT_2};
use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Site, Window};
use crate::linalg::{CMatrix, CVector};
use crate::Point;

pub use laguerre::{laguerre, laguerre_psi, ln_factorial};
pub use quadrature::GaussHermite;

/// Largest coefficient tail accepted by the truncation rule.
pub const TRUNCATION_TAIL: f64 = 1e-14;
/// Relative tolerance of the regime classifier.
pub const REGIME_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagneticParams {
    pub ell_b: f64,
    /// Magnetic energy; `1/ell_b^2` unless set explicitly.
    pub eps_b: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Angular cutoff `M`: coordinates are indexed by `m = 0..=M`.
    pub laguerre_trunc: usize,
}

impl MagneticParams {
    pub fn new(ell_b: f64, alpha: f64, beta: f64, laguerre_trunc: usize) -> Result<Self> {
        if !(ell_b > 0.0 && ell_b.is_finite()) {
            return Err(Error::param("ell_b", format!("must be positive, got {ell_b}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::param("beta", format!("must be positive, got {beta}")));
        }
        Ok(MagneticParams {
            ell_b,
            eps_b: 1.0 / (ell_b * ell_b),
            alpha,
            beta,
            laguerre_trunc,
        })
    }

    /// Parameters matched to a window: spacings from the lattice, `M` from the
    /// truncation rule applied to the farthest site.
    pub fn for_window(window: &Window, ell_b: f64) -> Result<Self> {
        let radius = window.max_abs_position();
        let mut p = Self::new(ell_b, window.params.alpha, window.params.beta, 0)?;
        p.laguerre_trunc = verified_truncation(radius, ell_b);
        p.check_truncation(radius)?;
        Ok(p)
    }

    pub fn with_eps_b(mut self, eps_b: f64) -> Result<Self> {
        if !(eps_b > 0.0 && eps_b.is_finite()) {
            return Err(Error::param("eps_b", format!("must be positive, got {eps_b}")));
        }
        self.eps_b = eps_b;
        Ok(self)
    }

    /// `Delta = alpha beta / ell_b^2`.
    pub fn delta(&self) -> f64 {
        self.alpha * self.beta / (self.ell_b * self.ell_b)
    }

    /// Dual notation: `omega = 1/(2 ell_b)`.
    pub fn omega(&self) -> f64 {
        0.5 / self.ell_b
    }

    /// Gaussian overlap rate `1/(4 ell_b^2)`.
    pub fn varpi(&self) -> f64 {
        0.25 / (self.ell_b * self.ell_b)
    }

    pub fn position(&self, s: &Site) -> Point {
        [s.i as f64 * self.alpha, s.j as f64 * self.beta]
    }

    pub fn regime(&self) -> Regime {
        regime(self)
    }

    /// Errors if a site at distance `radius` has coefficient tail above the limit.
    pub fn check_truncation(&self, radius: f64) -> Result<()> {
        let tail = coherent_tail(radius, self.laguerre_trunc, self.ell_b);
        if tail < TRUNCATION_TAIL {
            Ok(())
        } else {
            Err(Error::Truncation {
                trunc: self.laguerre_trunc,
                tail,
                radius,
            })
        }
    }

    /// Requires the overcomplete regime; used by every `S^{-1}` based operation.
    pub fn require_overcomplete(&self, operation: &'static str) -> Result<()> {
        match self.regime() {
            Regime::Overcomplete => Ok(()),
            r => Err(Error::Regime {
                operation,
                regime: r.to_string(),
                delta: self.delta(),
            }),
        }
    }
}

/// `g1 x2 - g2 x1`.
pub fn wedge(g: Point, x: Point) -> f64 {
    g[0] * x[1] - g[1] * x[0]
}

/// A-priori cutoff `ceil(e R^2 / (4 ell^2) + 40)`.
pub fn truncation_rule(radius: f64, ell: f64) -> usize {
    (E * radius * radius / (4.0 * ell * ell) + 40.0).ceil() as usize
}

/// Smallest `M` at or above the a-priori rule whose tail passes [`TRUNCATION_TAIL`].
pub fn verified_truncation(radius: f64, ell: f64) -> usize {
    let mut m = truncation_rule(radius, ell);
    while coherent_tail(radius, m, ell) >= TRUNCATION_TAIL {
        m += 1 + m / 50;
    }
    m
}

/// `sum_{m > M} |c_m|^2` for a site at distance `radius`: a Poisson tail with
/// mean `radius^2 / (2 ell^2)`, summed term by term in log space.
pub fn coherent_tail(radius: f64, trunc: usize, ell: f64) -> f64 {
    let mu = radius * radius / (2.0 * ell * ell);
    if mu == 0.0 {
        return 0.0;
    }
    let ln_mu = mu.ln();
    let mut total = 0.0;
    let mut m = trunc + 1;
    loop {
        let term = (-mu + m as f64 * ln_mu - ln_factorial(m)).exp();
        total += term;
        if (m as f64 > mu && term <= 1e-30 * total.max(1e-300)) || m > trunc + 100_000 {
            break;
        }
        m += 1;
    }
    total
}

/// Coefficients `e^{-|a|^2/2} a^m / sqrt(m!)`, `a = (g1 + i g2)/(ell sqrt 2)`, `m = 0..=trunc`.
pub fn coherent_coeffs(gamma: Point, trunc: usize, ell: f64) -> CVector {
    let a = Complex64::new(gamma[0], gamma[1]) / (ell * SQRT_2);
    let r = a.norm();
    if r == 0.0 {
        return DVector::from_fn(trunc + 1, |m, _| {
            Complex64::new(if m == 0 { 1.0 } else { 0.0 }, 0.0)
        });
    }
    let ln_r = r.ln();
    let theta = a.arg();
    DVector::from_fn(trunc + 1, |m, _| {
        let mag = (-0.5 * r * r + m as f64 * ln_r - 0.5 * ln_factorial(m)).exp();
        Complex64::from_polar(mag, m as f64 * theta)
    })
}

/// Coordinates of a vector of the Landau level `level` in the basis `psi_(level, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreCoords {
    pub level: u32,
    pub coeffs: CVector,
}

impl LaguerreCoords {
    pub fn new(level: u32, coeffs: CVector) -> Self {
        LaguerreCoords { level, coeffs }
    }

    pub fn zeros(level: u32, trunc: usize) -> Self {
        LaguerreCoords {
            level,
            coeffs: CVector::zeros(trunc + 1),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.norm_squared()
    }

    /// `<self, other>`; vectors on different levels are orthogonal.
    pub fn inner(&self, other: &LaguerreCoords) -> Complex64 {
        if self.level != other.level {
            return Complex64::new(0.0, 0.0);
        }
        let n = self.coeffs.len().min(other.coeffs.len());
        (0..n).map(|m| self.coeffs[m].conj() * other.coeffs[m]).sum()
    }

    pub fn pointwise(&self, x: Point, ell: f64) -> Complex64 {
        let r = self.level as usize;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(m, c)| c * laguerre_psi(r, m, x, ell))
            .sum()
    }
}

/// Laguerre coordinates of `chi_(r, gamma)`; fails if `M` leaves a tail above `1e-14`.
pub fn chi_coords(site: &Site, params: &MagneticParams) -> Result<LaguerreCoords> {
    let g = params.position(site);
    params.check_truncation(g[0].hypot(g[1]))?;
    Ok(LaguerreCoords::new(
        site.r,
        coherent_coeffs(g, params.laguerre_trunc, params.ell_b),
    ))
}

/// Pointwise value of `chi_(r, gamma)(x)`.
pub fn chi_pointwise(site: &Site, x: Point, params: &MagneticParams) -> Complex64 {
    let g = params.position(site);
    chi_pointwise_at(site.r, g, x, params.ell_b)
}

/// Pointwise value for an arbitrary centre `gamma` in the plane.
pub fn chi_pointwise_at(level: u32, gamma: Point, x: Point, ell: f64) -> Complex64 {
    if level == 0 {
        let d2 = (x[0] - gamma[0]).powi(2) + (x[1] - gamma[1]).powi(2);
        let mag = (-d2 / (4.0 * ell * ell)).exp() / (ell * (2.0 * PI).sqrt());
        return Complex64::from_polar(mag, -wedge(gamma, x) / (2.0 * ell * ell));
    }
    let trunc = verified_truncation(gamma[0].hypot(gamma[1]), ell);
    LaguerreCoords::new(level, coherent_coeffs(gamma, trunc, ell)).pointwise(x, ell)
}

/// Closed form `delta_{r r'} e^{i wedge(g, g')/2 ell^2} e^{-|g - g'|^2/4 ell^2}`.
pub fn overlap(p: &Site, q: &Site, params: &MagneticParams) -> Complex64 {
    if p.r != q.r {
        return Complex64::new(0.0, 0.0);
    }
    overlap_points(params.position(p), params.position(q), params.ell_b)
}

pub fn overlap_points(g: Point, h: Point, ell: f64) -> Complex64 {
    let l2 = ell * ell;
    let d2 = (g[0] - h[0]).powi(2) + (g[1] - h[1]).powi(2);
    Complex64::from_polar((-d2 / (4.0 * l2)).exp(), wedge(g, h) / (2.0 * l2))
}

/// `(<chi_gamma, phi>, ell sqrt(2 pi) phi(gamma))` for `phi` in the lowest level.
pub fn reproducing_eval(phi: &LaguerreCoords, gamma: Point, ell: f64) -> Result<(Complex64, Complex64)> {
    if phi.level != 0 {
        return Err(Error::param(
            "phi",
            format!("reproducing kernel holds in the lowest level only, got level {}", phi.level),
        ));
    }
    let trunc = phi.coeffs.len() - 1;
    let chi = LaguerreCoords::new(0, coherent_coeffs(gamma, trunc, ell));
    let inner = chi.inner(phi);
    let kernel = phi.pointwise(gamma, ell) * (ell * (2.0 * PI).sqrt());
    Ok((inner, kernel))
}

/// `theta_3(0 | i tau) = sum_n e^{-pi tau n^2}`, summed until terms drop below `1e-16`.
pub fn theta3(tau_im: f64) -> Result<f64> {
    if !(tau_im > 0.0 && tau_im.is_finite()) {
        return Err(Error::param("tau_im", format!("must be positive, got {tau_im}")));
    }
    let mut sum = 1.0;
    let mut n = 1.0_f64;
    loop {
        let term = (-PI * tau_im * n * n).exp();
        sum += 2.0 * term;
        if term < 1e-17 * sum {
            break;
        }
        n += 1.0;
    }
    Ok(sum)
}

/// `M = theta_3(i alpha^2 / 4 pi ell^2) theta_3(i beta^2 / 4 pi ell^2)`.
pub fn bessel_bound(params: &MagneticParams) -> f64 {
    let l2 = params.ell_b * params.ell_b;
    let a = theta3(params.alpha * params.alpha / (4.0 * PI * l2)).expect("alpha > 0");
    let b = theta3(params.beta * params.beta / (4.0 * PI * l2)).expect("beta > 0");
    a * b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Overcomplete,
    Threshold,
    Incomplete,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Overcomplete => "overcomplete",
            Regime::Threshold => "threshold",
            Regime::Incomplete => "incomplete",
        })
    }
}

pub fn regime(params: &MagneticParams) -> Regime {
    let d = params.delta();
    let crit = 2.0 * PI;
    if (d - crit).abs() <= REGIME_TOL * crit {
        Regime::Threshold
    } else if d < crit {
        Regime::Overcomplete
    } else {
        Regime::Incomplete
    }
}

/// Matrix of the magnetic translation `T_gamma` on the angular index, `m, n = 0..=trunc`.
///
/// `<m|T|n> = sqrt(n!/m!) a^{m-n} e^{-|a|^2/2} L_n^{(m-n)}(|a|^2)` for `m >= n`
/// and `sqrt(m!/n!) (-conj a)^{n-m} e^{-|a|^2/2} L_m^{(n-m)}(|a|^2)` otherwise.
/// The same matrix acts on every Landau level.
pub fn translation_matrix(gamma: Point, trunc: usize, ell: f64) -> CMatrix {
    let a = Complex64::new(gamma[0], gamma[1]) / (ell * SQRT_2);
    let x = a.norm_sqr();
    CMatrix::from_fn(trunc + 1, trunc + 1, |m, n| {
        let (lo, hi) = if m >= n { (n, m) } else { (m, n) };
        let k = hi - lo;
        let (lag, lag_scale) = laguerre::laguerre_scaled(lo, k as f64, x);
        if lag == 0.0 || (k > 0 && x == 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        let log_mag = 0.5 * (ln_factorial(lo) - ln_factorial(hi))
            + if k > 0 { 0.5 * k as f64 * x.ln() } else { 0.0 }
            - 0.5 * x
            + lag_scale
            + lag.abs().ln();
        let base = if m >= n { a.arg() } else { (-a.conj()).arg() };
        Complex64::from_polar(lag.signum() * log_mag.exp(), base * k as f64)
    })
}

/// `T_gamma phi` in coordinates.
pub fn magnetic_translate(gamma: Point, phi: &LaguerreCoords, ell: f64) -> LaguerreCoords {
    let trunc = phi.coeffs.len() - 1;
    let t = translation_matrix(gamma, trunc, ell);
    LaguerreCoords::new(phi.level, &t * &phi.coeffs)
}

/// `(T_gamma f)(x) = e^{-i wedge(gamma, x)/2 ell^2} f(x - gamma)`.
pub fn magnetic_translate_pointwise(
    gamma: Point,
    x: Point,
    ell: f64,
    f: impl Fn(Point) -> Complex64,
) -> Complex64 {
    let phase = Complex64::from_polar(1.0, -wedge(gamma, x) / (2.0 * ell * ell));
    phase * f([x[0] - gamma[0], x[1] - gamma[1]])
}

/// Quadrature value of `<f, g>` with an 80-node Gauss-Hermite tensor rule
/// centred at `center` with Gaussian width `scale` (`e^{-|x-c|^2/scale^2}` weight).
pub fn quadrature_inner(
    rule: &GaussHermite,
    center: Point,
    scale: f64,
    f: impl Fn(Point) -> Complex64,
    g: impl Fn(Point) -> Complex64,
) -> Complex64 {
    rule.integrate_2d(center, scale, |x| f(x).conj() * g(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeParams;

    fn unit(trunc: usize) -> MagneticParams {
        MagneticParams::new(1.0, 1.0, 1.0, trunc).unwrap()
    }

    #[test]
    fn chi_coords_examples() {
        let p = unit(60);
        let c0 = chi_coords(&Site::new(0, 0, 0), &p).unwrap();
        assert_eq!(c0.coeffs[0], Complex64::new(1.0, 0.0));
        assert!(c0.coeffs.iter().skip(1).all(|z| z.norm() == 0.0));
        let c1 = chi_coords(&Site::new(0, 1, 0), &p).unwrap();
        assert!((c1.coeffs[0].re - 0.778800783071405).abs() < 1e-15);
        let expect2 = (-0.25f64).exp() * 0.5 / 2.0f64.sqrt();
        assert!((c1.coeffs[2].re - expect2).abs() < 1e-15);
    }

    #[test]
    fn truncation_is_enforced() {
        let p = unit(5);
        let err = chi_coords(&Site::new(0, 6, 0), &p).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
    }

    #[test]
    fn overlap_examples() {
        let p = unit(0);
        let z = overlap(&Site::new(0, 2, 0), &Site::new(0, 0, 0), &p);
        assert!((z.re - (-1.0f64).exp()).abs() < 1e-15 && z.im.abs() < 1e-15);
        let w = overlap(&Site::new(0, 1, 0), &Site::new(0, 0, 1), &p);
        assert!((w.norm() - (-0.5f64).exp()).abs() < 1e-15);
        assert!((w.arg() - 0.5).abs() < 1e-15);
        assert_eq!(overlap(&Site::new(1, 0, 0), &Site::new(0, 0, 0), &p), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn coords_reproduce_overlap() {
        let lat = LatticeParams::new(0.9, 1.3, 0, 3.0).unwrap();
        let w = Window::square(lat).unwrap();
        let p = MagneticParams::for_window(&w, 1.1).unwrap();
        for a in w.sites() {
            let ca = chi_coords(a, &p).unwrap();
            assert!(ca.norm_sqr() <= 1.0 + 1e-14 && ca.norm_sqr() >= 1.0 - 1e-10);
            for b in w.sites() {
                let cb = chi_coords(b, &p).unwrap();
                assert!((ca.inner(&cb) - overlap(a, b, &p)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn theta_values() {
        assert!((theta3(1.0).unwrap() - 1.08643481121331).abs() < 1e-13);
        assert!((theta3(0.5).unwrap() - 1.41949548808377).abs() < 1e-13);
        assert!((theta3(50.0).unwrap() - 1.0).abs() < 1e-60_f64.max(1e-15));
        assert!(theta3(0.0).is_err());
        assert!(theta3(-1.0).is_err());
    }

    #[test]
    fn bessel_bound_threshold() {
        let a = (2.0 * PI).sqrt();
        let p = MagneticParams::new(1.0, a, a, 0).unwrap();
        assert!((bessel_bound(&p) - 2.01496744069017).abs() < 1e-12);
        let big = MagneticParams::new(1.0, 30.0, 30.0, 0).unwrap();
        assert!((bessel_bound(&big) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn regime_examples() {
        let a = (2.0 * PI).sqrt();
        assert_eq!(unit(0).regime(), Regime::Overcomplete);
        assert_eq!(MagneticParams::new(1.0, a, a, 0).unwrap().regime(), Regime::Threshold);
        assert_eq!(MagneticParams::new(1.0, 3.0, 3.0, 0).unwrap().regime(), Regime::Incomplete);
    }

    #[test]
    fn pointwise_matches_coordinates_in_lowest_level() {
        let g = [0.7, -1.2];
        let c = LaguerreCoords::new(0, coherent_coeffs(g, 60, 1.0));
        for x in [[0.0, 0.0], [1.0, 0.5], [-0.4, 2.0]] {
            assert!((c.pointwise(x, 1.0) - chi_pointwise_at(0, g, x, 1.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn translation_of_ground_state_is_frame_vector() {
        let g = [1.5, 0.5];
        let ground = LaguerreCoords::new(0, coherent_coeffs([0.0, 0.0], 50, 1.0));
        let t = magnetic_translate(g, &ground, 1.0);
        let chi = coherent_coeffs(g, 50, 1.0);
        assert!((&t.coeffs - chi).norm() < 1e-12);
    }
}
