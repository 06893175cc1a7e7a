//! Continuum kernel `w(g1,g2,g3,g4) = int int W(x,y) s4(x) conj(s3(x)) s2(y) conj(s1(y))`
//! for the magnetic frame and a radial exponential pair potential.
//!
//! With `S^{-1} chi_gamma = T_gamma v` the frame coefficients are explicit:
//! `conj(s_gamma(x)) = ell sqrt(2 pi) e^{-i gamma^x / 2ell^2} v(x - gamma)`.
//! The double integral is the pairing of `A(x) = s4 conj(s3)` with `W * B`,
//! evaluated through the exact Fourier transform of `W` on a periodic grid.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::frame_analysis::{FrameOperatorTrunc, ModeCutoff};
use crate::linalg::CVector;
use crate::magnetic_frame::{wedge, LaguerreCoords, MagneticParams};
use crate::lattice::Window;
use crate::Point;

/// Target relative accuracy of a kernel value.
pub const W_REL_TOL: f64 = 1e-6;
/// `v` is treated as zero farther than this many `ell` from its centre.
const V_CUTOFF: f64 = 14.0;
/// Coarse and fine grids `(N, h / ell)`.
const GRIDS: [(usize, f64); 2] = [(256, 0.3), (384, 0.25)];

/// `v_omega = S^{-1} chi_0` in lowest-level coordinates with a fitted envelope.
#[derive(Debug, Clone)]
pub struct VOmega {
    pub coords: LaguerreCoords,
    pub ell: f64,
    /// `|v(x)| <= c2 e^{-sigma2 |x|}` on every sample up to `12 ell`.
    pub c2: f64,
    pub sigma2: f64,
    /// `|S v - chi_0|` in coordinates.
    pub reconstruction_residual: f64,
}

impl VOmega {
    /// Pointwise value `psi_0(x) sum_m v_m w^m / sqrt(m!)`, `w = (x1 - i x2)/(ell sqrt 2)`.
    pub fn eval(&self, x: Point) -> Complex64 {
        let s = self.ell * std::f64::consts::SQRT_2;
        let w = Complex64::new(x[0] / s, -x[1] / s);
        let psi0 = (-w.norm_sqr() / 2.0).exp() / (self.ell * (2.0 * std::f64::consts::PI).sqrt());
        let mut term = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in self.coords.coeffs.iter().enumerate() {
            if m > 0 {
                term *= w / (m as f64).sqrt();
            }
            acc += c * term;
        }
        acc * psi0
    }
}

/// `v_omega` from the frame operator of `window` restricted to its covered disk.
pub fn v_omega(window: &Window, params: &MagneticParams) -> Result<VOmega> {
    params.require_overcomplete("v_omega")?;
    let op = FrameOperatorTrunc::build(window, params, ModeCutoff::CoveredDisk)?;
    v_omega_from_operator(&op, params.ell_b)
}

/// `S^+ e_0` on the lowest level of an already assembled frame operator.
pub fn v_omega_from_operator(op: &FrameOperatorTrunc, ell: f64) -> Result<VOmega> {
    let block = op
        .level(0)
        .ok_or_else(|| Error::param("window", "v_omega needs sites on the lowest level"))?;
    let mut e0 = CVector::zeros(op.modes);
    e0[0] = Complex64::new(1.0, 0.0);
    let v = op.apply_inverse_power(&LaguerreCoords::new(0, e0.clone()), 1)?;
    let sv = block.matrix() * &v.coeffs;
    let reconstruction_residual = (sv - e0).norm();
    let (c2, sigma2) = fit_envelope(&v, ell)?;
    Ok(VOmega {
        coords: v,
        ell,
        c2,
        sigma2,
        reconstruction_residual,
    })
}

const RAYS: usize = 16;

fn ray_point(r: f64, k: usize) -> Point {
    let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / RAYS as f64;
    [r * th.cos(), r * th.sin()]
}

/// Least squares of `ln|v|` against `|x|` on `[2 ell, 8 ell]`, then `c2` raised
/// until the envelope covers every sample on `[0, 12 ell]`.
fn fit_envelope(v: &LaguerreCoords, ell: f64) -> Result<(f64, f64)> {
    let probe = VOmega {
        coords: v.clone(),
        ell,
        c2: 0.0,
        sigma2: 0.0,
        reconstruction_residual: 0.0,
    };
    let mut pts = Vec::new();
    let mut r = 2.0 * ell;
    while r <= 8.0 * ell + 1e-12 {
        for k in 0..RAYS {
            let a = probe.eval(ray_point(r, k)).norm();
            if a > 0.0 {
                pts.push((r, a.ln()));
            }
        }
        r += 0.25 * ell;
    }
    let n = pts.len() as f64;
    if n < 2.0 {
        return Err(Error::Numerical("v_omega vanishes on the fit annulus".into()));
    }
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - xm).powi(2)).sum();
    let sigma2 = -sxy / sxx;
    if !(sigma2 > 0.0) {
        return Err(Error::Numerical(format!("fitted envelope rate {sigma2} is not positive")));
    }
    let mut c2 = (ym + sigma2 * xm).exp();
    let mut r = 0.0;
    while r <= 12.0 * ell + 1e-12 {
        for k in 0..RAYS {
            let a = probe.eval(ray_point(r, k)).norm();
            c2 = c2.max(a * (sigma2 * r).exp());
        }
        r += 0.1 * ell;
    }
    Ok((c2 * (1.0 + 1e-9), sigma2))
}

/// Radial exponential potential `W(x,y) = c1 e^{-sigma1 |x-y|}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WKernelParams {
    pub c1: f64,
    pub sigma1: f64,
}

impl WKernelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c1 >= 0.0 && self.c1.is_finite()) {
            return Err(Error::param("c1", format!("must be finite and non-negative, got {}", self.c1)));
        }
        if !(self.sigma1 > 0.0 && self.sigma1.is_finite()) {
            return Err(Error::param("sigma1", format!("must be positive, got {}", self.sigma1)));
        }
        Ok(())
    }

    /// Two-dimensional Fourier transform `2 pi c1 sigma1 / (sigma1^2 + k^2)^{3/2}`.
    fn hat(&self, k2: f64) -> f64 {
        2.0 * std::f64::consts::PI * self.c1 * self.sigma1 / (self.sigma1 * self.sigma1 + k2).powf(1.5)
    }
}

/// Kernel value with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WValue {
    pub value: Complex64,
    /// `|w_fine - w_coarse| / int |W A B|`.
    pub rel_error: f64,
    /// `int int |W(x,y)| |A(x)| |B(y)|` on the fine grid.
    pub abs_integral: f64,
}

impl WValue {
    pub fn converged(&self) -> bool {
        self.rel_error < W_REL_TOL
    }
}

/// `w(g1, g2, g3, g4)` for points of the plane.
pub fn w_kernel(g: [Point; 4], wp: &WKernelParams, v: &VOmega) -> Result<WValue> {
    wp.validate()?;
    if wp.c1 == 0.0 {
        return Ok(WValue {
            value: Complex64::new(0.0, 0.0),
            rel_error: 0.0,
            abs_integral: 0.0,
        });
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut results = [(Complex64::new(0.0, 0.0), 0.0); 2];
    for (slot, &(n, h)) in results.iter_mut().zip(GRIDS.iter()) {
        *slot = grid_pairing(g, wp, v, n, h * v.ell, &mut planner);
    }
    let (coarse, _) = results[0];
    let (fine, abs_integral) = results[1];
    let rel_error = if abs_integral > 0.0 {
        (fine - coarse).norm() / abs_integral
    } else {
        0.0
    };
    Ok(WValue {
        value: fine,
        rel_error,
        abs_integral,
    })
}

/// Samples `f(x) = 2 pi ell^2 e^{i (p - q)^x / 2ell^2} conj(v(x - p)) v(x - q)` on the grid.
fn pair_density(p: Point, q: Point, v: &VOmega, center: Point, n: usize, h: f64) -> Vec<Complex64> {
    let ell2 = v.ell * v.ell;
    let pref = 2.0 * std::f64::consts::PI * ell2;
    let cut2 = (V_CUTOFF * v.ell).powi(2);
    let dq = [p[0] - q[0], p[1] - q[1]];
    let half = (n / 2) as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for a in 0..n {
        let x0 = center[0] + (a as f64 - half) * h;
        for b in 0..n {
            let x = [x0, center[1] + (b as f64 - half) * h];
            let xp = [x[0] - p[0], x[1] - p[1]];
            let xq = [x[0] - q[0], x[1] - q[1]];
            if xp[0] * xp[0] + xp[1] * xp[1] > cut2 || xq[0] * xq[0] + xq[1] * xq[1] > cut2 {
                continue;
            }
            let phase = Complex64::from_polar(1.0, wedge(dq, x) / (2.0 * ell2));
            out[a * n + b] = phase * v.eval(xp).conj() * v.eval(xq) * pref;
        }
    }
    out
}

fn fft2(buf: &mut [Complex64], n: usize, planner: &mut FftPlanner<f64>) {
    let fft = planner.plan_fft_forward(n);
    fft.process(buf);
    let mut t = vec![Complex64::new(0.0, 0.0); n * n];
    for a in 0..n {
        for b in 0..n {
            t[b * n + a] = buf[a * n + b];
        }
    }
    fft.process(&mut t);
    buf.copy_from_slice(&t);
}

/// Returns `(w, int |W||A||B|)` on one grid via
/// `w = (h^2/N^2) sum_p W^(k_p) A~[-p] B~[p]`.
fn grid_pairing(
    g: [Point; 4],
    wp: &WKernelParams,
    v: &VOmega,
    n: usize,
    h: f64,
    planner: &mut FftPlanner<f64>,
) -> (Complex64, f64) {
    let center = [
        g.iter().map(|p| p[0]).sum::<f64>() / 4.0,
        g.iter().map(|p| p[1]).sum::<f64>() / 4.0,
    ];
    let mut a = pair_density(g[3], g[2], v, center, n, h);
    let mut b = pair_density(g[1], g[0], v, center, n, h);
    let mut a_abs: Vec<Complex64> = a.iter().map(|z| Complex64::new(z.norm(), 0.0)).collect();
    let mut b_abs: Vec<Complex64> = b.iter().map(|z| Complex64::new(z.norm(), 0.0)).collect();
    for buf in [&mut a, &mut b, &mut a_abs, &mut b_abs] {
        fft2(buf, n, planner);
    }
    let dk = 2.0 * std::f64::consts::PI / (n as f64 * h);
    let freq = |p: usize| if p < n / 2 { p as f64 } else { p as f64 - n as f64 } * dk;
    let mut w = Complex64::new(0.0, 0.0);
    let mut w_abs = 0.0;
    for p in 0..n {
        let mp = (n - p) % n;
        for q in 0..n {
            let mq = (n - q) % n;
            let what = wp.hat(freq(p).powi(2) + freq(q).powi(2));
            w += a[mp * n + mq] * b[p * n + q] * what;
            w_abs += (a_abs[mp * n + mq] * b_abs[p * n + q]).re * what;
        }
    }
    let scale = h * h / (n * n) as f64;
    (w * scale, w_abs * scale)
}

/// Decay rate and prefactor of the kernel bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KSigma {
    pub sigma: f64,
    pub k: f64,
}

impl KSigma {
    pub fn bound(&self, diam: f64) -> f64 {
        self.k * (-self.sigma * diam).exp()
    }
}

/// `sigma = min(sigma1/2, sigma2/6)`, `K = pi^4 C1 C2^4 / (4 omega^4 sigma^4)`.
pub fn k_sigma(c1: f64, c2: f64, sigma1: f64, sigma2: f64, omega: f64) -> Result<KSigma> {
    for (name, x) in [("c1", c1), ("c2", c2), ("sigma1", sigma1), ("sigma2", sigma2), ("omega", omega)] {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::param(name, format!("must be positive, got {x}")));
        }
    }
    let sigma = (sigma1 / 2.0).min(sigma2 / 6.0);
    let k = std::f64::consts::PI.powi(4) * c1 * c2.powi(4) / (4.0 * omega.powi(4) * sigma.powi(4));
    Ok(KSigma { sigma, k })
}

/// Euclidean diameter of a point set.
pub fn euclidean_diameter(points: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for p in points {
        for q in points {
            d = d.max((p[0] - q[0]).hypot(p[1] - q[1]));
        }
    }
    d
}
