//! Gauss-Hermite rules for Gaussian-weighted integrals over the plane.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::Point;

/// Nodes and weights for `int e^{-t^2} f(t) dt`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Golub-Welsch start followed by Newton polishing on normalized Hermite functions.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
        let jac = DMatrix::<f64>::from_fn(n, n, |i, j| {
            if i + 1 == j {
                (j as f64 / 2.0).sqrt()
            } else if j + 1 == i {
                (i as f64 / 2.0).sqrt()
            } else {
                0.0
            }
        });
        let mut nodes: Vec<f64> = jac.symmetric_eigen().eigenvalues.iter().copied().collect();
        nodes.sort_by(f64::total_cmp);
        let mut weights = Vec::with_capacity(n);
        for x in nodes.iter_mut() {
            for _ in 0..6 {
                let (h, hm1, _) = hermite_functions(n, *x);
                let dh = (2.0 * n as f64).sqrt() * hm1 - *x * h;
                if dh == 0.0 {
                    break;
                }
                let step = h / dh;
                *x -= step;
                if step.abs() < 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, _, sum_sq) = hermite_functions(n, *x);
            weights.push((-*x * *x).exp() / sum_sq);
        }
        GaussHermite { nodes, weights }
    }

    /// Approximates `int_{R^2} f(x) dx` for integrands that look like
    /// `e^{-|x-c|^2/s^2}` times something smooth.
    pub fn integrate_2d(&self, center: Point, scale: f64, f: impl Fn(Point) -> Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, &ta) in self.nodes.iter().enumerate() {
            let wa = self.weights[a] * (ta * ta).exp();
            for (b, &tb) in self.nodes.iter().enumerate() {
                let wb = self.weights[b] * (tb * tb).exp();
                let x = [center[0] + scale * ta, center[1] + scale * tb];
                acc += f(x) * (wa * wb);
            }
        }
        acc * (scale * scale)
    }
}

/// Returns `(h_n(x), h_{n-1}(x), sum_{k<n} h_k(x)^2)` for orthonormal Hermite functions
/// `h_k = H_k e^{-x^2/2} / sqrt(2^k k! sqrt(pi))`.
fn hermite_functions(n: usize, x: f64) -> (f64, f64, f64) {
    let mut hm1 = 0.0;
    let mut h = std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
    let mut sum_sq = 0.0;
    for k in 0..n {
        sum_sq += h * h;
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * h - (kf / (kf + 1.0)).sqrt() * hm1;
        hm1 = h;
        h = next;
    }
    (h, hm1, sum_sq)
}
