//! Landau-Laguerre functions `psi_(n1,n2)` and the special functions behind them.

use num_complex::Complex64;

use crate::Point;

/// `ln(n!)` exact for small `n`, Stirling series beyond.
pub fn ln_factorial(n: usize) -> f64 {
    const TABLE_LEN: usize = 64;
    if n < TABLE_LEN {
        (1..=n).map(|k| (k as f64).ln()).sum()
    } else {
        let x = n as f64 + 1.0;
        // Stirling with four correction terms, exact to double precision here
        (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3))
            + 1.0 / (1260.0 * x.powi(5))
            - 1.0 / (1680.0 * x.powi(7))
    }
}

/// Generalized Laguerre polynomial `L_n^{(a)}(x)` as `(mantissa, log_scale)` with
/// value `mantissa * e^{log_scale}`; the rescaling keeps degrees up to 10^3 finite.
pub fn laguerre_scaled(n: usize, a: f64, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    if n == 0 {
        return (prev, 0.0);
    }
    let mut cur = 1.0 + a - x;
    let mut log_scale = 0.0;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > 1e200 {
            prev *= 1e-200;
            cur *= 1e-200;
            log_scale += 200.0 * std::f64::consts::LN_10;
        }
    }
    (cur, log_scale)
}

/// Plain `L_n^{(a)}(x)`; may overflow for extreme arguments.
pub fn laguerre(n: usize, a: f64, x: f64) -> f64 {
    let (m, s) = laguerre_scaled(n, a, x);
    m * s.exp()
}

/// `psi_(n1,n2)(x)`: `n1` is the Landau level, `n2` the angular index.
///
/// `psi = psi_0 sqrt(n1!/n2!) w^{n2-n1} L_{n1}^{(n2-n1)}(|w|^2)` with
/// `w = (x1 - i x2)/(ell sqrt 2)` and `psi_0 = e^{-|x|^2/4ell^2}/(ell sqrt(2 pi))`.
pub fn laguerre_psi(n1: usize, n2: usize, x: Point, ell: f64) -> Complex64 {
    let s = ell * std::f64::consts::SQRT_2;
    let w = Complex64::new(x[0] / s, -x[1] / s);
    let rho2 = w.norm_sqr();
    let base = -0.5 * rho2 - (ell * (2.0 * std::f64::consts::PI).sqrt()).ln();
    let (lo, hi, conj_power) = if n2 >= n1 { (n1, n2, false) } else { (n2, n1, true) };
    let k = hi - lo;
    let (lag, lag_scale) = laguerre_scaled(lo, k as f64, rho2);
    if lag == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let r = w.norm();
    if k > 0 && r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let log_mag = base
        + 0.5 * (ln_factorial(lo) - ln_factorial(hi))
        + if k > 0 { k as f64 * r.ln() } else { 0.0 }
        + lag_scale
        + lag.abs().ln();
    let theta = w.arg() * k as f64 * if conj_power { -1.0 } else { 1.0 };
    let mut sign = lag.signum();
    if conj_power && k % 2 == 1 {
        sign = -sign;
    }
    Complex64::from_polar(sign * log_mag.exp(), theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_factorial_continuity() {
        let exact: f64 = (1..=80).map(|k| (k as f64).ln()).sum();
        assert!((ln_factorial(80) - exact).abs() < 1e-11);
        assert_eq!(ln_factorial(0), 0.0);
    }

    #[test]
    fn laguerre_low_degrees() {
        let x = 0.7;
        let a = 1.5;
        assert!((laguerre(1, a, x) - (1.0 + a - x)).abs() < 1e-15);
        let l2 = 0.5 * (x * x - 2.0 * (a + 2.0) * x + (a + 1.0) * (a + 2.0));
        assert!((laguerre(2, a, x) - l2).abs() < 1e-14);
    }

    #[test]
    fn laguerre_at_zero_is_binomial() {
        // L_n^{(k)}(0) = C(n+k, n), huge but representable in scaled form
        let (m, s) = laguerre_scaled(500, 500.0, 0.0);
        let ln_binom = ln_factorial(1000) - 2.0 * ln_factorial(500);
        assert!(((m.ln() + s) - ln_binom).abs() < 1e-9);
    }

    #[test]
    fn ground_state_value() {
        let v = laguerre_psi(0, 0, [0.0, 0.0], 1.0);
        assert!((v.re - 0.398942280401433).abs() < 1e-15);
        assert_eq!(laguerre_psi(0, 3, [0.0, 0.0], 1.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn lowest_level_is_antiholomorphic_monomial() {
        let x = [0.3, -1.1];
        let w = Complex64::new(x[0], -x[1]) / std::f64::consts::SQRT_2;
        let psi0 = (-(x[0] * x[0] + x[1] * x[1]) / 4.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let expect = w.powu(3) * psi0 / 6.0f64.sqrt();
        assert!((laguerre_psi(0, 3, x, 1.0) - expect).norm() < 1e-15);
    }
}
