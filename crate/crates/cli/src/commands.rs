//! One function per analysis. Each writes its artifacts and returns whether its
//! verification passed.

use std::fmt::Write as _;
use std::f64::consts::PI;

use frame_lr::fock_sim::{lr_check, volume_convergence};
use frame_lr::format::sig15;
use frame_lr::frame_analysis::{
    fit_decay_rate, frame_bounds_one, gram, neumann_certificate, s_inverse_power_elements, verify_decay,
};
use frame_lr::interactions::wkernel::euclidean_diameter;
use frame_lr::interactions::{c_phi, k_sigma, lr_velocity, v_omega, w_kernel};
use frame_lr::lattice::{m_epsilon, Window};
use frame_lr::linalg::max_abs;
use frame_lr::magnetic_frame::{bessel_bound, theta3, MagneticParams};
use frame_lr::quadratic::{landau_coefficients, landau_q};
use frame_lr::{Complex64, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::output::{matrix_text, window_hash, Json, OutDir};
use crate::run_config::RunConfig;
use crate::CliError;

/// Result of a verification.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub reason: String,
    /// Printed on stdout after the run.
    pub report: String,
}

impl Outcome {
    fn new(passed: bool, reason: impl Into<String>) -> Self {
        Outcome { passed, reason: reason.into(), report: String::new() }
    }
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "fail"
    }
}

fn site_list(sites: &[frame_lr::lattice::Site]) -> String {
    sites.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

pub fn gram_cmd(rc: &RunConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let (w, p) = (&rc.window, &rc.params);
    let g = gram(w, p);
    let hash = window_hash(w);
    out.write("gram.txt", &matrix_text(&g.entries, &hash))?;
    let mut csv = String::from("row,col,site_row,site_col,re,im\n");
    for a in 0..g.len() {
        for b in 0..g.len() {
            let z = g.entries[(a, b)];
            let _ = writeln!(csv, "{a},{b},\"{}\",\"{}\",{},{}", g.sites[a], g.sites[b], sig15(z.re), sig15(z.im));
        }
    }
    out.write("gram.csv", &csv)?;
    let eig = g.eigenvalues();
    let herm = max_abs(&(&g.entries - g.entries.adjoint()));
    let diag = (0..g.len()).map(|k| (g.entries[(k, k)] - Complex64::new(1.0, 0.0)).norm()).fold(0.0, f64::max);
    let passed = herm <= rc.car_tol && diag <= rc.car_tol;
    out.write(
        "summary.json",
        &Json::new()
            .str("analysis", "gram")
            .str("verdict", verdict(passed))
            .int("sites", g.len() as u64)
            .str("window_hash", &hash)
            .num("alpha", p.alpha)
            .num("beta", p.beta)
            .num("ell_b", p.ell_b)
            .num("delta", p.delta())
            .str("regime", &p.regime().to_string())
            .int("laguerre_trunc", p.laguerre_trunc as u64)
            .num("bessel_bound", bessel_bound(p))
            .num("eig_min", eig.iter().copied().fold(f64::INFINITY, f64::min))
            .num("eig_max", eig.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .num("hermitian_residual", herm)
            .num("diagonal_residual", diag)
            .render(),
    )?;
    Ok(Outcome::new(passed, format!("hermitian residual {herm:e}, diagonal residual {diag:e}")))
}

pub fn bounds_cmd(rc: &RunConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let p = &rc.params;
    let windows: Vec<&Window> = if rc.bound_windows.is_empty() {
        vec![&rc.window]
    } else {
        rc.bound_windows.iter().collect()
    };
    let m = bessel_bound(p);
    let mut csv = String::from("radius,n_sites,a_est,b_est,gram_min_retained,numerical_rank,inner_modes,ill_conditioned\n");
    let mut passed = true;
    let mut ill = 0;
    for w in windows {
        let b = frame_bounds_one(w, p.ell_b, rc.bounds_margin)?;
        passed &= b.b_est <= m * (1.0 + 1e-9) && b.a_est <= b.b_est * (1.0 + 1e-9);
        ill += b.ill_conditioned as u64;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            sig15(w.params.radius),
            b.n_sites,
            sig15(b.a_est),
            sig15(b.b_est),
            sig15(b.gram_min_retained),
            b.numerical_rank,
            b.inner_modes,
            b.ill_conditioned
        );
    }
    out.write("bounds.csv", &csv)?;
    let l2 = p.ell_b * p.ell_b;
    let ta = theta3(p.alpha * p.alpha / (4.0 * PI * l2))?;
    let tb = theta3(p.beta * p.beta / (4.0 * PI * l2))?;
    out.write(
        "summary.json",
        &Json::new()
            .str("analysis", "bounds")
            .str("verdict", verdict(passed))
            .num("delta", p.delta())
            .str("regime", &p.regime().to_string())
            .num("theta3_alpha", ta)
            .num("theta3_beta", tb)
            .num("bessel_bound", m)
            .num("margin", rc.bounds_margin)
            .int("ill_conditioned_windows", ill)
            .render(),
    )?;
    Ok(Outcome::new(passed, "largest Gram eigenvalue must not exceed the Bessel bound"))
}

pub fn decay_cmd(rc: &RunConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let (w, p) = (&rc.window, &rc.params);
    p.require_overcomplete("decay")?;
    let s_min = frame_bounds_one(w, p.ell_b, rc.margin)?.a_est;
    let m_eps = m_epsilon(w, rc.tuning.eps)?.closed_form_bound;
    let cert = neumann_certificate(&rc.tuning, s_min, bessel_bound(p), rc.cert_p, m_eps)?;
    let e = s_inverse_power_elements(rc.cert_p, w, p, rc.margin)?;
    let rep = verify_decay(&e.matrix, &e.sites, &w.params, cert.a_p, cert.lambda_p)?;
    let rate = fit_decay_rate(&e.matrix, &e.sites, &w.params);
    out.write("certificate.json", &cert.to_text())?;
    let inner = Window::from_sites(w.params, e.sites.iter().copied())?;
    out.write(&format!("s_inv_{}.txt", rc.cert_p), &matrix_text(&e.matrix, &window_hash(&inner)))?;
    let mut csv = String::from("site_a,site_b,d,abs,bound,ratio\n");
    for a in 0..e.sites.len() {
        for b in 0..e.sites.len() {
            let d = w.params.distance(&e.sites[a], &e.sites[b]);
            let v = e.matrix[(a, b)].norm();
            let bound = cert.bound(d);
            let _ = writeln!(
                csv,
                "\"{}\",\"{}\",{},{},{},{}",
                e.sites[a],
                e.sites[b],
                sig15(d),
                sig15(v),
                sig15(bound),
                sig15(v / bound)
            );
        }
    }
    out.write("decay.csv", &csv)?;
    let rate_ok = rate.is_none_or(|r| r >= cert.lambda_p);
    let passed = rep.passed() && rate_ok;
    let mut j = Json::new()
        .str("analysis", "decay")
        .str("verdict", verdict(passed))
        .int("p", rc.cert_p)
        .int("inner_sites", e.sites.len() as u64)
        .int("pairs", rep.pairs as u64)
        .int("violations", rep.violations.len() as u64)
        .num("max_ratio", rep.max_ratio)
        .num("lambda_p", cert.lambda_p)
        .num("a_p", cert.a_p);
    j = match rate {
        Some(r) => j.num("fitted_rate", r),
        None => j.str("fitted_rate", "none"),
    };
    out.write("summary.json", &j.render())?;
    Ok(Outcome::new(
        passed,
        format!("{} violations, fitted rate {rate:?} vs lambda_p {}", rep.violations.len(), cert.lambda_p),
    ))
}

pub fn cphi_cmd(rc: &RunConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let w = &rc.window;
    let inter = rc.interaction.build(w)?;
    let c = c_phi(&inter, rc.lr.zeta, rc.lr.xi, w, rc.lr.family)?;
    let v = lr_velocity(c.value, rc.lr.g, rc.lr.zeta)?;
    out.write("interaction.txt", &inter.to_text())?;
    out.write(
        "cphi.json",
        &Json::new()
            .str("analysis", "cphi")
            .str("verdict", verdict(c.value.is_finite()))
            .num("c_phi", c.value)
            .str("gamma", &c.gamma.map(|s| s.to_string()).unwrap_or_default())
            .str("z_prime", &site_list(&c.z_prime))
            .int("family_size", c.family_size as u64)
            .int("terms", inter.len() as u64)
            .num("g", rc.lr.g)
            .num("zeta", rc.lr.zeta)
            .num("xi", rc.lr.xi)
            .num("velocity", v)
            .render(),
    )?;
    Ok(Outcome::new(c.value.is_finite(), format!("C_phi = {}", c.value)))
}

pub fn wkernel_cmd(rc: &RunConfig, out: &OutDir, seed: u64) -> Result<Outcome, CliError> {
    let (w, p) = (&rc.window, &rc.params);
    let ws = &rc.wkernel;
    let v = v_omega(w, p)?;
    let ks = k_sigma(ws.params.c1.max(f64::MIN_POSITIVE), v.c2, ws.params.sigma1, v.sigma2, p.omega())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = ws.index_range;
    let mut csv = String::from("g1,g2,g3,g4,diam,re,im,abs,bound,ratio,rel_error\n");
    let (mut worst_ratio, mut worst_err) = (0.0_f64, 0.0_f64);
    let mut done = 0;
    let mut attempts = 0usize;
    while done < ws.quadruples {
        attempts += 1;
        if attempts > 1000 * (ws.quadruples + 1) {
            return Err(CliError::Input {
                path: "wkernel.max_diam".into(),
                reason: format!("no quadruple of diameter <= {} found after {attempts} draws", ws.max_diam),
            });
        }
        let idx: Vec<(i64, i64)> = (0..4).map(|_| (rng.random_range(-n..=n), rng.random_range(-n..=n))).collect();
        let pts: Vec<Point> = idx.iter().map(|&(i, j)| [p.alpha * i as f64, p.beta * j as f64]).collect();
        let diam = euclidean_diameter(&pts);
        if diam > ws.max_diam {
            continue;
        }
        let val = w_kernel([pts[0], pts[1], pts[2], pts[3]], &ws.params, &v)?;
        let bound = ks.bound(diam);
        let ratio = val.value.norm() / bound;
        worst_ratio = worst_ratio.max(ratio);
        worst_err = worst_err.max(val.rel_error);
        for (i, j) in &idx {
            let _ = write!(csv, "\"[{i},{j}]\",");
        }
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            sig15(diam),
            sig15(val.value.re),
            sig15(val.value.im),
            sig15(val.value.norm()),
            sig15(bound),
            sig15(ratio),
            sig15(val.rel_error)
        );
        done += 1;
    }
    out.write("wkernel.csv", &csv)?;
    let passed = worst_ratio <= 1.0 && worst_err < rc.w_rel;
    out.write(
        "summary.json",
        &Json::new()
            .str("analysis", "wkernel")
            .str("verdict", verdict(passed))
            .int("quadruples", done as u64)
            .int("seed", seed)
            .num("c1", ws.params.c1)
            .num("sigma1", ws.params.sigma1)
            .num("c2", v.c2)
            .num("sigma2", v.sigma2)
            .num("sigma", ks.sigma)
            .num("k", ks.k)
            .num("max_ratio", worst_ratio)
            .num("max_rel_error", worst_err)
            .num("rel_error_tolerance", rc.w_rel)
            .render(),
    )?;
    Ok(Outcome::new(passed, format!("max |w|/bound {worst_ratio:e}, max relative error {worst_err:e}")))
}

pub fn landau_cmd(rc: &RunConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let (w, p) = (&rc.window, &rc.params);
    p.require_overcomplete("landau")?;
    let s_min = frame_bounds_one(w, p.ell_b, rc.margin)?.a_est;
    let m_eps = m_epsilon(w, rc.tuning.eps)?.closed_form_bound;
    let cert = neumann_certificate(&rc.tuning, s_min, bessel_bound(p), 2, m_eps)?;
    let l = landau_coefficients(w, p, rc.margin)?;
    let q = &l.coefficients;
    let n = q.sites.len();
    let mut csv = String::from("site_a,site_b,d,re,im,bound,ratio\n");
    let (mut cross, mut violations, mut max_ratio) = (0u64, 0u64, 0.0_f64);
    for a in 0..n {
        for b in 0..n {
            let (sa, sb) = (q.sites[a], q.sites[b]);
            let t = q.hopping[(a, b)];
            if sa.r != sb.r {
                cross += (t != Complex64::new(0.0, 0.0)) as u64;
                continue;
            }
            let d = w.params.distance(&sa, &sb);
            let bound = cert.a_p * landau_q(p.eps_b, sa.r) * (-cert.lambda_p * d).exp();
            let ratio = t.norm() / bound;
            max_ratio = max_ratio.max(ratio);
            violations += (t.norm() > bound * (1.0 + 1e-12)) as u64;
            let _ = writeln!(
                csv,
                "\"{sa}\",\"{sb}\",{},{},{},{},{}",
                sig15(d),
                sig15(t.re),
                sig15(t.im),
                sig15(bound),
                sig15(ratio)
            );
        }
    }
    out.write("landau.csv", &csv)?;
    let mut consts = String::from("site,c\n");
    for (s, c) in q.sites.iter().zip(&q.constants) {
        let _ = writeln!(consts, "\"{s}\",{}", sig15(*c));
    }
    out.write("constants.csv", &consts)?;
    let inner = Window::from_sites(w.params, q.sites.iter().copied())?;
    out.write("hopping.txt", &matrix_text(&q.hopping, &window_hash(&inner)))?;
    let passed = cross == 0 && violations == 0;
    let qs: Vec<f64> = l.q.iter().map(|&(_, v)| v).collect();
    out.write(
        "summary.json",
        &Json::new()
            .str("analysis", "landau")
            .str("verdict", verdict(passed))
            .num("eps_b", p.eps_b)
            .nums("q", &qs)
            .int("inner_sites", n as u64)
            .int("cross_level_nonzero", cross)
            .int("violations", violations)
            .num("max_ratio", max_ratio)
            .num("lambda_2", cert.lambda_p)
            .num("a_2", cert.a_p)
            .num("commutator_residual", l.commutator_residual)
            .render(),
    )?;
    Ok(Outcome::new(passed, format!("{violations} violations, {cross} nonzero cross-level entries")))
}

pub fn lr_cmd(rc: &RunConfig, out: &OutDir, negative_control: bool) -> Result<Outcome, CliError> {
    let (w, p) = (&rc.window, &rc.params);
    let inter = rc.interaction.build(w)?;
    let full = lr_check(w, p, &inter, &rc.lr.config(rc.lr.times.clone()))?;
    let scale = if negative_control { rc.lr.negative_control_scale } else { 1.0 };
    let rep = if negative_control { full.with_v_scale(scale) } else { full };
    out.write("lr.csv", &rep.to_csv())?;
    let table = rep.exceedance_table();
    out.write("exceedances.csv", &table)?;
    let passed = rep.passed();
    out.write(
        "summary.json",
        &Json::new()
            .str("analysis", "lr")
            .str("verdict", verdict(passed))
            .bool("negative_control", negative_control)
            .num("v_scale", scale)
            .int("rows", rep.rows.len() as u64)
            .int("modes", rep.n_modes as u64)
            .num("g", rep.g)
            .num("zeta", rep.zeta)
            .num("xi", rc.lr.xi)
            .num("c_phi", rep.c_phi.value)
            .num("v", rep.v)
            .num("v_used", rep.v_used)
            .num("max_ratio", rep.max_ratio())
            .num("critical_v", rep.critical_v)
            .num("critical_scale", rep.critical_scale())
            .int("exceedances", rep.exceedances().len() as u64)
            .render(),
    )?;
    let mut o = Outcome::new(
        passed,
        format!("{} of {} rows exceed the bound at v = {}", rep.exceedances().len(), rep.rows.len(), rep.v_used),
    );
    if !passed {
        o.report = table;
    }
    Ok(o)
}

pub fn converge_cmd(rc: &RunConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let conv = rc.converge.as_ref().ok_or_else(|| CliError::Input {
        path: "converge".into(),
        reason: "the configuration has no [converge] section".into(),
    })?;
    let largest = conv.windows.last().expect("validated");
    let p = MagneticParams::for_window(largest, rc.params.ell_b)?;
    let inter = rc.interaction.build(largest)?;
    let rep = volume_convergence(&conv.windows, &p, &inter, &conv.gamma, &rc.lr.config(conv.times.clone()))?;
    out.write("converge.csv", &rep.to_csv())?;
    let (mono, within) = (rep.monotone(), rep.within_bound());
    let passed = mono && within;
    let sizes: Vec<f64> = conv.windows.iter().map(|w| w.len() as f64).collect();
    out.write(
        "summary.json",
        &Json::new()
            .str("analysis", "converge")
            .str("verdict", verdict(passed))
            .str("gamma", &rep.gamma.to_string())
            .nums("window_sizes", &sizes)
            .num("v", rep.v)
            .int("rows", rep.rows.len() as u64)
            .bool("monotone", mono)
            .bool("within_bound", within)
            .render(),
    )?;
    Ok(Outcome::new(passed, format!("monotone {mono}, within bound {within}")))
}

/// Failure record written to `failure.json` and stderr.
pub fn failure_record(analysis: &str, o: &Outcome) -> String {
    Json::new()
        .str("status", "fail")
        .str("analysis", analysis)
        .str("reason", &o.reason)
        .render()
}

