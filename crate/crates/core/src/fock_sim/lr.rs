//! Lieb-Robinson checks and finite-volume convergence on exact dynamics.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::{
    anticommutator_norms, evolve_all, fock_norm, interaction_hamiltonian, mode_operators, Dynamics, ModeBasis,
};
use crate::error::{Error, Result};
use crate::format::sig15;
use crate::interactions::{c_phi, decay_sum, lr_velocity, CPhi, Interaction, ZFamily};
use crate::lattice::{Site, Window};
use crate::linalg::CMatrix;
use crate::magnetic_frame::MagneticParams;

/// Relative slack when comparing a norm to its bound.
pub const BOUND_REL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LrConfig {
    /// Frame constant `G` (at least 1).
    pub g: f64,
    pub zeta: f64,
    pub xi: f64,
    pub times: Vec<f64>,
    /// Multiplies the velocity in the bound; `1` is the proven bound.
    pub v_scale: f64,
    pub family: ZFamily,
}

impl LrConfig {
    pub fn new(g: f64, zeta: f64, xi: f64, times: Vec<f64>) -> Self {
        LrConfig {
            g,
            zeta,
            xi,
            times,
            v_scale: 1.0,
            family: ZFamily::Balls { radius_cap: None },
        }
    }

    /// `n` equally spaced times on `[0, t_max]`.
    pub fn uniform_times(t_max: f64, n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![0.0],
            _ => (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.g >= 1.0 && self.g.is_finite()) {
            return Err(Error::param("g", format!("must be at least 1, got {}", self.g)));
        }
        if !(self.v_scale > 0.0 && self.v_scale.is_finite()) {
            return Err(Error::param("v_scale", format!("must be positive, got {}", self.v_scale)));
        }
        if self.times.is_empty() {
            return Err(Error::EmptySet("time grid"));
        }
        if let Some(t) = self.times.iter().find(|t| !t.is_finite()) {
            return Err(Error::param("times", format!("non-finite time {t}")));
        }
        Ok(())
    }

    /// `G e^{-zeta (d - v |t|)}`.
    pub fn bound(&self, v: f64, d: f64, t: f64) -> f64 {
        self.g * (-self.zeta * (d - v * t.abs())).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrRow {
    pub t: f64,
    pub gamma: Site,
    pub gamma_p: Site,
    pub d: f64,
    pub f: f64,
    pub bound: f64,
}

impl LrRow {
    pub fn ratio(&self) -> f64 {
        self.f / self.bound
    }

    pub fn exceeds(&self) -> bool {
        self.f > self.bound * (1.0 + BOUND_REL_SLACK)
    }
}

#[derive(Debug, Clone)]
pub struct LrReport {
    pub rows: Vec<LrRow>,
    pub c_phi: CPhi,
    /// Proven velocity `16 G C / zeta`.
    pub v: f64,
    /// Velocity used in the bound, `v_scale * v`.
    pub v_used: f64,
    pub zeta: f64,
    pub g: f64,
    pub n_modes: usize,
    /// Smallest velocity that would still bound every row with `t > 0`.
    pub critical_v: f64,
}

impl LrReport {
    pub fn exceedances(&self) -> Vec<&LrRow> {
        self.rows.iter().filter(|r| r.exceeds()).collect()
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| !r.exceeds())
    }

    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(LrRow::ratio).fold(0.0, f64::max)
    }

    /// `critical_v / v`: the velocity scale below which the bound fails.
    pub fn critical_scale(&self) -> f64 {
        if self.v > 0.0 {
            self.critical_v / self.v
        } else {
            f64::INFINITY
        }
    }

    /// Same norms against the bound with velocity `scale * v`.
    pub fn with_v_scale(&self, scale: f64) -> LrReport {
        let v_used = self.v * scale;
        let rows = self
            .rows
            .iter()
            .map(|r| LrRow {
                bound: self.g * (-self.zeta * (r.d - v_used * r.t.abs())).exp(),
                ..r.clone()
            })
            .collect();
        LrReport {
            rows,
            c_phi: self.c_phi.clone(),
            v: self.v,
            v_used,
            zeta: self.zeta,
            g: self.g,
            n_modes: self.n_modes,
            critical_v: self.critical_v,
        }
    }

    pub const CSV_HEADER: &'static str = "t,gamma,gamma_prime,d,F,bound,ratio";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            push_row(&mut s, r);
        }
        s
    }

    /// Rows whose norm exceeds the bound, same columns as the CSV.
    pub fn exceedance_table(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in self.exceedances() {
            push_row(&mut s, r);
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "rows = {}", self.rows.len());
        let _ = writeln!(s, "modes = {}", self.n_modes);
        let _ = writeln!(s, "G = {}", sig15(self.g));
        let _ = writeln!(s, "zeta = {}", sig15(self.zeta));
        let _ = writeln!(s, "C_phi = {}", sig15(self.c_phi.value));
        let _ = writeln!(s, "v = {}", sig15(self.v));
        let _ = writeln!(s, "v_used = {}", sig15(self.v_used));
        let _ = writeln!(s, "max_ratio = {}", sig15(self.max_ratio()));
        let _ = writeln!(s, "critical_v = {}", sig15(self.critical_v));
        let _ = writeln!(s, "critical_scale = {}", sig15(self.critical_scale()));
        let _ = writeln!(s, "exceedances = {}", self.exceedances().len());
        let _ = writeln!(s, "verdict = {}", if self.passed() { "pass" } else { "fail" });
        s
    }
}

fn push_row(s: &mut String, r: &LrRow) {
    let _ = writeln!(
        s,
        "{},\"{}\",\"{}\",{},{},{},{}",
        sig15(r.t),
        r.gamma,
        r.gamma_p,
        sig15(r.d),
        sig15(r.f),
        sig15(r.bound),
        sig15(r.ratio())
    );
}

/// Exact dynamics of the interaction on the window's Fock space, compared with
/// `G e^{-zeta (d(gamma,gamma') - v |t|)}` for every site pair and time.
pub fn lr_check(window: &Window, params: &MagneticParams, inter: &Interaction, cfg: &LrConfig) -> Result<LrReport> {
    cfg.validate()?;
    inter.check_window(window)?;
    let cphi = c_phi(inter, cfg.zeta, cfg.xi, window, cfg.family)?;
    let v = lr_velocity(cphi.value, cfg.g, cfg.zeta)?;
    let v_used = v * cfg.v_scale;

    let basis = ModeBasis::from_window(window, params)?;
    let ops = mode_operators(&basis)?;
    let h = interaction_hamiltonian(inter, &ops)?;
    let dynamics = Dynamics::new(&h)?;
    let energy: Vec<CMatrix> = ops.a.iter().map(|a| dynamics.to_energy_basis(&a.to_dense())).collect();

    let n = window.len();
    let sites = window.sites();
    let mut rows = Vec::with_capacity(cfg.times.len() * n * n);
    for &t in &cfg.times {
        let evolved = evolve_all(&dynamics, &energy, t);
        let block: Vec<LrRow> = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (g, k) = (idx / n, idx % n);
                let f = anticommutator_norms(&evolved[g], &ops, k).max();
                let d = window.distance(g, k);
                LrRow {
                    t,
                    gamma: sites[g],
                    gamma_p: sites[k],
                    d,
                    f,
                    bound: cfg.bound(v_used, d, t),
                }
            })
            .collect();
        rows.extend(block);
    }

    let critical_v = rows
        .iter()
        .filter(|r| r.t != 0.0 && r.f > 0.0)
        .map(|r| (r.f.ln() + cfg.zeta * r.d - cfg.g.ln()) / (cfg.zeta * r.t.abs()))
        .fold(0.0_f64, f64::max);

    Ok(LrReport {
        rows,
        c_phi: cphi,
        v,
        v_used,
        zeta: cfg.zeta,
        g: cfg.g,
        n_modes: basis.n_modes(),
        critical_v,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub t: f64,
    pub small: usize,
    pub large: usize,
    /// `|tau_t^small(a_gamma) - tau_t^large(a_gamma)|`.
    pub norm_diff: f64,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub gamma: Site,
    pub v: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// At every time the distance to the largest window's dynamics does not grow as
    /// the small window grows: `|tau^{L_k} - tau^{L_N}|` is non-increasing in `k`.
    pub fn monotone(&self) -> bool {
        let last = self.rows.iter().map(|r| r.large).max().unwrap_or(0);
        let to_last: Vec<&ConvergenceRow> = self.rows.iter().filter(|r| r.large == last).collect();
        to_last.windows(2).all(|w| {
            w[0].t != w[1].t || w[1].norm_diff <= w[0].norm_diff * (1.0 + BOUND_REL_SLACK) + 1e-13
        })
    }

    pub fn within_bound(&self) -> bool {
        self.rows.iter().all(|r| r.norm_diff <= r.bound * (1.0 + BOUND_REL_SLACK) + 1e-13)
    }

    pub const CSV_HEADER: &'static str = "t,small,large,norm_diff,bound";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{},{}", sig15(r.t), r.small, r.large, sig15(r.norm_diff), sig15(r.bound));
        }
        s
    }
}

/// Finite-volume dynamics `tau_t^Lambda(a_gamma)` for a chain of nested windows, all
/// acting on the Fock space of the largest one.
///
/// `inter` is given on the largest window and restricted to each smaller one. Every pair
/// `Lambda_n subset Lambda_m` gets a row; its bound is
/// `2 G (e^{zeta v |t|} - 1) sum_{Z subset Lambda_m, Z not subset Lambda_n} k f_k e^{-zeta d(gamma,Z)}`.
pub fn volume_convergence(
    windows: &[Window],
    params: &MagneticParams,
    inter: &Interaction,
    gamma: &Site,
    cfg: &LrConfig,
) -> Result<ConvergenceReport> {
    cfg.validate()?;
    if windows.len() < 2 {
        return Err(Error::param("windows", "need at least two nested windows"));
    }
    for (k, pair) in windows.windows(2).enumerate() {
        if let Some(s) = pair[0].sites().iter().find(|s| !pair[1].contains(s)) {
            return Err(Error::NotNested(format!("site {s} of window {k} is missing from window {}", k + 1)));
        }
    }
    if !windows[0].contains(gamma) {
        return Err(Error::UnknownSite(gamma.triple()));
    }
    let largest = windows.last().expect("at least two");
    inter.check_window(largest)?;
    let cphi = c_phi(inter, cfg.zeta, cfg.xi, largest, cfg.family)?;
    let v = lr_velocity(cphi.value, cfg.g, cfg.zeta)? * cfg.v_scale;

    let basis = ModeBasis::from_window(largest, params)?;
    let ops = mode_operators(&basis)?;
    let a = ops.a[basis.index_of(gamma)?].to_dense();
    let dynamics: Vec<Dynamics> = windows
        .iter()
        .map(|w| Dynamics::new(&interaction_hamiltonian(&inter.restrict(w), &ops)?))
        .collect::<Result<_>>()?;
    let energy: Vec<CMatrix> = dynamics.iter().map(|d| d.to_energy_basis(&a)).collect();

    let nw = windows.len();
    let pairs: Vec<(usize, usize)> = (0..nw).flat_map(|k| (k + 1..nw).map(move |l| (k, l))).collect();
    let sums: Vec<f64> = pairs
        .iter()
        .map(|&(k, l)| {
            decay_sum(inter, cfg.zeta, largest, gamma, |t| {
                t.support.iter().all(|s| windows[l].contains(s)) && t.support.iter().any(|s| !windows[k].contains(s))
            })
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for &t in &cfg.times {
        let evolved: Vec<CMatrix> = dynamics
            .par_iter()
            .zip(&energy)
            .map(|(d, e)| d.evolve_energy_basis(e, t))
            .collect();
        for (&(k, l), sum) in pairs.iter().zip(&sums) {
            let norm_diff = fock_norm(&(&evolved[k] - &evolved[l]), -1);
            let bound = 2.0 * cfg.g * ((cfg.zeta * v * t.abs()).exp() - 1.0) * sum;
            rows.push(ConvergenceRow {
                t,
                small: windows[k].len(),
                large: windows[l].len(),
                norm_diff,
                bound,
            });
        }
    }
    Ok(ConvergenceReport { gamma: *gamma, v, rows })
}
