//! Discrete label space `N0 x (alpha Z x beta Z)` with the scaled l1 metric.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::Point;

/// Geometry of the label lattice and of the default square window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    pub alpha: f64,
    pub beta: f64,
    /// Largest Landau index present in the window.
    pub level_max: u32,
    /// Window cutoff in lattice units: sites with `|i|, |j| <= floor(radius)`.
    pub radius: f64,
    /// Overrides the default dimension (2 without levels, 3 with levels).
    pub nu_override: Option<u32>,
}

impl LatticeParams {
    pub fn new(alpha: f64, beta: f64, level_max: u32, radius: f64) -> Result<Self> {
        let p = LatticeParams {
            alpha,
            beta,
            level_max,
            radius,
            nu_override: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::param("alpha", format!("must be positive, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::param("beta", format!("must be positive, got {}", self.beta)));
        }
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(Error::param("radius", format!("must be non-negative, got {}", self.radius)));
        }
        Ok(())
    }

    pub fn alpha_star(&self) -> f64 {
        self.alpha.min(self.beta)
    }

    /// Dimension exponent used in `D(Z)` and in the counting constant.
    pub fn nu(&self) -> u32 {
        self.nu_override
            .unwrap_or(if self.level_max == 0 { 2 } else { 3 })
    }

    pub fn position(&self, s: &Site) -> Point {
        [s.i as f64 * self.alpha, s.j as f64 * self.beta]
    }

    /// `|r - r'| + alpha_star * (|dgamma_1| + |dgamma_2|)`.
    pub fn distance(&self, p: &Site, q: &Site) -> f64 {
        let dr = (p.r as f64 - q.r as f64).abs();
        let dx = (p.i - q.i).unsigned_abs() as f64 * self.alpha;
        let dy = (p.j - q.j).unsigned_abs() as f64 * self.beta;
        dr + self.alpha_star() * (dx + dy)
    }
}

/// Label `(r, gamma)` with `gamma = (i alpha, j beta)`; serialized as `[r,i,j]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub r: u32,
    pub i: i64,
    pub j: i64,
}

impl Site {
    pub const fn new(r: u32, i: i64, j: i64) -> Self {
        Site { r, i, j }
    }

    pub fn triple(&self) -> [i64; 3] {
        [self.r as i64, self.i, self.j]
    }
}

impl std::fmt::Display for Site {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{},{}]", self.r, self.i, self.j)
    }
}

impl std::str::FromStr for Site {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            line: 0,
            reason: format!("expected [r,i,j], got `{s}`"),
        };
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(bad)?;
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let r = parts[0].parse::<u32>().map_err(|_| bad())?;
        let i = parts[1].parse::<i64>().map_err(|_| bad())?;
        let j = parts[2].parse::<i64>().map_err(|_| bad())?;
        Ok(Site { r, i, j })
    }
}

/// Finite, lexicographically ordered set of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub params: LatticeParams,
    sites: Vec<Site>,
}

impl Window {
    /// Square window `|i|, |j| <= floor(radius)` times levels `0..=level_max`.
    pub fn square(params: LatticeParams) -> Result<Self> {
        params.validate()?;
        let n = (params.radius + 1e-12).floor() as i64;
        let sites = (0..=params.level_max)
            .flat_map(|r| (-n..=n).flat_map(move |i| (-n..=n).map(move |j| Site::new(r, i, j))))
            .collect();
        Ok(Window { params, sites })
    }

    /// Window from an explicit site list; sorted and deduplicated.
    pub fn from_sites(params: LatticeParams, sites: impl IntoIterator<Item = Site>) -> Result<Self> {
        params.validate()?;
        let set: BTreeSet<Site> = sites.into_iter().collect();
        if set.is_empty() {
            return Err(Error::EmptySet("window"));
        }
        let mut params = params;
        params.level_max = set.iter().map(|s| s.r).max().unwrap_or(0).max(params.level_max);
        Ok(Window {
            params,
            sites: set.into_iter().collect(),
        })
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn index_of(&self, s: &Site) -> Option<usize> {
        self.sites.binary_search(s).ok()
    }

    pub fn contains(&self, s: &Site) -> bool {
        self.index_of(s).is_some()
    }

    pub fn position(&self, k: usize) -> Point {
        self.params.position(&self.sites[k])
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.params.distance(&self.sites[a], &self.sites[b])
    }

    /// Sites restricted to one Landau level, as window indices.
    pub fn level_indices(&self, r: u32) -> Vec<usize> {
        (0..self.sites.len()).filter(|&k| self.sites[k].r == r).collect()
    }

    pub fn levels(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.sites.iter().map(|s| s.r).collect();
        set.into_iter().collect()
    }

    /// Largest Euclidean distance of a site from the origin.
    pub fn max_abs_position(&self) -> f64 {
        (0..self.len())
            .map(|k| {
                let p = self.position(k);
                p[0].hypot(p[1])
            })
            .fold(0.0, f64::max)
    }

    /// Radius of the largest origin-centred disk covered by the window.
    ///
    /// Measured as the distance to the nearest lattice point missing from the
    /// window, minus one lattice spacing.
    pub fn covered_radius(&self) -> f64 {
        let spatial: BTreeSet<(i64, i64)> = self.sites.iter().map(|s| (s.i, s.j)).collect();
        let mut nearest_missing = f64::INFINITY;
        for &(i, j) in &spatial {
            for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let q = (i + di, j + dj);
                if !spatial.contains(&q) {
                    let x = q.0 as f64 * self.params.alpha;
                    let y = q.1 as f64 * self.params.beta;
                    nearest_missing = nearest_missing.min(x.hypot(y));
                }
            }
        }
        if !spatial.contains(&(0, 0)) {
            return 0.0;
        }
        let step = self.params.alpha.max(self.params.beta);
        (nearest_missing - step).max(0.0)
    }

    /// Indices of sites with `|gamma| <= covered_radius - margin`.
    pub fn inner_indices(&self, margin: f64) -> Vec<usize> {
        let rho = self.covered_radius() - margin;
        (0..self.len())
            .filter(|&k| {
                let p = self.position(k);
                p[0].hypot(p[1]) <= rho + 1e-12
            })
            .collect()
    }
}

/// Windowed sum and analytic bound for `m_eps = sup_gamma sum_xi e^{-eps d}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MEpsilon {
    pub estimate: f64,
    pub closed_form_bound: f64,
}

pub fn m_epsilon(window: &Window, eps: f64) -> Result<MEpsilon> {
    if !(eps > 0.0) {
        return Err(Error::param("eps", format!("must be positive, got {eps}")));
    }
    let n = window.len();
    let estimate = (0..n)
        .map(|a| (0..n).map(|b| (-eps * window.distance(a, b)).exp()).sum::<f64>())
        .fold(0.0, f64::max);
    Ok(MEpsilon {
        estimate,
        closed_form_bound: m_epsilon_closed_form(&window.params, eps)?,
    })
}

/// `(2 / (1 - e^{-eps alpha_star^2}))^2`, times `(1+e^{-eps})/(1-e^{-eps})` with levels.
pub fn m_epsilon_closed_form(params: &LatticeParams, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::param("eps", format!("must be positive, got {eps}")));
    }
    let a2 = params.alpha_star() * params.alpha_star();
    let spatial = (2.0 / (-(-eps * a2).exp_m1())).powi(2);
    let levels = if params.level_max > 0 {
        (1.0 + (-eps).exp()) / (-(-eps).exp_m1())
    } else {
        1.0
    };
    Ok(spatial * levels)
}

/// Smallest `kappa` with `#{xi : d(xi, gamma) <= r} <= kappa r^nu` over the window.
///
/// Radii are the distinct positive pairwise distances; a single-site window
/// uses `r = alpha_star`.
pub fn dimension_constant(window: &Window) -> Result<f64> {
    let n = window.len();
    if n == 0 {
        return Err(Error::EmptySet("window"));
    }
    let nu = window.params.nu() as i32;
    let mut radii: Vec<f64> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    for a in 0..n {
        let mut row: Vec<f64> = (0..n).map(|b| window.distance(a, b)).collect();
        row.sort_by(f64::total_cmp);
        radii.extend(row.iter().copied().filter(|&d| d > 0.0));
        rows.push(row);
    }
    radii.sort_by(f64::total_cmp);
    radii.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    if radii.is_empty() {
        radii.push(window.params.alpha_star());
    }
    let mut kappa = 0.0_f64;
    for row in &rows {
        for &r in &radii {
            let count = row.partition_point(|&d| d <= r + 1e-12 * r);
            kappa = kappa.max(count as f64 / r.powi(nu));
        }
    }
    Ok(kappa)
}

/// Diameter, set distance and `D(Z) = (1 + diam Z)^nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetGeometry {
    pub diam: f64,
    pub dist: f64,
    pub d_z: f64,
}

pub fn set_geometry(params: &LatticeParams, z: &[Site], zp: &[Site]) -> Result<SetGeometry> {
    if z.is_empty() {
        return Err(Error::EmptySet("Z"));
    }
    if zp.is_empty() {
        return Err(Error::EmptySet("Z'"));
    }
    let d = diameter(params, z);
    Ok(SetGeometry {
        diam: d,
        dist: set_distance(params, z, zp),
        d_z: (1.0 + d).powi(params.nu() as i32),
    })
}

pub fn diameter(params: &LatticeParams, z: &[Site]) -> f64 {
    z.iter()
        .flat_map(|p| z.iter().map(move |q| params.distance(p, q)))
        .fold(0.0, f64::max)
}

pub fn set_distance(params: &LatticeParams, z: &[Site], zp: &[Site]) -> f64 {
    z.iter()
        .flat_map(|p| zp.iter().map(move |q| params.distance(p, q)))
        .fold(f64::INFINITY, f64::min)
}
