//! Interactions `Phi(Z) = sum_k f_k(Z) (M_k + M_k^*)`, the decay functional
//! `C_Phi(zeta, xi)`, density-density models and the continuum kernel `w`.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::sig15;
use crate::lattice::{diameter, Site, Window};

pub mod wkernel;

pub use wkernel::{k_sigma, v_omega, w_kernel, KSigma, VOmega, WKernelParams, WValue};

/// One factor `a_x` or `a_x^*` of a monomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Factor {
    pub site: Site,
    pub dagger: bool,
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dagger {
            write!(f, "a*{}", self.site)
        } else {
            write!(f, "a{}", self.site)
        }
    }
}

/// Ordered product of creation/annihilation operators, of even length `2k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MonomialDescriptor(Vec<Factor>);

impl MonomialDescriptor {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() || !factors.len().is_multiple_of(2) {
            return Err(Error::param(
                "monomial",
                format!("length must be even and positive, got {}", factors.len()),
            ));
        }
        Ok(MonomialDescriptor(factors))
    }

    /// Arbitrary-length product, used for expectation values.
    pub fn word(factors: Vec<Factor>) -> Self {
        MonomialDescriptor(factors)
    }

    /// `n(x) n(y) = a*_x a_x a*_y a_y`.
    pub fn density_pair(x: Site, y: Site) -> Self {
        MonomialDescriptor(vec![
            Factor { site: x, dagger: true },
            Factor { site: x, dagger: false },
            Factor { site: y, dagger: true },
            Factor { site: y, dagger: false },
        ])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len() / 2
    }

    /// All creations to the left of all annihilations.
    pub fn is_normal_ordered(&self) -> bool {
        let first_annihilation = self.0.iter().position(|f| !f.dagger).unwrap_or(self.0.len());
        self.0[first_annihilation..].iter().all(|f| !f.dagger)
    }

    pub fn sites(&self) -> BTreeSet<Site> {
        self.0.iter().map(|f| f.site).collect()
    }
}

impl fmt::Display for MonomialDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, factor) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(".")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for MonomialDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let factors = s
            .split('.')
            .map(|tok| {
                let (dagger, rest) = if let Some(r) = tok.strip_prefix("a*") {
                    (true, r)
                } else if let Some(r) = tok.strip_prefix('a') {
                    (false, r)
                } else {
                    return Err(Error::Parse {
                        line: 0,
                        reason: format!("monomial factor `{tok}` must start with `a` or `a*`"),
                    });
                };
                Ok(Factor {
                    site: rest.parse()?,
                    dagger,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MonomialDescriptor::new(factors)
    }
}

/// `f_k(Z) (M_k + M_k^*)` with support `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionTerm {
    /// Sorted, without repetitions.
    pub support: Vec<Site>,
    pub degree: usize,
    pub coeff: f64,
    pub monomial: MonomialDescriptor,
}

impl InteractionTerm {
    pub fn new(support: Vec<Site>, coeff: f64, monomial: MonomialDescriptor) -> Result<Self> {
        let set: BTreeSet<Site> = support.into_iter().collect();
        if set.is_empty() {
            return Err(Error::EmptySet("interaction support"));
        }
        if !(coeff >= 0.0 && coeff.is_finite()) {
            return Err(Error::param("f_k", format!("must be finite and non-negative, got {coeff}")));
        }
        let degree = monomial.degree();
        if degree > set.len() {
            return Err(Error::param(
                "monomial",
                format!("degree {degree} exceeds the CAR capacity of a {}-site support", set.len()),
            ));
        }
        if let Some(s) = monomial.sites().iter().find(|s| !set.contains(s)) {
            return Err(Error::param("monomial", format!("site {s} is outside the support")));
        }
        Ok(InteractionTerm {
            support: set.into_iter().collect(),
            degree,
            coeff,
            monomial,
        })
    }

    /// `k f_k Z monomial` on one line.
    pub fn to_line(&self) -> String {
        let sites: Vec<String> = self.support.iter().map(Site::to_string).collect();
        format!("{} {} {} {}", self.degree, sig15(self.coeff), sites.join(";"), self.monomial)
    }

    fn from_line(line: &str, lineno: usize) -> Result<Self> {
        let at = |reason: String| Error::Parse { line: lineno, reason };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(at(format!("expected `k f_k site-list monomial`, got {} fields", fields.len())));
        }
        let k: usize = fields[0]
            .parse()
            .map_err(|_| at(format!("degree `{}` is not a positive integer", fields[0])))?;
        let f: f64 = fields[1]
            .parse()
            .map_err(|_| at(format!("coefficient `{}` is not a number", fields[1])))?;
        let support = fields[2]
            .split(';')
            .map(|s| s.parse::<Site>())
            .collect::<Result<Vec<_>>>()
            .map_err(|e| at(e.to_string()))?;
        let monomial: MonomialDescriptor = fields[3].parse().map_err(|e: Error| at(e.to_string()))?;
        let term = InteractionTerm::new(support, f, monomial).map_err(|e| at(e.to_string()))?;
        if term.degree != k {
            return Err(at(format!("declared degree {k} but the monomial has degree {}", term.degree)));
        }
        Ok(term)
    }
}

/// Pair-potential parameters `f(x,y) = f0 e^{-mu d(x,y)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairPotential {
    pub f0: f64,
    pub mu: f64,
}

/// Finite list of terms; duplicates stay distinct.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Interaction {
    pub terms: Vec<InteractionTerm>,
    pub pair_potential: Option<PairPotential>,
}

impl Interaction {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Checks that every support lies in the window.
    pub fn check_window(&self, window: &Window) -> Result<()> {
        for t in &self.terms {
            if let Some(s) = t.support.iter().find(|s| !window.contains(s)) {
                return Err(Error::UnknownSite(s.triple()));
            }
        }
        Ok(())
    }

    /// Terms whose support lies in `sub`.
    pub fn restrict(&self, sub: &Window) -> Interaction {
        Interaction {
            terms: self
                .terms
                .iter()
                .filter(|t| t.support.iter().all(|s| sub.contains(s)))
                .cloned()
                .collect(),
            pair_potential: self.pair_potential,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# interaction terms={}\n", self.terms.len());
        if let Some(p) = self.pair_potential {
            out.push_str(&format!("# density_density f0={} mu={}\n", sig15(p.f0), sig15(p.mu)));
        }
        for t in &self.terms {
            out.push_str(&t.to_line());
            out.push('\n');
        }
        out
    }

    /// Parses the line format; blank lines and `#` comments are skipped except the
    /// `# density_density f0=.. mu=..` header written by [`Interaction::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut pair_potential = None;
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(rest) = line.strip_prefix("# density_density") {
                pair_potential = Some(parse_pair_header(rest, k + 1)?);
                continue;
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            terms.push(InteractionTerm::from_line(line, k + 1)?);
        }
        Ok(Interaction { terms, pair_potential })
    }
}

fn parse_pair_header(rest: &str, line: usize) -> Result<PairPotential> {
    let mut f0 = None;
    let mut mu = None;
    for tok in rest.split_whitespace() {
        let (key, value) = tok.split_once('=').ok_or_else(|| Error::Parse {
            line,
            reason: format!("expected key=value in the density_density header, got `{tok}`"),
        })?;
        let x: f64 = value.parse().map_err(|_| Error::Parse {
            line,
            reason: format!("`{value}` is not a number"),
        })?;
        match key {
            "f0" => f0 = Some(x),
            "mu" => mu = Some(x),
            _ => {
                return Err(Error::Parse {
                    line,
                    reason: format!("unknown density_density field `{key}`"),
                })
            }
        }
    }
    match (f0, mu) {
        (Some(f0), Some(mu)) => Ok(PairPotential { f0, mu }),
        _ => Err(Error::Parse {
            line,
            reason: "density_density header needs f0 and mu".into(),
        }),
    }
}

/// One term `f0 e^{-mu d(x,y)} (n_x n_y + n_y n_x)` per unordered pair of window sites.
pub fn density_density(f0: f64, mu: f64, window: &Window) -> Result<Interaction> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::param("mu", format!("must be positive, got {mu}")));
    }
    if !(f0 >= 0.0 && f0.is_finite()) {
        return Err(Error::param("f0", format!("must be finite and non-negative, got {f0}")));
    }
    let sites = window.sites();
    let mut terms = Vec::with_capacity(sites.len() * sites.len().saturating_sub(1) / 2);
    for a in 0..sites.len() {
        for b in a + 1..sites.len() {
            let f = f0 * (-mu * window.distance(a, b)).exp();
            let (x, y) = (sites[a], sites[b]);
            terms.push(InteractionTerm::new(vec![x, y], f, MonomialDescriptor::density_pair(x, y))?);
        }
    }
    Ok(Interaction {
        terms,
        pair_potential: Some(PairPotential { f0, mu }),
    })
}

/// Candidate sets `Z'` over which the outer supremum of `C_Phi` is taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZFamily {
    /// Singletons and metric balls `{x : d(c,x) <= r}` for integer `r` up to the cap
    /// (window diameter when `None`).
    Balls { radius_cap: Option<f64> },
    /// Every non-empty subset; windows of at most [`MAX_BRUTE_FORCE_SITES`] sites.
    AllSubsets,
}

pub const MAX_BRUTE_FORCE_SITES: usize = 12;

impl ZFamily {
    fn enumerate(&self, window: &Window) -> Result<Vec<Vec<usize>>> {
        let n = window.len();
        match *self {
            ZFamily::AllSubsets => {
                if n > MAX_BRUTE_FORCE_SITES {
                    return Err(Error::param(
                        "z_family",
                        format!("all-subsets mode is limited to {MAX_BRUTE_FORCE_SITES} sites, window has {n}"),
                    ));
                }
                Ok((1u32..1 << n)
                    .map(|mask| (0..n).filter(|&k| mask >> k & 1 == 1).collect())
                    .collect())
            }
            ZFamily::Balls { radius_cap } => {
                let cap = radius_cap.unwrap_or_else(|| diameter(&window.params, window.sites()));
                let mut seen = BTreeSet::new();
                for c in 0..n {
                    let mut r = 0.0;
                    while r <= cap + 1e-12 {
                        let ball: Vec<usize> =
                            (0..n).filter(|&x| window.distance(c, x) <= r + 1e-12).collect();
                        seen.insert(ball);
                        r += 1.0;
                    }
                }
                Ok(seen.into_iter().collect())
            }
        }
    }
}

/// Value of `C_Phi(zeta, xi)` and where the supremum is attained.
#[derive(Debug, Clone, PartialEq)]
pub struct CPhi {
    pub value: f64,
    pub gamma: Option<Site>,
    pub z_prime: Vec<Site>,
    pub family_size: usize,
}

/// Per-term data reused by every decay sum.
struct TermGeometry {
    sites: Vec<usize>,
    /// `k^2 f_k D(Z)`.
    weight: f64,
    /// `k f_k`.
    linear: f64,
}

fn term_geometry(inter: &Interaction, window: &Window) -> Result<Vec<TermGeometry>> {
    inter.check_window(window)?;
    let nu = window.params.nu() as i32;
    Ok(inter
        .terms
        .iter()
        .map(|t| {
            let k = t.degree as f64;
            let d_z = (1.0 + diameter(&window.params, &t.support)).powi(nu);
            TermGeometry {
                sites: t.support.iter().map(|s| window.index_of(s).expect("checked")).collect(),
                weight: k * k * t.coeff * d_z,
                linear: k * t.coeff,
            }
        })
        .collect())
}

fn dist_to_set(window: &Window, g: usize, set: &[usize]) -> f64 {
    set.iter().map(|&x| window.distance(g, x)).fold(f64::INFINITY, f64::min)
}

fn set_to_set(window: &Window, a: &[usize], b: &[usize]) -> f64 {
    a.iter().map(|&x| dist_to_set(window, x, b)).fold(f64::INFINITY, f64::min)
}

fn check_rates(zeta: f64, xi: f64) -> Result<()> {
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(Error::param("zeta", format!("must be positive, got {zeta}")));
    }
    if !(xi > zeta && xi.is_finite()) {
        return Err(Error::param("xi", format!("must exceed zeta = {zeta}, got {xi}")));
    }
    Ok(())
}

/// `sup_gamma sup_Z' e^{zeta d(gamma,Z')} / D(Z') sum_Z sum_k k^2 f_k(Z) D(Z) e^{-zeta d(gamma,Z)} e^{-xi d(Z,Z')}`
/// with `gamma` over the window and `Z'` over `family`.
pub fn c_phi(inter: &Interaction, zeta: f64, xi: f64, window: &Window, family: ZFamily) -> Result<CPhi> {
    check_rates(zeta, xi)?;
    let terms = term_geometry(inter, window)?;
    let fam = family.enumerate(window)?;
    let n = window.len();
    let nu = window.params.nu() as i32;
    let damp_gamma: Vec<Vec<f64>> = (0..n)
        .map(|g| terms.iter().map(|t| (-zeta * dist_to_set(window, g, &t.sites)).exp()).collect())
        .collect();
    let best = fam
        .par_iter()
        .enumerate()
        .map(|(zi, zp)| {
            let zp_sites: Vec<Site> = zp.iter().map(|&k| window.sites()[k]).collect();
            let d_zp = (1.0 + diameter(&window.params, &zp_sites)).powi(nu);
            let link: Vec<f64> = terms
                .iter()
                .map(|t| t.weight * (-xi * set_to_set(window, &t.sites, zp)).exp())
                .collect();
            let mut local = (0.0_f64, usize::MAX, zi);
            for (g, damp) in damp_gamma.iter().enumerate() {
                let sum: f64 = link.iter().zip(damp).map(|(l, d)| l * d).sum();
                let value = (zeta * dist_to_set(window, g, zp)).exp() / d_zp * sum;
                if value > local.0 {
                    local = (value, g, zi);
                }
            }
            local
        })
        .reduce(
            || (0.0, usize::MAX, usize::MAX),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && (b.2, b.1) < (a.2, a.1)) { b } else { a },
        );
    Ok(CPhi {
        value: best.0,
        gamma: (best.1 != usize::MAX).then(|| window.sites()[best.1]),
        z_prime: if best.2 == usize::MAX {
            Vec::new()
        } else {
            fam[best.2].iter().map(|&k| window.sites()[k]).collect()
        },
        family_size: fam.len(),
    })
}

/// Left side of the pointwise consequence of the `C_Phi` condition:
/// `sum_Z sum_k k^2 f_k(Z) D(Z) e^{-zeta d(gamma,Z)} e^{-xi d(Z,gamma')}`.
pub fn point_sum(
    inter: &Interaction,
    zeta: f64,
    xi: f64,
    window: &Window,
    gamma: &Site,
    gamma_p: &Site,
) -> Result<f64> {
    check_rates(zeta, xi)?;
    let terms = term_geometry(inter, window)?;
    let g = window.index_of(gamma).ok_or(Error::UnknownSite(gamma.triple()))?;
    let h = window.index_of(gamma_p).ok_or(Error::UnknownSite(gamma_p.triple()))?;
    Ok(terms
        .iter()
        .map(|t| {
            t.weight
                * (-zeta * dist_to_set(window, g, &t.sites)).exp()
                * (-xi * dist_to_set(window, h, &t.sites)).exp()
        })
        .sum())
}

/// `sum_{Z in selected} k f_k(Z) e^{-zeta d(gamma,Z)}`, the sum behind the
/// finite-volume convergence estimate.
pub fn decay_sum(
    inter: &Interaction,
    zeta: f64,
    window: &Window,
    gamma: &Site,
    select: impl Fn(&InteractionTerm) -> bool,
) -> Result<f64> {
    let terms = term_geometry(inter, window)?;
    let g = window.index_of(gamma).ok_or(Error::UnknownSite(gamma.triple()))?;
    Ok(inter
        .terms
        .iter()
        .zip(&terms)
        .filter(|(t, _)| select(t))
        .map(|(_, geo)| geo.linear * (-zeta * dist_to_set(window, g, &geo.sites)).exp())
        .sum())
}

/// `v = 16 G C / zeta`.
pub fn lr_velocity(c: f64, g: f64, zeta: f64) -> Result<f64> {
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(Error::param("zeta", format!("must be positive, got {zeta}")));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::param("C", format!("must be finite and non-negative, got {c}")));
    }
    if !(g >= 1.0 && g.is_finite()) {
        return Err(Error::param("G", format!("must be at least 1, got {g}")));
    }
    Ok(16.0 * g * c / zeta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeParams;

    fn chain(n: i64) -> Window {
        let lat = LatticeParams::new(1.0, 1.0, 0, 0.0).unwrap();
        Window::from_sites(lat, (0..n).map(|i| Site::new(0, i, 0))).unwrap()
    }

    #[test]
    fn single_site_has_no_pairs() {
        let w = chain(1);
        assert!(density_density(1.0, 1.0, &w).unwrap().is_empty());
    }

    #[test]
    fn two_sites_at_distance_two() {
        let lat = LatticeParams::new(1.0, 1.0, 0, 0.0).unwrap();
        let w = Window::from_sites(lat, [Site::new(0, 0, 0), Site::new(0, 2, 0)]).unwrap();
        let i = density_density(1.0, 1.0, &w).unwrap();
        assert_eq!(i.len(), 1);
        assert!((i.terms[0].coeff - 0.135335283236613).abs() < 1e-15);
        assert_eq!(i.terms[0].degree, 2);
    }

    #[test]
    fn pair_count() {
        for n in 1..7 {
            let i = density_density(0.5, 2.0, &chain(n)).unwrap();
            assert_eq!(i.len() as i64, n * (n - 1) / 2);
        }
    }

    #[test]
    fn rejects_bad_mu() {
        assert!(density_density(1.0, 0.0, &chain(3)).is_err());
        assert!(density_density(1.0, f64::NAN, &chain(3)).is_err());
    }

    #[test]
    fn text_round_trip() {
        let i = density_density(1.0, 0.7, &chain(4)).unwrap();
        let text = i.to_text();
        let back = Interaction::from_text(&text).unwrap();
        assert_eq!(back.len(), i.len());
        for (a, b) in back.terms.iter().zip(&i.terms) {
            assert_eq!(a.support, b.support);
            assert_eq!(a.monomial, b.monomial);
            assert!((a.coeff - b.coeff).abs() <= 1e-14 * b.coeff);
        }
        assert_eq!(back.to_text(), text);
        assert_eq!(back.pair_potential.unwrap().mu, 0.7);
        assert!(Interaction::from_text("# density_density f0=1").is_err());
    }

    #[test]
    fn line_format() {
        let x = Site::new(0, 0, 0);
        let y = Site::new(0, 1, 0);
        let t = InteractionTerm::new(vec![y, x], 0.25, MonomialDescriptor::density_pair(x, y)).unwrap();
        assert_eq!(t.to_line(), "2 2.50000000000000e-1 [0,0,0];[0,1,0] a*[0,0,0].a[0,0,0].a*[0,1,0].a[0,1,0]");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "# header\n2 0.5 [0,0,0];[0,1,0] a*[0,0,0].a[0,0,0].a*[0,1,0].a[0,1,0]\n2 x [0,0,0] a[0,0,0]\n";
        match Interaction::from_text(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Interaction::from_text("1 0.5 [0,0,0] a*[0,1,0].a[0,1,0]").is_err());
        assert!(Interaction::from_text("3 0.5 [0,0,0];[0,1,0] a*[0,0,0].a[0,0,0].a*[0,1,0].a[0,1,0]").is_err());
        assert!(Interaction::from_text("1 -0.5 [0,0,0] a*[0,0,0].a[0,0,0]").is_err());
    }

    #[test]
    fn normal_order() {
        let x = Site::new(0, 0, 0);
        let m = MonomialDescriptor::density_pair(x, x);
        assert!(!m.is_normal_ordered());
        let w = MonomialDescriptor::word(vec![
            Factor { site: x, dagger: true },
            Factor { site: x, dagger: false },
        ]);
        assert!(w.is_normal_ordered());
    }

    #[test]
    fn empty_interaction_has_zero_c() {
        let w = chain(4);
        let c = c_phi(&Interaction::default(), 0.1, 0.2, &w, ZFamily::Balls { radius_cap: None }).unwrap();
        assert_eq!(c.value, 0.0);
    }

    #[test]
    fn single_term_singleton_matches_brute_force() {
        // Z' = {x}: value k^2 f D(Z) e^{-zeta d(gamma,Z) + zeta d(gamma,x) - xi d(Z,x)}
        let lat = LatticeParams::new(1.0, 1.0, 0, 0.0).unwrap();
        let sites: Vec<Site> = (0..5).map(|i| Site::new(0, i, 0)).collect();
        let w = Window::from_sites(lat, sites.iter().copied()).unwrap();
        let (x, y) = (sites[1], sites[2]);
        let f = 0.3;
        let inter = Interaction {
            terms: vec![InteractionTerm::new(vec![x, y], f, MonomialDescriptor::density_pair(x, y)).unwrap()],
            pair_potential: None,
        };
        let (zeta, xi) = (0.2, 0.5);
        let zp = sites[4];
        let mut brute = 0.0_f64;
        for g in &sites {
            let dgz = lat.distance(g, &x).min(lat.distance(g, &y));
            let dzz = lat.distance(&x, &zp).min(lat.distance(&y, &zp));
            let v = 4.0 * f * 4.0 * (-zeta * dgz + zeta * lat.distance(g, &zp) - xi * dzz).exp();
            brute = brute.max(v);
        }
        let ps: Vec<f64> = sites
            .iter()
            .map(|g| {
                point_sum(&inter, zeta, xi, &w, g, &zp).unwrap() * (zeta * lat.distance(g, &zp)).exp()
            })
            .collect();
        let best = ps.iter().copied().fold(0.0, f64::max);
        assert!((best - brute).abs() < 1e-14 * brute, "{best} vs {brute}");
        // the full supremum dominates this particular Z'
        let c = c_phi(&inter, zeta, xi, &w, ZFamily::AllSubsets).unwrap();
        assert!(c.value >= brute * (1.0 - 1e-14));
    }

    #[test]
    fn balls_contain_singletons_and_never_beat_all_subsets() {
        let w = chain(5);
        let inter = density_density(1.0, 1.0, &w).unwrap();
        let balls = c_phi(&inter, 0.125, 0.25, &w, ZFamily::Balls { radius_cap: None }).unwrap();
        let all = c_phi(&inter, 0.125, 0.25, &w, ZFamily::AllSubsets).unwrap();
        assert!(balls.value <= all.value * (1.0 + 1e-14));
        assert!(balls.value > 0.0);
        assert_eq!(all.family_size, 31);
    }

    #[test]
    fn monotone_in_xi() {
        let w = chain(6);
        let inter = density_density(1.0, 1.0, &w).unwrap();
        let mut prev = f64::INFINITY;
        for xi in [0.2, 0.4, 0.6, 0.8, 1.0] {
            let c = c_phi(&inter, 0.1, xi, &w, ZFamily::Balls { radius_cap: None }).unwrap().value;
            assert!(c <= prev * (1.0 + 1e-14));
            prev = c;
        }
    }

    #[test]
    fn pointwise_consequence() {
        let w = chain(6);
        let inter = density_density(1.0, 1.0, &w).unwrap();
        let (zeta, xi) = (0.125, 0.25);
        let c = c_phi(&inter, zeta, xi, &w, ZFamily::Balls { radius_cap: None }).unwrap().value;
        for g in w.sites() {
            for h in w.sites() {
                let lhs = point_sum(&inter, zeta, xi, &w, g, h).unwrap();
                assert!(lhs <= c * (-zeta * w.params.distance(g, h)).exp() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn rejects_bad_rates() {
        let w = chain(3);
        let i = density_density(1.0, 1.0, &w).unwrap();
        assert!(c_phi(&i, 0.3, 0.2, &w, ZFamily::AllSubsets).is_err());
        assert!(c_phi(&i, 0.0, 0.2, &w, ZFamily::AllSubsets).is_err());
    }

    #[test]
    fn velocity() {
        assert_eq!(lr_velocity(0.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(lr_velocity(0.5, 1.0, 1.0).unwrap(), 8.0);
        assert_eq!(lr_velocity(0.5, 2.0, 1.0).unwrap(), 16.0);
        assert!(lr_velocity(1.0, 0.5, 1.0).is_err());
        assert!(lr_velocity(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn decay_sum_selects() {
        let w = chain(4);
        let i = density_density(1.0, 1.0, &w).unwrap();
        let g = Site::new(0, 0, 0);
        let all = decay_sum(&i, 0.1, &w, &g, |_| true).unwrap();
        let none = decay_sum(&i, 0.1, &w, &g, |_| false).unwrap();
        assert_eq!(none, 0.0);
        assert!(all > 0.0);
    }
}
