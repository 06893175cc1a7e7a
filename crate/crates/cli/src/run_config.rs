//! Typed, validated view of a configuration file.
//!
//! Every section that is present is checked when the file is loaded, whichever
//! analysis is selected, so a bad value never waits for a particular subcommand.

use frame_lr::fock_sim::LrConfig;
use frame_lr::frame_analysis::{CertificateTuning, DEFAULT_MARGIN};
use frame_lr::interactions::{density_density, Interaction, WKernelParams, ZFamily};
use frame_lr::lattice::{LatticeParams, Site, Window};
use frame_lr::magnetic_frame::MagneticParams;

use crate::config::{Config, ConfigError};

/// Largest window accepted from a configuration.
pub const MAX_SITES: usize = 1600;
/// Largest number of time points.
pub const MAX_TIMES: usize = 10_000;

type Res<T> = std::result::Result<T, ConfigError>;

/// Maps a parameter error of the core library onto the config field it came from.
fn core_err(cfg: &Config, sec: &str, e: frame_lr::Error) -> ConfigError {
    match e {
        frame_lr::Error::InvalidParameter { name, reason } => {
            let key = name.to_ascii_lowercase();
            cfg.err(sec, &key, reason)
        }
        other => ConfigError::field(None, sec.to_string(), other.to_string()),
    }
}

#[derive(Debug, Clone)]
pub enum InteractionChoice {
    DensityDensity { f0: f64, mu: f64 },
    Terms(Interaction),
    Empty,
}

impl InteractionChoice {
    pub fn build(&self, window: &Window) -> frame_lr::Result<Interaction> {
        match self {
            InteractionChoice::DensityDensity { f0, mu } => density_density(*f0, *mu, window),
            InteractionChoice::Terms(i) => {
                i.check_window(window)?;
                Ok(i.clone())
            }
            InteractionChoice::Empty => Ok(Interaction::default()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LrSettings {
    pub times: Vec<f64>,
    pub g: f64,
    pub zeta: f64,
    pub xi: f64,
    pub family: ZFamily,
    pub negative_control_scale: f64,
}

impl LrSettings {
    pub fn config(&self, times: Vec<f64>) -> LrConfig {
        let mut c = LrConfig::new(self.g, self.zeta, self.xi, times);
        c.family = self.family;
        c
    }
}

#[derive(Debug, Clone)]
pub struct ConvergeSettings {
    pub windows: Vec<Window>,
    pub gamma: Site,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct WKernelSettings {
    pub params: WKernelParams,
    pub quadruples: usize,
    pub max_diam: f64,
    /// Points are drawn with `|i|, |j| <=` this index.
    pub index_range: i64,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: Option<usize>,
    pub window: Window,
    pub params: MagneticParams,
    pub cert_p: u32,
    pub tuning: CertificateTuning,
    pub margin: f64,
    /// Nested square windows for the frame-bound scan; empty means the main window only.
    pub bound_windows: Vec<Window>,
    pub bounds_margin: f64,
    pub interaction: InteractionChoice,
    pub lr: LrSettings,
    pub converge: Option<ConvergeSettings>,
    pub wkernel: WKernelSettings,
    pub w_rel: f64,
    pub car_tol: f64,
}

fn non_negative(cfg: &Config, sec: &str, key: &str, default: f64) -> Res<f64> {
    let x = cfg.f64_or(sec, key, default)?;
    if x < 0.0 {
        return Err(cfg.err(sec, key, format!("must be non-negative, got {x}")));
    }
    Ok(x)
}

fn square_size(lat: &LatticeParams) -> f64 {
    let n = (2.0 * (lat.radius + 1e-12).floor() + 1.0).powi(2);
    n * (lat.level_max as f64 + 1.0)
}

fn times(cfg: &Config, sec: &str, t_max: f64, n_t: usize) -> Res<Vec<f64>> {
    if let Some(ts) = cfg.f64_list(sec, "times")? {
        if cfg.has(sec, "t_max") || cfg.has(sec, "n_t") {
            return Err(cfg.err(sec, "times", "give either `times` or `t_max`/`n_t`, not both"));
        }
        if ts.len() > MAX_TIMES {
            return Err(cfg.err(sec, "times", format!("at most {MAX_TIMES} times")));
        }
        if ts.iter().any(|&t| t < 0.0) {
            return Err(cfg.err(sec, "times", "times must be non-negative"));
        }
        if ts.windows(2).any(|w| w[1] < w[0]) {
            return Err(cfg.err(sec, "times", "time grid must be sorted ascending"));
        }
        return Ok(ts);
    }
    let t_max = non_negative(cfg, sec, "t_max", t_max)?;
    let n = cfg.usize(sec, "n_t")?.unwrap_or(n_t);
    if n == 0 || n > MAX_TIMES {
        return Err(cfg.err(sec, "n_t", format!("must lie in 1..={MAX_TIMES}, got {n}")));
    }
    Ok(LrConfig::uniform_times(t_max, n))
}

impl RunConfig {
    pub fn from_config(cfg: &Config) -> Res<RunConfig> {
        let seed = cfg.u64("run", "seed")?.unwrap_or(0);
        let threads = cfg.usize("run", "threads")?;
        if threads == Some(0) {
            return Err(cfg.err("run", "threads", "must be at least 1"));
        }

        // lattice
        let alpha = cfg.req_f64("lattice", "alpha")?;
        let beta = cfg.f64_or("lattice", "beta", alpha)?;
        let level_max = cfg.u32("lattice", "level_max")?.unwrap_or(0);
        if level_max > 20 {
            return Err(cfg.err("lattice", "level_max", "at most 20 Landau levels are supported"));
        }
        let radius = non_negative(cfg, "lattice", "radius", 0.0)?;
        let lat = LatticeParams::new(alpha, beta, level_max, radius).map_err(|e| core_err(cfg, "lattice", e))?;
        let window = match (cfg.sites("lattice", "sites")?, cfg.has("lattice", "radius")) {
            (Some(_), true) => return Err(cfg.err("lattice", "sites", "give either `sites` or `radius`, not both")),
            (None, false) => {
                return Err(ConfigError::field(None, "lattice.radius", "missing required key (or give lattice.sites)"))
            }
            (Some(sites), false) => {
                if sites.len() > MAX_SITES {
                    return Err(cfg.err("lattice", "sites", format!("at most {MAX_SITES} sites")));
                }
                Window::from_sites(lat, sites).map_err(|e| core_err(cfg, "lattice", e))?
            }
            (None, true) => {
                if square_size(&lat) > MAX_SITES as f64 {
                    return Err(cfg.err("lattice", "radius", format!("window would exceed {MAX_SITES} sites")));
                }
                Window::square(lat).map_err(|e| core_err(cfg, "lattice", e))?
            }
        };

        // magnetic
        let ell_b = cfg.req_f64("magnetic", "ell_b")?;
        let mut params = match cfg.usize("magnetic", "trunc")? {
            None => MagneticParams::for_window(&window, ell_b),
            Some(m) if m > 4000 => return Err(cfg.err("magnetic", "trunc", "at most 4000 angular modes")),
            Some(m) => MagneticParams::new(ell_b, lat.alpha, lat.beta, m)
                .and_then(|p| p.check_truncation(window.max_abs_position()).map(|_| p)),
        }
        .map_err(|e| match e {
            frame_lr::Error::Truncation { .. } => cfg.err("magnetic", "trunc", e.to_string()),
            e => core_err(cfg, "magnetic", e),
        })?;
        if let Some(e) = cfg.positive("magnetic", "eps_b")? {
            params = params.with_eps_b(e).map_err(|e| core_err(cfg, "magnetic", e))?;
        }

        // certificate
        let cert_p = cfg.u32("certificate", "p")?.unwrap_or(1);
        if !(1..=8).contains(&cert_p) {
            return Err(cfg.err("certificate", "p", format!("must lie in 1..=8, got {cert_p}")));
        }
        let mut tuning = CertificateTuning::defaults(
            cfg.f64_or("certificate", "g", 1.0)?,
            cfg.positive("certificate", "lambda")?.unwrap_or(params.varpi()),
        );
        let base = CertificateTuning::defaults(tuning.g, tuning.lambda);
        tuning.delta = cfg.positive("certificate", "delta")?.unwrap_or(base.delta);
        tuning.eps = cfg.positive("certificate", "eps")?.unwrap_or(base.eps);
        tuning.theta = cfg.positive("certificate", "theta")?.unwrap_or((tuning.lambda - tuning.delta) / 2.0);
        tuning.validate().map_err(|e| core_err(cfg, "certificate", e))?;
        let margin = non_negative(cfg, "certificate", "margin", DEFAULT_MARGIN)?;

        // bounds
        let bounds_margin = non_negative(cfg, "bounds", "margin", DEFAULT_MARGIN)?;
        let mut bound_windows = Vec::new();
        if let Some(radii) = cfg.f64_list("bounds", "radii")? {
            if radii.iter().any(|&r| r < 0.0) || radii.windows(2).any(|w| w[1] <= w[0]) {
                return Err(cfg.err("bounds", "radii", "radii must be non-negative and strictly increasing"));
            }
            for r in radii {
                let l = LatticeParams { radius: r, ..lat };
                if square_size(&l) > MAX_SITES as f64 {
                    return Err(cfg.err("bounds", "radii", format!("radius {r} exceeds {MAX_SITES} sites")));
                }
                bound_windows.push(Window::square(l).map_err(|e| core_err(cfg, "bounds", e))?);
            }
        }

        // interaction
        let interaction = match cfg.str("interaction", "kind").unwrap_or("density_density") {
            "density_density" => {
                if cfg.has("interaction", "file") {
                    return Err(cfg.err("interaction", "file", "only used with kind = file"));
                }
                let f0 = cfg.f64_or("interaction", "f0", 1.0)?;
                let mu = cfg.f64_or("interaction", "mu", 1.0)?;
                if f0 < 0.0 {
                    return Err(cfg.err("interaction", "f0", format!("must be non-negative, got {f0}")));
                }
                if mu <= 0.0 {
                    return Err(cfg.err("interaction", "mu", format!("must be positive, got {mu}")));
                }
                InteractionChoice::DensityDensity { f0, mu }
            }
            "file" => {
                for k in ["f0", "mu"] {
                    if cfg.has("interaction", k) {
                        return Err(cfg.err("interaction", k, "not used with kind = file"));
                    }
                }
                let name = cfg
                    .str("interaction", "file")
                    .ok_or_else(|| ConfigError::field(None, "interaction.file", "missing required key"))?;
                let path = cfg.base_dir.join(name);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| cfg.err("interaction", "file", format!("cannot read {}: {e}", path.display())))?;
                let inter = Interaction::from_text(&text)
                    .map_err(|e| cfg.err("interaction", "file", format!("{}: {e}", path.display())))?;
                InteractionChoice::Terms(inter)
            }
            "none" => InteractionChoice::Empty,
            other => {
                return Err(cfg.err(
                    "interaction",
                    "kind",
                    format!("expected density_density, file or none, got `{other}`"),
                ))
            }
        };

        // lr
        let zeta = cfg.positive("lr", "zeta")?.unwrap_or(params.varpi() / 2.0);
        let xi = cfg.positive("lr", "xi")?.unwrap_or(params.varpi());
        if xi <= zeta {
            return Err(cfg.err("lr", "xi", format!("must exceed zeta = {zeta}, got {xi}")));
        }
        let g = cfg.f64_or("lr", "g", 1.0)?;
        if g < 1.0 {
            return Err(cfg.err("lr", "g", format!("must be at least 1, got {g}")));
        }
        let family = match cfg.str("lr", "family").unwrap_or("balls") {
            "balls" => ZFamily::Balls { radius_cap: None },
            "all" => ZFamily::AllSubsets,
            other => return Err(cfg.err("lr", "family", format!("expected balls or all, got `{other}`"))),
        };
        let negative_control_scale = cfg.positive("lr", "negative_control_scale")?.unwrap_or(0.01);
        let lr = LrSettings {
            times: times(cfg, "lr", 2.0, 21)?,
            g,
            zeta,
            xi,
            family,
            negative_control_scale,
        };

        // converge
        let converge = if cfg.has_section("converge") {
            let groups = cfg
                .site_groups("converge", "windows")?
                .ok_or_else(|| ConfigError::field(None, "converge.windows", "missing required key"))?;
            if groups.len() < 2 {
                return Err(cfg.err("converge", "windows", "need at least two nested windows"));
            }
            if groups.iter().any(|g| g.len() > MAX_SITES) {
                return Err(cfg.err("converge", "windows", format!("at most {MAX_SITES} sites per window")));
            }
            let windows = groups
                .into_iter()
                .map(|g| Window::from_sites(lat, g))
                .collect::<frame_lr::Result<Vec<_>>>()
                .map_err(|e| cfg.err("converge", "windows", e.to_string()))?;
            let gamma = cfg
                .site("converge", "gamma")?
                .ok_or_else(|| ConfigError::field(None, "converge.gamma", "missing required key"))?;
            Some(ConvergeSettings {
                windows,
                gamma,
                times: times(cfg, "converge", 2.0, 9)?,
            })
        } else {
            None
        };

        // wkernel
        let wparams = WKernelParams {
            c1: non_negative(cfg, "wkernel", "c1", 1.0)?,
            sigma1: cfg.positive("wkernel", "sigma1")?.unwrap_or(1.0),
        };
        let quadruples = cfg.usize("wkernel", "quadruples")?.unwrap_or(30);
        if quadruples > 10_000 {
            return Err(cfg.err("wkernel", "quadruples", "at most 10000"));
        }
        let index_range = cfg.usize("wkernel", "index_range")?.unwrap_or(2);
        if index_range > 50 {
            return Err(cfg.err("wkernel", "index_range", "at most 50"));
        }
        let wkernel = WKernelSettings {
            params: wparams,
            quadruples,
            max_diam: cfg.positive("wkernel", "max_diam")?.unwrap_or(8.0 * ell_b),
            index_range: index_range as i64,
        };

        Ok(RunConfig {
            seed,
            threads,
            window,
            params,
            cert_p,
            tuning,
            margin,
            bound_windows,
            bounds_margin,
            interaction,
            lr,
            converge,
            wkernel,
            w_rel: cfg.positive("tolerances", "w_rel")?.unwrap_or(frame_lr::interactions::wkernel::W_REL_TOL),
            car_tol: cfg.positive("tolerances", "car")?.unwrap_or(1e-12),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Res<RunConfig> {
        RunConfig::from_config(&Config::parse(text)?)
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let rc = load("[lattice]\nalpha = 2\nsites = [0,0,0] [0,1,0]\n[magnetic]\nell_b = 1\n").unwrap();
        assert_eq!(rc.window.len(), 2);
        assert_eq!(rc.lr.zeta, 0.125);
        assert_eq!(rc.lr.times.len(), 21);
        assert_eq!(rc.tuning.lambda, 0.25);
        assert!(rc.converge.is_none());
    }

    #[test]
    fn validation_errors_name_the_field() {
        let base = "[lattice]\nalpha = 1\nradius = 1\n[magnetic]\nell_b = 1\n";
        let e = load(&format!("{base}[lr]\nzeta = 0.3\nxi = 0.2\n")).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("lr.xi"));
        let e = load(&format!("{base}[lr]\ntimes = 0 1 0.5\n")).unwrap_err();
        assert_eq!((e.field.as_deref(), e.line), (Some("lr.times"), Some(7)));
        let e = load(&format!("{base}[certificate]\ntheta = 5\n")).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("certificate.theta"));
        let e = load("[lattice]\nalpha = 1\nradius = 100\n[magnetic]\nell_b = 1\n").unwrap_err();
        assert_eq!(e.field.as_deref(), Some("lattice.radius"));
        let e = load("[lattice]\nalpha = 1\nradius = 1\n").unwrap_err();
        assert_eq!(e.field.as_deref(), Some("magnetic.ell_b"));
        let e = load(&format!("{base}[converge]\nwindows = [0,0,0] | [0,0,0] [0,1,0]\n")).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("converge.gamma"));
    }
}
