//! Sectioned `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored, `[name]` opens a section, every other
//! line is `key = value`. Sections and keys are checked against [`SCHEMA`] while
//! parsing so that typos are reported with their line number.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use frame_lr::lattice::Site;

/// Accepted sections and their keys.
pub const SCHEMA: &[(&str, &[&str])] = &[
    ("run", &["seed", "threads"]),
    ("lattice", &["alpha", "beta", "level_max", "radius", "sites"]),
    ("magnetic", &["ell_b", "eps_b", "trunc"]),
    ("certificate", &["p", "g", "lambda", "delta", "eps", "theta", "margin"]),
    ("bounds", &["radii", "margin"]),
    ("interaction", &["kind", "f0", "mu", "file"]),
    ("lr", &["t_max", "n_t", "times", "zeta", "xi", "g", "family", "negative_control_scale"]),
    ("converge", &["windows", "gamma", "t_max", "n_t", "times"]),
    ("wkernel", &["c1", "sigma1", "quadruples", "max_diam", "index_range"]),
    ("tolerances", &["w_rel", "car"]),
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    /// `section.key` when the problem belongs to one field.
    pub field: Option<String>,
    pub reason: String,
}

impl ConfigError {
    pub fn at(line: usize, reason: impl Into<String>) -> Self {
        ConfigError { line: Some(line), field: None, reason: reason.into() }
    }

    pub fn field(line: Option<usize>, field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError { line, field: Some(field.into()), reason: reason.into() }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        if let Some(k) = &self.field {
            write!(f, "{k}: ")?;
        }
        f.write_str(&self.reason)
    }
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
    /// Directory that relative paths in the file are resolved against.
    pub base_dir: PathBuf,
}

type Res<T> = std::result::Result<T, ConfigError>;

impl Config {
    pub fn parse(text: &str) -> Res<Config> {
        let mut cfg = Config::default();
        let mut current: Option<String> = None;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::at(line, format!("unterminated section header `{body}`")))?
                    .trim();
                if !SCHEMA.iter().any(|(s, _)| *s == name) {
                    return Err(ConfigError::at(line, format!("unknown section `[{name}]`")));
                }
                if cfg.sections.contains_key(name) {
                    return Err(ConfigError::at(line, format!("section `[{name}]` appears twice")));
                }
                cfg.sections.insert(name.to_string(), BTreeMap::new());
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| ConfigError::at(line, format!("expected `key = value`, got `{body}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = current
                .as_ref()
                .ok_or_else(|| ConfigError::at(line, format!("key `{key}` outside of any section")))?;
            let allowed = SCHEMA.iter().find(|(s, _)| s == sec).map(|(_, k)| *k).unwrap_or(&[]);
            let field = format!("{sec}.{key}");
            if !allowed.contains(&key) {
                return Err(ConfigError::field(Some(line), field, "unknown key"));
            }
            if value.is_empty() {
                return Err(ConfigError::field(Some(line), field, "empty value"));
            }
            let map = cfg.sections.get_mut(sec).expect("section inserted");
            if let Some(prev) = map.get(key) {
                return Err(ConfigError::field(Some(line), field, format!("duplicate key (first set on line {})", prev.line)));
            }
            map.insert(key.to_string(), Entry { value: value.to_string(), line });
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Res<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError { line: None, field: None, reason: format!("cannot read {}: {e}", path.display()) })?;
        let mut cfg = Config::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn entry(&self, sec: &str, key: &str) -> Option<&Entry> {
        self.sections.get(sec).and_then(|m| m.get(key))
    }

    pub fn has(&self, sec: &str, key: &str) -> bool {
        self.entry(sec, key).is_some()
    }

    pub fn has_section(&self, sec: &str) -> bool {
        self.sections.contains_key(sec)
    }

    /// Line of a key, for diagnostics raised after parsing.
    pub fn line(&self, sec: &str, key: &str) -> Option<usize> {
        self.entry(sec, key).map(|e| e.line)
    }

    /// Error attached to a field, carrying its line when the key is present.
    pub fn err(&self, sec: &str, key: &str, reason: impl Into<String>) -> ConfigError {
        ConfigError::field(self.line(sec, key), format!("{sec}.{key}"), reason)
    }

    fn parsed<T>(&self, sec: &str, key: &str, what: &str, f: impl Fn(&str) -> Option<T>) -> Res<Option<T>> {
        match self.entry(sec, key) {
            None => Ok(None),
            Some(e) => f(&e.value)
                .map(Some)
                .ok_or_else(|| self.err(sec, key, format!("expected {what}, got `{}`", e.value))),
        }
    }

    fn required<T>(&self, sec: &str, key: &str, v: Option<T>) -> Res<T> {
        v.ok_or_else(|| ConfigError::field(None, format!("{sec}.{key}"), "missing required key"))
    }

    pub fn str(&self, sec: &str, key: &str) -> Option<&str> {
        self.entry(sec, key).map(|e| e.value.as_str())
    }

    pub fn f64(&self, sec: &str, key: &str) -> Res<Option<f64>> {
        self.parsed(sec, key, "a finite number", parse_f64)
    }

    pub fn f64_or(&self, sec: &str, key: &str, default: f64) -> Res<f64> {
        Ok(self.f64(sec, key)?.unwrap_or(default))
    }

    pub fn req_f64(&self, sec: &str, key: &str) -> Res<f64> {
        let v = self.f64(sec, key)?;
        self.required(sec, key, v)
    }

    /// Strictly positive finite number.
    pub fn positive(&self, sec: &str, key: &str) -> Res<Option<f64>> {
        match self.f64(sec, key)? {
            Some(x) if x <= 0.0 => Err(self.err(sec, key, format!("must be positive, got {x}"))),
            v => Ok(v),
        }
    }

    pub fn usize(&self, sec: &str, key: &str) -> Res<Option<usize>> {
        self.parsed(sec, key, "a non-negative integer", |s| s.parse().ok())
    }

    pub fn u64(&self, sec: &str, key: &str) -> Res<Option<u64>> {
        self.parsed(sec, key, "a non-negative integer", |s| s.parse().ok())
    }

    pub fn u32(&self, sec: &str, key: &str) -> Res<Option<u32>> {
        self.parsed(sec, key, "a non-negative integer", |s| s.parse().ok())
    }

    pub fn f64_list(&self, sec: &str, key: &str) -> Res<Option<Vec<f64>>> {
        self.parsed(sec, key, "a whitespace separated list of finite numbers", |s| {
            s.split_whitespace().map(parse_f64).collect()
        })
    }

    pub fn sites(&self, sec: &str, key: &str) -> Res<Option<Vec<Site>>> {
        self.parsed(sec, key, "a whitespace separated list of [r,i,j] sites", parse_sites)
    }

    pub fn site(&self, sec: &str, key: &str) -> Res<Option<Site>> {
        self.parsed(sec, key, "one [r,i,j] site", |s| s.trim().parse().ok())
    }

    /// Site lists separated by `|`.
    pub fn site_groups(&self, sec: &str, key: &str) -> Res<Option<Vec<Vec<Site>>>> {
        self.parsed(sec, key, "site lists separated by `|`", |s| s.split('|').map(parse_sites).collect())
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_sites(s: &str) -> Option<Vec<Site>> {
    let v: Option<Vec<Site>> = s.split_whitespace().map(|t| t.parse().ok()).collect();
    v.filter(|v| !v.is_empty())
}
