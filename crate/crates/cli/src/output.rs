//! Artifact writers. Everything here is deterministic: fixed key order, floats
//! through `sig15`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use frame_lr::format::sig15;
use frame_lr::lattice::Window;
use frame_lr::linalg::CMatrix;

use crate::CliError;

/// Flat JSON object with insertion-ordered keys.
#[derive(Debug, Clone, Default)]
pub struct Json(Vec<(String, String)>);

impl Json {
    pub fn new() -> Self {
        Json::default()
    }

    pub fn num(mut self, key: &str, x: f64) -> Self {
        let v = if x.is_finite() { sig15(x) } else { format!("\"{x}\"") };
        self.0.push((key.into(), v));
        self
    }

    pub fn int(mut self, key: &str, x: impl Into<i128>) -> Self {
        self.0.push((key.into(), x.into().to_string()));
        self
    }

    pub fn str(mut self, key: &str, s: &str) -> Self {
        self.0.push((key.into(), quote(s)));
        self
    }

    pub fn bool(mut self, key: &str, b: bool) -> Self {
        self.0.push((key.into(), b.to_string()));
        self
    }

    pub fn nums(mut self, key: &str, xs: &[f64]) -> Self {
        let v: Vec<String> = xs.iter().map(|&x| sig15(x)).collect();
        self.0.push((key.into(), format!("[{}]", v.join(", "))));
        self
    }

    pub fn render(&self) -> String {
        let body: Vec<String> = self.0.iter().map(|(k, v)| format!("  {}: {v}", quote(k))).collect();
        format!("{{\n{}\n}}\n", body.join(",\n"))
    }
}

pub fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// FNV-1a over the lattice spacings and the site list; identifies the window a
/// matrix file belongs to.
pub fn window_hash(w: &Window) -> String {
    let mut text = format!("{} {} ", sig15(w.params.alpha), sig15(w.params.beta));
    for s in w.sites() {
        text.push_str(&s.to_string());
    }
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Header `n hash`, then the entries row-major as `re im`.
pub fn matrix_text(m: &CMatrix, hash: &str) -> String {
    let mut s = format!("{} {hash}\n", m.nrows());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            let _ = writeln!(s, "{} {}", sig15(z.re), sig15(z.im));
        }
    }
    s
}

/// Output directory for one run.
pub struct OutDir(pub PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))?;
        Ok(OutDir(path.to_path_buf()))
    }

    pub fn write(&self, name: &str, content: &str) -> Result<(), CliError> {
        let p = self.0.join(name);
        std::fs::write(&p, content).map_err(|e| CliError::io(&p, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use frame_lr::lattice::{LatticeParams, Site};
    use frame_lr::Complex64;

    #[test]
    fn json_layout() {
        let j = Json::new().str("a", "x\"y").num("b", 0.5).int("c", 3u32).bool("d", true).nums("e", &[1.0]);
        assert_eq!(
            j.render(),
            "{\n  \"a\": \"x\\\"y\",\n  \"b\": 5.00000000000000e-1,\n  \"c\": 3,\n  \"d\": true,\n  \"e\": [1.00000000000000e0]\n}\n"
        );
        assert!(Json::new().num("n", f64::INFINITY).render().contains("\"inf\""));
    }

    #[test]
    fn matrix_layout() {
        let lat = LatticeParams::new(1.0, 1.0, 0, 0.0).unwrap();
        let w = Window::from_sites(lat, [Site::new(0, 0, 0)]).unwrap();
        let h = window_hash(&w);
        assert_eq!(h.len(), 16);
        let w2 = Window::from_sites(lat, [Site::new(0, 1, 0)]).unwrap();
        assert_ne!(h, window_hash(&w2));
        let m = CMatrix::from_element(1, 1, Complex64::new(1.0, -2.0));
        assert_eq!(matrix_text(&m, &h), format!("1 {h}\n1.00000000000000e0 -2.00000000000000e0\n"));
    }
}
