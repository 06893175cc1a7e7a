//! Text formatting shared by all artifacts.

/// Formats a float with 15 significant digits in scientific notation.
///
/// Scientific notation keeps the digit count fixed regardless of magnitude,
/// which is what makes regression diffs stable.
pub fn sig15(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000000e0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    format!("{:.14e}", x)
}

/// Formats a site as the `[r,i,j]` triple used in every table.
pub fn site_triple(r: u32, i: i64, j: i64) -> String {
    format!("[{r},{i},{j}]")
}
