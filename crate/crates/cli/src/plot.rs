//! Long-format plot data from report CSVs.
//!
//! Every report becomes rows `source,series,x,y,bound`; the report kind is
//! recognised from its header. Numbers are re-emitted through `sig15`, so running
//! the conversion twice gives the same bytes.

use std::fmt::Write as _;

use frame_lr::format::sig15;

pub const PLOT_HEADER: &str = "source,series,x,y,bound";

/// How one report kind maps onto plot columns: series columns joined by `|`, then
/// x, y and bound column names. A y of `re+im` plots the modulus of both columns.
struct Layout {
    header: &'static str,
    series: &'static [&'static str],
    x: &'static str,
    y: &'static str,
    bound: &'static str,
}

const LAYOUTS: &[Layout] = &[
    Layout {
        header: "t,gamma,gamma_prime,d,F,bound,ratio",
        series: &["gamma", "gamma_prime"],
        x: "t",
        y: "F",
        bound: "bound",
    },
    Layout {
        header: "t,small,large,norm_diff,bound",
        series: &["small", "large"],
        x: "t",
        y: "norm_diff",
        bound: "bound",
    },
    Layout {
        header: "site_a,site_b,d,abs,bound,ratio",
        series: &["site_a"],
        x: "d",
        y: "abs",
        bound: "bound",
    },
    Layout {
        header: "site_a,site_b,d,re,im,bound,ratio",
        series: &["site_a"],
        x: "d",
        y: "re+im",
        bound: "bound",
    },
    Layout {
        header: "g1,g2,g3,g4,diam,re,im,abs,bound,ratio,rel_error",
        series: &["g1"],
        x: "diam",
        y: "abs",
        bound: "bound",
    },
    Layout {
        header: "radius,n_sites,a_est,b_est,gram_min_retained,numerical_rank,inner_modes,ill_conditioned",
        series: &["radius"],
        x: "n_sites",
        y: "a_est",
        bound: "b_est",
    },
];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub source: String,
    pub series: String,
    pub x: f64,
    pub y: f64,
    pub bound: f64,
}

/// Converts one report; an empty file or a header-only report gives no rows.
pub fn plot_rows(source: &str, text: &str) -> Result<Vec<PlotRow>, String> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().map_err(|e| e.to_string())?.iter().map(str::to_string).collect();
    let joined = header.join(",");
    let layout = LAYOUTS
        .iter()
        .find(|l| l.header == joined)
        .ok_or_else(|| format!("unrecognised report header `{joined}`"))?;
    let col = |name: &str| header.iter().position(|h| h == name).expect("layout columns exist");
    let num = |rec: &csv::StringRecord, name: &str, line: u64| -> Result<f64, String> {
        let v = rec.get(col(name)).unwrap_or("");
        v.parse::<f64>().map_err(|_| format!("line {line}: column {name} is not a number: `{v}`"))
    };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let line = rec.position().map_or(0, |p| p.line());
        let series: Vec<&str> = layout.series.iter().map(|s| rec.get(col(s)).unwrap_or("")).collect();
        let y = match layout.y.split_once('+') {
            Some((re, im)) => num(&rec, re, line)?.hypot(num(&rec, im, line)?),
            None => num(&rec, layout.y, line)?,
        };
        rows.push(PlotRow {
            source: source.to_string(),
            series: series.join("|"),
            x: num(&rec, layout.x, line)?,
            y,
            bound: num(&rec, layout.bound, line)?,
        });
    }
    Ok(rows)
}

pub fn plot_csv(rows: &[PlotRow]) -> String {
    let mut s = format!("{PLOT_HEADER}\n");
    for r in rows {
        let _ = writeln!(s, "{},\"{}\",{},{},{}", r.source, r.series, sig15(r.x), sig15(r.y), sig15(r.bound));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const LR: &str = "t,gamma,gamma_prime,d,F,bound,ratio\n\
        0,\"[0,0,0]\",\"[0,1,0]\",1,0.5,1,0.5\n\
        1,\"[0,0,0]\",\"[0,1,0]\",1,0.7,2,0.35\n";

    #[test]
    fn one_row_per_time_and_pair() {
        let rows = plot_rows("lr", LR).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].series, "[0,0,0]|[0,1,0]");
        assert_eq!((rows[1].x, rows[1].y, rows[1].bound), (1.0, 0.7, 2.0));
    }

    #[test]
    fn empty_report_gives_header_only() {
        assert_eq!(plot_csv(&plot_rows("lr", "").unwrap()), format!("{PLOT_HEADER}\n"));
        let header_only = "t,gamma,gamma_prime,d,F,bound,ratio\n";
        assert_eq!(plot_csv(&plot_rows("lr", header_only).unwrap()), format!("{PLOT_HEADER}\n"));
    }

    #[test]
    fn idempotent() {
        let a = plot_csv(&plot_rows("lr", LR).unwrap());
        let b = plot_csv(&plot_rows("lr", LR).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn modulus_and_errors() {
        let landau = "site_a,site_b,d,re,im,bound,ratio\n\"[0,0,0]\",\"[0,0,0]\",0,3,4,10,0.5\n";
        assert_eq!(plot_rows("landau", landau).unwrap()[0].y, 5.0);
        assert!(plot_rows("x", "a,b\n1,2\n").unwrap_err().contains("unrecognised"));
        let bad = "t,small,large,norm_diff,bound\n0,4,6,oops,1\n";
        assert!(plot_rows("c", bad).unwrap_err().contains("norm_diff"));
    }
}
