//! Text serialization shared by the library and the command-line tool.
//!
//! Floats are written with 17 significant digits so that every value reads
//! back to the identical double.

use serde::Serialize;

use crate::conditions::ConditionReport;
use crate::distance::ProfileCurve;
use crate::spectral::SpectrumRow;

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Serialize)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

pub fn spectrum_csv(rows: &[SpectrumRow]) -> String {
    let mut out = String::from("index,eigenvalue,weight_at_start\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.index, fmt_f64(r.eigenvalue), fmt_f64(r.weight_at_start)));
    }
    out
}

pub fn curve_csv(curve: &ProfileCurve) -> String {
    let meta = &curve.meta;
    let mut out = format!("# family={}\n", meta.family);
    match meta.n {
        Some(n) => out.push_str(&format!("# n={n}\n")),
        None => out.push_str("# n=closed-form\n"),
    }
    if let Some(start) = meta.start {
        out.push_str(&format!("# start={start}\n"));
    }
    if let Some(conv) = meta.convention {
        out.push_str(&format!("# convention={conv}\n"));
    }
    if !meta.dropped.is_empty() {
        let dropped: Vec<String> = meta.dropped.iter().map(|&c| fmt_f64(c)).collect();
        out.push_str(&format!("# dropped_negative_time={}\n", dropped.join(" ")));
    }
    out.push_str("c,value\n");
    for (c, v) in curve.c_grid.iter().zip(&curve.values) {
        out.push_str(&format!("{},{}\n", fmt_f64(*c), fmt_f64(*v)));
    }
    out
}

pub fn report_csv(report: &ConditionReport) -> String {
    let mut out = format!(
        "# family={}\n# condition={}\n# top_k={}\n",
        report.family, report.condition, report.top_k
    );
    out.push('n');
    for &c in &report.c_grid {
        out.push(',');
        out.push_str(&fmt_f64(c));
    }
    out.push('\n');
    let push_row = |out: &mut String, head: &str, row: &mut dyn Iterator<Item = String>| {
        out.push_str(head);
        for cell in row {
            out.push(',');
            out.push_str(&cell);
        }
        out.push('\n');
    };
    for (n, row) in report.n_list.iter().zip(&report.values) {
        push_row(&mut out, &n.to_string(), &mut row.iter().map(|&v| fmt_f64(v)));
    }
    push_row(&mut out, "limsup", &mut report.limsup_estimate.iter().map(|&v| fmt_f64(v)));
    if let Some(reference) = &report.reference_bound {
        push_row(
            &mut out,
            "reference",
            &mut reference.iter().map(|v| v.map(fmt_f64).unwrap_or_default()),
        );
    }
    out
}

/// Parses a CSV cell written by [`fmt_f64`].
pub fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse().ok()
}
