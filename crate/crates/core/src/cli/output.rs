//! CSV and SVG emission.
//!
//! Floats are written with nine significant digits; every header carries
//! its unit.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::analytic::Theorem1Bounds;
use crate::error::{Error, Result};
use crate::model::{LogBase, SystemParams};
use crate::montecarlo::CampaignReport;
use crate::schemes::Scheme;
use crate::validation::CriterionReport;

use super::sweep::{SweepAxis, SweepTable};

pub fn fmt_num(v: f64) -> String {
    format!("{v:.8e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

fn fmt_axis(axis: SweepAxis, v: f64) -> String {
    match axis {
        SweepAxis::PowerDbm => fmt_num(v),
        SweepAxis::Elements | SweepAxis::Pairs => format!("{}", v as u64),
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("<csv output>", io),
        other => Error::Contract(format!("csv: {other:?}")),
    }
}

fn unit_cols(base: LogBase, names: &[&str]) -> Vec<String> {
    names.iter().map(|n| format!("{n}_{}", base.unit())).collect()
}

pub fn sweep_header(table: &SweepTable) -> Vec<String> {
    let mut h = vec![table.axis.header().to_owned(), "scheme".to_owned()];
    h.extend(unit_cols(table.log_base, &["rate_s1", "rate_s2", "sum", "ci95"]));
    if table.include_analytic {
        h.extend(unit_cols(table.log_base, &["analytic_bound_s1", "analytic_bound_s2"]));
    }
    if table.include_reference {
        h.extend(unit_cols(table.log_base, &["reference"]));
    }
    h
}

pub fn write_sweep_csv<W: Write>(table: &SweepTable, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(sweep_header(table)).map_err(csv_err)?;
    for r in &table.rows {
        let mut rec = vec![
            fmt_axis(table.axis, r.axis_value),
            r.scheme.to_string(),
            fmt_num(r.rate_s1),
            fmt_num(r.rate_s2),
            fmt_num(r.sum),
            fmt_num(r.ci95),
        ];
        if table.include_analytic {
            rec.push(fmt_opt(r.bound_s1));
            rec.push(fmt_opt(r.bound_s2));
        }
        if table.include_reference {
            rec.push(fmt_opt(r.reference));
        }
        out.write_record(rec).map_err(csv_err)?;
    }
    out.flush().map_err(|e| Error::io("<csv output>", e))
}

pub fn write_campaign_csv<W: Write>(report: &CampaignReport, log_base: LogBase, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    let mut header = vec!["scheme".to_owned(), "quantity".to_owned(), "estimator".to_owned()];
    header.extend(unit_cols(log_base, &["mean", "ci95"]));
    header.push("trials_count".to_owned());
    out.write_record(header).map_err(csv_err)?;
    for e in &report.estimates {
        out.write_record([
            e.scheme.to_string(),
            e.quantity.to_string(),
            e.estimator.to_string(),
            fmt_num(e.mean),
            fmt_num(e.ci95_halfwidth),
            e.trials.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush().map_err(|e| Error::io("<csv output>", e))
}

pub fn write_analytic_csv<W: Write>(params: &SystemParams, b: &Theorem1Bounds, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    let mut header = vec![
        "power_dbm".to_owned(),
        "elements_count".to_owned(),
        "pairs_count".to_owned(),
    ];
    header.extend(unit_cols(
        params.log_base,
        &[
            "bound_s1",
            "bound_s2",
            "bound_sum",
            "q_m_ab",
            "q_m_ba",
            "q_e1",
            "j1",
            "j2",
        ],
    ));
    out.write_record(header).map_err(csv_err)?;
    let u = params.log_base.from_nats();
    let mut rec = vec![
        fmt_num(params.power_dbm),
        params.elements.to_string(),
        params.pairs.to_string(),
    ];
    rec.extend([b.r_s1, b.r_s2, b.sum(), b.q_m_ab, b.q_m_ba, b.q_e1, b.j1, b.j2].map(|v| fmt_num(v * u)));
    out.write_record(rec).map_err(csv_err)?;
    out.flush().map_err(|e| Error::io("<csv output>", e))
}

pub fn write_validation_csv<W: Write>(reports: &[CriterionReport], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["id", "name", "measured", "relation", "threshold", "passed"])
        .map_err(csv_err)?;
    for r in reports {
        out.write_record([
            r.id.to_string(),
            r.name.to_owned(),
            fmt_num(r.measured),
            r.relation.symbol().to_owned(),
            fmt_num(r.threshold),
            r.passed.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush().map_err(|e| Error::io("<csv output>", e))
}

/// Creates `path` and hands a buffered writer to `f`.
pub fn write_file<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<()>,
{
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    f(&mut w).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Label, stroke color, dash pattern and points of one polyline.
type Series<'a> = (String, &'a str, &'a str, Vec<(f64, f64)>);

const COLORS: [(Scheme, &str); 4] = [
    (Scheme::Proposed, "#d62728"),
    (Scheme::OnewayJam, "#1f77b4"),
    (Scheme::FdRelay, "#2ca02c"),
    (Scheme::HdRelay, "#9467bd"),
];

/// Line chart of the sum rate of every scheme, plus the bound and the
/// reference curve when present.
pub fn sweep_svg(table: &SweepTable, title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const L: f64 = 70.0;
    const R: f64 = 170.0;
    const T: f64 = 40.0;
    const B: f64 = 50.0;
    let log_x = table.axis != SweepAxis::PowerDbm;
    let tx = |v: f64| if log_x { v.log2() } else { v };

    let mut series: Vec<Series> = Vec::new();
    for (scheme, color) in COLORS {
        let pts: Vec<_> = table
            .rows
            .iter()
            .filter(|r| r.scheme == scheme)
            .map(|r| (r.axis_value, r.sum))
            .collect();
        if !pts.is_empty() {
            series.push((scheme.to_string(), color, "", pts));
        }
    }
    let proposed = || table.rows.iter().filter(|r| r.scheme == Scheme::Proposed);
    let bound: Vec<_> = proposed()
        .filter_map(|r| Some((r.axis_value, r.bound_s1? + r.bound_s2?)))
        .collect();
    if !bound.is_empty() {
        series.push(("lower bound".into(), "#000000", "6,4", bound));
    }
    let reference: Vec<_> = proposed().filter_map(|r| Some((r.axis_value, r.reference?))).collect();
    if !reference.is_empty() {
        series.push(("reference slope".into(), "#7f7f7f", "2,3", reference));
    }

    let all = series.iter().flat_map(|s| s.3.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(tx(x));
        x1 = x1.max(tx(x));
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| L + (tx(x) - x0) / (x1 - x0) * (W - L - R);
    let py = |y: f64| H - B - (y - y0) / (y1 - y0) * (H - T - B);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{title}</text>"#,
        (W - R + L) / 2.0
    );
    let _ = writeln!(
        s,
        r#"<path d="M{L} {T} L{L} {yb} L{xr} {yb}" stroke="black" fill="none"/>"#,
        yb = H - B,
        xr = W - R
    );
    let mut xs: Vec<f64> = table.rows.iter().map(|r| r.axis_value).collect();
    xs.dedup();
    for x in xs {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            px(x),
            H - B + 16.0,
            x
        );
    }
    for i in 0..=4 {
        let y = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{:.3}</text>"#,
            L - 6.0,
            py(y) + 4.0,
            y
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (W - R + L) / 2.0,
        H - 12.0,
        table.axis.header()
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(16 {}) rotate(-90)" text-anchor="middle">sum rate ({})</text>"#,
        (H - B + T) / 2.0,
        table.log_base.unit()
    );
    for (i, (name, color, dash, pts)) in series.iter().enumerate() {
        let d: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(r#" stroke-dasharray="{dash}""#)
        };
        let _ = writeln!(
            s,
            r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="2"{dash_attr}/>"#,
            d.join(" ")
        );
        let ly = T + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{a}" y1="{ly}" x2="{b}" y2="{ly}" stroke="{color}" stroke-width="2"{dash_attr}/><text x="{c}" y="{ty}">{name}</text>"#,
            a = W - R + 15.0,
            b = W - R + 40.0,
            c = W - R + 46.0,
            ty = ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::sweep::SweepRow;

    fn table() -> SweepTable {
        let row = |x: f64, scheme, sum: f64, bound: bool| SweepRow {
            axis_value: x,
            scheme,
            rate_s1: sum / 2.0,
            rate_s2: sum / 2.0,
            sum,
            ci95: 0.01,
            bound_s1: bound.then_some(sum / 2.1),
            bound_s2: bound.then_some(sum / 2.1),
            reference: bound.then_some(sum),
        };
        SweepTable {
            axis: SweepAxis::Elements,
            log_base: LogBase::Bits,
            include_analytic: true,
            include_reference: true,
            rows: vec![
                row(16.0, Scheme::Proposed, 1.0, true),
                row(16.0, Scheme::HdRelay, 0.5, false),
                row(32.0, Scheme::Proposed, 1.0 / 3.0, true),
                row(32.0, Scheme::HdRelay, 0.6, false),
            ],
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_sweep_csv(&table(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "elements_count,scheme,rate_s1_bits,rate_s2_bits,sum_bits,ci95_bits,analytic_bound_s1_bits,analytic_bound_s2_bits,reference_bits"
        );
        assert_eq!(lines.len(), 5);
        assert!(lines[2].starts_with("16,hd_relay,2.50000000e-1,"));
        assert!(lines[2].ends_with(",,,"));
        assert!(lines[3].contains("3.33333333e-1"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn header_depends_only_on_flags() {
        let mut t = table();
        t.include_analytic = false;
        t.include_reference = false;
        t.log_base = LogBase::Nats;
        assert_eq!(
            sweep_header(&t),
            [
                "elements_count",
                "scheme",
                "rate_s1_nats",
                "rate_s2_nats",
                "sum_nats",
                "ci95_nats"
            ]
        );
        t.rows.clear();
        assert_eq!(sweep_header(&t).len(), 6);
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_num(1.0), "1.00000000e0");
        assert_eq!(fmt_num(123456789.123), "1.23456789e8");
    }

    #[test]
    fn svg_is_well_formed() {
        let svg = sweep_svg(&table(), "test");
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert!(svg.contains("lower bound"));
    }
}
