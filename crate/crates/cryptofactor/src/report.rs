//! Text outputs: t-statistic tables, index series, series dumps, summaries,
//! and the split-table input format.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use cryptofactor_core::regress::SixNumberSummary;
use cryptofactor_core::{FactorReturnSeries, FactorSpec, IndexSeries, Split, SplitTable, TStatReport};

use crate::error::{read_text, Error, Result};
use crate::history::parse_date;

/// Two-decimal rounding printed the way R prints numbers: `-34.2`, `1`, `-3`.
pub fn round2(x: f64) -> String {
    let r = (x * 100.0).round() / 100.0;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

pub fn tstat_header(spec: &FactorSpec) -> String {
    let mut out = String::from("d_vol\td_hlv");
    for name in spec.names() {
        write!(out, "\tt-stat:{name}").unwrap();
    }
    out
}

pub fn tstat_row(d_v: usize, d_hlv: usize, report: &TStatReport) -> String {
    let mut out = format!("{d_v}\t{d_hlv}");
    for e in report.entries() {
        write!(out, "\t{}", round2(e.t)).unwrap();
    }
    out
}

/// Mean, sd, full-precision t and annotation per factor.
pub fn report_dump(report: &TStatReport) -> String {
    let mut out = String::from("factor\tmean\tsd\tt\tdays\tannotation\n");
    for e in report.entries() {
        writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}", e.factor, e.mean, e.sd, e.t, e.days, e.annotation()).unwrap();
    }
    out
}

/// Daily factor returns at full precision, most recent date first.
pub fn series_dump(series: &FactorReturnSeries) -> String {
    let mut out = String::from("date");
    for f in series.factors() {
        write!(out, "\t{f}").unwrap();
    }
    out.push('\n');
    for (date, row) in series.dates().iter().zip(series.rows()) {
        write!(out, "{date}").unwrap();
        for v in row {
            write!(out, "\t{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// `day<TAB>value` rows, day counted from 1 at the oldest date.
pub fn emit_series(series: &IndexSeries, sink: &mut dyn Write) -> std::io::Result<()> {
    writeln!(sink, "day\tvalue")?;
    for (k, v) in series.values.iter().enumerate() {
        writeln!(sink, "{}\t{v}", k + 1)?;
    }
    Ok(())
}

/// Minimal static line chart of an index series.
pub fn render_svg(series: &IndexSeries) -> String {
    const W: f64 = 640.0;
    const H: f64 = 360.0;
    const PAD: f64 = 20.0;
    let (lo, hi) = series
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let n = series.values.len().max(2) - 1;
    let points: Vec<String> = series
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let x = PAD + (W - 2.0 * PAD) * k as f64 / n as f64;
            let y = H - PAD - (H - 2.0 * PAD) * (v - lo) / span;
            format!("{x:.2},{y:.2}")
        })
        .collect();
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <title>{} index</title>\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"{}\"/>\n\
         </svg>\n",
        series.kind.name(),
        points.join(" ")
    )
}

/// Labels on one line, values on the next.
pub fn six_number_text(summary: &SixNumberSummary) -> String {
    let values: Vec<String> = summary.values().iter().map(|v| v.to_string()).collect();
    format!("{}\n{}\n", SixNumberSummary::LABELS.join("\t"), values.join("\t"))
}

/// Tab-separated `slug date ratio` lines; `#` comments and blank lines are
/// ignored, as is a leading `slug` header.
pub fn read_splits(path: &Path) -> Result<SplitTable> {
    let text = read_text(path)?;
    let file = path.display().to_string();
    let mut entries = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || (entries.is_empty() && line.starts_with("slug")) {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cells.len() != 3 {
            return Err(Error::parse(&file, k + 1, 1, format!("expected 3 cells, found {}", cells.len())));
        }
        let date = parse_date(cells[1]).ok_or_else(|| Error::parse(&file, k + 1, 2, format!("bad date `{}`", cells[1])))?;
        let ratio: f64 = cells[2]
            .parse()
            .map_err(|_| Error::parse(&file, k + 1, 3, format!("bad ratio `{}`", cells[2])))?;
        entries.push(Split { slug: cells[0].to_string(), date, ratio });
    }
    Ok(SplitTable::new(entries)?)
}
