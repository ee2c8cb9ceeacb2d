//! Deterministic writers for result artifacts.
//!
//! JSON keys come out sorted and numbers are rounded to six significant
//! digits unless [`Precision::Full`] is requested.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::periodic::{PeriodicSeries, MONTH_NAMES};
use crate::stats::{ChowScan, ShiftSummary};

pub const SIGNIFICANT_DIGITS: usize = 6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Precision {
    #[default]
    Significant,
    Full,
}

/// `x` rounded to `digits` significant digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .expect("formatted float parses")
}

/// Six-significant-digit rendering for CSV and text cells.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_significant(x, SIGNIFICANT_DIGITS);
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn round_value(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("checked f64");
            if let Some(r) = serde_json::Number::from_f64(round_significant(x, SIGNIFICANT_DIGITS))
            {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T, precision: Precision) -> Result<String> {
    let json_err = |source| Error::Json {
        context: "serialising results".into(),
        source,
    };
    let mut v = serde_json::to_value(value).map_err(json_err)?;
    if precision == Precision::Significant {
        round_value(&mut v);
    }
    let mut s = serde_json::to_string_pretty(&v).map_err(json_err)?;
    s.push('\n');
    Ok(s)
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(
    path: &Path,
    value: &T,
    precision: Precision,
) -> Result<()> {
    write_text(path, &to_json_string(value, precision)?)
}

/// CSV text from a header and pre-rendered rows.
pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::domain(format!("writing csv: {e}"));
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row).map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::domain(format!("writing csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn month_label(i: usize, period: usize) -> String {
    if period == MONTH_NAMES.len() {
        MONTH_NAMES[i].to_string()
    } else {
        (i + 1).to_string()
    }
}

/// `month,P,Q,P_dev,Q_dev` for one solved equilibrium.
pub fn solution_csv(
    p: &PeriodicSeries,
    q: &PeriodicSeries,
    p_dev: &PeriodicSeries,
    q_dev: &PeriodicSeries,
) -> Result<String> {
    let n = p.period();
    let rows: Vec<Vec<String>> = (0..n)
        .map(|i| {
            vec![
                month_label(i, n),
                format_number(p[i]),
                format_number(q[i]),
                format_number(p_dev[i]),
                format_number(q_dev[i]),
            ]
        })
        .collect();
    csv_string(&["month", "P", "Q", "P_dev", "Q_dev"], &rows)
}

/// `month,pre_dev,post_dev,delta` for one variable.
pub fn comparison_csv(pre_dev: &PeriodicSeries, post_dev: &PeriodicSeries) -> Result<String> {
    if pre_dev.period() != post_dev.period() {
        return Err(Error::domain("pre and post series have different periods"));
    }
    let n = pre_dev.period();
    let rows: Vec<Vec<String>> = (0..n)
        .map(|i| {
            vec![
                month_label(i, n),
                format_number(pre_dev[i]),
                format_number(post_dev[i]),
                format_number(post_dev[i] - pre_dev[i]),
            ]
        })
        .collect();
    csv_string(&["month", "pre_dev", "post_dev", "delta"], &rows)
}

fn fixed(x: f64, decimals: usize) -> String {
    if x.is_finite() {
        format!("{x:.decimals$}")
    } else {
        format_number(x)
    }
}

fn signed(x: f64) -> String {
    if x.is_finite() {
        format!("{x:+.1}")
    } else {
        format_number(x)
    }
}

fn render_table(header: &[String], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..header.len())
        .map(|j| {
            rows.iter()
                .map(|r| r[j].chars().count())
                .chain(std::iter::once(header[j].chars().count()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (j, c) in cells.iter().enumerate() {
            if j == 0 {
                let _ = write!(s, "{c:<w$}", w = widths[j]);
            } else {
                let _ = write!(s, "  {c:>w$}", w = widths[j]);
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(header);
    let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len().saturating_sub(1));
    out.push_str(&"-".repeat(total));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
    }
    out
}

/// Joint F, directional t and seasonal deltas, one row per series.
pub fn format_shift_table(rows: &[(String, ShiftSummary)]) -> String {
    let header: Vec<String> = [
        "Series", "F", "p", "t", "p1", "dWinter", "dSpring", "dSummer", "dAutumn",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(label, s)| {
            vec![
                label.clone(),
                fixed(s.joint_f.statistic, 2),
                fixed(s.joint_f.p_value, 3),
                fixed(s.directional.statistic, 2),
                fixed(s.directional.p_value, 3),
                signed(s.seasonal_delta.winter),
                signed(s.seasonal_delta.spring),
                signed(s.seasonal_delta.summer),
                signed(s.seasonal_delta.autumn),
            ]
        })
        .collect();
    render_table(&header, &body)
}

/// Chow F and p by candidate year, two columns per series.
pub fn format_chow_table(scans: &[(String, ChowScan)]) -> String {
    let mut years: Vec<i32> = scans
        .iter()
        .flat_map(|(_, s)| s.rows.iter().map(|r| r.year))
        .collect();
    years.sort_unstable();
    years.dedup();
    let mut header = vec!["Year".to_string()];
    for (label, _) in scans {
        header.push(format!("F ({label})"));
        header.push(format!("p ({label})"));
    }
    let body: Vec<Vec<String>> = years
        .iter()
        .map(|&y| {
            let mut row = vec![y.to_string()];
            for (_, scan) in scans {
                match scan.rows.iter().find(|r| r.year == y) {
                    Some(r) => {
                        row.push(fixed(r.f, 2));
                        row.push(fixed(r.p_value, 3));
                    }
                    None => {
                        row.push("-".into());
                        row.push("-".into());
                    }
                }
            }
            row
        })
        .collect();
    render_table(&header, &body)
}
