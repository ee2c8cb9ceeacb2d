//! CSV ingestion of monthly series, share tables and panels.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::periodic::{MONTHS, MONTH_NAMES};
use crate::stats::MonthlyPanel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=MONTHS as u32).contains(&month) {
            return Err(Error::domain(format!("month {month} outside 1..=12")));
        }
        Ok(Self { year, month })
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// Accepted spellings of the date column.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DateFormat {
    /// `YYYY-MM`, or `YYYY-MM-DD` truncated to the month.
    #[default]
    Auto,
    YearMonth,
    YearMonthDay,
}

impl FromStr for DateFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "YYYY-MM" | "year-month" => Ok(Self::YearMonth),
            "YYYY-MM-DD" | "year-month-day" => Ok(Self::YearMonthDay),
            other => Err(Error::domain(format!(
                "unknown date format '{other}'; expected auto, YYYY-MM or YYYY-MM-DD"
            ))),
        }
    }
}

impl DateFormat {
    fn parse(self, raw: &str) -> std::result::Result<YearMonth, String> {
        let parts: Vec<&str> = raw.trim().split('-').collect();
        let ok_len = match self {
            DateFormat::Auto => parts.len() == 2 || parts.len() == 3,
            DateFormat::YearMonth => parts.len() == 2,
            DateFormat::YearMonthDay => parts.len() == 3,
        };
        if !ok_len {
            return Err(format!("cannot parse date '{raw}'"));
        }
        let year: i32 = parts[0]
            .parse()
            .map_err(|_| format!("bad year in '{raw}'"))?;
        let month: u32 = parts[1]
            .parse()
            .map_err(|_| format!("bad month in '{raw}'"))?;
        if !(1..=12).contains(&month) {
            return Err(format!("month out of range in '{raw}'"));
        }
        if parts.len() == 3 {
            let day: u32 = parts[2]
                .parse()
                .map_err(|_| format!("bad day in '{raw}'"))?;
            if !(1..=31).contains(&day) {
                return Err(format!("day out of range in '{raw}'"));
            }
        }
        Ok(YearMonth { year, month })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvOptions {
    pub date_column: String,
    pub value_column: String,
    pub date_format: DateFormat,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            date_column: "date".into(),
            value_column: "value".into(),
            date_format: DateFormat::Auto,
        }
    }
}

/// Dated monthly observations, strictly increasing with no repeated month.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSeries {
    pub label: String,
    pub rows: Vec<(YearMonth, f64)>,
}

impl RawSeries {
    /// Sorts and checks for repeated months.
    pub fn new(label: impl Into<String>, mut rows: Vec<(YearMonth, f64)>) -> Result<Self> {
        rows.sort_by_key(|(d, _)| *d);
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateMonth {
                year: w[0].0.year,
                month: w[0].0.month,
            });
        }
        Ok(Self {
            label: label.into(),
            rows,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn span(&self) -> Option<(YearMonth, YearMonth)> {
        Some((self.rows.first()?.0, self.rows.last()?.0))
    }

    pub fn get(&self, date: YearMonth) -> Option<f64> {
        self.rows
            .binary_search_by_key(&date, |(d, _)| *d)
            .ok()
            .map(|i| self.rows[i].1)
    }
}

fn column_index(headers: &csv::StringRecord, name: &str, path: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Parse {
            path: path.to_string(),
            line: 1,
            message: format!(
                "no column named '{name}' (found: {})",
                headers.iter().collect::<Vec<_>>().join(", ")
            ),
        })
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader)
}

fn record_line(record: &csv::StringRecord) -> usize {
    record.position().map(|p| p.line() as usize).unwrap_or(0)
}

fn csv_error(path: &str, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse {
        path: path.to_string(),
        line,
        message: e.to_string(),
    }
}

/// Parses a `date,value` style CSV. Rows with an empty value cell are
/// treated as missing months and skipped.
pub fn parse_monthly_csv<R: Read>(
    reader: R,
    label: &str,
    options: &CsvOptions,
) -> Result<RawSeries> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(label, e))?.clone();
    let date_idx = column_index(&headers, &options.date_column, label)?;
    let value_idx = column_index(&headers, &options.value_column, label)?;

    let mut seen: BTreeMap<YearMonth, usize> = BTreeMap::new();
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(label, e))?;
        let line = record_line(&record);
        let parse_err = |message: String| Error::Parse {
            path: label.to_string(),
            line,
            message,
        };
        let raw_date = record
            .get(date_idx)
            .ok_or_else(|| parse_err("missing date cell".into()))?;
        let date = options.date_format.parse(raw_date).map_err(parse_err)?;
        let raw_value = record.get(value_idx).unwrap_or("");
        if let Some(first) = seen.insert(date, line) {
            return Err(Error::Parse {
                path: label.to_string(),
                line,
                message: format!("duplicate month {date} (first seen on line {first})"),
            });
        }
        if raw_value.is_empty() {
            continue;
        }
        let value: f64 = raw_value
            .parse()
            .map_err(|_| parse_err(format!("cannot parse value '{raw_value}'")))?;
        if !value.is_finite() {
            return Err(parse_err(format!("non-finite value '{raw_value}'")));
        }
        rows.push((date, value));
    }
    RawSeries::new(label, rows)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

pub fn read_monthly_csv(path: &Path, options: &CsvOptions) -> Result<RawSeries> {
    parse_monthly_csv(open(path)?, &path.display().to_string(), options)
}

/// Real series `nominal/cpi` rescaled so that the base-year mean is 100.
pub fn deflate_and_index(
    nominal: &RawSeries,
    cpi: &RawSeries,
    base_year: i32,
) -> Result<RawSeries> {
    let mut real = Vec::with_capacity(nominal.len());
    for &(date, value) in &nominal.rows {
        let c = cpi.get(date).ok_or_else(|| {
            Error::InsufficientData(format!(
                "CPI series '{}' has no value for {date}",
                cpi.label
            ))
        })?;
        if c == 0.0 {
            return Err(Error::domain(format!("CPI is zero at {date}")));
        }
        real.push((date, value / c));
    }
    let base: Vec<f64> = real
        .iter()
        .filter(|(d, _)| d.year == base_year)
        .map(|(_, v)| *v)
        .collect();
    if base.len() != MONTHS {
        return Err(Error::InsufficientData(format!(
            "base year {base_year} has {} of 12 months in '{}'",
            base.len(),
            nominal.label
        )));
    }
    let base_mean = base.iter().sum::<f64>() / MONTHS as f64;
    if base_mean == 0.0 {
        return Err(Error::domain(format!(
            "base year {base_year} has zero mean"
        )));
    }
    let scale = 100.0 / base_mean;
    RawSeries::new(
        format!("{} (real, {base_year}=100)", nominal.label),
        real.into_iter().map(|(d, v)| (d, v * scale)).collect(),
    )
}

pub fn to_panel(series: &RawSeries) -> MonthlyPanel {
    let mut panel = MonthlyPanel::new();
    for &(d, v) in &series.rows {
        panel
            .insert(d.year, d.month, v)
            .expect("RawSeries rows have distinct valid months");
    }
    panel
}

fn parse_month(raw: &str) -> Option<u32> {
    if let Ok(m) = raw.parse::<u32>() {
        return (1..=12).contains(&m).then_some(m);
    }
    const FULL: [&str; MONTHS] = [
        "january",
        "february",
        "march",
        "april",
        "may",
        "june",
        "july",
        "august",
        "september",
        "october",
        "november",
        "december",
    ];
    let lower = raw.to_ascii_lowercase();
    if lower.len() < 3 {
        return None;
    }
    FULL.iter()
        .position(|name| name.starts_with(&lower))
        .map(|i| i as u32 + 1)
}

/// Reads a `month,share` table covering each month exactly once and returns
/// the raw shares in calendar order.
pub fn parse_share_table<R: Read>(reader: R, label: &str) -> Result<Vec<f64>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(label, e))?.clone();
    let month_idx = column_index(&headers, "month", label)?;
    let share_idx = column_index(&headers, "share", label)?;
    let mut shares: [Option<f64>; MONTHS] = [None; MONTHS];
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(label, e))?;
        let line = record_line(&record);
        let parse_err = |message: String| Error::Parse {
            path: label.to_string(),
            line,
            message,
        };
        let raw_month = record.get(month_idx).unwrap_or("");
        let month = parse_month(raw_month)
            .ok_or_else(|| parse_err(format!("unknown month '{raw_month}'")))?;
        let raw_share = record.get(share_idx).unwrap_or("");
        let share: f64 = raw_share
            .parse()
            .map_err(|_| parse_err(format!("cannot parse share '{raw_share}'")))?;
        let slot = &mut shares[month as usize - 1];
        if slot.is_some() {
            return Err(parse_err(format!("month {month} listed twice")));
        }
        *slot = Some(share);
    }
    let missing: Vec<String> = shares
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_none())
        .map(|(i, _)| MONTH_NAMES[i].to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Parse {
            path: label.to_string(),
            line: 0,
            message: format!("share table is missing {}", missing.join(", ")),
        });
    }
    Ok(shares.iter().map(|s| s.expect("checked above")).collect())
}

pub fn read_share_table(path: &Path) -> Result<Vec<f64>> {
    parse_share_table(open(path)?, &path.display().to_string())
}

/// Writes `year,month,value` rows at full precision.
pub fn write_panel_csv<W: Write>(writer: W, panel: &MonthlyPanel) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| Error::domain(format!("writing panel: {e}"));
    w.write_record(["year", "month", "value"]).map_err(err)?;
    for (y, m, v) in panel.iter() {
        w.write_record([y.to_string(), m.to_string(), format!("{v:?}")])
            .map_err(err)?;
    }
    w.flush()
        .map_err(|e| Error::domain(format!("writing panel: {e}")))?;
    Ok(())
}

pub fn parse_panel_csv<R: Read>(reader: R, label: &str) -> Result<MonthlyPanel> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(label, e))?.clone();
    let idx = [
        column_index(&headers, "year", label)?,
        column_index(&headers, "month", label)?,
        column_index(&headers, "value", label)?,
    ];
    let mut panel = MonthlyPanel::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(label, e))?;
        let line = record_line(&record);
        let parse_err = |message: String| Error::Parse {
            path: label.to_string(),
            line,
            message,
        };
        let cell = |i: usize| record.get(idx[i]).unwrap_or("");
        let year: i32 = cell(0)
            .parse()
            .map_err(|_| parse_err(format!("bad year '{}'", cell(0))))?;
        let month: u32 = cell(1)
            .parse()
            .map_err(|_| parse_err(format!("bad month '{}'", cell(1))))?;
        let value: f64 = cell(2)
            .parse()
            .map_err(|_| parse_err(format!("bad value '{}'", cell(2))))?;
        panel
            .insert(year, month, value)
            .map_err(|e| parse_err(e.to_string()))?;
    }
    Ok(panel)
}

pub fn read_panel_csv(path: &Path) -> Result<MonthlyPanel> {
    parse_panel_csv(open(path)?, &path.display().to_string())
}
