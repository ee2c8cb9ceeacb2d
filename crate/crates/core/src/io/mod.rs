//! File formats: CSV inputs, bundled fixtures and result writers.

pub mod fixtures;
pub mod output;
mod series;

pub use series::{
    deflate_and_index, parse_monthly_csv, parse_panel_csv, parse_share_table, read_monthly_csv,
    read_panel_csv, read_share_table, to_panel, write_panel_csv, CsvOptions, DateFormat, RawSeries,
    YearMonth,
};
