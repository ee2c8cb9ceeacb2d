use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::periodic::MONTHS;

/// Observed monthly values keyed by `(year, month)`; may be sparse.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MonthlyPanel {
    values: BTreeMap<(i32, u32), f64>,
}

impl MonthlyPanel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_observations(obs: impl IntoIterator<Item = (i32, u32, f64)>) -> Result<Self> {
        let mut panel = Self::new();
        for (year, month, value) in obs {
            panel.insert(year, month, value)?;
        }
        Ok(panel)
    }

    pub fn insert(&mut self, year: i32, month: u32, value: f64) -> Result<()> {
        if !(1..=MONTHS as u32).contains(&month) {
            return Err(Error::domain(format!("month {month} outside 1..=12")));
        }
        if self.values.insert((year, month), value).is_some() {
            return Err(Error::DuplicateMonth { year, month });
        }
        Ok(())
    }

    pub fn get(&self, year: i32, month: u32) -> Option<f64> {
        self.values.get(&(year, month)).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Observations in calendar order.
    pub fn iter(&self) -> impl Iterator<Item = (i32, u32, f64)> + '_ {
        self.values.iter().map(|(&(y, m), &v)| (y, m, v))
    }

    pub fn years(&self) -> Vec<i32> {
        let mut years: Vec<i32> = self.values.keys().map(|(y, _)| *y).collect();
        years.dedup();
        years
    }

    pub fn year_values(&self, year: i32) -> Vec<(u32, f64)> {
        self.values
            .range((year, 1)..=(year, MONTHS as u32))
            .map(|(&(_, m), &v)| (m, v))
            .collect()
    }

    pub fn months_in_year(&self, year: i32) -> usize {
        self.values.range((year, 1)..=(year, MONTHS as u32)).count()
    }

    pub fn is_complete(&self, year: i32) -> bool {
        self.months_in_year(year) == MONTHS
    }

    pub fn incomplete_years(&self) -> Vec<i32> {
        self.years()
            .into_iter()
            .filter(|&y| !self.is_complete(y))
            .collect()
    }
}
