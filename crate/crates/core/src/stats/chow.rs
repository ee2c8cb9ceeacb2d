//! Chow tests of seasonal-profile stability over candidate break years.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};
use crate::periodic::MONTHS;
use crate::stats::{Deviation, SeasonalComponents};

pub const MIN_OBS_PER_SIDE: usize = 24;

/// Relative size of `RSS_r − RSS_u` (against `Σd²`) treated as rounding.
const ZERO_GAIN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChowRow {
    pub year: i32,
    pub f: f64,
    pub p_value: f64,
    pub rss_restricted: f64,
    pub rss_unrestricted: f64,
    pub n_pre: usize,
    pub n_post: usize,
    pub df_denominator: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedCandidate {
    pub year: i32,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChowScan {
    pub rows: Vec<ChowRow>,
    pub skipped: Vec<SkippedCandidate>,
}

impl ChowScan {
    /// Row with the largest F (first on ties).
    pub fn argmax(&self) -> Option<&ChowRow> {
        self.rows
            .iter()
            .fold(None, |best: Option<&ChowRow>, r| match best {
                Some(b) if b.f >= r.f => Some(b),
                _ => Some(r),
            })
    }
}

/// Residual sum of squares around per-month cell means; the OLS fit of a
/// full set of 12 month dummies with no intercept.
fn month_dummy_rss<'a>(obs: impl Iterator<Item = &'a Deviation> + Clone) -> (f64, [usize; MONTHS]) {
    let mut sum = [0.0; MONTHS];
    let mut count = [0usize; MONTHS];
    for d in obs.clone() {
        sum[d.month as usize - 1] += d.value;
        count[d.month as usize - 1] += 1;
    }
    let rss = obs
        .map(|d| {
            let i = d.month as usize - 1;
            (d.value - sum[i] / count[i] as f64).powi(2)
        })
        .sum();
    (rss, count)
}

/// Chow F for a single break at `year`: restricted (one month profile)
/// against unrestricted (separate profiles before and from `year`).
pub fn chow_test(components: &SeasonalComponents, year: i32) -> Result<ChowRow> {
    let obs = &components.observations;
    let pre = obs.iter().filter(|d| d.year < year);
    let post = obs.iter().filter(|d| d.year >= year);
    let n_pre = pre.clone().count();
    let n_post = obs.len() - n_pre;
    if n_pre < MIN_OBS_PER_SIDE || n_post < MIN_OBS_PER_SIDE {
        return Err(Error::InsufficientData(format!(
            "break at {year} leaves {n_pre} pre and {n_post} post observations; {MIN_OBS_PER_SIDE} needed on each side"
        )));
    }
    let (rss_pre, count_pre) = month_dummy_rss(pre);
    let (rss_post, count_post) = month_dummy_rss(post);
    for (side, counts) in [("pre", count_pre), ("post", count_post)] {
        if let Some(m) = counts.iter().position(|&c| c == 0) {
            return Err(Error::InsufficientData(format!(
                "break at {year}: month {} has no {side} observations",
                m + 1
            )));
        }
    }
    let (rss_r, _) = month_dummy_rss(obs.iter());
    let rss_u = rss_pre + rss_post;
    let n = obs.len();
    let q = MONTHS;
    let df_den = n - 2 * MONTHS;

    let scale: f64 = obs.iter().map(|d| d.value * d.value).sum();
    let gain = (rss_r - rss_u).max(0.0);
    let (f, p_value) = if gain <= ZERO_GAIN_TOLERANCE * scale {
        (0.0, 1.0)
    } else if rss_u <= 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        let f = (gain / q as f64) / (rss_u / df_den as f64);
        let dist = FisherSnedecor::new(q as f64, df_den as f64)
            .map_err(|e| Error::domain(e.to_string()))?;
        (f, dist.sf(f).clamp(0.0, 1.0))
    };
    Ok(ChowRow {
        year,
        f,
        p_value,
        rss_restricted: rss_r,
        rss_unrestricted: rss_u,
        n_pre,
        n_post,
        df_denominator: df_den,
    })
}

/// Runs [`chow_test`] at each candidate; infeasible candidates are recorded
/// in `skipped` rather than failing the scan.
pub fn chow_scan(
    components: &SeasonalComponents,
    candidates: impl IntoIterator<Item = i32>,
) -> ChowScan {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for year in candidates {
        match chow_test(components, year) {
            Ok(row) => rows.push(row),
            Err(e) => skipped.push(SkippedCandidate {
                year,
                reason: e.to_string(),
            }),
        }
    }
    ChowScan { rows, skipped }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel(break_year: Option<i32>) -> SeasonalComponents {
        let mut obs = Vec::new();
        for year in 2010..2025 {
            for month in 1..=12u32 {
                let base = (month as f64 - 6.5) * 0.8;
                let shift = match break_year {
                    Some(b) if year >= b && month == 4 => 3.0,
                    Some(b) if year >= b && month == 8 => -3.0,
                    _ => 0.0,
                };
                let noise = 0.1 * (((year as u32 * 31 + month * 17) % 11) as f64 - 5.0) / 5.0;
                obs.push(Deviation {
                    year,
                    month,
                    value: base + shift + if break_year.is_some() { noise } else { 0.0 },
                });
            }
        }
        SeasonalComponents::from_observations(obs)
    }

    #[test]
    fn stable_noise_free_profile_gives_zero_f() {
        let scan = chow_scan(&panel(None), 2013..=2023);
        assert_eq!(scan.rows.len(), 11);
        assert!(scan.rows.iter().all(|r| r.f == 0.0 && r.p_value == 1.0));
    }

    #[test]
    fn constructed_break_is_argmax() {
        let scan = chow_scan(&panel(Some(2019)), 2013..=2023);
        assert_eq!(scan.argmax().unwrap().year, 2019);
        assert!(scan
            .rows
            .iter()
            .all(|r| r.rss_unrestricted <= r.rss_restricted));
    }

    #[test]
    fn thin_sides_are_skipped() {
        let scan = chow_scan(&panel(None), [2010, 2011, 2012, 2024, 2025]);
        assert_eq!(
            scan.rows.iter().map(|r| r.year).collect::<Vec<_>>(),
            vec![2012]
        );
        assert_eq!(scan.skipped.len(), 4);
    }
}
