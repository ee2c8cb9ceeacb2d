use housing_seasonality::stats::{chow_test, ols_hc1, Deviation};
use housing_seasonality::{
    annual_mean_deviation, chow_scan, fit_seasonal_shift, joint_f_test, rolling_mean_deviation,
    shift_battery, MonthlyPanel, RollingWindow, SeasonalComponents,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_panel(seed: u64, years: std::ops::Range<i32>) -> MonthlyPanel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = MonthlyPanel::new();
    for y in years {
        let level = 50.0 + 10.0 * rng.random::<f64>();
        for m in 1..=12 {
            let season = 3.0 * (2.0 * std::f64::consts::PI * m as f64 / 12.0).cos();
            let noise: f64 = rng.sample(StandardNormal);
            p.insert(y, m, level + season + noise).unwrap();
        }
    }
    p
}

fn month_codes(month: u32) -> [f64; 11] {
    std::array::from_fn(|j| {
        if month as usize == j + 1 {
            1.0
        } else if month == 12 {
            -1.0
        } else {
            0.0
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn ols_matches_normal_equations(seed in any::<u64>(), n in 20usize..80, k in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, k, |_, j| if j == 0 { 1.0 } else { rng.sample(StandardNormal) });
        let beta = DVector::from_fn(k, |i, _| i as f64 - 1.5);
        let noise = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal) * (0.5 + rng.random::<f64>()));
        let y = &x * &beta + noise;
        let fit = ols_hc1(&x, &y).unwrap();

        let xtx_inv = (x.transpose() * &x).try_inverse().unwrap();
        let b = &xtx_inv * x.transpose() * &y;
        prop_assert!((&fit.coefficients - &b).amax() < 1e-8);
        let e = &y - &x * &b;
        let mut meat = DMatrix::zeros(k, k);
        for i in 0..n {
            let row = x.row(i).transpose();
            meat += &row * row.transpose() * (e[i] * e[i]);
        }
        let v = &xtx_inv * meat * &xtx_inv * (n as f64 / (n - k) as f64);
        prop_assert!((&fit.covariance - &v).amax() < 1e-8 * v.amax().max(1.0));
        prop_assert!((fit.rss - e.norm_squared()).abs() < 1e-8 * fit.rss.max(1.0));
    }

    #[test]
    fn hc1_covariance_is_symmetric_psd(seed in any::<u64>()) {
        let c = annual_mean_deviation(&random_panel(seed, 2010..2020), 6).unwrap();
        let fit = fit_seasonal_shift(&c, 2016, true).unwrap();
        let v = &fit.ols.covariance;
        prop_assert_eq!(v, &v.transpose());
        let eig = v.clone().symmetric_eigen();
        let scale = eig.eigenvalues.amax();
        prop_assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-10 * scale));
        prop_assert!(fit.gamma.iter().sum::<f64>().abs() < 1e-9);
        prop_assert!(fit.mu.iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn rescaling_a_year_leaves_its_deviations(seed in any::<u64>(), c in 0.01f64..100.0, which in 2010i32..2014) {
        let p = random_panel(seed, 2010..2014);
        let scaled = MonthlyPanel::from_observations(
            p.iter().map(|(y, m, v)| (y, m, if y == which { v * c } else { v })),
        ).unwrap();
        let a = annual_mean_deviation(&p, 6).unwrap();
        let b = annual_mean_deviation(&scaled, 6).unwrap();
        for (x, y) in a.observations.iter().zip(&b.observations) {
            prop_assert!((x.value - y.value).abs() < 1e-9);
        }
        for year in 2010..2014 {
            let total: f64 = a.observations.iter().filter(|d| d.year == year).map(|d| d.value).sum();
            prop_assert!(total.abs() < 1e-9);
        }
    }

    #[test]
    fn chow_unrestricted_never_exceeds_restricted(seed in any::<u64>(), year in 2012i32..2019) {
        let c = annual_mean_deviation(&random_panel(seed, 2010..2020), 6).unwrap();
        let row = chow_test(&c, year).unwrap();
        prop_assert!(row.rss_unrestricted <= row.rss_restricted * (1.0 + 1e-12));
        prop_assert!(row.f >= 0.0);
        prop_assert!((0.0..=1.0).contains(&row.p_value));
    }
}

/// Month effects from `y ~ year dummies + month codes` equal those from
/// within-year-demeaned `y ~ intercept + month codes` on complete years.
#[test]
fn frisch_waugh_lovell_month_effects() {
    let p = random_panel(7, 2008..2020);
    let obs: Vec<(i32, u32, f64)> = p.iter().collect();
    let years: Vec<i32> = p.years();
    let n = obs.len();

    let full = DMatrix::from_fn(n, years.len() + 11, |i, j| {
        let (y, m, _) = obs[i];
        if j < years.len() {
            (years[j] == y) as u8 as f64
        } else {
            month_codes(m)[j - years.len()]
        }
    });
    let y = DVector::from_iterator(n, obs.iter().map(|o| o.2));
    let a = ols_hc1(&full, &y).unwrap();

    let means: Vec<f64> = years
        .iter()
        .map(|&yr| p.year_values(yr).iter().map(|(_, v)| v).sum::<f64>() / 12.0)
        .collect();
    let demeaned = DVector::from_iterator(
        n,
        obs.iter()
            .map(|&(yr, _, v)| v - means[years.binary_search(&yr).unwrap()]),
    );
    let short = DMatrix::from_fn(n, 12, |i, j| {
        if j == 0 {
            1.0
        } else {
            month_codes(obs[i].1)[j - 1]
        }
    });
    let b = ols_hc1(&short, &demeaned).unwrap();

    for j in 0..11 {
        let diff = a.coefficients[years.len() + j] - b.coefficients[1 + j];
        assert!(diff.abs() < 1e-9, "month {} differs by {diff}", j + 1);
    }
    assert!(b.coefficients[0].abs() < 1e-9);
}

#[test]
fn chow_rss_matches_dummy_regressions() {
    let c = annual_mean_deviation(&random_panel(11, 2010..2020), 6).unwrap();
    let obs = &c.observations;
    let n = obs.len();
    let y = DVector::from_iterator(n, obs.iter().map(|d| d.value));
    let dummies = |post_only: Option<bool>| {
        DMatrix::from_fn(n, if post_only.is_some() { 24 } else { 12 }, |i, j| {
            let d = obs[i];
            let side = (d.year >= 2015) as usize;
            match post_only {
                None => (d.month as usize == j + 1) as u8 as f64,
                Some(_) => (j == side * 12 + d.month as usize - 1) as u8 as f64,
            }
        })
    };
    let restricted = ols_hc1(&dummies(None), &y).unwrap();
    let unrestricted = ols_hc1(&dummies(Some(true)), &y).unwrap();
    let row = chow_test(&c, 2015).unwrap();
    assert!((row.rss_restricted - restricted.rss).abs() < 1e-9 * restricted.rss);
    assert!((row.rss_unrestricted - unrestricted.rss).abs() < 1e-9 * unrestricted.rss);
    let f = ((restricted.rss - unrestricted.rss) / 12.0) / (unrestricted.rss / (n - 24) as f64);
    assert!((row.f - f).abs() < 1e-9 * f);
}

#[test]
fn annual_mean_deviation_matches_direct_arithmetic() {
    let p = MonthlyPanel::from_observations((2010..2020).flat_map(|y| {
        (1..=12).map(move |m| {
            (
                y,
                m,
                100.0 * (1.0 + 0.05 * (2.0 * std::f64::consts::PI * m as f64 / 12.0).sin()),
            )
        })
    }))
    .unwrap();
    let c = annual_mean_deviation(&p, 6).unwrap();
    for d in &c.observations {
        let values = p.year_values(d.year);
        let mean = values.iter().map(|(_, v)| v).sum::<f64>() / values.len() as f64;
        let direct = 100.0 * (p.get(d.year, d.month).unwrap() - mean) / mean;
        assert!((d.value - direct).abs() < 1e-12);
        let approx = 5.0 * (2.0 * std::f64::consts::PI * d.month as f64 / 12.0).sin();
        assert!((d.value - approx).abs() < 1e-9);
    }
}

#[test]
fn centred_window_matches_direct_thirteen_term_sum() {
    let series: Vec<(i32, u32, f64)> = (0..48)
        .map(|t| {
            let (y, m) = (2015 + t / 12, (t % 12) as u32 + 1);
            let v = 40.0 + 0.3 * t as f64 + 4.0 * (t as f64 * 0.7).sin();
            (y, m, v)
        })
        .collect();
    let p = MonthlyPanel::from_observations(series.clone()).unwrap();
    let c = rolling_mean_deviation(&p, RollingWindow::Centered12).unwrap();
    assert_eq!(c.len(), 48 - 12);
    for (k, d) in c.observations.iter().enumerate() {
        let t = k + 6;
        let mut level = 0.5 * series[t - 6].2 + 0.5 * series[t + 6].2;
        level += series[t - 5..=t + 5].iter().map(|o| o.2).sum::<f64>();
        level /= 12.0;
        let direct = 100.0 * (series[t].2 - level) / level;
        assert_eq!((d.year, d.month), (series[t].0, series[t].1));
        assert!((d.value - direct).abs() < 1e-10);
    }
}

#[test]
fn large_shift_with_small_noise_is_detected() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut obs = Vec::new();
    for year in 2010..2025 {
        for month in 1..=12u32 {
            let shift = if year >= 2021 {
                match month {
                    3..=5 => 3.0,
                    7..=9 => -3.0,
                    _ => 0.0,
                }
            } else {
                0.0
            };
            let noise: f64 = rng.sample(StandardNormal);
            obs.push(Deviation {
                year,
                month,
                value: shift + 0.2 * noise,
            });
        }
    }
    let c = SeasonalComponents::from_observations(obs);
    let s = shift_battery(&c, 2021, true).unwrap();
    assert!(s.joint_f.p_value < 0.001);
    assert!(s.directional.statistic > 0.0 && s.directional.p_value < 0.05);
    assert!(s.seasonal_delta.spring > 2.5);
    let f = joint_f_test(&fit_seasonal_shift(&c, 2021, true).unwrap()).unwrap();
    assert_eq!(f, s.joint_f);
    let scan = chow_scan(&c, 2013..=2023);
    assert_eq!(scan.argmax().unwrap().year, 2021);
}
