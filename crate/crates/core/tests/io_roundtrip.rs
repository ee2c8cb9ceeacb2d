use std::fs;

use housing_seasonality::io::output::{comparison_csv, to_json_string, write_json, Precision};
use housing_seasonality::io::{
    read_monthly_csv, read_panel_csv, to_panel, write_panel_csv, CsvOptions,
};
use housing_seasonality::{seasonal_deviation, solve, Fixture, MonthlyPanel, SolverConfig};
use proptest::prelude::*;
use serde_json::Value;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn panel_survives_write_then_read(
        cells in prop::collection::btree_map((1990i32..2030, 1u32..=12), -1e12f64..1e12, 0..200)
    ) {
        let panel = MonthlyPanel::from_observations(cells.iter().map(|(&(y, m), &v)| (y, m, v))).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("panel.csv");
        write_panel_csv(fs::File::create(&path).unwrap(), &panel).unwrap();
        prop_assert_eq!(read_panel_csv(&path).unwrap(), panel);
    }
}

#[test]
fn solution_json_has_the_documented_keys_and_is_stable() {
    let s = solve(&Fixture::SippPre.params(), &SolverConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    write_json(&a, &s.solution.snapshot(), Precision::Significant).unwrap();
    write_json(&b, &s.solution.snapshot(), Precision::Significant).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let v: Value = serde_json::from_slice(&fs::read(&a).unwrap()).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    assert_eq!(
        keys,
        vec!["P", "Q", "X", "epsilon", "iterations", "residual", "v"]
    );
    for key in ["P", "Q", "X", "epsilon", "v"] {
        assert_eq!(v[key].as_array().unwrap().len(), 12);
    }
    let full = to_json_string(&s.solution.snapshot(), Precision::Full).unwrap();
    let back: housing_seasonality::EquilibriumSnapshot = serde_json::from_str(&full).unwrap();
    assert_eq!(back, s.solution.snapshot());
}

#[test]
fn comparison_csv_is_plot_ready() {
    let pre = solve(&Fixture::SippPre.params(), &SolverConfig::default()).unwrap();
    let post = solve(&Fixture::SippPost.params(), &SolverConfig::default()).unwrap();
    let text = comparison_csv(
        &seasonal_deviation(&pre.solution.p).unwrap(),
        &seasonal_deviation(&post.solution.p).unwrap(),
    )
    .unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("month,pre_dev,post_dev,delta"));
    assert_eq!(lines.count(), 12);
}

#[test]
fn monthly_csv_to_panel_flags_partial_years() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("prices.csv");
    let mut text = String::from("date,value\n");
    let (mut y, mut m) = (2008, 2);
    while (y, m) <= (2025, 6) {
        text.push_str(&format!("{y}-{m:02}-28,{}\n", 100 + m));
        m += 1;
        if m == 13 {
            m = 1;
            y += 1;
        }
    }
    fs::write(&path, text).unwrap();
    let series = read_monthly_csv(&path, &CsvOptions::default()).unwrap();
    assert_eq!(series.len(), 209);
    let panel = to_panel(&series);
    assert_eq!(panel.incomplete_years(), vec![2008, 2025]);
}
