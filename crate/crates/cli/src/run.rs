//! Fully resolved pipeline descriptions and their execution.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use anyhow::{bail, Context, Result};
use housing_seasonality::io::output::{
    comparison_csv, csv_string, format_chow_table, format_number, format_shift_table, solution_csv,
    to_json_string, write_text, Precision,
};
use housing_seasonality::io::{
    deflate_and_index, read_monthly_csv, read_panel_csv, read_share_table, to_panel, CsvOptions,
};
use housing_seasonality::replication::{replicate, NtParamsFile};
use housing_seasonality::{
    chow_scan, compose_beta, hazards_from_shares, normalize_shares, rolling_mean_deviation,
    seasonal_deviation, shift_battery, solve, ChowScan, EndogenousSolution, Fixture, ModelParams,
    MonthlyPanel, MoveShares, PeriodicSeries, RollingWindow, SeasonalComponents, ShareLabel,
    ShareSource, ShiftSummary, SolverConfig, UMode,
};
use log::info;
use serde::{Deserialize, Serialize};

use housing_seasonality::io::fixtures::U_START;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShareInput {
    Fixture(String),
    Table(PathBuf),
}

impl ShareInput {
    pub fn describe(&self) -> String {
        match self {
            ShareInput::Fixture(name) => name.clone(),
            ShareInput::Table(path) => path.display().to_string(),
        }
    }

    fn load(&self, label: ShareLabel) -> Result<MoveShares> {
        match self {
            ShareInput::Fixture(name) => Ok(Fixture::from_name(name)?.shares()),
            ShareInput::Table(path) => {
                let raw = read_share_table(path)?;
                Ok(normalize_shares(&raw, label, ShareSource::User)?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSettings {
    pub annual_rate: f64,
    pub delta: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ServiceFlow {
    Endogenous,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub lambda: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub rent_price_ratio: f64,
    pub u: ServiceFlow,
}

impl SolverSettings {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            lambda: self.lambda,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            rent_price_ratio: self.rent_price_ratio,
            u_mode: match self.u {
                ServiceFlow::Endogenous => UMode::Endogenous,
                ServiceFlow::Fixed(_) => UMode::Fixed,
            },
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibrated {
    pub shares: ShareInput,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowChoice {
    Annual { min_months: usize },
    Centered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesInput {
    pub label: String,
    pub path: PathBuf,
    pub deflate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSettings {
    pub series: Vec<SeriesInput>,
    pub cpi: Option<PathBuf>,
    pub base_year: i32,
    pub csv: CsvOptions,
    pub window: WindowChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Run {
    Calibrate {
        input: Calibrated,
    },
    Solve {
        input: Calibrated,
        model: ModelSettings,
        solver: SolverSettings,
    },
    Compare {
        pre: Calibrated,
        post: Calibrated,
        model: ModelSettings,
        solver: SolverSettings,
    },
    ShiftTest {
        data: SeriesSettings,
        break_year: i32,
        year_effects: bool,
    },
    BreakScan {
        data: SeriesSettings,
        first_year: i32,
        last_year: i32,
    },
    ReplicateNt {
        params: PathBuf,
        solver: SolverSettings,
    },
}

impl Run {
    pub fn name(&self) -> &'static str {
        match self {
            Run::Calibrate { .. } => "calibrate",
            Run::Solve { .. } => "solve",
            Run::Compare { .. } => "compare",
            Run::ShiftTest { .. } => "shift-test",
            Run::BreakScan { .. } => "break-scan",
            Run::ReplicateNt { .. } => "replicate-nt",
        }
    }
}

/// Collects written files so the manifest can list them.
pub struct Outputs {
    dir: PathBuf,
    precision: Precision,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: PathBuf, precision: Precision) -> Self {
        Self {
            dir,
            precision,
            written: Vec::new(),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn text(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        write_text(&path, contents)?;
        info!("wrote {}", path.display());
        self.written.push(path);
        Ok(())
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = to_json_string(value, self.precision)?;
        self.text(name, &text)
    }
}

pub fn execute(run: &Run, out: &mut Outputs) -> Result<()> {
    match run {
        Run::Calibrate { input } => calibrate(input, out),
        Run::Solve {
            input,
            model,
            solver,
        } => solve_one(input, model, solver, out),
        Run::Compare {
            pre,
            post,
            model,
            solver,
        } => compare(pre, post, model, solver, out),
        Run::ShiftTest {
            data,
            break_year,
            year_effects,
        } => shift_test(data, *break_year, *year_effects, out),
        Run::BreakScan {
            data,
            first_year,
            last_year,
        } => break_scan(data, *first_year, *last_year, out),
        Run::ReplicateNt { params, solver } => replicate_nt(params, solver, out),
    }
}

#[derive(Serialize)]
struct CalibrationReport {
    source: String,
    eta: f64,
    kappa: f64,
    residual: f64,
    hazard_peak: String,
    shares: PeriodicSeries,
    hazard: PeriodicSeries,
    survival: PeriodicSeries,
}

fn calibrate(input: &Calibrated, out: &mut Outputs) -> Result<()> {
    let shares = input.shares.load(ShareLabel::Custom)?;
    let (hazards, scale) = hazards_from_shares(&shares, input.eta)?;
    let report = CalibrationReport {
        source: input.shares.describe(),
        eta: scale.eta,
        kappa: scale.kappa,
        residual: scale.residual,
        hazard_peak: hazards.hazard().argmax().to_string(),
        shares: shares.shares,
        hazard: hazards.hazard().clone(),
        survival: hazards.survival().clone(),
    };
    println!(
        "kappa {} (residual {:.1e}), hazard peaks in {}",
        format_number(report.kappa),
        report.residual,
        report.hazard_peak
    );
    out.json("calibration.json", &report)
}

pub fn model_params(
    input: &Calibrated,
    model: &ModelSettings,
    solver: &SolverSettings,
) -> Result<ModelParams> {
    let shares = input.shares.load(ShareLabel::Custom)?;
    let (hazards, _) = hazards_from_shares(&shares, input.eta)?;
    let (beta_hat, _) = compose_beta(model.annual_rate, model.delta)?;
    let u = match solver.u {
        ServiceFlow::Endogenous => U_START,
        ServiceFlow::Fixed(u) => u,
    };
    Ok(ModelParams::new(
        beta_hat,
        model.delta,
        model.theta,
        u,
        hazards,
    )?)
}

struct Solved {
    label: String,
    solution: EndogenousSolution,
    p_dev: PeriodicSeries,
    q_dev: PeriodicSeries,
}

fn solve_calibrated(
    input: &Calibrated,
    model: &ModelSettings,
    solver: &SolverSettings,
) -> Result<Solved> {
    let params = model_params(input, model, solver)?;
    let solution = solve(&params, &solver.config())
        .with_context(|| format!("solving {}", input.shares.describe()))?;
    let p_dev = seasonal_deviation(&solution.solution.p)?;
    let q_dev = seasonal_deviation(&solution.solution.q)?;
    info!(
        "{}: {} iterations, u = {}",
        input.shares.describe(),
        solution.solution.iterations,
        format_number(solution.u)
    );
    Ok(Solved {
        label: input.shares.describe(),
        solution,
        p_dev,
        q_dev,
    })
}

fn solve_one(
    input: &Calibrated,
    model: &ModelSettings,
    solver: &SolverSettings,
    out: &mut Outputs,
) -> Result<()> {
    let s = solve_calibrated(input, model, solver)?;
    let eq = &s.solution.solution;
    println!(
        "{}: price peak {}, volume peak {}, u {}, {} iterations",
        s.label,
        s.p_dev.argmax(),
        s.q_dev.argmax(),
        format_number(s.solution.u),
        eq.iterations
    );
    out.json("solution.json", &eq.snapshot())?;
    out.text(
        "deviations.csv",
        &solution_csv(&eq.p, &eq.q, &s.p_dev, &s.q_dev)?,
    )
}

#[derive(Serialize)]
struct SideSummary {
    source: String,
    u: f64,
    iterations: usize,
    price_peak: String,
    volume_peak: String,
    price_range: [f64; 2],
    volume_range: [f64; 2],
    price_dev: PeriodicSeries,
    volume_dev: PeriodicSeries,
}

impl SideSummary {
    fn new(s: &Solved) -> Self {
        Self {
            source: s.label.clone(),
            u: s.solution.u,
            iterations: s.solution.solution.iterations,
            price_peak: s.p_dev.argmax().to_string(),
            volume_peak: s.q_dev.argmax().to_string(),
            price_range: [s.p_dev.min(), s.p_dev.max()],
            volume_range: [s.q_dev.min(), s.q_dev.max()],
            price_dev: s.p_dev.clone(),
            volume_dev: s.q_dev.clone(),
        }
    }
}

#[derive(Serialize)]
struct Comparison {
    pre: SideSummary,
    post: SideSummary,
    price_delta: Vec<f64>,
    volume_delta: Vec<f64>,
}

fn compare(
    pre: &Calibrated,
    post: &Calibrated,
    model: &ModelSettings,
    solver: &SolverSettings,
    out: &mut Outputs,
) -> Result<()> {
    let (a, b) = thread::scope(|scope| {
        let a = scope.spawn(|| solve_calibrated(pre, model, solver));
        let b = scope.spawn(|| solve_calibrated(post, model, solver));
        (join(a), join(b))
    });
    let (a, b) = (a?, b?);
    let delta = |x: &PeriodicSeries, y: &PeriodicSeries| -> Vec<f64> {
        x.iter().zip(y.iter()).map(|(p, q)| q - p).collect()
    };
    let report = Comparison {
        price_delta: delta(&a.p_dev, &b.p_dev),
        volume_delta: delta(&a.q_dev, &b.q_dev),
        pre: SideSummary::new(&a),
        post: SideSummary::new(&b),
    };
    for side in [&report.pre, &report.post] {
        println!(
            "{}: price peak {}, price range [{}, {}], volume range [{}, {}]",
            side.source,
            side.price_peak,
            format_number(side.price_range[0]),
            format_number(side.price_range[1]),
            format_number(side.volume_range[0]),
            format_number(side.volume_range[1]),
        );
    }
    out.json("compare.json", &report)?;
    out.text("compare_price.csv", &comparison_csv(&a.p_dev, &b.p_dev)?)?;
    out.text("compare_volume.csv", &comparison_csv(&a.q_dev, &b.q_dev)?)
}

fn join<T>(handle: thread::ScopedJoinHandle<'_, Result<T>>) -> Result<T> {
    match handle.join() {
        Ok(r) => r,
        Err(_) => bail!("worker thread panicked"),
    }
}

fn is_panel_file(path: &Path) -> Result<bool> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let header: Vec<String> = text
        .lines()
        .next()
        .unwrap_or_default()
        .split(',')
        .map(|h| h.trim().to_ascii_lowercase())
        .collect();
    Ok(header.iter().any(|h| h == "year") && header.iter().any(|h| h == "month"))
}

fn load_panel(input: &SeriesInput, data: &SeriesSettings) -> Result<MonthlyPanel> {
    if is_panel_file(&input.path)? {
        if input.deflate {
            bail!(
                "{}: deflation needs a dated series, not a year,month,value panel",
                input.path.display()
            );
        }
        return Ok(read_panel_csv(&input.path)?);
    }
    let series = read_monthly_csv(&input.path, &data.csv)?;
    if !input.deflate {
        return Ok(to_panel(&series));
    }
    let Some(cpi) = &data.cpi else {
        bail!(
            "series '{}' is marked for deflation but no --cpi file was given",
            input.label
        );
    };
    let cpi = read_monthly_csv(cpi, &data.csv)?;
    Ok(to_panel(&deflate_and_index(&series, &cpi, data.base_year)?))
}

fn components(input: &SeriesInput, data: &SeriesSettings) -> Result<SeasonalComponents> {
    let panel = load_panel(input, data)?;
    let window = match data.window {
        WindowChoice::Annual { min_months } => RollingWindow::AnnualMean { min_months },
        WindowChoice::Centered => RollingWindow::Centered12,
    };
    let c = rolling_mean_deviation(&panel, window)
        .with_context(|| format!("seasonal components of '{}'", input.label))?;
    info!(
        "{}: {} observations, dropped years {:?}",
        input.label,
        c.len(),
        c.dropped_years
    );
    Ok(c)
}

fn components_csv(c: &SeasonalComponents) -> Result<String> {
    let rows: Vec<Vec<String>> = c
        .observations
        .iter()
        .map(|d| {
            vec![
                d.year.to_string(),
                d.month.to_string(),
                format_number(d.value),
            ]
        })
        .collect();
    Ok(csv_string(&["year", "month", "deviation"], &rows)?)
}

fn all_components(data: &SeriesSettings) -> Result<Vec<(String, SeasonalComponents)>> {
    if data.series.is_empty() {
        bail!("no input series; pass at least one --series LABEL=PATH");
    }
    thread::scope(|scope| {
        let handles: Vec<_> = data
            .series
            .iter()
            .map(|s| scope.spawn(move || components(s, data).map(|c| (s.label.clone(), c))))
            .collect();
        handles.into_iter().map(join).collect()
    })
}

#[derive(Serialize)]
struct Labelled<'a, T> {
    label: &'a str,
    #[serde(flatten)]
    result: &'a T,
}

fn shift_test(
    data: &SeriesSettings,
    break_year: i32,
    year_effects: bool,
    out: &mut Outputs,
) -> Result<()> {
    let comps = all_components(data)?;
    let mut rows: Vec<(String, ShiftSummary)> = Vec::new();
    for (label, c) in &comps {
        let s = shift_battery(c, break_year, year_effects)
            .with_context(|| format!("shift test on '{label}'"))?;
        rows.push((label.clone(), s));
        out.text(&format!("components_{label}.csv"), &components_csv(c)?)?;
    }
    let table = format_shift_table(&rows);
    print!("{table}");
    let json: Vec<Labelled<ShiftSummary>> = rows
        .iter()
        .map(|(l, s)| Labelled {
            label: l,
            result: s,
        })
        .collect();
    out.json("shift_test.json", &json)?;
    out.text("shift_test.txt", &table)
}

fn break_scan(
    data: &SeriesSettings,
    first_year: i32,
    last_year: i32,
    out: &mut Outputs,
) -> Result<()> {
    if first_year > last_year {
        bail!("empty candidate range {first_year}..={last_year}");
    }
    let comps = all_components(data)?;
    let scans: Vec<(String, ChowScan)> = thread::scope(|scope| {
        let handles: Vec<_> = comps
            .iter()
            .map(|(label, c)| {
                scope.spawn(move || (label.clone(), chow_scan(c, first_year..=last_year)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scan thread panicked"))
            .collect()
    });
    for (label, scan) in &scans {
        for s in &scan.skipped {
            log::warn!("{label}: skipped {}: {}", s.year, s.reason);
        }
    }
    let table = format_chow_table(&scans);
    print!("{table}");
    let json: Vec<Labelled<ChowScan>> = scans
        .iter()
        .map(|(l, s)| Labelled {
            label: l,
            result: s,
        })
        .collect();
    out.json("break_scan.json", &json)?;
    out.text("break_scan.txt", &table)
}

fn replicate_nt(params: &Path, solver: &SolverSettings, out: &mut Outputs) -> Result<()> {
    let file = NtParamsFile::load(params)?;
    let config = SolverConfig {
        u_mode: UMode::Fixed,
        ..solver.config()
    };
    let report = replicate(&file, &config)?;
    for p in &report.periods {
        let verdict = match p.within_tolerance {
            Some(true) => "within tolerance",
            Some(false) => "OUTSIDE tolerance",
            None => "no target",
        };
        println!(
            "{}: sale probability {}, stock {} ({verdict})",
            p.label,
            format_number(p.sale_probability),
            format_number(p.stock)
        );
    }
    out.json("replication.json", &report)
}
