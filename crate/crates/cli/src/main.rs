mod manifest;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use housing_seasonality::io::fixtures::{ANNUAL_RATE, DELTA, RENT_PRICE_RATIO, THETA};
use housing_seasonality::io::output::Precision;
use housing_seasonality::io::{CsvOptions, DateFormat};
use housing_seasonality::{Error, Fixture, SolverConfig};

use manifest::RunManifest;
use run::{
    Calibrated, ModelSettings, Outputs, Run, SeriesInput, SeriesSettings, ServiceFlow, ShareInput,
    SolverSettings, WindowChoice,
};

const OUT_ENV: &str = "HOUSING_SEASONALITY_OUT";

#[derive(Parser, Debug)]
#[command(
    name = "housing-seasonality",
    version,
    about = "Seasonal housing equilibrium solver and seasonality tests"
)]
struct Cli {
    /// Output directory; defaults to $HOUSING_SEASONALITY_OUT, then ./out.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Write JSON at full precision instead of six significant digits.
    #[arg(long, global = true)]
    full_precision: bool,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Turn monthly move shares into a hazard vector.
    Calibrate(SharesArgs),
    /// Solve the equilibrium for one calibration.
    Solve {
        #[command(flatten)]
        shares: SharesArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Solve two calibrations and compare their seasonal deviations.
    Compare {
        /// Fixture name or share table for the earlier period.
        #[arg(long, default_value = "sipp-pre")]
        pre: String,
        #[arg(long)]
        pre_eta: Option<f64>,
        /// Fixture name or share table for the later period.
        #[arg(long, default_value = "sipp-post")]
        post: String,
        #[arg(long)]
        post_eta: Option<f64>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Test for a shift in the seasonal profile after a break year.
    ShiftTest {
        #[command(flatten)]
        data: SeriesArgs,
        #[arg(long, default_value_t = 2021)]
        break_year: i32,
        /// Drop the year fixed effects and estimate the post-period level.
        #[arg(long)]
        no_year_effects: bool,
    },
    /// Chow tests of seasonal stability over a range of break years.
    BreakScan {
        #[command(flatten)]
        data: SeriesArgs,
        #[arg(long, default_value_t = 2013)]
        from: i32,
        #[arg(long, default_value_t = 2023)]
        to: i32,
    },
    /// Solve a parameter file at fixed u and check the two-period targets.
    ReplicateNt {
        #[arg(long)]
        params: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Repeat a previous run from its manifest.
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Args, Debug)]
struct SharesArgs {
    /// Bundled share table: sipp-pre or sipp-post.
    #[arg(long, conflicts_with = "shares")]
    fixture: Option<String>,
    /// CSV with `month,share` rows.
    #[arg(long)]
    shares: Option<PathBuf>,
    /// Annual move rate; required with --shares.
    #[arg(long)]
    eta: Option<f64>,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long, default_value_t = ANNUAL_RATE)]
    annual_rate: f64,
    #[arg(long, default_value_t = DELTA)]
    delta: f64,
    #[arg(long, default_value_t = THETA)]
    theta: f64,
}

#[derive(Args, Debug)]
struct SolverArgs {
    #[arg(long, default_value_t = SolverConfig::default().lambda)]
    lambda: f64,
    #[arg(long = "tol", default_value_t = SolverConfig::default().tolerance)]
    tolerance: f64,
    #[arg(long, default_value_t = SolverConfig::default().max_iterations)]
    max_iterations: usize,
    #[arg(long, default_value_t = RENT_PRICE_RATIO)]
    rent_ratio: f64,
    /// `endogenous` (default) or `fixed <VALUE>`.
    #[arg(long = "u", num_args = 1..=2, value_names = ["MODE", "VALUE"])]
    u: Vec<String>,
}

#[derive(Args, Debug)]
struct SeriesArgs {
    /// Input series as LABEL=PATH; dated `date,value` CSV or `year,month,value` panel.
    #[arg(long = "series", value_name = "LABEL=PATH", required = true)]
    series: Vec<String>,
    /// Labels of series to deflate by --cpi.
    #[arg(long, value_name = "LABEL")]
    deflate: Vec<String>,
    #[arg(long)]
    cpi: Option<PathBuf>,
    #[arg(long, default_value_t = 2019)]
    base_year: i32,
    #[arg(long, default_value = "date")]
    date_column: String,
    #[arg(long, default_value = "value")]
    value_column: String,
    /// auto, YYYY-MM or YYYY-MM-DD.
    #[arg(long, default_value = "auto")]
    date_format: String,
    /// Seasonal component: annual (deviation from the year mean) or centered (2x12 moving average).
    #[arg(long, default_value = "annual")]
    window: String,
    /// Minimum months for a year to enter the annual-mean components.
    #[arg(long, default_value_t = 6)]
    min_months: usize,
}

fn absolute(path: &Path) -> Result<PathBuf> {
    if path.is_absolute() {
        return Ok(path.to_path_buf());
    }
    Ok(std::env::current_dir()
        .context("reading the working directory")?
        .join(path))
}

fn share_input(source: &str, eta: Option<f64>) -> Result<Calibrated> {
    if let Ok(f) = Fixture::from_name(source) {
        return Ok(Calibrated {
            shares: ShareInput::Fixture(f.name().to_string()),
            eta: eta.unwrap_or(f.eta()),
        });
    }
    let Some(eta) = eta else {
        bail!("share table {source} needs an explicit annual move rate (--eta)");
    };
    Ok(Calibrated {
        shares: ShareInput::Table(absolute(Path::new(source))?),
        eta,
    })
}

impl SharesArgs {
    fn resolve(&self) -> Result<Calibrated> {
        match (&self.fixture, &self.shares) {
            (Some(name), None) => {
                let f = Fixture::from_name(name)?;
                share_input(f.name(), self.eta)
            }
            (None, Some(path)) => {
                let Some(eta) = self.eta else {
                    bail!("--shares needs an explicit annual move rate (--eta)");
                };
                Ok(Calibrated {
                    shares: ShareInput::Table(absolute(path)?),
                    eta,
                })
            }
            _ => bail!("pass exactly one of --fixture or --shares"),
        }
    }
}

impl ModelArgs {
    fn resolve(&self) -> ModelSettings {
        ModelSettings {
            annual_rate: self.annual_rate,
            delta: self.delta,
            theta: self.theta,
        }
    }
}

impl SolverArgs {
    fn resolve(&self) -> Result<SolverSettings> {
        let u = match self
            .u
            .iter()
            .map(String::as_str)
            .collect::<Vec<_>>()
            .as_slice()
        {
            [] | ["endogenous"] => ServiceFlow::Endogenous,
            ["fixed", value] => ServiceFlow::Fixed(
                value
                    .parse()
                    .with_context(|| format!("bad --u value '{value}'"))?,
            ),
            other => bail!("--u expects 'endogenous' or 'fixed <VALUE>', got {other:?}"),
        };
        Ok(SolverSettings {
            lambda: self.lambda,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            rent_price_ratio: self.rent_ratio,
            u,
        })
    }
}

impl SeriesArgs {
    fn resolve(&self) -> Result<SeriesSettings> {
        let mut series = Vec::new();
        for spec in &self.series {
            let Some((label, path)) = spec.split_once('=') else {
                bail!("--series expects LABEL=PATH, got '{spec}'");
            };
            if series.iter().any(|s: &SeriesInput| s.label == label) {
                bail!("series label '{label}' given twice");
            }
            series.push(SeriesInput {
                label: label.to_string(),
                path: absolute(Path::new(path))?,
                deflate: self.deflate.iter().any(|d| d == label),
            });
        }
        for d in &self.deflate {
            if !series.iter().any(|s| &s.label == d) {
                bail!("--deflate names unknown series '{d}'");
            }
        }
        let window = match self.window.as_str() {
            "annual" => WindowChoice::Annual {
                min_months: self.min_months,
            },
            "centered" | "centred" => WindowChoice::Centered,
            other => bail!("unknown window '{other}'; expected annual or centered"),
        };
        let date_format: DateFormat = self.date_format.parse()?;
        Ok(SeriesSettings {
            series,
            cpi: self.cpi.as_deref().map(absolute).transpose()?,
            base_year: self.base_year,
            csv: CsvOptions {
                date_column: self.date_column.clone(),
                value_column: self.value_column.clone(),
                date_format,
            },
            window,
        })
    }
}

enum Plan {
    Fresh(Run),
    Rerun(RunManifest),
}

fn plan(command: Command) -> Result<Plan> {
    let run = match command {
        Command::Calibrate(shares) => Run::Calibrate {
            input: shares.resolve()?,
        },
        Command::Solve {
            shares,
            model,
            solver,
        } => Run::Solve {
            input: shares.resolve()?,
            model: model.resolve(),
            solver: solver.resolve()?,
        },
        Command::Compare {
            pre,
            pre_eta,
            post,
            post_eta,
            model,
            solver,
        } => Run::Compare {
            pre: share_input(&pre, pre_eta)?,
            post: share_input(&post, post_eta)?,
            model: model.resolve(),
            solver: solver.resolve()?,
        },
        Command::ShiftTest {
            data,
            break_year,
            no_year_effects,
        } => Run::ShiftTest {
            data: data.resolve()?,
            break_year,
            year_effects: !no_year_effects,
        },
        Command::BreakScan { data, from, to } => Run::BreakScan {
            data: data.resolve()?,
            first_year: from,
            last_year: to,
        },
        Command::ReplicateNt { params, solver } => Run::ReplicateNt {
            params: absolute(&params)?,
            solver: solver.resolve()?,
        },
        Command::Rerun { manifest } => return Ok(Plan::Rerun(RunManifest::load(&manifest)?)),
    };
    Ok(Plan::Fresh(run))
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| {
        std::env::var_os(OUT_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    })
    .unwrap_or_else(|| PathBuf::from("out"))
}

fn main_inner(cli: Cli) -> Result<()> {
    let (run, full_precision) = match plan(cli.command)? {
        Plan::Fresh(run) => (run, cli.full_precision),
        Plan::Rerun(m) => (m.run, m.full_precision),
    };
    let precision = if full_precision {
        Precision::Full
    } else {
        Precision::Significant
    };
    let mut out = Outputs::new(out_dir(cli.out_dir), precision);
    log::info!("{} -> {}", run.name(), out.dir().display());
    run::execute(&run, &mut out)?;
    let dir = out.dir().to_path_buf();
    let manifest = RunManifest::new(run, full_precision, out.written().to_vec());
    let path = manifest.write(&dir)?;
    log::info!("manifest {}", path.display());
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::NonConvergence { .. }
            | Error::OuterNonConvergence { .. }
            | Error::DegenerateRentLoop(_),
        ) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
