//! `volcap` command-line interface.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 domain or validation error
//! (including malformed flags).

mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use volcap::montecarlo::{
    basel1_experiment, basel2_experiment, fat_tail_population_moments, simulate_returns, FatTailParams, Histogram,
    MomentSummary, ReturnDistribution, SimConfig, DEFAULT_BIN_WIDTH, YEARLY_WINDOW,
};
use volcap::panel::{load_panel, parse_date, ratio_report, synthetic_panel, PanelFormat, QuantileGroups, WindowSpec};
use volcap::response::{run_response_ensemble, CapitalRule, HistoryMode, ResponseConfig, RuleKind};
use volcap::statfn::{cond_tail_expectation, Side, TailSpec};

use table::{Cell, Table};

const SEED_ENV: &str = "VOLCAP_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "volcap",
    version,
    about = "Sample-volatility tail statistics and capital-rule experiments"
)]
struct Cli {
    /// Output encoding.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,

    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for simulations (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Expected sample std, as a fraction of σ, within a tail of its own law.
    TailExpect {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
        /// Condition on the upper tail instead of the lower one.
        #[arg(long)]
        upper: bool,
    },
    /// Lower-tail expectations over a range of observation counts.
    Curve {
        #[arg(long, default_value_t = 30)]
        n_min: usize,
        #[arg(long, default_value_t = 1200)]
        n_max: usize,
        #[arg(long, default_value_t = 1)]
        step: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.001])]
        alphas: Vec<f64>,
    },
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Sim(SimCommand),
    /// Past/future volatility ratios by past-volatility quantile group.
    Empirical(EmpiricalArgs),
    /// Exposure-maximizing banks under a capital rule.
    Response(ResponseArgs),
}

#[derive(Debug, Args)]
struct SeedArg {
    /// Master seed; falls back to the VOLCAP_SEED environment variable.
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
}

impl SeedArg {
    fn require(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Usage(format!("a seed is required: pass --seed or set {SEED_ENV}")))
    }
}

#[derive(Debug, Args)]
struct ReturnArgs {
    #[arg(long, default_value_t = 1000)]
    m: usize,
    #[arg(long, default_value_t = 1260)]
    n: usize,
    /// Half-width of the band replaced by jumps.
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Jump magnitude.
    #[arg(long, default_value_t = 10.0)]
    jump: f64,
    /// Simulate standard normal returns instead of the jump model.
    #[arg(long)]
    normal: bool,
    #[arg(long, default_value_t = DEFAULT_BIN_WIDTH)]
    bin_width: f64,
    /// Also write per-security values as CSV `security,value`.
    #[arg(long)]
    values_out: Option<PathBuf>,
    #[command(flatten)]
    seed: SeedArg,
}

impl ReturnArgs {
    fn config(&self) -> Result<SimConfig, CliError> {
        let distribution = if self.normal {
            ReturnDistribution::standard_normal()
        } else {
            ReturnDistribution::Fat(FatTailParams::new(self.epsilon, self.jump)?)
        };
        Ok(SimConfig::new(self.m, self.n, self.seed.require()?, distribution)?)
    }
}

#[derive(Debug, Subcommand)]
enum SimCommand {
    /// Histogram of sample std / true std across securities (Basel I risk).
    StddevHist(ReturnArgs),
    /// Histogram of Basel II risk standardized by its cross-sectional mean.
    Basel2Hist {
        #[command(flatten)]
        returns: ReturnArgs,
        #[arg(long, default_value_t = YEARLY_WINDOW)]
        window: usize,
    },
    /// Simulated versus exact moments of the jump model.
    FatMoments {
        #[arg(long, default_value_t = 1_000_000)]
        draws: usize,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value_t = 10.0)]
        jump: f64,
        #[command(flatten)]
        seed: SeedArg,
    },
}

#[derive(Debug, Args)]
struct EmpiricalArgs {
    /// CSV with header `date,security_id,return`.
    #[arg(long, required_unless_present = "synthetic", conflicts_with = "synthetic")]
    input: Option<PathBuf>,
    /// Generate an equal-volatility normal panel instead of reading one.
    #[arg(long)]
    synthetic: bool,
    #[arg(long, default_value_t = 1000)]
    securities: usize,
    /// As-of dates the synthetic panel is sized for.
    #[arg(long, default_value_t = 20)]
    dates: usize,
    #[arg(long, default_value_t = 0.05)]
    sigma: f64,
    #[arg(long, default_value_t = 60)]
    past: usize,
    #[arg(long, default_value_t = 60)]
    future: usize,
    #[arg(long, default_value_t = 2)]
    min_future: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.10, 0.90, 0.99])]
    groups: Vec<f64>,
    /// First as-of date (inclusive).
    #[arg(long)]
    from: Option<String>,
    /// Last as-of date (inclusive).
    #[arg(long)]
    to: Option<String>,
    /// Also write the per-group overall averages as JSON.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RuleArg {
    Basel1,
    Basel2,
    MarketValue,
}

#[derive(Debug, Args)]
struct ResponseArgs {
    #[arg(long, default_value_t = 1000)]
    m: usize,
    #[arg(long, default_value_t = 60)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    banks: usize,
    #[arg(long, default_value_t = 1.0)]
    budget: f64,
    #[arg(long, value_enum, default_value_t = RuleArg::Basel1)]
    rule: RuleArg,
    #[arg(long, default_value_t = 22.0)]
    c: f64,
    /// Rolling window for the Basel II rule.
    #[arg(long, default_value_t = YEARLY_WINDOW)]
    window: usize,
    /// Give each bank its own independent histories.
    #[arg(long)]
    independent: bool,
    /// Repeat with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// Also write the ensemble summary as JSON.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(volcap::Error),
    Io(io::Error),
}

impl From<volcap::Error> for CliError {
    fn from(e: volcap::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) | CliError::Lib(volcap::Error::Io(_)) => 1,
            CliError::Usage(_) | CliError::Lib(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let table = match &cli.command {
        Command::TailExpect { n, alpha, upper } => tail_expect(*n, *alpha, *upper)?,
        Command::Curve {
            n_min,
            n_max,
            step,
            alphas,
        } => curve(*n_min, *n_max, *step, alphas)?,
        Command::Sim(SimCommand::StddevHist(args)) => stddev_hist(args)?,
        Command::Sim(SimCommand::Basel2Hist { returns, window }) => basel2_hist(returns, *window)?,
        Command::Sim(SimCommand::FatMoments {
            draws,
            epsilon,
            jump,
            seed,
        }) => fat_moments(*draws, *epsilon, *jump, seed.require()?)?,
        Command::Empirical(args) => empirical(args)?,
        Command::Response(args) => response(args)?,
    };
    emit(&table, cli.format, cli.out.as_deref())
}

fn emit(table: &Table, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    match format {
        Format::Csv => table.write_csv(&mut sink)?,
        Format::Json => table.write_json(&mut sink)?,
    }
    sink.flush()?;
    Ok(())
}

fn write_json_file<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn tail_expect(n: usize, alpha: f64, upper: bool) -> Result<Table, CliError> {
    let side = if upper { Side::Upper } else { Side::Lower };
    let ratio = cond_tail_expectation(&TailSpec::new(n, alpha, side)?)?;
    let mut t = Table::new(["n", "alpha", "side", "ratio"]);
    t.push(vec![
        n.into(),
        alpha.into(),
        if upper { "upper" } else { "lower" }.into(),
        ratio.into(),
    ]);
    Ok(t)
}

fn curve(n_min: usize, n_max: usize, step: usize, alphas: &[f64]) -> Result<Table, CliError> {
    if n_min > n_max || step == 0 {
        return Err(CliError::Usage("need n-min <= n-max and step >= 1".into()));
    }
    if alphas.is_empty() {
        return Err(CliError::Usage("need at least one alpha".into()));
    }
    let mut t = Table::new(std::iter::once("n".to_string()).chain(alphas.iter().map(|a| format!("alpha_{a}"))));
    for n in (n_min..=n_max).step_by(step) {
        let mut row: Vec<Cell> = vec![n.into()];
        for &a in alphas {
            row.push(cond_tail_expectation(&TailSpec::lower(n, a)?)?.into());
        }
        t.push(row);
    }
    Ok(t)
}

fn histogram_table(h: &Histogram) -> Table {
    let mut t = Table::new(["bin_lower", "bin_upper", "count"]);
    for (lo, hi, c) in h.bins() {
        t.push(vec![lo.into(), hi.into(), c.into()]);
    }
    t
}

fn write_values(path: &Path, values: &[f64]) -> Result<(), CliError> {
    let mut t = Table::new(["security", "value"]);
    for (i, &v) in values.iter().enumerate() {
        t.push(vec![i.into(), v.into()]);
    }
    t.write_csv(BufWriter::new(File::create(path)?))?;
    Ok(())
}

fn stddev_hist(args: &ReturnArgs) -> Result<Table, CliError> {
    let report = basel1_experiment(&args.config()?)?;
    let h = Histogram::with_bin_width(&report.ratios, args.bin_width)?;
    if let Some(path) = &args.values_out {
        write_values(path, &report.ratios)?;
    }
    eprintln!(
        "securities={} min_ratio={} below_0.8={}",
        report.ratios.len(),
        report.min_ratio(),
        report.ratios.iter().filter(|&&r| r < 0.8).count()
    );
    Ok(histogram_table(&h))
}

fn basel2_hist(args: &ReturnArgs, window: usize) -> Result<Table, CliError> {
    let report = basel2_experiment(&args.config()?, window)?;
    let h = Histogram::with_bin_width(&report.standardized, args.bin_width)?;
    if let Some(path) = &args.values_out {
        write_values(path, &report.standardized)?;
    }
    eprintln!(
        "securities={} min_standardized={}",
        report.standardized.len(),
        report.min_standardized()
    );
    Ok(histogram_table(&h))
}

fn fat_moments(draws: usize, epsilon: f64, jump: f64, seed: u64) -> Result<Table, CliError> {
    let params = FatTailParams::new(epsilon, jump)?;
    let sim = simulate_returns(&SimConfig::new(1, draws, seed, ReturnDistribution::Fat(params))?)?;
    let sample = MomentSummary::from_sample(sim.as_slice())?;
    let exact = fat_tail_population_moments(&params);
    let mut t = Table::new(["source", "mean", "std", "kurtosis"]);
    for (name, m) in [("simulated", sample), ("population", exact)] {
        t.push(vec![name.into(), m.mean.into(), m.std.into(), m.kurtosis.into()]);
    }
    Ok(t)
}

fn parse_date_flag(flag: &str, text: &Option<String>) -> Result<Option<NaiveDate>, CliError> {
    text.as_deref()
        .map(|s| parse_date(s).ok_or_else(|| CliError::Usage(format!("--{flag}: invalid date `{s}`"))))
        .transpose()
}

fn empirical(args: &EmpiricalArgs) -> Result<Table, CliError> {
    let spec = WindowSpec::new(args.past, args.future, args.min_future)?;
    let groups = QuantileGroups::new(args.groups.clone())?;
    let (panel, default_range) = if args.synthetic {
        let syn = synthetic_panel(args.securities, args.dates, &spec, args.sigma, args.seed.require()?)?;
        (syn.panel, Some(syn.as_of_range))
    } else {
        let path = args.input.as_ref().expect("clap enforces --input or --synthetic");
        (load_panel(File::open(path)?, PanelFormat::default())?, None)
    };
    let from = parse_date_flag("from", &args.from)?;
    let to = parse_date_flag("to", &args.to)?;
    let range = match (from, to, default_range) {
        (None, None, r) => r,
        (f, t, _) => Some((f.unwrap_or(NaiveDate::MIN), t.unwrap_or(NaiveDate::MAX))),
    };
    let report = ratio_report(&panel, &spec, &groups, range);
    let summary = report.summary();
    if let Some(path) = &args.summary {
        write_json_file(path, &summary)?;
    }
    let overall: Vec<String> = summary
        .groups
        .iter()
        .map(|g| g.overall_mean_ratio.map_or("NA".into(), |v| format!("{v:.4}")))
        .collect();
    eprintln!("as_of_dates={} overall=[{}]", summary.as_of_dates, overall.join(", "));

    let mut t = Table::new(["date", "group", "mean_ratio", "count"]);
    for d in &report.dates {
        for (g, (mean, count)) in d.mean_ratio.iter().zip(&d.counts).enumerate() {
            t.push(vec![
                d.date.to_string().into(),
                g.into(),
                (*mean).into(),
                (*count).into(),
            ]);
        }
    }
    Ok(t)
}

fn response(args: &ResponseArgs) -> Result<Table, CliError> {
    let kind = match args.rule {
        RuleArg::Basel1 => RuleKind::Basel1,
        RuleArg::Basel2 => RuleKind::Basel2 {
            yearly_window: args.window,
        },
        RuleArg::MarketValue => RuleKind::MarketValue100,
    };
    let config = ResponseConfig {
        m: args.m,
        n: args.n,
        banks: args.banks,
        budget: args.budget,
        rule: CapitalRule::new(kind, args.c)?,
        seed: args.seed.require()?,
        mode: if args.independent {
            HistoryMode::Independent
        } else {
            HistoryMode::Shared
        },
    };
    let (reports, summary) = run_response_ensemble(&config, args.runs)?;
    if let Some(path) = &args.summary {
        write_json_file(path, &summary)?;
    }
    eprintln!(
        "runs={} mean_excess_risk_ratio={:.4} mean_overlap={:.4}",
        summary.runs, summary.mean_excess_risk_ratio, summary.mean_overlap_fraction
    );

    let mut t = Table::new([
        "seed",
        "bank",
        "chosen",
        "exposure",
        "excess_risk_ratio",
        "overlap_fraction",
        "herfindahl",
    ]);
    for r in &reports {
        for (b, bank) in r.banks.iter().enumerate() {
            t.push(vec![
                r.config.seed.into(),
                b.into(),
                bank.chosen.into(),
                bank.exposure.into(),
                bank.excess_risk_ratio.into(),
                r.concentration.overlap_fraction.into(),
                r.concentration.herfindahl.into(),
            ]);
        }
    }
    Ok(t)
}
