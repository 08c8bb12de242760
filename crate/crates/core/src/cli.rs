//! Command-line front end: argument parsing, config merging and the batch
//! commands that drive the library end to end.
//!
//! Output layout under `--out`:
//!
//! ```text
//! analytics/<COMPANY>/{news,twitter,financial}.csv
//! granger/results.csv
//! granger/{twitter,news}_{er,vol}.dot
//! predict/{comparisons,coefficients}.csv
//! predict/report.txt
//! report.txt
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::finance::{financial_series, FinancialSeries};
use crate::granger::{self, build_graph, emit_dot, run_battery, GrangerResult};
use crate::ingest::{
    self, filter_relevant, parse_market, parse_news, parse_twitter, NewsEvent, TwitterDailyRecord,
};
use crate::numfmt::{g17, p3};
use crate::predict::{
    self, comparison_report, fit_return_models, fit_volatility_models, EvalMode, ModelComparison,
};
use crate::sentiment::{aggregate_news_daily, derive_twitter_analytics, DailyAnalytics, Source};
use crate::statcore::significance_code;
use crate::synthgen::{self, Direction, SyntheticSpec};
use crate::timeseries::{align, AlignedFrame, DatedSeries};
use crate::vars;

#[derive(Debug, Parser)]
#[command(
    name = "sentigranger",
    version,
    about = "Sentiment analytics, Granger batteries and sentiment-augmented regressions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Daily sentiment and financial series per company and source.
    Analytics(DataArgs),
    /// Granger-causality battery, results CSV and four DOT graphs.
    Granger(DataArgs),
    /// M0 versus M1 regressions and the comparison report.
    Predict(DataArgs),
    /// Synthetic fixture with a planted causal direction.
    Synth(SynthArgs),
    /// Runs analytics, granger and predict and writes a combined report.
    Report(DataArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    /// Scored news stories CSV.
    #[arg(long)]
    pub news: Option<PathBuf>,
    /// Daily social-media counts CSV.
    #[arg(long)]
    pub twitter: Option<PathBuf>,
    /// Directory holding one `<COMPANY>.csv` market file per company.
    #[arg(long)]
    pub market_dir: Option<PathBuf>,
    /// Market index CSV.
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Comma-separated symbols; defaults to every CSV in the market directory.
    #[arg(long, value_delimiter = ',')]
    pub companies: Option<Vec<String>>,
    /// Minimum news relevance kept.
    #[arg(long)]
    pub relevance: Option<u8>,
    /// Granger lag order.
    #[arg(long)]
    pub lag: Option<usize>,
    /// Significance level for graph edges.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// in-sample or walk-forward.
    #[arg(long)]
    pub mode: Option<EvalMode>,
    /// TOML file with any of the above keys; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trading days.
    #[arg(long, default_value_t = 200)]
    pub length: usize,
    #[arg(long, default_value_t = 0.8)]
    pub coupling: f64,
    /// sentiment->finance, finance->sentiment or none.
    #[arg(long, default_value = "sentiment->finance")]
    pub direction: Direction,
    #[arg(long, default_value_t = 1.0)]
    pub noise_sd: f64,
    #[arg(long, value_delimiter = ',')]
    pub companies: Option<Vec<String>>,
    #[arg(long, default_value = "fixture")]
    pub out: PathBuf,
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    news: Option<PathBuf>,
    twitter: Option<PathBuf>,
    market_dir: Option<PathBuf>,
    index: Option<PathBuf>,
    companies: Option<Vec<String>>,
    relevance: Option<u8>,
    lag: Option<usize>,
    alpha: Option<f64>,
    out: Option<PathBuf>,
    mode: Option<String>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Statistical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Statistical(_) => 1,
            CliError::Io(_) | CliError::Validation(_) => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn stat<E: std::fmt::Display>(context: &str) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Statistical(format!("{context}: {e}"))
}

/// Fully resolved settings for a data command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub news: PathBuf,
    pub twitter: PathBuf,
    pub market_dir: PathBuf,
    pub index: PathBuf,
    pub companies: Vec<String>,
    pub relevance: u8,
    pub lag: usize,
    pub alpha: f64,
    pub out: PathBuf,
    pub mode: EvalMode,
}

impl RunConfig {
    /// Merges flags over the optional config file, fills defaults and checks
    /// that every input path exists.
    pub fn resolve(args: &DataArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = read_text(path)?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let required = |flag: &Option<PathBuf>, file: &Option<PathBuf>, name: &str| {
            flag.clone()
                .or_else(|| file.clone())
                .ok_or_else(|| CliError::Validation(format!("missing required input --{name}")))
        };
        let news = required(&args.news, &file.news, "news")?;
        let twitter = required(&args.twitter, &file.twitter, "twitter")?;
        let market_dir = required(&args.market_dir, &file.market_dir, "market-dir")?;
        let index = required(&args.index, &file.index, "index")?;
        for path in [&news, &twitter, &index] {
            if !path.is_file() {
                return Err(CliError::Io(format!(
                    "input file not found: {}",
                    path.display()
                )));
            }
        }
        if !market_dir.is_dir() {
            return Err(CliError::Io(format!(
                "market directory not found: {}",
                market_dir.display()
            )));
        }
        let mode = match (args.mode, file.mode) {
            (Some(m), _) => m,
            (None, Some(s)) => s.parse().map_err(CliError::Validation)?,
            (None, None) => EvalMode::default(),
        };
        let companies = match args.companies.clone().or(file.companies) {
            Some(c) => c,
            None => discover_companies(&market_dir)?,
        };
        if companies.is_empty() {
            return Err(CliError::Validation(
                "no companies given or found in the market directory".into(),
            ));
        }
        let lag = args.lag.or(file.lag).unwrap_or(granger::DEFAULT_LAG);
        if lag == 0 {
            return Err(CliError::Validation("--lag must be at least 1".into()));
        }
        let alpha = args.alpha.or(file.alpha).unwrap_or(granger::DEFAULT_ALPHA);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CliError::Validation(format!(
                "--alpha must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(RunConfig {
            news,
            twitter,
            market_dir,
            index,
            companies,
            relevance: args
                .relevance
                .or(file.relevance)
                .unwrap_or(ingest::DEFAULT_RELEVANCE),
            lag,
            alpha,
            out: args
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from("out")),
            mode,
        })
    }
}

fn discover_companies(dir: &Path) -> Result<Vec<String>> {
    let entries =
        std::fs::read_dir(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut out = BTreeSet::new();
    for entry in entries {
        let path = entry
            .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?
            .path();
        if path.extension().is_some_and(|x| x == "csv") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.insert(stem.to_string());
            }
        }
    }
    Ok(out.into_iter().collect())
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn ingest_err(path: &Path) -> impl Fn(ingest::IngestError) -> CliError + '_ {
    move |e| CliError::Validation(format!("{}: {e}", path.display()))
}

/// Per-company derived series.
#[derive(Debug, Clone)]
pub struct CompanyData {
    pub symbol: String,
    pub news: Vec<DailyAnalytics<f64>>,
    pub twitter: Vec<DailyAnalytics<f64>>,
    pub financial: FinancialSeries<f64>,
}

impl CompanyData {
    pub fn analytics(&self, source: Source) -> &[DailyAnalytics<f64>] {
        match source {
            Source::News => &self.news,
            Source::Twitter => &self.twitter,
        }
    }

    /// ER, VOL, G, B, V, SA, SR inner-joined on dates, unstandardized.
    pub fn frame(&self, source: Source) -> Result<AlignedFrame<f64>> {
        let days = self.analytics(source);
        let col = |f: &dyn Fn(&DailyAnalytics<f64>) -> f64| {
            DatedSeries::new(
                days.iter().map(|d| d.date).collect(),
                days.iter().map(f).collect(),
            )
        };
        let context = format!("{} {}", self.symbol, source);
        let series = [
            col(&|d| d.g as f64),
            col(&|d| d.b as f64),
            col(&|d| d.v as f64),
            col(&|d| d.sa as f64),
            col(&|d| d.sr),
        ]
        .into_iter()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(stat(&context))?;
        let names = [vars::G, vars::B, vars::V, vars::SA, vars::SR];
        let mut inputs: Vec<(&str, &DatedSeries<f64>)> = vec![
            (vars::ER, &self.financial.er),
            (vars::VOL, &self.financial.vol),
        ];
        inputs.extend(names.iter().copied().zip(series.iter()));
        align(&inputs).map_err(stat(&context))
    }
}

/// Parsed inputs restricted to the configured companies.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub companies: Vec<CompanyData>,
}

impl Inputs {
    pub fn load(cfg: &RunConfig) -> Result<Self> {
        let news = parse_news(open(&cfg.news)?).map_err(ingest_err(&cfg.news))?;
        let news = filter_relevant(&news, cfg.relevance);
        let twitter = parse_twitter(open(&cfg.twitter)?).map_err(ingest_err(&cfg.twitter))?;
        let index = parse_market(open(&cfg.index)?).map_err(ingest_err(&cfg.index))?;
        let mut tw_by_company: HashMap<&str, Vec<&TwitterDailyRecord>> = HashMap::new();
        for r in &twitter {
            tw_by_company.entry(r.company.as_str()).or_default().push(r);
        }
        let mut companies = Vec::with_capacity(cfg.companies.len());
        for symbol in &cfg.companies {
            let path = cfg.market_dir.join(format!("{symbol}.csv"));
            if !path.is_file() {
                return Err(CliError::Io(format!(
                    "market file not found: {}",
                    path.display()
                )));
            }
            let bars = parse_market(open(&path)?).map_err(ingest_err(&path))?;
            let financial = financial_series::<f64>(&bars, &index).map_err(stat(symbol))?;
            let calendar: Vec<NaiveDate> = bars.iter().map(|b| b.date).collect();
            let news = company_news(&news, symbol, &calendar);
            let twitter = company_twitter(
                tw_by_company.get(symbol.as_str()).map_or(&[][..], |v| v),
                symbol,
                &calendar,
            );
            companies.push(CompanyData {
                symbol: symbol.clone(),
                news,
                twitter,
                financial,
            });
        }
        Ok(Inputs { companies })
    }

    pub fn frames(&self, source: Source) -> Result<Vec<(String, AlignedFrame<f64>)>> {
        self.companies
            .iter()
            .map(|c| Ok((c.symbol.clone(), c.frame(source)?)))
            .collect()
    }
}

fn company_news(
    events: &[NewsEvent],
    symbol: &str,
    calendar: &[NaiveDate],
) -> Vec<DailyAnalytics<f64>> {
    aggregate_news_daily(events, symbol, calendar)
}

/// Social analytics on the stock's trading calendar; days without a record
/// are zero-filled.
fn company_twitter(
    records: &[&TwitterDailyRecord],
    symbol: &str,
    calendar: &[NaiveDate],
) -> Vec<DailyAnalytics<f64>> {
    let by_date: HashMap<NaiveDate, &TwitterDailyRecord> =
        records.iter().map(|r| (r.date, *r)).collect();
    let filled: Vec<TwitterDailyRecord> = calendar
        .iter()
        .map(|d| match by_date.get(d) {
            Some(r) => (*r).clone(),
            None => TwitterDailyRecord {
                date: *d,
                company: symbol.to_string(),
                volume: 0,
                positive: 0,
                negative: 0,
                neutral: 0,
            },
        })
        .collect();
    derive_twitter_analytics(&filled)
}

pub const ANALYTICS_HEADER: &str = "date,G,B,V,SA,SR";
pub const FINANCIAL_HEADER: &str = "date,ER,VOL";
pub const RESULTS_HEADER: &str = "source,company,cause,effect,k,f_stat,df_num,df_den,p_value,code";

fn analytics_csv(days: &[DailyAnalytics<f64>]) -> String {
    let mut out = format!("{ANALYTICS_HEADER}\n");
    for d in days {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            d.date.format("%Y-%m-%d"),
            d.g,
            d.b,
            d.v,
            d.sa,
            g17(d.sr)
        )
        .unwrap();
    }
    out
}

fn financial_csv(fin: &FinancialSeries<f64>) -> Result<String> {
    let frame =
        align(&[(vars::ER, &fin.er), (vars::VOL, &fin.vol)]).map_err(stat("financial series"))?;
    Ok(frame.to_csv())
}

pub fn cmd_analytics(cfg: &RunConfig, inputs: &Inputs) -> Result<()> {
    for c in &inputs.companies {
        let dir = cfg.out.join("analytics").join(&c.symbol);
        write_file(&dir.join("news.csv"), analytics_csv(&c.news).as_bytes())?;
        write_file(
            &dir.join("twitter.csv"),
            analytics_csv(&c.twitter).as_bytes(),
        )?;
        write_file(
            &dir.join("financial.csv"),
            financial_csv(&c.financial)?.as_bytes(),
        )?;
    }
    Ok(())
}

/// Results of both batteries for one source.
#[derive(Debug, Clone)]
pub struct SourceBattery {
    pub source: Source,
    pub returns: Vec<GrangerResult<f64>>,
    pub volatility: Vec<GrangerResult<f64>>,
}

pub fn granger_batteries(cfg: &RunConfig, inputs: &Inputs) -> Result<Vec<SourceBattery>> {
    // Social feed first, matching the graph numbering (a) social, (b) news.
    [Source::Twitter, Source::News]
        .into_iter()
        .map(|source| {
            let frames = inputs.frames(source)?;
            let context = format!("{source} granger battery");
            let returns =
                run_battery(&frames, &granger::return_pairs(), cfg.lag).map_err(stat(&context))?;
            let volatility = run_battery(&frames, &granger::volatility_pairs(), cfg.lag)
                .map_err(stat(&context))?;
            Ok(SourceBattery {
                source,
                returns,
                volatility,
            })
        })
        .collect()
}

fn results_csv(batteries: &[SourceBattery]) -> String {
    let mut out = format!("{RESULTS_HEADER}\n");
    for b in batteries {
        for r in b.returns.iter().chain(&b.volatility) {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                b.source,
                predict::csv_field(&r.company),
                r.cause,
                r.effect,
                r.lag_order,
                g17(r.f_test.f_stat),
                r.f_test.df_num,
                r.f_test.df_den,
                g17(r.f_test.p_value),
                significance_code(r.f_test.p_value),
            )
            .unwrap();
        }
    }
    out
}

pub fn cmd_granger(cfg: &RunConfig, inputs: &Inputs) -> Result<Vec<SourceBattery>> {
    let batteries = granger_batteries(cfg, inputs)?;
    let dir = cfg.out.join("granger");
    write_file(&dir.join("results.csv"), results_csv(&batteries).as_bytes())?;
    for b in &batteries {
        for (target, results) in [("er", &b.returns), ("vol", &b.volatility)] {
            let graph = build_graph(results, cfg.alpha);
            write_file(
                &dir.join(format!("{}_{target}.dot", b.source)),
                emit_dot(&graph).as_bytes(),
            )?;
        }
    }
    Ok(batteries)
}

pub fn comparisons(cfg: &RunConfig, inputs: &Inputs) -> Result<Vec<ModelComparison<f64>>> {
    let mut jobs = Vec::new();
    for c in &inputs.companies {
        for source in Source::ALL {
            jobs.push((c, source, c.frame(source)?));
        }
    }
    let nested: Vec<Result<[ModelComparison<f64>; 2]>> = jobs
        .par_iter()
        .map(|(c, source, frame)| {
            let context = format!("{} {source} regression", c.symbol);
            let er =
                fit_return_models(&c.symbol, *source, frame, cfg.mode).map_err(stat(&context))?;
            let vol = fit_volatility_models(
                &c.symbol,
                *source,
                frame,
                *source == Source::Twitter,
                cfg.mode,
            )
            .map_err(stat(&context))?;
            Ok([er, vol])
        })
        .collect();
    let mut out = Vec::with_capacity(2 * nested.len());
    for pair in nested {
        out.extend(pair?);
    }
    Ok(out)
}

fn predict_report(cfg: &RunConfig, comps: &[ModelComparison<f64>]) -> String {
    format!(
        "Evaluation mode: {}\n\n{}",
        cfg.mode.as_str(),
        comparison_report(comps)
    )
}

pub fn cmd_predict(cfg: &RunConfig, inputs: &Inputs) -> Result<Vec<ModelComparison<f64>>> {
    let comps = comparisons(cfg, inputs)?;
    let dir = cfg.out.join("predict");
    write_file(
        &dir.join("comparisons.csv"),
        predict::comparisons_csv(&comps).as_bytes(),
    )?;
    write_file(
        &dir.join("coefficients.csv"),
        predict::coefficients_csv(&comps).as_bytes(),
    )?;
    write_file(
        &dir.join("report.txt"),
        predict_report(cfg, &comps).as_bytes(),
    )?;
    Ok(comps)
}

/// Table of p-values with significance codes: rows are tested directions,
/// columns companies.
fn granger_table(out: &mut String, title: &str, results: &[GrangerResult<f64>]) {
    writeln!(out, "{title}").unwrap();
    let companies: BTreeSet<&str> = results.iter().map(|r| r.company.as_str()).collect();
    let mut rows: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(String, &str), String> = BTreeMap::new();
    for r in results {
        let dir = format!("{} -> {}", r.cause, r.effect);
        if !rows.contains(&dir) {
            rows.push(dir.clone());
        }
        cells.insert(
            (dir, &r.company),
            format!(
                "{}{}",
                p3(r.f_test.p_value),
                significance_code(r.f_test.p_value)
            ),
        );
    }
    write!(out, "{:<14}", "").unwrap();
    for c in &companies {
        write!(out, "{:>14}", c).unwrap();
    }
    out.push('\n');
    for row in rows {
        write!(out, "{:<14}", row).unwrap();
        for c in &companies {
            let cell = cells.get(&(row.clone(), *c)).map_or("N/A", String::as_str);
            write!(out, "{:>14}", cell).unwrap();
        }
        out.push('\n');
    }
    out.push('\n');
}

pub fn cmd_report(cfg: &RunConfig, inputs: &Inputs) -> Result<()> {
    cmd_analytics(cfg, inputs)?;
    let batteries = cmd_granger(cfg, inputs)?;
    let comps = cmd_predict(cfg, inputs)?;
    let mut out = String::new();
    writeln!(out, "Companies: {}", cfg.companies.join(", ")).unwrap();
    writeln!(
        out,
        "Relevance threshold: {}; Granger lag: {}; alpha: {}\n",
        cfg.relevance, cfg.lag, cfg.alpha
    )
    .unwrap();
    for b in &batteries {
        granger_table(
            &mut out,
            &format!("Granger causality p-values ({}, ER)", b.source),
            &b.returns,
        );
        granger_table(
            &mut out,
            &format!("Granger causality p-values ({}, VOL)", b.source),
            &b.volatility,
        );
    }
    out.push_str(&predict_report(cfg, &comps));
    write_file(&cfg.out.join("report.txt"), out.as_bytes())
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let defaults = SyntheticSpec::default();
    let spec = SyntheticSpec {
        seed: args.seed,
        length: args.length,
        coupling: args.coupling,
        direction: args.direction,
        noise_sd: args.noise_sd,
        companies: args.companies.clone().unwrap_or(defaults.companies),
        start: defaults.start,
    };
    let fixture = synthgen::generate(&spec).map_err(|e| CliError::Validation(e.to_string()))?;
    fixture
        .write_to(&args.out)
        .map_err(|e| CliError::Io(e.to_string()))
}

pub fn run(cli: Cli) -> Result<()> {
    let data = |args: &DataArgs| -> Result<(RunConfig, Inputs)> {
        let cfg = RunConfig::resolve(args)?;
        let inputs = Inputs::load(&cfg)?;
        Ok((cfg, inputs))
    };
    match &cli.command {
        Command::Analytics(a) => {
            let (cfg, inputs) = data(a)?;
            cmd_analytics(&cfg, &inputs)
        }
        Command::Granger(a) => {
            let (cfg, inputs) = data(a)?;
            cmd_granger(&cfg, &inputs).map(|_| ())
        }
        Command::Predict(a) => {
            let (cfg, inputs) = data(a)?;
            cmd_predict(&cfg, &inputs).map(|_| ())
        }
        Command::Report(a) => {
            let (cfg, inputs) = data(a)?;
            cmd_report(&cfg, &inputs)
        }
        Command::Synth(a) => cmd_synth(a),
    }
}
