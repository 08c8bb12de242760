//! Seeded synthetic fixtures with a planted causal direction.
//!
//! A fixture is a full input set for the pipeline: scored news stories, daily
//! social-media counts, one market file per company, an index file and a JSON
//! manifest. Every draw comes from a single [`Rng`] stream in a fixed order, so
//! a seed reproduces the bytes exactly.
//!
//! Per trading day `i` and company, with `eps ~ N(0, noise_sd)`,
//! `xi ~ N(0, noise_sd)` and `eta ~ N(0, 1)`:
//!
//! * latent sentiment `s_i = tanh(eta_i)`, or `tanh(coupling * eps_{i-1} + eta_i)`
//!   when finance drives sentiment;
//! * counts `G = round(c (1 + s) / 2)`, `B = round(c (1 - s) / 2)` with a daily
//!   base count `c` uniform on `10..=30` (mean 20), giving the realized
//!   `SR_i = (G - B) / (G + B)`;
//! * excess log-return `ER_i = 0.01 (coupling * SR_{i-1} + eps_i)` when sentiment
//!   drives finance, else `0.01 eps_i`;
//! * volatility proxy `VOL_i = 0.02 exp(0.25 (xi_i - coupling * SR_{i-1}))` when
//!   sentiment drives finance, else `0.02 exp(0.25 xi_i)`.
//!
//! The index follows an independent random walk and each stock's log-return is
//! the index log-return plus `ER_i`. Bars are built so that the high/low range
//! reproduces `VOL_i`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, NaiveTime, Weekday};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::Serialize;
use thiserror::Error;

use crate::ingest::{
    write_market, write_news, write_twitter, MarketBar, NewsEvent, TwitterDailyRecord,
};

pub const MIN_LENGTH: usize = 50;
/// Mean daily count of polarized messages; the daily base is drawn uniformly
/// from `BASE_COUNT - BASE_SPREAD ..= BASE_COUNT + BASE_SPREAD`.
pub const BASE_COUNT: u64 = 20;
pub const BASE_SPREAD: u64 = 10;

/// Portable generator: xoshiro256** seeded through SplitMix64, 53-bit uniforms
/// and polar-method normals.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: Xoshiro256StarStar,
    spare: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            inner: Xoshiro256StarStar::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((self.uniform() * n as f64) as u64).min(n - 1)
    }

    /// Standard normal. Each accepted polar pair yields two variates; the
    /// second is returned by the next call.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * m);
                return u * m;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum Direction {
    #[serde(rename = "sentiment->finance")]
    #[default]
    SentimentToFinance,
    #[serde(rename = "finance->sentiment")]
    FinanceToSentiment,
    #[serde(rename = "none")]
    None,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::SentimentToFinance => "sentiment->finance",
            Direction::FinanceToSentiment => "finance->sentiment",
            Direction::None => "none",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sentiment->finance" | "sentiment" => Ok(Direction::SentimentToFinance),
            "finance->sentiment" | "finance" => Ok(Direction::FinanceToSentiment),
            "none" => Ok(Direction::None),
            other => Err(format!("unknown direction `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticSpec {
    pub seed: u64,
    /// Number of trading days.
    pub length: usize,
    pub coupling: f64,
    pub direction: Direction,
    pub noise_sd: f64,
    pub companies: Vec<String>,
    pub start: NaiveDate,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            seed: 0,
            length: 200,
            coupling: 0.8,
            direction: Direction::SentimentToFinance,
            noise_sd: 1.0,
            companies: vec!["SYNA.N".into(), "SYNB.N".into()],
            start: NaiveDate::from_ymd_opt(2014, 1, 6).expect("valid date"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("length must be at least {MIN_LENGTH} trading days, got {0}")]
    TooShort(usize),
    #[error("noise_sd must be positive and finite, got {0}")]
    NoiseSd(f64),
    #[error("coupling must be finite, got {0}")]
    Coupling(f64),
    #[error("at least one company is required")]
    NoCompanies,
    #[error("company symbol `{0}` is not usable as a file name")]
    BadSymbol(String),
    #[error("company `{0}` listed twice")]
    DuplicateSymbol(String),
    #[error("io error writing {path}: {message}")]
    Io { path: String, message: String },
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.length < MIN_LENGTH {
            return Err(SynthError::TooShort(self.length));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd > 0.0) {
            return Err(SynthError::NoiseSd(self.noise_sd));
        }
        if !self.coupling.is_finite() {
            return Err(SynthError::Coupling(self.coupling));
        }
        if self.companies.is_empty() {
            return Err(SynthError::NoCompanies);
        }
        for (i, c) in self.companies.iter().enumerate() {
            let ok = !c.is_empty()
                && c != "index"
                && !c.starts_with('.')
                && c.chars()
                    .all(|ch| ch.is_ascii_alphanumeric() || "._-".contains(ch));
            if !ok {
                return Err(SynthError::BadSymbol(c.clone()));
            }
            if self.companies[..i].contains(c) {
                return Err(SynthError::DuplicateSymbol(c.clone()));
            }
        }
        Ok(())
    }
}

/// Generated file contents, keyed as they are laid out on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub news: Vec<u8>,
    pub twitter: Vec<u8>,
    pub index: Vec<u8>,
    /// Symbol to market CSV.
    pub market: BTreeMap<String, Vec<u8>>,
    pub manifest: String,
}

pub const NEWS_FILE: &str = "news.csv";
pub const TWITTER_FILE: &str = "twitter.csv";
pub const INDEX_FILE: &str = "index.csv";
pub const MARKET_DIR: &str = "market";
pub const MANIFEST_FILE: &str = "manifest.json";

impl Fixture {
    /// Writes `news.csv`, `twitter.csv`, `index.csv`, `market/<SYMBOL>.csv` and
    /// `manifest.json` under `dir`, creating directories as needed.
    pub fn write_to(&self, dir: &Path) -> Result<(), SynthError> {
        let io = |path: &Path, e: std::io::Error| SynthError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let market = dir.join(MARKET_DIR);
        std::fs::create_dir_all(&market).map_err(|e| io(&market, e))?;
        let mut files: Vec<(std::path::PathBuf, &[u8])> = vec![
            (dir.join(NEWS_FILE), &self.news),
            (dir.join(TWITTER_FILE), &self.twitter),
            (dir.join(INDEX_FILE), &self.index),
            (dir.join(MANIFEST_FILE), self.manifest.as_bytes()),
        ];
        for (sym, bytes) in &self.market {
            files.push((market.join(format!("{sym}.csv")), bytes));
        }
        for (path, bytes) in files {
            std::fs::write(&path, bytes).map_err(|e| io(&path, e))?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    generator: &'static str,
    spec: &'a SyntheticSpec,
    first_trading_day: NaiveDate,
    last_trading_day: NaiveDate,
    files: Vec<String>,
}

/// `n` consecutive weekdays from `start` (moved forward to a weekday).
pub fn trading_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

fn counts(base: u64, s: f64) -> (u64, u64) {
    let c = base as f64;
    let g = (c * (1.0 + s) / 2.0).round() as u64;
    let b = (c * (1.0 - s) / 2.0).round() as u64;
    (g, b)
}

fn ratio(g: u64, b: u64) -> f64 {
    if g + b == 0 {
        0.0
    } else {
        (g as f64 - b as f64) / (g + b) as f64
    }
}

/// Bar with close `p` whose high/low proxy equals `v` (`0 <= v < 2`).
fn bar(date: NaiveDate, p: f64, v: f64, u: f64) -> MarketBar {
    let high = p * (1.0 + u * v);
    let low = (high * (2.0 - v) / (2.0 + v)).min(p);
    MarketBar {
        date,
        close: p,
        high: high.max(p),
        low,
    }
}

fn clamp_vol(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

struct CompanyDraws {
    bars: Vec<MarketBar>,
    twitter: Vec<TwitterDailyRecord>,
    news: Vec<NewsEvent>,
}

fn company(
    spec: &SyntheticSpec,
    symbol: &str,
    rng: &mut Rng,
    days: &[NaiveDate],
    index_returns: &[f64],
    story_counter: &mut u64,
) -> CompanyDraws {
    let first = days[0];
    let last = *days.last().expect("non-empty calendar");
    let c = spec.coupling;
    let mut bars = Vec::with_capacity(days.len());
    let mut twitter = Vec::new();
    let mut news = Vec::new();
    let mut price = 20.0 + 80.0 * rng.uniform();
    let mut prev: Option<(f64, f64)> = None; // (SR, eps) of the previous trading day
    let mut ti = 0;
    let mut d = first;
    while d <= last {
        let trading = days.get(ti) == Some(&d);
        let eta = rng.normal();
        let (eps, xi, u) = if trading {
            (
                spec.noise_sd * rng.normal(),
                spec.noise_sd * rng.normal(),
                rng.uniform(),
            )
        } else {
            (0.0, 0.0, 0.0)
        };
        let latent = match (spec.direction, trading, prev) {
            (Direction::FinanceToSentiment, true, Some((_, e))) => (c * e + eta).tanh(),
            _ => eta.tanh(),
        };
        let base = BASE_COUNT - BASE_SPREAD + rng.below(2 * BASE_SPREAD + 1);
        let (g, b) = counts(base, latent);
        let neutral = rng.below(31);
        let other = rng.below(51);
        twitter.push(TwitterDailyRecord {
            date: d,
            company: symbol.to_string(),
            volume: g + b + neutral + other,
            positive: g,
            negative: b,
            neutral,
        });
        let sr = ratio(g, b);

        let stories = rng.below(5);
        for _ in 0..stories {
            *story_counter += 1;
            let relevant = rng.uniform() < 0.5;
            let relevance = if relevant {
                100
            } else {
                20 + rng.below(80) as u8
            };
            let noisy = (latent + 0.2 * rng.normal()).clamp(-1.0, 1.0);
            let ess = if relevant {
                (50.0 + 50.0 * noisy).round() as u8
            } else {
                rng.below(101) as u8
            };
            let time = NaiveTime::from_num_seconds_from_midnight_opt(rng.below(86_400) as u32, 0)
                .expect("in range");
            news.push(NewsEvent {
                story_id: format!("{:016X}", *story_counter ^ 0x5EED_0000_0000_0000),
                company: symbol.to_string(),
                date: d,
                time,
                relevance,
                ess,
            });
        }

        if trading {
            let planted = matches!(spec.direction, Direction::SentimentToFinance);
            let lag_sr = prev.map(|(s, _)| s).unwrap_or(0.0);
            let (er, log_vol) = if planted {
                (0.01 * (c * lag_sr + eps), 0.25 * (xi - c * lag_sr))
            } else {
                (0.01 * eps, 0.25 * xi)
            };
            if ti > 0 {
                price *= (index_returns[ti] + er).exp();
            }
            bars.push(bar(d, price, clamp_vol(0.02 * log_vol.exp()), u));
            prev = Some((sr, eps));
            ti += 1;
        }
        d += Duration::days(1);
    }
    CompanyDraws {
        bars,
        twitter,
        news,
    }
}

/// Builds a fixture. Fails only on an invalid spec.
pub fn generate(spec: &SyntheticSpec) -> Result<Fixture, SynthError> {
    spec.validate()?;
    let mut rng = Rng::new(spec.seed);
    let days = trading_days(spec.start, spec.length);

    let mut index_price = 1000.0;
    let mut index_returns = vec![0.0; days.len()];
    let mut index_bars = Vec::with_capacity(days.len());
    for (i, &d) in days.iter().enumerate() {
        if i > 0 {
            index_returns[i] = 0.01 * rng.normal();
            index_price *= index_returns[i].exp();
        }
        let v = clamp_vol(0.015 * (0.25 * rng.normal()).exp());
        index_bars.push(bar(d, index_price, v, rng.uniform()));
    }

    let mut story_counter = 0;
    let mut twitter = Vec::new();
    let mut news = Vec::new();
    let mut market = BTreeMap::new();
    for symbol in &spec.companies {
        let draws = company(
            spec,
            symbol,
            &mut rng,
            &days,
            &index_returns,
            &mut story_counter,
        );
        twitter.extend(draws.twitter);
        news.extend(draws.news);
        market.insert(symbol.clone(), write_market(&draws.bars));
    }
    news.sort_by(|a, b| {
        (a.date, a.time, &a.company, &a.story_id).cmp(&(b.date, b.time, &b.company, &b.story_id))
    });

    let mut files = vec![
        NEWS_FILE.to_string(),
        TWITTER_FILE.to_string(),
        INDEX_FILE.to_string(),
    ];
    files.extend(
        spec.companies
            .iter()
            .map(|s| format!("{MARKET_DIR}/{s}.csv")),
    );
    let manifest = Manifest {
        generator: "xoshiro256** (splitmix64 seeding), polar-method normals",
        spec,
        first_trading_day: days[0],
        last_trading_day: *days.last().expect("length >= 50"),
        files,
    };
    let mut manifest = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    manifest.push('\n');

    Ok(Fixture {
        news: write_news(&news),
        twitter: write_twitter(&twitter),
        index: write_market(&index_bars),
        market,
        manifest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finance::financial_series;
    use crate::ingest::{parse_market, parse_news, parse_twitter};
    use crate::sentiment::derive_twitter_analytics;

    #[test]
    fn rng_reference_stream() {
        // SplitMix64 seeding then xoshiro256**: the first outputs for seed 0
        // are fixed forever.
        let mut a = Rng::new(0);
        let mut b = Rng::new(0);
        let xs: Vec<u64> = (0..4).map(|_| a.next_u64()).collect();
        assert_eq!(xs, (0..4).map(|_| b.next_u64()).collect::<Vec<_>>());
        assert_ne!(Rng::new(1).next_u64(), xs[0]);
        let mut r = Rng::new(7);
        let n = 20_000;
        let (mut s, mut ss) = (0.0, 0.0);
        for _ in 0..n {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
            let z = r.normal();
            s += z;
            ss += z * z;
        }
        assert!((s / n as f64).abs() < 0.03);
        assert!((ss / n as f64 - 1.0).abs() < 0.05);
    }

    #[test]
    fn bars_reproduce_volatility() {
        for (v, u) in [(0.0, 0.3), (0.02, 0.0), (0.05, 1.0), (0.9, 0.5)] {
            let b = bar(NaiveDate::from_ymd_opt(2014, 1, 6).unwrap(), 50.0, v, u);
            assert!(b.validate().is_ok(), "{b:?}");
            let got = 2.0 * (b.high - b.low) / (b.high + b.low);
            assert!((got - v).abs() < 1e-14, "{v} {got}");
        }
    }

    #[test]
    fn counts_track_latent() {
        for base in 10..=30 {
            for s in [-1.0, -0.37, 0.0, 0.5, 0.99, 1.0] {
                let (g, b) = counts(base, s);
                assert!(
                    (ratio(g, b) - s).abs() <= 1.0 / (g + b) as f64 + 1e-12,
                    "{base} {s}"
                );
            }
        }
        assert_eq!(counts(20, 1.0), (20, 0));
        assert_eq!(counts(20, 0.0), (10, 10));
    }

    #[test]
    fn spec_bounds() {
        let ok = SyntheticSpec::default();
        assert!(ok.validate().is_ok());
        let short = SyntheticSpec {
            length: 10,
            ..ok.clone()
        };
        assert_eq!(generate(&short).unwrap_err(), SynthError::TooShort(10));
        let noise = SyntheticSpec {
            noise_sd: 0.0,
            ..ok.clone()
        };
        assert_eq!(noise.validate(), Err(SynthError::NoiseSd(0.0)));
        let bad = SyntheticSpec {
            companies: vec!["../x".into()],
            ..ok.clone()
        };
        assert!(matches!(bad.validate(), Err(SynthError::BadSymbol(_))));
        let dup = SyntheticSpec {
            companies: vec!["A".into(), "A".into()],
            ..ok
        };
        assert!(matches!(
            dup.validate(),
            Err(SynthError::DuplicateSymbol(_))
        ));
    }

    #[test]
    fn deterministic_and_parseable() {
        let spec = SyntheticSpec {
            length: 60,
            ..Default::default()
        };
        let a = generate(&spec).unwrap();
        assert_eq!(a, generate(&spec).unwrap());
        assert_ne!(
            a,
            generate(&SyntheticSpec {
                seed: 1,
                ..spec.clone()
            })
            .unwrap()
        );

        let news = parse_news(&a.news[..]).unwrap();
        assert!(!news.is_empty());
        let tw = parse_twitter(&a.twitter[..]).unwrap();
        let index = parse_market(&a.index[..]).unwrap();
        assert_eq!(index.len(), 60);
        for sym in &spec.companies {
            let bars = parse_market(&a.market[sym][..]).unwrap();
            assert_eq!(bars.len(), 60);
            assert!(bars
                .iter()
                .all(|b| !matches!(b.date.weekday(), Weekday::Sat | Weekday::Sun)));
            let fin = financial_series::<f64>(&bars, &index).unwrap();
            assert_eq!(fin.er.len(), 59);
            let days = tw.iter().filter(|r| &r.company == sym).count();
            assert_eq!(days as i64, (bars[59].date - bars[0].date).num_days() + 1);
        }
        let json: serde_json::Value = serde_json::from_str(&a.manifest).unwrap();
        assert_eq!(json["spec"]["length"], 60);
        assert_eq!(json["spec"]["direction"], "sentiment->finance");
    }

    #[test]
    fn planted_return_equation_holds() {
        let spec = SyntheticSpec {
            length: 80,
            companies: vec!["X".into()],
            ..Default::default()
        };
        let f = generate(&spec).unwrap();
        let index = parse_market(&f.index[..]).unwrap();
        let bars = parse_market(&f.market["X"][..]).unwrap();
        let fin = financial_series::<f64>(&bars, &index).unwrap();
        let sr: BTreeMap<NaiveDate, f64> =
            derive_twitter_analytics::<f64>(&parse_twitter(&f.twitter[..]).unwrap())
                .into_iter()
                .map(|a| (a.date, a.sr))
                .collect();
        // Regress ER on the previous trading day's SR; with noise_sd = 1 the
        // residual scale is 0.01 and the slope should be near 0.008.
        let (mut sxy, mut sxx, mut sx, mut sy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for w in bars.windows(2).skip(1) {
            let x = sr[&w[0].date];
            let y = fin.er.get(w[1].date).unwrap();
            sxy += x * y;
            sxx += x * x;
            sx += x;
            sy += y;
            n += 1.0;
        }
        let slope = (sxy - sx * sy / n) / (sxx - sx * sx / n);
        assert!((slope - 0.008).abs() < 0.004, "{slope}");
    }
}
