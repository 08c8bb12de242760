//! Daily sentiment analytics (G, B, V, SA, SR) for the news and social feeds.

use std::collections::HashMap;

use chrono::NaiveDate;
use thiserror::Error;

use crate::ingest::{NewsEvent, TwitterDailyRecord};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SentimentError {
    #[error("event sentiment score {0} outside [0, 100]")]
    EssOutOfRange(u32),
}

/// Which feed a set of analytics was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    News,
    Twitter,
}

impl Source {
    pub const ALL: [Source; 2] = [Source::News, Source::Twitter];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::News => "news",
            Source::Twitter => "twitter",
        }
    }
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Event sentiment score mapped affinely onto `[-1, 1]`, 50 being neutral.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NormalizedEss<T>(T);

impl<T: Scalar> NormalizedEss<T> {
    pub fn value(self) -> T {
        self.0
    }
}

pub fn normalize_ess<T: Scalar>(ess: u32) -> Result<NormalizedEss<T>, SentimentError> {
    if ess > 100 {
        return Err(SentimentError::EssOutOfRange(ess));
    }
    Ok(NormalizedEss(
        (T::from_count(ess as usize) - T::lit(50.0)) / T::lit(50.0),
    ))
}

/// Per-company, per-day sentiment bundle.
///
/// Holds `sa == g - b`, `g + b <= v` and `-1 <= sr <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyAnalytics<T> {
    pub date: NaiveDate,
    pub g: u64,
    pub b: u64,
    pub v: u64,
    pub sa: i64,
    pub sr: T,
}

impl<T: Scalar> DailyAnalytics<T> {
    fn empty(date: NaiveDate) -> Self {
        DailyAnalytics {
            date,
            g: 0,
            b: 0,
            v: 0,
            sa: 0,
            sr: T::zero(),
        }
    }
}

/// Buckets `company`'s events by calendar date onto `calendar`.
///
/// Events are expected to be relevance-filtered already. Dates without events
/// are zero-filled with `sr = 0`; events dated outside the calendar are dropped.
/// Stories with `ess == 50` count towards `v` and the `sr` mean only.
pub fn aggregate_news_daily<T: Scalar>(
    events: &[NewsEvent],
    company: &str,
    calendar: &[NaiveDate],
) -> Vec<DailyAnalytics<T>> {
    let index: HashMap<NaiveDate, usize> =
        calendar.iter().enumerate().map(|(i, d)| (*d, i)).collect();
    let mut out: Vec<DailyAnalytics<T>> =
        calendar.iter().map(|d| DailyAnalytics::empty(*d)).collect();
    // Integer sums of (ess - 50) keep the mean exact and order independent.
    let mut ess_sum = vec![0i64; calendar.len()];
    for e in events.iter().filter(|e| e.company == company) {
        let Some(&i) = index.get(&e.date) else {
            continue;
        };
        let day = &mut out[i];
        day.v += 1;
        match e.ess.cmp(&50) {
            std::cmp::Ordering::Greater => day.g += 1,
            std::cmp::Ordering::Less => day.b += 1,
            std::cmp::Ordering::Equal => {}
        }
        ess_sum[i] += e.ess as i64 - 50;
    }
    for (day, sum) in out.iter_mut().zip(ess_sum) {
        day.sa = day.g as i64 - day.b as i64;
        if day.v > 0 {
            let mean = T::from_i64(sum).expect("i64 fits scalar")
                / (T::lit(50.0) * T::from_count(day.v as usize));
            day.sr = mean.max(-T::one()).min(T::one());
        }
    }
    out
}

/// Maps daily counts to analytics: `g`/`b` are the positive/negative English
/// counts, `v` the all-language volume and `sr = (g - b) / (g + b)` (0 when
/// both counts are zero). Neutral messages are not used.
pub fn derive_twitter_analytics<T: Scalar>(
    records: &[TwitterDailyRecord],
) -> Vec<DailyAnalytics<T>> {
    records
        .iter()
        .map(|r| {
            let (g, b) = (r.positive, r.negative);
            let sa = g as i64 - b as i64;
            let sr = if g + b == 0 {
                T::zero()
            } else {
                T::from_i64(sa).expect("i64 fits scalar")
                    / T::from_u64(g + b).expect("u64 fits scalar")
            };
            DailyAnalytics {
                date: r.date,
                g,
                b,
                v: r.volume,
                sa,
                sr,
            }
        })
        .collect()
}
