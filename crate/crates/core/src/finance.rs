//! Log-returns, excess returns over an index, and the high/low volatility proxy.

use thiserror::Error;

use crate::ingest::MarketBar;
use crate::scalar::Scalar;
use crate::timeseries::{align, DatedSeries, SeriesError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FinanceError {
    #[error("need at least 2 bars, got {0}")]
    TooFewBars(usize),
    #[error("non-positive or non-finite price on {0}")]
    BadPrice(chrono::NaiveDate),
    #[error("high below low on {0}")]
    InvertedRange(chrono::NaiveDate),
    #[error("stock and index share no trading dates")]
    EmptyIntersection,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

pub type Result<T> = std::result::Result<T, FinanceError>;

fn price<T: Scalar>(bar: &MarketBar, v: f64) -> Result<T> {
    if !(v.is_finite() && v > 0.0) {
        return Err(FinanceError::BadPrice(bar.date));
    }
    Ok(T::lit(v))
}

/// `ln(close_t) - ln(close_{t-1})`, dated at `t`. Bars must be date sorted.
pub fn log_returns<T: Scalar>(bars: &[MarketBar]) -> Result<DatedSeries<T>> {
    if bars.len() < 2 {
        return Err(FinanceError::TooFewBars(bars.len()));
    }
    let logs = bars
        .iter()
        .map(|b| price::<T>(b, b.close).map(|p| p.ln()))
        .collect::<Result<Vec<T>>>()?;
    let values = logs.windows(2).map(|w| w[1] - w[0]).collect();
    let dates = bars[1..].iter().map(|b| b.date).collect();
    Ok(DatedSeries::new(dates, values)?)
}

/// Pointwise `stock - index` on the dates both series share.
pub fn excess_returns<T: Scalar>(
    stock: &DatedSeries<T>,
    index: &DatedSeries<T>,
) -> Result<DatedSeries<T>> {
    let frame = align(&[("stock", stock), ("index", index)]).map_err(|e| match e {
        SeriesError::EmptyIntersection => FinanceError::EmptyIntersection,
        other => other.into(),
    })?;
    let s = frame.column("stock")?;
    let i = frame.column("index")?;
    let values = s.iter().zip(i).map(|(&a, &b)| a - b).collect();
    Ok(DatedSeries::new(frame.dates().to_vec(), values)?)
}

/// `2 (high - low) / (high + low)` per bar.
pub fn volatility_proxy<T: Scalar>(bars: &[MarketBar]) -> Result<DatedSeries<T>> {
    let values = bars
        .iter()
        .map(|b| {
            let high = price::<T>(b, b.high)?;
            let low = price::<T>(b, b.low)?;
            if high < low {
                return Err(FinanceError::InvertedRange(b.date));
            }
            Ok(T::lit(2.0) * (high - low) / (high + low))
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(DatedSeries::new(
        bars.iter().map(|b| b.date).collect(),
        values,
    )?)
}

/// Excess log-return and volatility proxy for one stock.
///
/// `er` starts one bar later than `vol` since the first return is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct FinancialSeries<T> {
    pub er: DatedSeries<T>,
    pub vol: DatedSeries<T>,
}

pub fn financial_series<T: Scalar>(
    stock: &[MarketBar],
    index: &[MarketBar],
) -> Result<FinancialSeries<T>> {
    let er = excess_returns(&log_returns(stock)?, &log_returns(index)?)?;
    let vol = volatility_proxy(stock)?;
    Ok(FinancialSeries { er, vol })
}
