//! Sentiment analytics and Granger-causality tooling for daily equity data.
//!
//! The pipeline ingests scored news stories, daily social-media message counts
//! and market bars; derives daily sentiment series (G, B, V, SA, SR) and
//! financial variables (excess log-return ER, range volatility VOL); then tests
//! their interplay with pairwise Granger-causality batteries and compares
//! autoregressive models with and without lagged sentiment.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`, which is what the CLI uses.

#![allow(
    clippy::excessive_precision,
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord
)]

pub mod cli;
pub mod finance;
pub mod granger;
pub mod ingest;
pub mod numfmt;
pub mod predict;
pub mod scalar;
pub mod sentiment;
pub mod statcore;
pub mod synthgen;
pub mod timeseries;
pub mod vars;

pub use scalar::Scalar;

pub type DailyAnalytics = sentiment::DailyAnalytics<f64>;
pub type DatedSeries = timeseries::DatedSeries<f64>;
pub type AlignedFrame = timeseries::AlignedFrame<f64>;
pub type DesignMatrix = timeseries::DesignMatrix<f64>;
pub type FinancialSeries = finance::FinancialSeries<f64>;
pub type OlsFit = statcore::OlsFit<f64>;
pub type FTestResult = statcore::FTestResult<f64>;
pub type GrangerResult = granger::GrangerResult<f64>;
pub type ModelComparison = predict::ModelComparison<f64>;
