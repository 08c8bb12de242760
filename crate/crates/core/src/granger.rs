//! Pairwise Granger-causality tests, test batteries and causality graphs.
//!
//! `x` Granger-causes `y` at lag order `k` when adding `x(t-1..t-k)` to an
//! autoregression of `y(t)` on `y(t-1..t-k)` significantly reduces the residual
//! sum of squares, judged by the nested-model F-test with `(k, T - 2k - 1)`
//! degrees of freedom.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::statcore::{nested_f_test, ols_fit, FTestResult, StatError};
use crate::timeseries::{lagged_design, mean_sd, AlignedFrame, SeriesError};
use crate::vars;

pub const DEFAULT_LAG: usize = 1;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrangerError {
    #[error("cause and effect are the same variable `{0}`")]
    SameVariable(String),
    #[error("lag order must be >= 1")]
    ZeroLag,
    #[error("series of length {got} too short for lag {lag} (need > {need})")]
    InsufficientLength { got: usize, lag: usize, need: usize },
    #[error("`{0}` has zero variance")]
    ZeroVariance(String),
    #[error("company `{company}` frame lacks column `{column}`")]
    MissingColumn { company: String, column: String },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Stat(#[from] StatError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrangerResult<T> {
    pub cause: String,
    pub effect: String,
    pub company: String,
    pub lag_order: usize,
    pub f_test: FTestResult<T>,
}

impl<T: Scalar> GrangerResult<T> {
    pub fn p_value(&self) -> T {
        self.f_test.p_value
    }
}

/// Tests `cause → effect` on two columns of `frame`.
pub fn granger_test<T: Scalar>(
    company: &str,
    frame: &AlignedFrame<T>,
    cause: &str,
    effect: &str,
    k: usize,
) -> Result<GrangerResult<T>, GrangerError> {
    if cause == effect {
        return Err(GrangerError::SameVariable(cause.to_string()));
    }
    if k == 0 {
        return Err(GrangerError::ZeroLag);
    }
    let need = 2 * k + 1;
    if frame.len() <= need {
        return Err(GrangerError::InsufficientLength {
            got: frame.len(),
            lag: k,
            need,
        });
    }
    for name in [cause, effect] {
        let (_, sd) = mean_sd(frame.column(name)?)?;
        if !(sd > T::zero()) {
            return Err(GrangerError::ZeroVariance(name.to_string()));
        }
    }
    let lags: Vec<usize> = (1..=k).collect();
    let restricted = lagged_design(frame, effect, &[(effect, lags.clone())])?;
    let full = lagged_design(frame, effect, &[(effect, lags.clone()), (cause, lags)])?;
    let restricted = ols_fit(&restricted)?;
    let full = ols_fit(&full)?;
    let f_test = nested_f_test(&restricted, &full)?;
    Ok(GrangerResult {
        cause: cause.to_string(),
        effect: effect.to_string(),
        company: company.to_string(),
        lag_order: k,
        f_test,
    })
}

/// (financial, sentiment) pairs tested against the excess return.
pub fn return_pairs() -> Vec<(&'static str, &'static str)> {
    vars::RETURN_SENTIMENT
        .iter()
        .map(|s| (vars::ER, *s))
        .collect()
}

/// (financial, sentiment) pairs tested against the volatility proxy.
pub fn volatility_pairs() -> Vec<(&'static str, &'static str)> {
    vars::VOLATILITY_SENTIMENT
        .iter()
        .map(|s| (vars::VOL, *s))
        .collect()
}

/// Runs both directions of every pair for every company.
///
/// Output order is company, then pair, then `sentiment → financial` before
/// `financial → sentiment`, regardless of how the work was scheduled.
pub fn run_battery<T: Scalar>(
    frames: &[(String, AlignedFrame<T>)],
    pairs: &[(&str, &str)],
    k: usize,
) -> Result<Vec<GrangerResult<T>>, GrangerError> {
    for (company, frame) in frames {
        for (fin, sent) in pairs {
            for col in [fin, sent] {
                if !frame.has_column(col) {
                    return Err(GrangerError::MissingColumn {
                        company: company.clone(),
                        column: col.to_string(),
                    });
                }
            }
        }
    }
    let jobs: Vec<(&str, &AlignedFrame<T>, &str, &str)> = frames
        .iter()
        .flat_map(|(company, frame)| {
            pairs.iter().flat_map(move |&(fin, sent)| {
                [
                    (company.as_str(), frame, sent, fin),
                    (company.as_str(), frame, fin, sent),
                ]
            })
        })
        .collect();
    jobs.into_par_iter()
        .map(|(company, frame, cause, effect)| granger_test(company, frame, cause, effect, k))
        .collect()
}

/// Directed graph of significant causalities; each edge carries the set of
/// companies for which it is significant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CausalityGraph {
    edges: BTreeMap<(String, String), BTreeSet<String>>,
}

impl CausalityGraph {
    /// Variables that appear on at least one edge.
    pub fn nodes(&self) -> BTreeSet<&str> {
        self.edges
            .keys()
            .flat_map(|(u, v)| [u.as_str(), v.as_str()])
            .collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, &BTreeSet<String>)> {
        self.edges
            .iter()
            .map(|((u, v), c)| (u.as_str(), v.as_str(), c))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn label(&self, cause: &str, effect: &str) -> Option<&BTreeSet<String>> {
        self.edges.get(&(cause.to_string(), effect.to_string()))
    }
}

/// Keeps every result with `p < alpha` as a labeled edge.
pub fn build_graph<T: Scalar>(results: &[GrangerResult<T>], alpha: T) -> CausalityGraph {
    let mut edges: BTreeMap<(String, String), BTreeSet<String>> = BTreeMap::new();
    for r in results.iter().filter(|r| r.p_value() < alpha) {
        edges
            .entry((r.cause.clone(), r.effect.clone()))
            .or_default()
            .insert(r.company.clone());
    }
    CausalityGraph { edges }
}

fn dot_id(s: &str) -> String {
    let plain = s
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain {
        s.to_string()
    } else {
        format!("\"{}\"", escape(s))
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Deterministic DOT rendering: sorted nodes, then sorted edges labeled with
/// comma-joined sorted company symbols.
pub fn emit_dot(graph: &CausalityGraph) -> String {
    let mut out = String::from("digraph causality {\n");
    for n in graph.nodes() {
        writeln!(out, "  {};", dot_id(n)).unwrap();
    }
    for (u, v, companies) in graph.edges() {
        let label: Vec<&str> = companies.iter().map(String::as_str).collect();
        writeln!(
            out,
            "  {} -> {} [label=\"{}\"];",
            dot_id(u),
            dot_id(v),
            escape(&label.join(","))
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
