//! Least squares, nested-model F-tests and the distribution functions behind
//! their p-values.

mod ols;
pub mod special;

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

pub use ols::{ols_fit, OlsFit};
pub use special::{beta_reg, f_cdf, f_sf, ln_beta, ln_gamma, t_sf_two_sided};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatError {
    #[error("design has no columns")]
    EmptyDesign,
    #[error("{rows} observations cannot identify {cols} coefficients")]
    Underdetermined { rows: usize, cols: usize },
    #[error("design is rank deficient at column `{column}`")]
    RankDeficient { column: String },
    #[error("{0}")]
    Domain(String),
    #[error("restricted model is not a strict subset of the full model")]
    NotNested,
    #[error("models were not estimated on the same response rows")]
    SampleMismatch,
    #[error("full model fits exactly; F statistic undefined")]
    PerfectFit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FTestResult<T> {
    pub f_stat: T,
    pub df_num: usize,
    pub df_den: usize,
    pub p_value: T,
}

/// Tests the coefficients in `full` but not in `restricted` jointly against zero.
pub fn nested_f_test<T: Scalar>(
    restricted: &OlsFit<T>,
    full: &OlsFit<T>,
) -> Result<FTestResult<T>, StatError> {
    let small: HashSet<&str> = restricted.names().iter().map(String::as_str).collect();
    let big: HashSet<&str> = full.names().iter().map(String::as_str).collect();
    if !small.is_subset(&big) || small.len() >= big.len() {
        return Err(StatError::NotNested);
    }
    if restricted.response() != full.response() {
        return Err(StatError::SampleMismatch);
    }
    let q = full.n_coefficients() - restricted.n_coefficients();
    let df_den = full.dof();
    if !(full.rss() > T::zero()) {
        return Err(StatError::PerfectFit);
    }
    let gain = (restricted.rss() - full.rss()).max(T::zero());
    let f_stat = (gain / T::from_count(q)) / (full.rss() / T::from_count(df_den));
    let p_value = f_sf(f_stat, q, df_den)?;
    Ok(FTestResult {
        f_stat,
        df_num: q,
        df_den,
        p_value,
    })
}

/// Significance stars: `p < 0.01` → `***`, `p < 0.05` → `**`, `p < 0.1` → `*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SignificanceCode {
    None,
    Weak,
    Moderate,
    Strong,
}

impl SignificanceCode {
    pub fn as_str(self) -> &'static str {
        match self {
            SignificanceCode::Strong => "***",
            SignificanceCode::Moderate => "**",
            SignificanceCode::Weak => "*",
            SignificanceCode::None => "",
        }
    }
}

impl fmt::Display for SignificanceCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn significance_code<T: Scalar>(p: T) -> SignificanceCode {
    if p < T::lit(0.01) {
        SignificanceCode::Strong
    } else if p < T::lit(0.05) {
        SignificanceCode::Moderate
    } else if p < T::lit(0.1) {
        SignificanceCode::Weak
    } else {
        SignificanceCode::None
    }
}
