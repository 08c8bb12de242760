//! Market-only (M0) versus sentiment-augmented (M1) autoregressions for the
//! excess return and the volatility proxy.
//!
//! * ER: M0 = {1, ER(t-1), ER(t-2)}; M1 adds G(t-1), B(t-1), SR(t-1).
//! * VOL: M0 = {1, VOL(t-1), VOL(t-2)}; M1 adds G(t-1), B(t-1) and, for the
//!   social feed only, V(t-1).
//!
//! SA is never a regressor (it is G - B). Both models share the response rows
//! left after the two-day financial lag.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::numfmt::{g17, sci};
use crate::scalar::Scalar;
use crate::sentiment::Source;
use crate::statcore::{ols_fit, significance_code, OlsFit, StatError};
use crate::timeseries::{lagged_design, AlignedFrame, DesignMatrix, SeriesError, INTERCEPT};
use crate::vars;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PredictError {
    #[error("volume regressor requested but frame has no `V` column")]
    MissingVolume,
    #[error("the news volatility model excludes the story volume")]
    NewsVolume,
    #[error("need more than 5 observations, got {0}")]
    TooShort(usize),
    #[error("walk-forward evaluation needs more rows than {0}")]
    WalkForwardTooShort(usize),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Stat(#[from] StatError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Return,
    Volatility,
}

impl Target {
    pub fn column(self) -> &'static str {
        match self {
            Target::Return => vars::ER,
            Target::Volatility => vars::VOL,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

/// How residual error is scored for the model comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    /// Residual standard error of the full-sample fits.
    #[default]
    InSample,
    /// Root mean squared one-step-ahead error of expanding-window refits over
    /// the second half of the sample.
    WalkForward,
}

impl EvalMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalMode::InSample => "in-sample",
            EvalMode::WalkForward => "walk-forward",
        }
    }
}

impl std::str::FromStr for EvalMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "in-sample" => Ok(EvalMode::InSample),
            "walk-forward" => Ok(EvalMode::WalkForward),
            other => Err(format!(
                "unknown mode `{other}` (expected in-sample or walk-forward)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelComparison<T> {
    pub company: String,
    pub source: Source,
    pub target: Target,
    pub mode: EvalMode,
    pub m0: OlsFit<T>,
    pub m1: OlsFit<T>,
    /// Error score of each model: the RSE in-sample, the RMSE walk-forward.
    pub score_m0: T,
    pub score_m1: T,
    /// `100 (score_m0 - score_m1) / score_m0`.
    pub rse_improvement_pct: T,
}

fn compare<T: Scalar>(
    company: &str,
    source: Source,
    target: Target,
    frame: &AlignedFrame<T>,
    sentiment: &[&str],
    mode: EvalMode,
) -> Result<ModelComparison<T>, PredictError> {
    if frame.len() <= 5 {
        return Err(PredictError::TooShort(frame.len()));
    }
    let y = target.column();
    let mut cols = vec![y];
    cols.extend_from_slice(sentiment);
    let frame = frame.select(&cols)?.standardized()?;

    let own = (y, vec![1, 2]);
    let mut spec1 = vec![own.clone()];
    spec1.extend(sentiment.iter().map(|s| (*s, vec![1])));
    let d0 = lagged_design(&frame, y, &[own])?;
    let d1 = lagged_design(&frame, y, &spec1)?;
    debug_assert_eq!(d0.dates(), d1.dates());
    let m0 = ols_fit(&d0)?;
    let m1 = ols_fit(&d1)?;
    let (score_m0, score_m1) = match mode {
        EvalMode::InSample => (m0.rse(), m1.rse()),
        EvalMode::WalkForward => (
            walk_forward_rmse(&d0, d1.cols())?,
            walk_forward_rmse(&d1, d1.cols())?,
        ),
    };
    let rse_improvement_pct = T::lit(100.0) * (score_m0 - score_m1) / score_m0;
    Ok(ModelComparison {
        company: company.to_string(),
        source,
        target,
        mode,
        m0,
        m1,
        score_m0,
        score_m1,
        rse_improvement_pct,
    })
}

/// One-step-ahead RMSE over rows `start..n`, refitting on rows `0..t` each step.
/// `widest` is the column count of the largest model compared, so both models
/// are scored on the same rows.
fn walk_forward_rmse<T: Scalar>(
    design: &DesignMatrix<T>,
    widest: usize,
) -> Result<T, PredictError> {
    let n = design.rows();
    let start = (n / 2).max(widest + 2);
    if start >= n {
        return Err(PredictError::WalkForwardTooShort(n));
    }
    let mut ss = T::zero();
    for t in start..n {
        let fit = ols_fit(&design.slice_rows(0..t))?;
        let e = design.response()[t] - fit.predict(&design.row(t));
        ss = ss + e * e;
    }
    Ok((ss / T::from_count(n - start)).sqrt())
}

/// ER models; `frame` must hold ER, G, B and SR.
pub fn fit_return_models<T: Scalar>(
    company: &str,
    source: Source,
    frame: &AlignedFrame<T>,
    mode: EvalMode,
) -> Result<ModelComparison<T>, PredictError> {
    compare(
        company,
        source,
        Target::Return,
        frame,
        &[vars::G, vars::B, vars::SR],
        mode,
    )
}

/// VOL models; `frame` must hold VOL, G, B and, with `include_volume`, V.
pub fn fit_volatility_models<T: Scalar>(
    company: &str,
    source: Source,
    frame: &AlignedFrame<T>,
    include_volume: bool,
    mode: EvalMode,
) -> Result<ModelComparison<T>, PredictError> {
    if include_volume {
        if source == Source::News {
            return Err(PredictError::NewsVolume);
        }
        if !frame.has_column(vars::V) {
            return Err(PredictError::MissingVolume);
        }
        compare(
            company,
            source,
            Target::Volatility,
            frame,
            &[vars::G, vars::B, vars::V],
            mode,
        )
    } else {
        compare(
            company,
            source,
            Target::Volatility,
            frame,
            &[vars::G, vars::B],
            mode,
        )
    }
}

fn f64_of<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Human-readable tables: error reduction per company and source, then the M1
/// coefficient estimates with significance stars.
pub fn comparison_report<T: Scalar>(comparisons: &[ModelComparison<T>]) -> String {
    let mut out = String::new();
    for target in [Target::Return, Target::Volatility] {
        improvement_table(&mut out, target, comparisons);
    }
    for target in [Target::Return, Target::Volatility] {
        coefficient_table(&mut out, target, comparisons);
    }
    out
}

fn improvement_table<T: Scalar>(
    out: &mut String,
    target: Target,
    comparisons: &[ModelComparison<T>],
) {
    writeln!(out, "Residual standard error improvement: {target}").unwrap();
    writeln!(out, "{:<24}{:>10}{:>10}", "Company", "NEWS", "TWITTER").unwrap();
    let mut rows: BTreeMap<&str, [Option<f64>; 2]> = BTreeMap::new();
    for c in comparisons.iter().filter(|c| c.target == target) {
        let slot = match c.source {
            Source::News => 0,
            Source::Twitter => 1,
        };
        rows.entry(&c.company).or_default()[slot] = Some(f64_of(c.rse_improvement_pct));
    }
    for (company, vals) in rows {
        let cell = |v: Option<f64>| v.map_or("N/A".to_string(), |x| format!("{x:.2}"));
        writeln!(
            out,
            "{:<24}{:>10}{:>10}",
            company,
            cell(vals[0]),
            cell(vals[1])
        )
        .unwrap();
    }
    out.push('\n');
}

fn coefficient_table<T: Scalar>(
    out: &mut String,
    target: Target,
    comparisons: &[ModelComparison<T>],
) {
    let selected: Vec<&ModelComparison<T>> =
        comparisons.iter().filter(|c| c.target == target).collect();
    if selected.is_empty() {
        return;
    }
    writeln!(out, "Sentiment-augmented regression coefficients: {target}").unwrap();
    let mut terms: Vec<&str> = Vec::new();
    for c in &selected {
        for n in c.m1.names() {
            if n != INTERCEPT && !terms.contains(&n.as_str()) {
                terms.push(n);
            }
        }
    }
    let mut columns: Vec<&ModelComparison<T>> = selected.clone();
    // Social feed first, as in the published layout.
    columns.sort_by(|a, b| b.source.cmp(&a.source).then(a.company.cmp(&b.company)));
    write!(out, "{:<12}", "").unwrap();
    for c in &columns {
        write!(
            out,
            "{:>18}",
            format!("{}:{}", c.source.as_str(), c.company)
        )
        .unwrap();
    }
    out.push('\n');
    for term in terms {
        write!(out, "{:<12}", term).unwrap();
        for c in &columns {
            let cell = match (c.m1.coefficient(term), c.m1.p_value(term)) {
                (Some(b), Some(p)) => format!("{}{}", sci(f64_of(b), 6), significance_code(p)),
                _ => "N/A".to_string(),
            };
            write!(out, "{:>18}", cell).unwrap();
        }
        out.push('\n');
    }
    out.push_str(
        "Significance codes: p-value < 0.01: ***, p-value < 0.05: **, p-value < 0.1: *\n\n",
    );
}

pub const COMPARISON_HEADER: &str =
    "source,company,target,mode,n_obs,rse_m0,rse_m1,score_m0,score_m1,improvement_pct,r2_m0,r2_m1";
pub const COEFFICIENT_HEADER: &str =
    "source,company,target,model,term,estimate,std_error,t_stat,p_value,code";

/// Machine-facing comparison rows, 17 significant digits.
pub fn comparisons_csv<T: Scalar>(comparisons: &[ModelComparison<T>]) -> String {
    let mut out = format!("{COMPARISON_HEADER}\n");
    for c in comparisons {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            c.source,
            csv_field(&c.company),
            c.target,
            c.mode.as_str(),
            c.m1.n_obs(),
            g17(f64_of(c.m0.rse())),
            g17(f64_of(c.m1.rse())),
            g17(f64_of(c.score_m0)),
            g17(f64_of(c.score_m1)),
            g17(f64_of(c.rse_improvement_pct)),
            g17(f64_of(c.m0.r_squared())),
            g17(f64_of(c.m1.r_squared())),
        )
        .unwrap();
    }
    out
}

pub fn coefficients_csv<T: Scalar>(comparisons: &[ModelComparison<T>]) -> String {
    let mut out = format!("{COEFFICIENT_HEADER}\n");
    for c in comparisons {
        for (model, fit) in [("M0", &c.m0), ("M1", &c.m1)] {
            for i in 0..fit.n_coefficients() {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    c.source,
                    csv_field(&c.company),
                    c.target,
                    model,
                    fit.names()[i],
                    g17(f64_of(fit.coefficients()[i])),
                    g17(f64_of(fit.coefficient_se()[i])),
                    g17(f64_of(fit.t_stats()[i])),
                    g17(f64_of(fit.p_values()[i])),
                    significance_code(fit.p_values()[i]),
                )
                .unwrap();
            }
        }
    }
    out
}

/// RFC 4180 quoting when needed.
pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
