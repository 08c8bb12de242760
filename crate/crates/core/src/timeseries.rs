//! Dated series, calendar alignment, standardization and lagged design matrices.

use std::collections::HashSet;
use std::fmt::Write as _;

use chrono::NaiveDate;
use thiserror::Error;

use crate::numfmt::g17;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("no common dates across the input series")]
    EmptyIntersection,
    #[error("nothing to align")]
    NoSeries,
    #[error("series `{0}` dates are not strictly increasing")]
    Unsorted(String),
    #[error("series `{name}` has {dates} dates but {values} values")]
    LengthMismatch {
        name: String,
        dates: usize,
        values: usize,
    },
    #[error("column has zero variance")]
    ZeroVariance,
    #[error("need at least {need} observations, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("lag {lag} is not below the frame length {len}")]
    LagTooLarge { lag: usize, len: usize },
    #[error("regressor `{0}` is constant")]
    ConstantRegressor(String),
    #[error("{rows} rows cannot identify {cols} coefficients")]
    Underdetermined { rows: usize, cols: usize },
}

pub type Result<T> = std::result::Result<T, SeriesError>;

/// Values indexed by strictly increasing dates.
#[derive(Debug, Clone, PartialEq)]
pub struct DatedSeries<T> {
    dates: Vec<NaiveDate>,
    values: Vec<T>,
}

impl<T: Scalar> DatedSeries<T> {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<T>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(SeriesError::LengthMismatch {
                name: String::new(),
                dates: dates.len(),
                values: values.len(),
            });
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SeriesError::Unsorted(String::new()));
        }
        Ok(DatedSeries { dates, values })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (NaiveDate, T)>) -> Result<Self> {
        let (dates, values) = pairs.into_iter().unzip();
        Self::new(dates, values)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, T)> + '_ {
        self.dates.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, date: NaiveDate) -> Option<T> {
        self.dates.binary_search(&date).ok().map(|i| self.values[i])
    }
}

/// Equal-length named columns on a common, strictly increasing date index.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedFrame<T> {
    dates: Vec<NaiveDate>,
    names: Vec<String>,
    columns: Vec<Vec<T>>,
}

impl<T: Scalar> AlignedFrame<T> {
    /// Frame from explicit columns on a strictly increasing date index.
    pub fn from_columns(dates: Vec<NaiveDate>, columns: Vec<(String, Vec<T>)>) -> Result<Self> {
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SeriesError::Unsorted("frame".into()));
        }
        let mut seen = HashSet::new();
        for (name, col) in &columns {
            if !seen.insert(name.as_str()) {
                return Err(SeriesError::DuplicateColumn(name.clone()));
            }
            if col.len() != dates.len() {
                return Err(SeriesError::LengthMismatch {
                    name: name.clone(),
                    dates: dates.len(),
                    values: col.len(),
                });
            }
        }
        let (names, columns) = columns.into_iter().unzip();
        Ok(AlignedFrame {
            dates,
            names,
            columns,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Result<&[T]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| SeriesError::UnknownColumn(name.to_string()))
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }

    /// Frame with every column standardized on this frame's sample.
    pub fn standardized(&self) -> Result<Self> {
        let columns = self
            .columns
            .iter()
            .map(|c| standardize(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(AlignedFrame {
            dates: self.dates.clone(),
            names: self.names.clone(),
            columns,
        })
    }

    /// Sub-frame holding only `names`, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<Self> {
        let columns = names
            .iter()
            .map(|n| self.column(n).map(|c| c.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(AlignedFrame {
            dates: self.dates.clone(),
            names: names.iter().map(|n| n.to_string()).collect(),
            columns,
        })
    }

    /// `date,<col1>,<col2>,...` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (i, d) in self.dates.iter().enumerate() {
            write!(out, "{}", d.format("%Y-%m-%d")).unwrap();
            for c in &self.columns {
                out.push(',');
                out.push_str(&g17(c[i].to_f64().unwrap_or(f64::NAN)));
            }
            out.push('\n');
        }
        out
    }
}

/// Inner join on dates. Column order follows the input order.
pub fn align<T: Scalar, S: AsRef<str>>(series: &[(S, &DatedSeries<T>)]) -> Result<AlignedFrame<T>> {
    if series.is_empty() {
        return Err(SeriesError::NoSeries);
    }
    let mut seen = HashSet::new();
    for (name, _) in series {
        if !seen.insert(name.as_ref()) {
            return Err(SeriesError::DuplicateColumn(name.as_ref().to_string()));
        }
    }
    let mut common: Vec<NaiveDate> = series[0].1.dates.clone();
    for (_, s) in &series[1..] {
        let keep: HashSet<NaiveDate> = s.dates.iter().copied().collect();
        common.retain(|d| keep.contains(d));
    }
    if common.is_empty() {
        return Err(SeriesError::EmptyIntersection);
    }
    let columns = series
        .iter()
        .map(|(_, s)| {
            common
                .iter()
                .map(|d| s.get(*d).expect("date in intersection"))
                .collect()
        })
        .collect();
    Ok(AlignedFrame {
        dates: common,
        names: series.iter().map(|(n, _)| n.as_ref().to_string()).collect(),
        columns,
    })
}

/// Sample mean and `(n - 1)`-denominator standard deviation.
pub fn mean_sd<T: Scalar>(x: &[T]) -> Result<(T, T)> {
    if x.len() < 2 {
        return Err(SeriesError::TooShort {
            need: 2,
            got: x.len(),
        });
    }
    let n = T::from_count(x.len());
    let mean = x.iter().copied().sum::<T>() / n;
    let ss: T = x.iter().map(|&v| (v - mean) * (v - mean)).sum();
    Ok((mean, (ss / (n - T::one())).sqrt()))
}

/// Rescales to zero mean and unit sample standard deviation.
pub fn standardize<T: Scalar>(column: &[T]) -> Result<Vec<T>> {
    let (mean, sd) = mean_sd(column)?;
    let scale = column
        .iter()
        .fold(T::zero(), |m, v| m.max(v.abs()))
        .max(T::min_positive_value());
    if !(sd > scale * T::epsilon() * T::lit(16.0)) {
        return Err(SeriesError::ZeroVariance);
    }
    let centered: Vec<T> = column.iter().map(|&v| v - mean).collect();
    // Second centering pass removes the rounding residue of the first mean.
    let n = T::from_count(column.len());
    let resid = centered.iter().copied().sum::<T>() / n;
    Ok(centered.into_iter().map(|v| (v - resid) / sd).collect())
}

pub const INTERCEPT: &str = "intercept";

/// Name of the lag-`lag` regressor built from `column`.
pub fn lag_name(column: &str, lag: usize) -> String {
    format!("{column}_lag{lag}")
}

/// Response vector plus named regressor columns (intercept first).
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix<T> {
    response: Vec<T>,
    names: Vec<String>,
    columns: Vec<Vec<T>>,
    lag_spec: Vec<(String, Vec<usize>)>,
    dates: Vec<NaiveDate>,
}

impl<T: Scalar> DesignMatrix<T> {
    /// Builds a design from explicit columns; only shapes are checked.
    pub fn new(response: Vec<T>, regressors: Vec<(String, Vec<T>)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (name, col) in &regressors {
            if !seen.insert(name.as_str()) {
                return Err(SeriesError::DuplicateColumn(name.clone()));
            }
            if col.len() != response.len() {
                return Err(SeriesError::LengthMismatch {
                    name: name.clone(),
                    dates: response.len(),
                    values: col.len(),
                });
            }
        }
        let (names, columns) = regressors.into_iter().unzip();
        Ok(DesignMatrix {
            response,
            names,
            columns,
            lag_spec: Vec::new(),
            dates: Vec::new(),
        })
    }

    pub fn response(&self) -> &[T] {
        &self.response
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<T>] {
        &self.columns
    }

    pub fn lag_spec(&self) -> &[(String, Vec<usize>)] {
        &self.lag_spec
    }

    /// Dates of the response rows (empty for hand-built designs).
    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn rows(&self) -> usize {
        self.response.len()
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    /// Design restricted to the row range `range`.
    pub fn slice_rows(&self, range: std::ops::Range<usize>) -> Self {
        DesignMatrix {
            response: self.response[range.clone()].to_vec(),
            names: self.names.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| c[range.clone()].to_vec())
                .collect(),
            lag_spec: self.lag_spec.clone(),
            dates: if self.dates.is_empty() {
                Vec::new()
            } else {
                self.dates[range].to_vec()
            },
        }
    }

    /// Regressor values of row `i`, in column order.
    pub fn row(&self, i: usize) -> Vec<T> {
        self.columns.iter().map(|c| c[i]).collect()
    }
}

/// Regresses `response` on an intercept plus the lags in `lag_spec`.
///
/// Every design built from one frame with the same overall maximum lag uses
/// the same response rows (`frame.len() - max_lag` of them); row `t` of the
/// lag-`τ` regressor holds the source value at `t - τ`.
pub fn lagged_design<T: Scalar>(
    frame: &AlignedFrame<T>,
    response: &str,
    lag_spec: &[(&str, Vec<usize>)],
) -> Result<DesignMatrix<T>> {
    let max_lag = lag_spec
        .iter()
        .flat_map(|(_, lags)| lags.iter().copied())
        .max()
        .unwrap_or(0);
    lagged_design_from(frame, response, lag_spec, max_lag)
}

/// As [`lagged_design`], truncating by `start` rows (at least the largest lag).
pub fn lagged_design_from<T: Scalar>(
    frame: &AlignedFrame<T>,
    response: &str,
    lag_spec: &[(&str, Vec<usize>)],
    start: usize,
) -> Result<DesignMatrix<T>> {
    let len = frame.len();
    let y = frame.column(response)?;
    let max_lag = lag_spec
        .iter()
        .flat_map(|(_, lags)| lags.iter().copied())
        .max()
        .unwrap_or(0)
        .max(start);
    if max_lag >= len {
        return Err(SeriesError::LagTooLarge { lag: max_lag, len });
    }
    let rows = len - max_lag;
    let mut regressors = vec![(INTERCEPT.to_string(), vec![T::one(); rows])];
    for (name, lags) in lag_spec {
        let src = frame.column(name)?;
        for &lag in lags {
            let col: Vec<T> = (max_lag..len).map(|t| src[t - lag]).collect();
            let cname = lag_name(name, lag);
            if col.iter().all(|&v| v == col[0]) {
                return Err(SeriesError::ConstantRegressor(cname));
            }
            regressors.push((cname, col));
        }
    }
    if rows <= regressors.len() {
        return Err(SeriesError::Underdetermined {
            rows,
            cols: regressors.len(),
        });
    }
    let mut design = DesignMatrix::new(y[max_lag..].to_vec(), regressors)?;
    design.lag_spec = lag_spec
        .iter()
        .map(|(n, l)| (n.to_string(), l.clone()))
        .collect();
    design.dates = frame.dates[max_lag..].to_vec();
    Ok(design)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(o: i64) -> NaiveDate {
        NaiveDate::from_ymd_opt(2014, 1, 1).unwrap() + chrono::Duration::days(o)
    }

    fn series(days: &[i64], vals: &[f64]) -> DatedSeries<f64> {
        DatedSeries::new(days.iter().map(|&o| d(o)).collect(), vals.to_vec()).unwrap()
    }

    #[test]
    fn align_identical_and_partial() {
        let a = series(&[1, 2, 3], &[1.0, 2.0, 3.0]);
        let b = series(&[1, 2, 3], &[4.0, 5.0, 6.0]);
        let f = align(&[("a", &a), ("b", &b)]).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.names(), ["a", "b"]);

        let c = series(&[2, 3, 4], &[7.0, 8.0, 9.0]);
        let f = align(&[("a", &a), ("c", &c)]).unwrap();
        assert_eq!(f.dates(), [d(2), d(3)]);
        assert_eq!(f.column("a").unwrap(), [2.0, 3.0]);
        assert_eq!(f.column("c").unwrap(), [7.0, 8.0]);

        let e = series(&[10, 11], &[0.0, 1.0]);
        assert_eq!(
            align(&[("a", &a), ("e", &e)]),
            Err(SeriesError::EmptyIntersection)
        );
        assert_eq!(align::<f64, &str>(&[]), Err(SeriesError::NoSeries));
    }

    #[test]
    fn series_must_be_sorted() {
        assert!(DatedSeries::new(vec![d(2), d(1)], vec![0.0, 1.0]).is_err());
        assert!(DatedSeries::new(vec![d(1), d(1)], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn standardize_examples() {
        assert_eq!(standardize(&[1.0, 2.0, 3.0]).unwrap(), [-1.0, 0.0, 1.0]);
        assert_eq!(
            standardize(&[5.0, 5.0, 5.0]),
            Err(SeriesError::ZeroVariance)
        );
        assert!(matches!(
            standardize(&[5.0]),
            Err(SeriesError::TooShort { .. })
        ));
    }

    #[test]
    fn lagged_shapes() {
        let y = series(&[0, 1, 2, 3, 4], &[1.0, 3.0, 2.0, 5.0, 4.0]);
        let f = align(&[("Y", &y)]).unwrap();
        let des = lagged_design(&f, "Y", &[("Y", vec![1])]).unwrap();
        assert_eq!(des.rows(), 4);
        assert_eq!(des.names(), ["intercept", "Y_lag1"]);
        assert_eq!(des.columns()[1], [1.0, 3.0, 2.0, 5.0]);
        assert_eq!(des.response(), [3.0, 2.0, 5.0, 4.0]);
        assert_eq!(
            lagged_design(&f, "Y", &[("Y", vec![10])]),
            Err(SeriesError::LagTooLarge { lag: 10, len: 5 })
        );
        assert_eq!(
            lagged_design(&f, "Y", &[("Z", vec![1])]),
            Err(SeriesError::UnknownColumn("Z".into()))
        );
    }

    #[test]
    fn return_model_regressors() {
        let days: Vec<i64> = (0..10).collect();
        let er = series(
            &days,
            &[0.1, -0.2, 0.3, 0.0, 0.5, -0.1, 0.2, 0.4, -0.3, 0.1],
        );
        let sr = series(
            &days,
            &[0.5, 0.1, -0.2, 0.9, 0.3, 0.0, -0.5, 0.2, 0.7, -0.1],
        );
        let f = align(&[("ER", &er), ("SR", &sr)]).unwrap();
        let des = lagged_design(&f, "ER", &[("ER", vec![1, 2]), ("SR", vec![1])]).unwrap();
        assert_eq!(des.names(), ["intercept", "ER_lag1", "ER_lag2", "SR_lag1"]);
        assert_eq!(des.rows(), 8);
        assert_eq!(des.columns()[3][0], 0.1);
        assert_eq!(des.dates()[0], d(2));
    }

    #[test]
    fn constant_regressor_rejected() {
        let c = series(&[0, 1, 2, 3, 4], &[1.0, 1.0, 1.0, 1.0, 2.0]);
        let y = series(&[0, 1, 2, 3, 4], &[1.0, 3.0, 2.0, 5.0, 4.0]);
        let f = align(&[("Y", &y), ("C", &c)]).unwrap();
        assert_eq!(
            lagged_design(&f, "Y", &[("C", vec![1])]),
            Err(SeriesError::ConstantRegressor("C_lag1".into()))
        );
    }

    fn arb_series() -> impl Strategy<Value = DatedSeries<f64>> {
        proptest::collection::btree_map(0i64..40, -100.0f64..100.0, 1..30)
            .prop_map(|m| DatedSeries::from_pairs(m.into_iter().map(|(k, v)| (d(k), v))).unwrap())
    }

    proptest! {
        #[test]
        fn standardize_moments(x in proptest::collection::vec(-1e3f64..1e3, 2..80)) {
            prop_assume!(mean_sd(&x).unwrap().1 > 1e-6);
            let z = standardize(&x).unwrap();
            let (m, s) = mean_sd(&z).unwrap();
            prop_assert!(m.abs() < 1e-12 * 1e3);
            prop_assert!((s - 1.0).abs() < 1e-12);
            let zz = standardize(&z).unwrap();
            for (a, b) in z.iter().zip(&zz) {
                prop_assert!((a - b).abs() < 1e-10);
            }
            let argmax = |v: &[f64]| v.iter().enumerate().fold(0, |best, (i, &val)| if val > v[best] { i } else { best });
            let argmin = |v: &[f64]| v.iter().enumerate().fold(0, |best, (i, &val)| if val < v[best] { i } else { best });
            prop_assert_eq!(argmax(&x), argmax(&z));
            prop_assert_eq!(argmin(&x), argmin(&z));
        }

        #[test]
        fn align_commutes_and_associates(a in arb_series(), b in arb_series(), c in arb_series()) {
            let ab = align(&[("a", &a), ("b", &b)]);
            let ba = align(&[("b", &b), ("a", &a)]);
            match (&ab, &ba) {
                (Ok(x), Ok(y)) => {
                    prop_assert_eq!(x.dates(), y.dates());
                    prop_assert_eq!(x.column("a").unwrap(), y.column("a").unwrap());
                    prop_assert_eq!(x.column("b").unwrap(), y.column("b").unwrap());
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "commutativity broke"),
            }
            let abc = align(&[("a", &a), ("b", &b), ("c", &c)]);
            let nested = ab.and_then(|f| {
                let fa = DatedSeries::new(f.dates().to_vec(), f.column("a").unwrap().to_vec()).unwrap();
                let fb = DatedSeries::new(f.dates().to_vec(), f.column("b").unwrap().to_vec()).unwrap();
                let bc = align(&[("b", &fb), ("c", &c)])?;
                let fbc = DatedSeries::new(bc.dates().to_vec(), bc.column("c").unwrap().to_vec()).unwrap();
                align(&[("a", &fa), ("b", &fb), ("c", &fbc)])
            });
            prop_assert_eq!(abc.ok(), nested.ok());
        }

        #[test]
        fn lagged_row_count(len in 4usize..40, lags in proptest::collection::vec(1usize..3, 1..3)) {
            let days: Vec<i64> = (0..len as i64).collect();
            let vals: Vec<f64> = (0..len).map(|i| ((i * 7919) % 13) as f64 + i as f64 * 0.1).collect();
            let s = series(&days, &vals);
            let f = align(&[("Y", &s)]).unwrap();
            let max = *lags.iter().max().unwrap();
            let mut uniq = lags.clone();
            uniq.sort();
            uniq.dedup();
            match lagged_design(&f, "Y", &[("Y", uniq.clone())]) {
                Ok(des) => prop_assert_eq!(des.rows(), len - max),
                Err(SeriesError::Underdetermined { rows, .. }) => prop_assert_eq!(rows, len - max),
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
