use crate::scalar::Scalar;
use crate::timeseries::DesignMatrix;

use super::special::t_sf_two_sided;
use super::StatError;

/// Fitted linear model with classical (homoskedastic) inference.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit<T> {
    names: Vec<String>,
    coefficients: Vec<T>,
    coefficient_se: Vec<T>,
    t_stats: Vec<T>,
    p_values: Vec<T>,
    response: Vec<T>,
    residuals: Vec<T>,
    rss: T,
    tss: T,
    dof: usize,
    rse: T,
}

impl<T: Scalar> OlsFit<T> {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub fn coefficient_se(&self) -> &[T] {
        &self.coefficient_se
    }

    pub fn t_stats(&self) -> &[T] {
        &self.t_stats
    }

    pub fn p_values(&self) -> &[T] {
        &self.p_values
    }

    /// The response the model was estimated on.
    pub fn response(&self) -> &[T] {
        &self.response
    }

    pub fn residuals(&self) -> &[T] {
        &self.residuals
    }

    pub fn rss(&self) -> T {
        self.rss
    }

    /// Residual degrees of freedom `T - p`.
    pub fn dof(&self) -> usize {
        self.dof
    }

    /// Residual standard error `sqrt(rss / dof)`.
    pub fn rse(&self) -> T {
        self.rse
    }

    pub fn n_obs(&self) -> usize {
        self.response.len()
    }

    pub fn n_coefficients(&self) -> usize {
        self.coefficients.len()
    }

    /// `1 - rss / tss` with the centered total sum of squares.
    pub fn r_squared(&self) -> T {
        if self.tss > T::zero() {
            T::one() - self.rss / self.tss
        } else {
            T::zero()
        }
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn coefficient(&self, name: &str) -> Option<T> {
        self.index_of(name).map(|i| self.coefficients[i])
    }

    pub fn se(&self, name: &str) -> Option<T> {
        self.index_of(name).map(|i| self.coefficient_se[i])
    }

    pub fn p_value(&self, name: &str) -> Option<T> {
        self.index_of(name).map(|i| self.p_values[i])
    }

    /// Linear prediction for one row of regressor values (design column order).
    pub fn predict(&self, row: &[T]) -> T {
        row.iter()
            .zip(&self.coefficients)
            .fold(T::zero(), |acc, (&x, &b)| acc + x * b)
    }
}

/// Householder reflector `I - 2 v vᵀ / (vᵀ v)` acting on rows `start..`.
struct Reflector<T> {
    start: usize,
    v: Vec<T>,
    vnorm2: T,
}

impl<T: Scalar> Reflector<T> {
    fn apply(&self, x: &mut [T]) {
        if self.vnorm2 == T::zero() {
            return;
        }
        let tail = &mut x[self.start..];
        let dot: T = self.v.iter().zip(tail.iter()).map(|(&a, &b)| a * b).sum();
        let scale = T::lit(2.0) * dot / self.vnorm2;
        for (xi, &vi) in tail.iter_mut().zip(&self.v) {
            *xi = *xi - scale * vi;
        }
    }
}

/// Least squares through a Householder QR factorization of the design.
///
/// A column whose norm after orthogonalization against the preceding columns
/// falls below [`Scalar::rank_tolerance`] times its original norm makes the
/// design rank deficient. Residuals are formed as `Q [0; (Qᵀy)₂]`, so they are
/// orthogonal to the design to working precision relative to their own norm.
pub fn ols_fit<T: Scalar>(design: &DesignMatrix<T>) -> Result<OlsFit<T>, StatError> {
    let n = design.rows();
    let p = design.cols();
    if p == 0 {
        return Err(StatError::EmptyDesign);
    }
    if n <= p {
        return Err(StatError::Underdetermined { rows: n, cols: p });
    }
    let tol = T::rank_tolerance();
    let mut a: Vec<Vec<T>> = design.columns().to_vec();
    let mut qty: Vec<T> = design.response().to_vec();
    let mut reflectors: Vec<Reflector<T>> = Vec::with_capacity(p);
    let mut diag = vec![T::zero(); p];

    for j in 0..p {
        let orig = norm(&design.columns()[j]);
        let s = norm(&a[j][j..]);
        if !(orig > T::zero()) || !(s > tol * orig) {
            return Err(StatError::RankDeficient {
                column: design.names()[j].clone(),
            });
        }
        let alpha = if a[j][j] > T::zero() { -s } else { s };
        let mut v: Vec<T> = a[j][j..].to_vec();
        v[0] = v[0] - alpha;
        let vnorm2: T = v.iter().map(|&x| x * x).sum();
        let h = Reflector {
            start: j,
            v,
            vnorm2,
        };
        for col in a.iter_mut().skip(j + 1) {
            h.apply(col);
        }
        h.apply(&mut qty);
        diag[j] = alpha;
        reflectors.push(h);
    }

    // R[i][k] = a[k][i] for i < k, R[j][j] = diag[j].
    let r = |i: usize, k: usize| if i == k { diag[k] } else { a[k][i] };
    let mut beta = vec![T::zero(); p];
    for i in (0..p).rev() {
        let mut acc = qty[i];
        for k in i + 1..p {
            acc = acc - r(i, k) * beta[k];
        }
        beta[i] = acc / r(i, i);
    }

    let mut residuals = qty.clone();
    residuals[..p].iter_mut().for_each(|v| *v = T::zero());
    for h in reflectors.iter().rev() {
        h.apply(&mut residuals);
    }
    let rss: T = residuals.iter().map(|&e| e * e).sum();
    let dof = n - p;
    let sigma2 = rss / T::from_count(dof);

    // diag((XᵀX)⁻¹) = row sums of squares of R⁻¹.
    let mut rinv = vec![vec![T::zero(); p]; p];
    for c in 0..p {
        for i in (0..=c).rev() {
            let mut acc = if i == c { T::one() } else { T::zero() };
            for k in i + 1..=c {
                acc = acc - r(i, k) * rinv[k][c];
            }
            rinv[i][c] = acc / r(i, i);
        }
    }
    let coefficient_se: Vec<T> = (0..p)
        .map(|i| {
            let s: T = rinv[i][i..].iter().map(|&v| v * v).sum();
            (sigma2 * s).sqrt()
        })
        .collect();
    let t_stats: Vec<T> = beta
        .iter()
        .zip(&coefficient_se)
        .map(|(&b, &se)| {
            if se > T::zero() {
                b / se
            } else if b == T::zero() {
                T::zero()
            } else {
                T::infinity() * b.signum()
            }
        })
        .collect();
    let p_values = t_stats.iter().map(|&t| t_sf_two_sided(t, dof)).collect();

    let y = design.response();
    let mean = y.iter().copied().sum::<T>() / T::from_count(n);
    let tss = y.iter().map(|&v| (v - mean) * (v - mean)).sum();

    Ok(OlsFit {
        names: design.names().to_vec(),
        coefficients: beta,
        coefficient_se,
        t_stats,
        p_values,
        response: y.to_vec(),
        residuals,
        rss,
        tss,
        dof,
        rse: sigma2.sqrt(),
    })
}

fn norm<T: Scalar>(x: &[T]) -> T {
    // Scaled to avoid overflow on large-magnitude columns.
    let scale = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if scale == T::zero() {
        return T::zero();
    }
    let ss: T = x.iter().map(|&v| (v / scale) * (v / scale)).sum();
    scale * ss.sqrt()
}
