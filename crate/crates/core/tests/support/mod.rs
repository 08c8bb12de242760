//! Reference implementations used only by the integration and acceptance tests.
#![allow(dead_code, clippy::needless_range_loop, clippy::excessive_precision)]

use num::{BigRational, One, ToPrimitive, Zero};

/// Exact least-squares coefficients for the f64 data as given: the normal
/// equations are formed and solved in rational arithmetic.
pub fn rational_ols(columns: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = columns.len();
    let exact = |x: f64| BigRational::from_float(x).expect("finite input");
    let xs: Vec<Vec<BigRational>> = columns
        .iter()
        .map(|c| c.iter().map(|&v| exact(v)).collect())
        .collect();
    let ys: Vec<BigRational> = y.iter().map(|&v| exact(v)).collect();
    let dot = |a: &[BigRational], b: &[BigRational]| {
        a.iter()
            .zip(b)
            .fold(BigRational::zero(), |acc, (u, v)| acc + u * v)
    };
    // Augmented [X'X | X'y].
    let mut m: Vec<Vec<BigRational>> = (0..p)
        .map(|i| {
            let mut row: Vec<BigRational> = (0..p).map(|j| dot(&xs[i], &xs[j])).collect();
            row.push(dot(&xs[i], &ys));
            row
        })
        .collect();
    for col in 0..p {
        let pivot = (col..p)
            .find(|&r| !m[r][col].is_zero())
            .expect("full column rank");
        m.swap(col, pivot);
        let inv = BigRational::one() / m[col][col].clone();
        for j in col..=p {
            m[col][j] = &m[col][j] * &inv;
        }
        for r in 0..p {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for j in col..=p {
                    let delta = &f * &m[col][j];
                    m[r][j] -= delta;
                }
            }
        }
    }
    m.iter().map(|row| ratio_to_f64(&row[p])).collect()
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("representable")
}

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 7-point Gauss / 15-point Kronrod pair on `[a, b]`: (Kronrod value, error estimate).
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += GK_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod: the panel with the largest error
/// estimate is bisected until the summed estimate drops below `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let mut panels = vec![(a, b, gk15(f, a, b))];
    for _ in 0..5000 {
        let total: f64 = panels.iter().map(|p| p.2 .1).sum();
        if total <= tol {
            break;
        }
        let worst = (0..panels.len())
            .max_by(|&i, &j| panels[i].2 .1.total_cmp(&panels[j].2 .1))
            .unwrap();
        let (lo, hi, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        panels.push((lo, mid, gk15(f, lo, mid)));
        panels.push((mid, hi, gk15(f, mid, hi)));
    }
    // Summing from the smallest contributions keeps the roundoff low.
    let mut values: Vec<f64> = panels.iter().map(|p| p.2 .0).collect();
    values.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    values.iter().sum()
}

/// F(d1, d2) CDF by direct quadrature of the density. The substitution
/// `x = s^2` removes the `x^(-1/2)` singularity at the origin when `d1 = 1`.
pub fn f_cdf_quadrature(x: f64, d1: f64, d2: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    use statrs::function::gamma::ln_gamma;
    let ln_b = ln_gamma(d1 / 2.0) + ln_gamma(d2 / 2.0) - ln_gamma((d1 + d2) / 2.0);
    let ln_c = 0.5 * d1 * d1.ln() + 0.5 * d2 * d2.ln() - ln_b;
    let integrand = move |s: f64| {
        if s <= 0.0 {
            return if d1 == 1.0 {
                2.0 * (ln_c - 0.5 * (d1 + d2) * d2.ln()).exp()
            } else {
                0.0
            };
        }
        let power = if d1 == 1.0 { 0.0 } else { (d1 - 1.0) * s.ln() };
        2.0 * (ln_c + power - 0.5 * (d1 + d2) * (d2 + d1 * s * s).ln()).exp()
    };
    integrate(&integrand, 0.0, x.sqrt(), 1e-13).min(1.0)
}

/// Deterministic standard normals for test data (xorshift64* + Box-Muller).
pub struct Normals(u64);

impl Normals {
    pub fn new(seed: u64) -> Self {
        Normals(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
    }

    pub fn uniform(&mut self) -> f64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        let x = self.0.wrapping_mul(0x2545_F491_4F6C_DD1D);
        ((x >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    pub fn next(&mut self) -> f64 {
        let (u, v) = (self.uniform(), self.uniform());
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    }

    pub fn vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next()).collect()
    }
}
