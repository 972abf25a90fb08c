//! Natural cubic spline interpolation for the gust time series.

use crate::{Error, Result};

/// Cubic spline through `(t, v)` knots with zero second derivative at both ends.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    ts: Vec<f64>,
    vs: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(ts: &[f64], vs: &[f64]) -> Result<Self> {
        if ts.len() != vs.len() || ts.len() < 2 {
            return Err(Error::InvalidConfig(
                "spline needs at least two knots with matching values".into(),
            ));
        }
        if ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("spline knots must be strictly increasing".into()));
        }
        let n = ts.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Tridiagonal system for interior second derivatives, natural ends fixed at 0.
            let mut diag = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = ts[i] - ts[i - 1];
                let h1 = ts[i + 1] - ts[i];
                diag[i] = 2.0 * (h0 + h1);
                rhs[i] = 6.0 * ((vs[i + 1] - vs[i]) / h1 - (vs[i] - vs[i - 1]) / h0);
            }
            // Thomas sweep over indices 1..n-1.
            for i in 2..n - 1 {
                let h = ts[i] - ts[i - 1];
                let factor = h / diag[i - 1];
                diag[i] -= factor * h;
                rhs[i] -= factor * rhs[i - 1];
            }
            for i in (1..n - 1).rev() {
                let h = ts[i + 1] - ts[i];
                let upper = if i + 1 < n - 1 { h * m[i + 1] } else { 0.0 };
                m[i] = (rhs[i] - upper) / diag[i];
            }
        }
        Ok(CubicSpline { ts: ts.to_vec(), vs: vs.to_vec(), m })
    }

    /// Evaluates the spline; `t` must lie within the knot range.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.ts.len();
        let i = match self.ts.binary_search_by(|k| k.partial_cmp(&t).unwrap()) {
            Ok(idx) => return self.vs[idx],
            Err(idx) => idx.clamp(1, n - 1) - 1,
        };
        let (t0, t1) = (self.ts[i], self.ts[i + 1]);
        let h = t1 - t0;
        let a = (t1 - t) / h;
        let b = (t - t0) / h;
        a * self.vs[i]
            + b * self.vs[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn range(&self) -> (f64, f64) {
        (self.ts[0], *self.ts.last().unwrap())
    }
}
