use crate::error::{Error, Result};

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson slopes with
/// the weighted harmonic mean of neighbouring secants). Outside the knot range it
/// continues linearly with the end slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::Parse("a table needs at least two (v, eta) rows".into()));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::Parse("table entries must be finite".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parse("table abscissae must be strictly increasing".into()));
        }
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d = vec![del[0]; 2];
        } else {
            for k in 1..n - 1 {
                if del[k - 1] * del[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
                }
            }
            d[0] = end_slope(h[0], h[1], del[0], del[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
        }
        Ok(MonotoneCubic { x, y, d })
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn locate(&self, u: f64) -> usize {
        match self.x.binary_search_by(|v| v.total_cmp(&u)) {
            Ok(k) => k.min(self.x.len() - 2),
            Err(k) => k.clamp(1, self.x.len() - 1) - 1,
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.hermite_with(u, &self.y, &self.d)
    }

    pub fn derivative(&self, u: f64) -> f64 {
        let (lo, hi) = self.range();
        let n = self.x.len();
        if u <= lo {
            return self.d[0];
        }
        if u >= hi {
            return self.d[n - 1];
        }
        let k = self.locate(u);
        let h = self.x[k + 1] - self.x[k];
        let s = (u - self.x[k]) / h;
        let (y0, y1, d0, d1) = (self.y[k], self.y[k + 1], self.d[k], self.d[k + 1]);
        let dh00 = 6.0 * s * s - 6.0 * s;
        let dh10 = 3.0 * s * s - 4.0 * s + 1.0;
        let dh01 = -dh00;
        let dh11 = 3.0 * s * s - 2.0 * s;
        (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1
    }

    pub fn second_derivative(&self, u: f64) -> f64 {
        let (lo, hi) = self.range();
        if u < lo || u > hi {
            return 0.0;
        }
        let k = self.locate(u);
        let h = self.x[k + 1] - self.x[k];
        let s = (u - self.x[k]) / h;
        let (y0, y1, d0, d1) = (self.y[k], self.y[k + 1], self.d[k], self.d[k + 1]);
        let a = 12.0 * s - 6.0;
        let b = 6.0 * s - 4.0;
        let c = 6.0 * s - 2.0;
        (a * (y0 - y1) / h + b * d0 + c * d1) / h
    }

    /// Cubic Hermite interpolation on the same knots with other knot values and a
    /// derivative given as a function.
    pub fn hermite(&self, u: f64, values: &[f64], deriv: impl Fn(f64) -> f64) -> f64 {
        let (lo, hi) = self.range();
        let n = self.x.len();
        if u <= lo {
            return values[0] + deriv(lo) * (u - lo);
        }
        if u >= hi {
            return values[n - 1] + deriv(hi) * (u - hi);
        }
        let k = self.locate(u);
        let (x0, x1) = (self.x[k], self.x[k + 1]);
        cubic(x0, x1, values[k], values[k + 1], deriv(x0), deriv(x1), u)
    }

    fn hermite_with(&self, u: f64, y: &[f64], d: &[f64]) -> f64 {
        let (lo, hi) = self.range();
        let n = self.x.len();
        if u <= lo {
            return y[0] + d[0] * (u - lo);
        }
        if u >= hi {
            return y[n - 1] + d[n - 1] * (u - hi);
        }
        let k = self.locate(u);
        cubic(self.x[k], self.x[k + 1], y[k], y[k + 1], d[k], d[k + 1], u)
    }
}

fn cubic(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, u: f64) -> f64 {
    let h = x1 - x0;
    let s = (u - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h * h10 * d0 + h01 * y1 + h * h11 * d1
}

/// Three-point end slope, limited so the end interval stays shape-preserving.
fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d * del0 <= 0.0 {
        0.0
    } else if del0 * del1 <= 0.0 && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}
