use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Square;
use crate::measure::DiscreteMeasure;

/// Upper-density diagnostics of `|m|` at a point: masses of `Q_r(z)` over a decreasing
/// list of radii and the power law `K r^{1+α}` fitted to them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityFit {
    pub center: (f64, f64),
    /// `(r, |m|(Q_r(z)))` in the order the radii were given.
    pub samples: Vec<(f64, f64)>,
    /// Fitted exponent `α̂`; `+∞` when fewer than two masses are positive.
    pub alpha: f64,
    /// Smallest `K` with `mass ≤ K r^{1+α̂}` at every sampled radius.
    pub k: f64,
}

impl DensityFit {
    /// Exact check of `|m|(Q_r(z)) ≤ K r^{1+α}` at every sampled radius.
    pub fn is_member(&self, alpha: f64, k: f64) -> bool {
        self.samples
            .iter()
            .all(|&(r, mass)| mass <= k * r.powf(1.0 + alpha))
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let den = n * sxx - sx * sx;
    if den == 0.0 {
        return f64::NAN;
    }
    (n * sxy - sx * sy) / den
}

/// Fits the density of `|m|` around `z`. Needs at least four strictly decreasing radii
/// with every square inside the bounding rectangle of `m`.
pub fn density_fit(m: &DiscreteMeasure, z: (f64, f64), radii: &[f64]) -> Result<DensityFit> {
    if radii.len() < 4 {
        return Err(Error::precondition("density_fit", "need at least 4 radii"));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::precondition("density_fit", "radii must be positive and strictly decreasing"));
    }
    let b = m.bounds;
    let slack = 1e-12 * b.scale();
    let r0 = radii[0];
    if z.0 - r0 < b.t_min - slack
        || z.0 + r0 > b.t_max + slack
        || z.1 - r0 < b.x_min - slack
        || z.1 + r0 > b.x_max + slack
    {
        return Err(Error::precondition("density_fit", "largest square leaves the bounding rectangle"));
    }
    let abs = m.abs();
    let samples: Vec<(f64, f64)> = radii
        .iter()
        .map(|&r| (r, abs.square_mass(&Square { center: z, radius: r })))
        .collect();
    let positive: Vec<(f64, f64)> = samples.iter().copied().filter(|s| s.1 > 0.0).collect();
    if positive.len() < 2 {
        return Ok(DensityFit { center: z, samples, alpha: f64::INFINITY, k: 0.0 });
    }
    let alpha = log_log_slope(&positive) - 1.0;
    let k = samples
        .iter()
        .map(|&(r, mass)| mass / r.powf(1.0 + alpha))
        .fold(0.0, f64::max);
    Ok(DensityFit { center: z, samples, alpha, k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Rect;
    use crate::measure::{Atom, Segment};
    use approx::assert_relative_eq;

    const RADII: [f64; 5] = [0.25, 0.125, 0.0625, 0.03125, 0.015625];

    #[test]
    fn zero_measure_is_member_everywhere() {
        let fit = density_fit(&DiscreteMeasure::zero(Rect::unit()), (0.5, 0.5), &RADII).unwrap();
        assert_eq!(fit.alpha, f64::INFINITY);
        assert!(fit.is_member(10.0, 1e-9));
    }

    #[test]
    fn stationary_front_has_zero_exponent() {
        let s = Segment::new((0.0, 0.5), (1.0, 0.5), 2.0 / 3.0).unwrap();
        let m = DiscreteMeasure::new(Rect::unit(), vec![], vec![s]).unwrap();
        let fit = density_fit(&m, (0.5, 0.5), &RADII).unwrap();
        for &(r, mass) in &fit.samples {
            assert_relative_eq!(mass, 4.0 * r / 3.0, epsilon = 1e-15);
        }
        assert!(fit.alpha.abs() < 1e-12);
        assert!(!fit.is_member(0.1, 1.0));
    }

    #[test]
    fn constructed_power_law() {
        // atoms at distance just inside each radius so that mass(Q_r) = r^{3/2}
        let mut atoms = Vec::new();
        let mut prev = 0.0;
        for &r in RADII.iter().rev() {
            let target = r.powf(1.5);
            atoms.push(Atom { t: 0.5 + 0.99 * r, x: 0.5, weight: target - prev });
            prev = target;
        }
        let m = DiscreteMeasure::new(Rect::unit(), atoms, vec![]).unwrap();
        let fit = density_fit(&m, (0.5, 0.5), &RADII).unwrap();
        assert!((fit.alpha - 0.5).abs() < 0.05);
    }

    #[test]
    fn preconditions() {
        let m = DiscreteMeasure::zero(Rect::unit());
        assert!(density_fit(&m, (0.5, 0.5), &RADII[..3]).is_err());
        assert!(density_fit(&m, (0.1, 0.5), &RADII).is_err());
        assert!(density_fit(&m, (0.5, 0.5), &[0.1, 0.2, 0.05, 0.01]).is_err());
    }
}
