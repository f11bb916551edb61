use crate::solution::Front;

use super::EntropyPair;

/// Kinetic defect of a single front, as a profile in the velocity variable `v`.
///
/// With `m(v) = sgn(u_r − u_l)·(v − u_l)(u_r − v)/2` on the state interval, the
/// production density of the front for any entropy is `∫ η″(v) m(v) dv`. On an
/// entropic shock `m ≤ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticProfile {
    pub front: Front,
    pub v_grid: Vec<f64>,
    pub m_values: Vec<f64>,
}

const PROFILE_POINTS: usize = 129;

// five-point Gauss-Legendre rule on [-1, 1]
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    128.0 / 225.0,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

impl KineticProfile {
    fn bounds(&self) -> (f64, f64) {
        let (a, b) = (self.front.left_state, self.front.right_state);
        (a.min(b), a.max(b))
    }

    /// Closed-form `m(v)`, zero outside the state interval.
    pub fn m_at(&self, v: f64) -> f64 {
        let (a, b) = (self.front.left_state, self.front.right_state);
        let (lo, hi) = self.bounds();
        if v <= lo || v >= hi {
            return 0.0;
        }
        (b - a).signum() * (v - a) * (b - v) * 0.5
    }

    /// `∫ η″(v) m(v) dv` by composite Gauss-Legendre quadrature.
    pub fn integrate_entropy(&self, pair: &EntropyPair) -> f64 {
        self.integrate(|v| pair.d2_eta(v) * self.m_at(v))
    }

    /// `∫ |m(v)| dv`, the contribution of the front to `ν`.
    pub fn total_variation(&self) -> f64 {
        self.integrate(|v| self.m_at(v).abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.m_values.iter().fold(0.0_f64, |acc, m| acc.max(m.abs()))
    }

    fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let (lo, hi) = self.bounds();
        let panels = 32;
        let h = (hi - lo) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let mid = lo + (p as f64 + 0.5) * h;
            let part: f64 = GL_NODES
                .iter()
                .zip(GL_WEIGHTS)
                .map(|(&s, w)| w * f(mid + 0.5 * h * s))
                .sum();
            total += 0.5 * h * part;
        }
        total
    }
}

/// Kinetic profile of a front sampled on a uniform `v` grid over its state interval.
pub fn kinetic_measure(front: &Front) -> KineticProfile {
    let (a, b) = (front.left_state, front.right_state);
    let (lo, hi) = (a.min(b), a.max(b));
    let mut p = KineticProfile { front: *front, v_grid: Vec::new(), m_values: Vec::new() };
    p.v_grid = (0..PROFILE_POINTS)
        .map(|k| {
            if k + 1 == PROFILE_POINTS {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (PROFILE_POINTS - 1) as f64
            }
        })
        .collect();
    p.m_values = p.v_grid.iter().map(|&v| p.m_at(v)).collect();
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn front(a: f64, b: f64) -> Front {
        Front::new(0.0, 1.0, 0.0, a, b).unwrap()
    }

    #[test]
    fn entropic_shock_profile_is_nonpositive() {
        let p = kinetic_measure(&front(1.0, -1.0));
        for (&v, &m) in p.v_grid.iter().zip(&p.m_values) {
            assert_relative_eq!(m, (v * v - 1.0) / 2.0, epsilon = 1e-15);
            assert!(m <= 0.0);
        }
        assert_eq!(p.m_values[0], 0.0);
        assert_eq!(*p.m_values.last().unwrap(), 0.0);
        assert_relative_eq!(p.integrate_entropy(&EntropyPair::quadratic()), -2.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn expansive_jump_profile() {
        let p = kinetic_measure(&front(-1.0, 1.0));
        assert_relative_eq!(p.m_at(0.5), 0.375, epsilon = 1e-15);
        assert_relative_eq!(p.integrate_entropy(&EntropyPair::quadratic()), 2.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn small_jumps_have_small_profiles() {
        for d in [0.1, 0.01, 0.001] {
            let p = kinetic_measure(&front(0.3, 0.3 + d));
            assert_relative_eq!(p.max_abs(), d * d / 8.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn quartic_moment_matches_chain_rule() {
        let f = front(0.7, -0.4);
        let q = EntropyPair::quartic();
        let p = kinetic_measure(&f);
        assert_relative_eq!(p.integrate_entropy(&q), q.jump_production(0.7, -0.4), epsilon = 1e-12);
    }
}
