//! Exact weak solutions built from constant states, shock fronts and centred fans.

mod residual;
mod riemann;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Rect, ScalarField};
use crate::par;

pub use residual::weak_residual;
pub use riemann::{front_tracking, riemann_solution, shock_speed, TrackingOptions};

/// How an increasing Riemann datum `u_l < u_r` is resolved. Decreasing data always
/// produce a shock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Rarefaction fan (the entropy solution).
    Entropic,
    /// Kept as a jump, like [`Policy::KeepJump`].
    AntiEntropic,
    /// Kept as a non-entropic jump.
    KeepJump,
}

impl Policy {
    pub fn keeps_increasing_jumps(self) -> bool {
        !matches!(self, Policy::Entropic)
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "entropic" => Ok(Policy::Entropic),
            "anti_entropic" => Ok(Policy::AntiEntropic),
            "keep_jump" => Ok(Policy::KeepJump),
            other => Err(Error::Parse(format!("unknown policy {other:?}"))),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Entropic => "entropic",
            Policy::AntiEntropic => "anti_entropic",
            Policy::KeepJump => "keep_jump",
        })
    }
}

/// Straight discontinuity `x(t) = x_start + speed·(t − t_start)` for `t ∈ [t_start, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Front {
    pub t_start: f64,
    pub t_end: f64,
    pub x_start: f64,
    pub speed: f64,
    pub left_state: f64,
    pub right_state: f64,
}

impl Front {
    pub fn new(t_start: f64, t_end: f64, x_start: f64, left_state: f64, right_state: f64) -> Result<Self> {
        let speed = shock_speed(left_state, right_state)?;
        if !(t_end > t_start) {
            return Err(Error::InvalidField(format!(
                "front must have t_end > t_start, got [{t_start}, {t_end}]"
            )));
        }
        Ok(Front { t_start, t_end, x_start, speed, left_state, right_state })
    }

    #[inline]
    pub fn x_at(&self, t: f64) -> f64 {
        self.x_start + self.speed * (t - self.t_start)
    }

    pub fn x_end(&self) -> f64 {
        self.x_at(self.t_end)
    }

    pub fn jump(&self) -> f64 {
        self.right_state - self.left_state
    }

    /// Lax-admissible, i.e. a compressive jump.
    pub fn is_entropic(&self) -> bool {
        self.left_state > self.right_state
    }
}

/// Centred rarefaction `u = clamp((x − x_c)/(t − t_c), u_l, u_r)` inside its wedge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fan {
    pub center: (f64, f64),
    pub t_start: f64,
    pub t_end: f64,
    pub u_l: f64,
    pub u_r: f64,
}

impl Fan {
    fn edges(&self, t: f64) -> (f64, f64) {
        let dt = t - self.center.0;
        (self.center.1 + self.u_l * dt, self.center.1 + self.u_r * dt)
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        let dt = t - self.center.0;
        if dt <= 0.0 {
            return 0.5 * (self.u_l + self.u_r);
        }
        ((x - self.center.1) / dt).clamp(self.u_l, self.u_r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Wave {
    Front(Front),
    Fan(Fan),
}

impl Wave {
    fn t_span(&self) -> (f64, f64) {
        match self {
            Wave::Front(f) => (f.t_start, f.t_end),
            Wave::Fan(f) => (f.t_start, f.t_end),
        }
    }

    fn left_state(&self) -> f64 {
        match self {
            Wave::Front(f) => f.left_state,
            Wave::Fan(f) => f.u_l,
        }
    }

    fn right_state(&self) -> f64 {
        match self {
            Wave::Front(f) => f.right_state,
            Wave::Fan(f) => f.u_r,
        }
    }

    fn left_edge(&self, t: f64) -> f64 {
        match self {
            Wave::Front(f) => f.x_at(t),
            Wave::Fan(f) => f.edges(t).0,
        }
    }

    fn order_key(&self, t: f64) -> (f64, f64) {
        match self {
            Wave::Front(f) => (f.x_at(t), f.speed),
            Wave::Fan(f) => (f.edges(t).0, f.u_l),
        }
    }
}

/// Exact weak solution on a space-time rectangle. Left of every wave the solution
/// equals `far_left`; crossing a wave switches to its right state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseSolution {
    pub domain: Rect,
    pub far_left: f64,
    pub waves: Vec<Wave>,
}

impl PiecewiseSolution {
    pub fn constant(domain: Rect, c: f64) -> Self {
        PiecewiseSolution { domain, far_left: c, waves: Vec::new() }
    }

    pub fn fronts(&self) -> impl Iterator<Item = &Front> {
        self.waves.iter().filter_map(|w| match w {
            Wave::Front(f) => Some(f),
            Wave::Fan(_) => None,
        })
    }

    pub fn fans(&self) -> impl Iterator<Item = &Fan> {
        self.waves.iter().filter_map(|w| match w {
            Wave::Fan(f) => Some(f),
            Wave::Front(_) => None,
        })
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.fans().next().is_none()
    }

    /// Largest `|u|` attained by any state.
    pub fn sup_norm(&self) -> f64 {
        self.waves
            .iter()
            .flat_map(|w| [w.left_state().abs(), w.right_state().abs()])
            .fold(self.far_left.abs(), f64::max)
    }

    fn tolerance(&self) -> f64 {
        1e-12 * self.domain.scale()
    }

    fn active_at(&self, t: f64) -> Vec<&Wave> {
        let horizon = self.domain.t_max;
        let mut active: Vec<&Wave> = self
            .waves
            .iter()
            .filter(|w| {
                let (a, b) = w.t_span();
                t >= a && (t < b || (b >= horizon && t <= b))
            })
            .collect();
        // waves never cross while both exist, so the order in the middle of their common
        // lifetime is the order at t, and stays exact when t is a collision time
        active.sort_by(|a, b| {
            let (a0, a1) = a.t_span();
            let (b0, b1) = b.t_span();
            let mid = 0.5 * (a0.max(b0) + a1.min(b1));
            let (ka, kb) = (a.order_key(mid), b.order_key(mid));
            ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
        });
        active
    }

    fn eval_sorted(&self, active: &[&Wave], t: f64, x: f64, tol: f64) -> f64 {
        let mut state = self.far_left;
        let mut k = 0;
        while k < active.len() {
            let w = active[k];
            let edge = w.left_edge(t);
            if x < edge - tol {
                return state;
            }
            match w {
                Wave::Front(_) => {
                    if (x - edge).abs() <= tol {
                        // several fronts may pass through the same point
                        let mut right = w.right_state();
                        let mut m = k + 1;
                        while m < active.len() {
                            match active[m] {
                                Wave::Front(g) if (g.x_at(t) - edge).abs() <= tol => {
                                    right = g.right_state;
                                    m += 1;
                                }
                                _ => break,
                            }
                        }
                        return 0.5 * (state + right);
                    }
                    state = w.right_state();
                }
                Wave::Fan(f) => {
                    let (_, hi) = f.edges(t);
                    if x <= hi + tol {
                        return f.value(t, x);
                    }
                    state = f.u_r;
                }
            }
            k += 1;
        }
        state
    }

    /// Pointwise value; on a front the average of the two traces.
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        let active = self.active_at(t);
        self.eval_sorted(&active, t, x, self.tolerance())
    }

    /// Samples the solution at the nodes of `spec`, which must lie inside the domain.
    pub fn sample(&self, spec: &GridSpec) -> Result<ScalarField> {
        spec.validate()?;
        let slack = 1e-12 * self.domain.scale();
        let d = self.domain;
        let r = spec.rect();
        if r.t_min < d.t_min - slack
            || r.t_max > d.t_max + slack
            || r.x_min < d.x_min - slack
            || r.x_max > d.x_max + slack
        {
            return Err(Error::precondition("sample_field", "grid rectangle leaves the solution domain"));
        }
        let tol = self.tolerance();
        let mut values = vec![0.0; spec.len()];
        par::fill_rows(&mut values, spec.nx, |j, row| {
            let t = spec.t(j);
            let active = self.active_at(t);
            for (i, v) in row.iter_mut().enumerate() {
                *v = self.eval_sorted(&active, t, spec.x(i), tol);
            }
        });
        ScalarField::new(*spec, values)
    }

    /// Translates and dilates space-time by `p ↦ to.min + factor·(p − from.min)`.
    pub fn map_frame(&self, map: &crate::grid::FrameMap) -> PiecewiseSolution {
        let k = map.factor;
        let waves = self
            .waves
            .iter()
            .map(|w| match *w {
                Wave::Front(f) => {
                    let (t0, x0) = map.point(f.t_start, f.x_start);
                    let (t1, _) = map.point(f.t_end, f.x_start);
                    Wave::Front(Front { t_start: t0, t_end: t1, x_start: x0, ..f })
                }
                Wave::Fan(f) => {
                    let center = map.point(f.center.0, f.center.1);
                    let t0 = map.to.t_min + (f.t_start - map.from.t_min) * k;
                    let t1 = map.to.t_min + (f.t_end - map.from.t_min) * k;
                    Wave::Fan(Fan { center, t_start: t0, t_end: t1, ..f })
                }
            })
            .collect();
        PiecewiseSolution { domain: map.to, far_left: self.far_left, waves }
    }
}

/// Samples `sol` on `spec`.
pub fn sample_field(sol: &PiecewiseSolution, spec: &GridSpec) -> Result<ScalarField> {
    sol.sample(spec)
}

/// Largest difference quotient `(u(t,x) − u(t,y))/(x − y)` over node pairs `x > y` of
/// row `j` at least `min_gap` cells apart.
pub fn max_upward_slope(field: &ScalarField, j: usize, min_gap: usize) -> f64 {
    let spec = field.spec();
    let row = field.row(j);
    let gap = min_gap.max(1);
    let mut best = f64::NEG_INFINITY;
    for a in 0..spec.nx {
        for b in (a + gap)..spec.nx {
            let q = (row[b] - row[a]) / (spec.x(b) - spec.x(a));
            best = best.max(q);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FrameMap;
    use approx::assert_relative_eq;

    #[test]
    fn converging_fronts_keep_their_order_at_the_collision_row() {
        let sol = front_tracking(&[1.0, 0.0, 0.4], &[0.2, 0.4], Policy::KeepJump, Rect::unit(), TrackingOptions::default())
            .unwrap();
        // row 170 of a 256-node grid lies just below the computed collision time, where
        // both fronts sit at 8/15
        let t = GridSpec::unit(256).unwrap().t(170);
        assert!(sol.fronts().all(|f| f.t_start == 0.0 && t < f.t_end || f.t_start > t));
        assert_eq!(sol.eval(t, 0.6), 0.4);
        assert_eq!(sol.eval(t, 0.5), 1.0);
        assert_relative_eq!(sol.eval(t, 136.0 / 255.0), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn policy_parses() {
        assert_eq!("keep_jump".parse::<Policy>().unwrap(), Policy::KeepJump);
        assert_eq!("entropic".parse::<Policy>().unwrap(), Policy::Entropic);
        assert!("sideways".parse::<Policy>().is_err());
        assert_eq!(Policy::AntiEntropic.to_string(), "anti_entropic");
    }

    #[test]
    fn constant_samples_constant() {
        let sol = PiecewiseSolution::constant(Rect::unit(), 0.3);
        let f = sol.sample(&GridSpec::unit(9).unwrap()).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.3));
    }

    #[test]
    fn node_on_front_takes_trace_average() {
        let sol = riemann_solution(-1.0, 1.0, Policy::KeepJump, (0.0, 0.0), Rect::new(0.0, 1.0, -1.0, 1.0)).unwrap();
        let f = sol.sample(&GridSpec::new(Rect::new(0.0, 1.0, -1.0, 1.0), 5, 5).unwrap()).unwrap();
        assert_eq!(f.get(2, 2), 0.0);
        assert_eq!(f.get(2, 1), -1.0);
        assert_eq!(f.get(2, 3), 1.0);
    }

    #[test]
    fn fan_formula_at_sample_point() {
        let sol = riemann_solution(-1.0, 1.0, Policy::Entropic, (0.0, 0.0), Rect::new(0.0, 3.0, -3.0, 3.0)).unwrap();
        assert_relative_eq!(sol.eval(2.0, 1.0), 0.5);
        assert_eq!(sol.eval(2.0, -2.5), -1.0);
        assert_eq!(sol.eval(2.0, 2.5), 1.0);
    }

    #[test]
    fn sampling_outside_domain_is_rejected() {
        let sol = PiecewiseSolution::constant(Rect::unit(), 1.0);
        assert!(sol.sample(&GridSpec::centered(5).unwrap()).is_err());
    }

    #[test]
    fn frame_map_moves_fronts() {
        let sol = riemann_solution(1.0, -1.0, Policy::Entropic, (0.0, 0.5), Rect::unit()).unwrap();
        let map = FrameMap::between(Rect::unit(), Rect::centered()).unwrap();
        let big = sol.map_frame(&map);
        assert_eq!(big.eval(0.0, -0.5), 1.0);
        assert_eq!(big.eval(0.0, 0.5), -1.0);
        assert_eq!(big.eval(0.0, 0.0), 0.0);
    }

    #[test]
    fn upward_slope_of_increasing_jump_scales_with_gap() {
        let g = GridSpec::unit(65).unwrap();
        let u = ScalarField::from_fn(g, |_, x| if x < 0.5 { -1.0 } else { 1.0 }).unwrap();
        let s = max_upward_slope(&u, 10, 4);
        // the closest admissible pair straddles the jump at distance 4·dx
        assert_relative_eq!(s, 2.0 / (4.0 * g.dx()), max_relative = 1e-12);
    }
}
